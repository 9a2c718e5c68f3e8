//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::SpectralError;

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Converged when the off-diagonal Frobenius mass falls below this fraction of `‖S‖_F`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Relative symmetry defect accepted by [`sym_eig`].
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenvalues in ascending order with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigendecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

impl Eigendecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `V diag(g(λ)) V'` for a scalar spectral function `g`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> Array2<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
            col *= g(self.eigenvalues[k]);
        }
        let out = scaled.dot(&v.t());
        symmetrize(out)
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        self.reconstruct_with(|l| l)
    }

    /// Largest entry of `|V'V − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.t().dot(v);
        let mut worst = 0.0f64;
        for ((i, j), g) in gram.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
        worst
    }
}

pub(crate) fn frobenius(s: ArrayView2<f64>) -> f64 {
    s.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn inf_norm(s: ArrayView2<f64>) -> f64 {
    s.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn symmetrize(mut s: Array2<f64>) -> Array2<f64> {
    let n = s.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = avg;
            s[[j, i]] = avg;
        }
    }
    s
}

fn off_diagonal_mass(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += 2.0 * a[[i, j]] * a[[i, j]];
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is flipped so that its first
/// entry with magnitude above `1e-12` is positive, which makes repeated calls on the
/// same input bit-identical.
pub fn sym_eig(s: ArrayView2<f64>) -> Result<Eigendecomposition, SpectralError> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(SpectralError::NotSquare {
            rows: n,
            cols: s.ncols(),
        });
    }
    let norm = frobenius(s);
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max((s[[i, j]] - s[[j, i]]).abs());
        }
    }
    if defect > SYMMETRY_TOL * norm.max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(SpectralError::NotSymmetric { defect });
    }

    let mut a = symmetrize(s.to_owned());
    let mut v = Array2::<f64>::eye(n);
    let threshold = OFF_DIAGONAL_TOL * norm;

    let mut converged = n <= 1 || off_diagonal_mass(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(SpectralError::NoConvergence {
                sweeps,
                off_diagonal: off_diagonal_mass(&a),
            });
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_mass(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].total_cmp(&a[[j, j]]).then(i.cmp(&j)));

    let eigenvalues = Array1::from_iter(order.iter().map(|&k| a[[k, k]]));
    let mut eigenvectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let col = v.column(src);
        let sign = col
            .iter()
            .find(|x| x.abs() > 1e-12)
            .map(|x| x.signum())
            .unwrap_or(1.0);
        eigenvectors.column_mut(dst).assign(&(&col * sign));
    }

    Ok(Eigendecomposition {
        eigenvalues,
        eigenvectors,
    })
}

// One Jacobi rotation annihilating a[p][q]; updates the accumulated eigenvector basis.
fn rotate(a: &mut Array2<f64>, v: &mut Array2<f64>, p: usize, q: usize) {
    let apq = a[[p, q]];
    if apq == 0.0 {
        return;
    }
    let app = a[[p, p]];
    let aqq = a[[q, q]];
    let theta = 0.5 * (aqq - app) / apq;
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = a.nrows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[[k, p]];
        let akq = a[[k, q]];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[[k, p]] = new_kp;
        a[[p, k]] = new_kp;
        a[[k, q]] = new_kq;
        a[[q, k]] = new_kq;
    }
    a[[p, p]] = app - t * apq;
    a[[q, q]] = aqq + t * apq;
    a[[p, q]] = 0.0;
    a[[q, p]] = 0.0;

    for k in 0..n {
        let vkp = v[[k, p]];
        let vkq = v[[k, q]];
        v[[k, p]] = c * vkp - s * vkq;
        v[[k, q]] = s * vkp + c * vkq;
    }
}

/// Relative magnitude below which an eigenvalue is treated as an exact zero when
/// taking square roots and pseudoinverses.
pub const ZERO_EIGENVALUE_REL: f64 = 1e-9;

/// Negative eigenvalues beyond this fraction of `‖W‖` make [`matrix_sqrt`] fail.
pub const NOT_PSD_REL: f64 = 1e-8;

/// Symmetric PSD square root `V Σ^½ V'`.
///
/// Eigenvalues at or below `1e-9·λ_max` are set to zero before the root is taken, so
/// the null space of `W` is reproduced exactly rather than as `√(roundoff)` noise.
pub fn matrix_sqrt(w: ArrayView2<f64>) -> Result<Array2<f64>, SpectralError> {
    let eig = sym_eig(w)?;
    sqrt_from_eig(&eig, inf_norm(w))
}

pub(crate) fn sqrt_from_eig(eig: &Eigendecomposition, scale: f64) -> Result<Array2<f64>, SpectralError> {
    let min = eig.min_eigenvalue();
    if min < -NOT_PSD_REL * scale {
        return Err(SpectralError::NotPsd { eigenvalue: min });
    }
    let cutoff = ZERO_EIGENVALUE_REL * eig.max_eigenvalue().max(0.0);
    Ok(eig.reconstruct_with(|l| if l <= cutoff { 0.0 } else { l.sqrt() }))
}
