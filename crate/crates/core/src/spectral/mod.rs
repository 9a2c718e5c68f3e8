//! Matrix quantities that drive every convergence certificate.
//!
//! For a communication matrix `P` on graph `G` this module builds
//!
//! * `M = diag(Σ_{j∈N(i)} P_ji²)` and `D = diag(d_i + 1)`,
//! * `W = P' D⁻¹ P` and its PSD square root `Q`,
//! * the block `M − W` that weighs the primal part of the G-seminorm,
//! * `λ̃_m` (smallest nonzero eigenvalue of `W`), `λ_M` (largest eigenvalue of
//!   `M − W`) and the algebraic connectivity `a(G)`.
//!
//! Everything is dense and computed per coordinate: with `A = P ⊗ I_d` the spectra
//! are those of the `n×n` matrices repeated `d` times, so `A` is never formed.

mod eigen;

pub use eigen::{
    matrix_sqrt, sym_eig, Eigendecomposition, MAX_SWEEPS, NOT_PSD_REL, OFF_DIAGONAL_TOL,
    SYMMETRY_TOL, ZERO_EIGENVALUE_REL,
};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use thiserror::Error;

use crate::graph::{laplacian, CommunicationMatrix, Graph};

/// Eigenvalue floor used by the PSD checks.
pub const PSD_EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("all eigenvalues of P'D⁻¹P are numerically zero")]
    DegenerateSpectrum,
    #[error("PSD certificate failed: {0}")]
    CertificateFailed(String),
}

/// The pair of spectral constants that enters every rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSpectrum {
    /// Smallest nonzero eigenvalue of `W = P'D⁻¹P`.
    pub lambda_tilde_m: f64,
    /// Largest eigenvalue of `M − W`.
    pub lambda_m: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub p: Array2<f64>,
    pub degrees: Vec<usize>,
    /// Diagonal of `M`.
    pub m: Array1<f64>,
    /// Diagonal of `D`.
    pub d: Array1<f64>,
    pub w: Array2<f64>,
    pub q: Array2<f64>,
    /// `M − W`.
    pub g_block: Array2<f64>,
    pub lambda_tilde_m: f64,
    pub lambda_m: f64,
    pub a_g: f64,
    pub eig_w: Eigendecomposition,
    pub eig_g: Array1<f64>,
    /// Eigenvalues of `W` at or below this are the consensus null space.
    pub null_threshold: f64,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn spectrum(&self) -> NetworkSpectrum {
        NetworkSpectrum {
            lambda_tilde_m: self.lambda_tilde_m,
            lambda_m: self.lambda_m,
        }
    }

    pub fn d_max(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn d_min(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    /// `Q x` applied to every coordinate column of an `n×d` array.
    pub fn apply_q(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.q.dot(&x)
    }

    /// `Q⁺ v` per column, inverting only eigen-directions above the null threshold.
    pub fn apply_q_pinv(&self, v: ArrayView2<f64>) -> Array2<f64> {
        let u = &self.eig_w.eigenvectors;
        let mut coeffs = u.t().dot(&v);
        for (k, mut row) in coeffs.axis_iter_mut(Axis(0)).enumerate() {
            let lambda = self.eig_w.eigenvalues[k];
            if lambda > self.null_threshold {
                row /= lambda.sqrt();
            } else {
                row.fill(0.0);
            }
        }
        u.dot(&coeffs)
    }

    /// Orthogonal projector onto the column span of `Q`, applied per column.
    pub fn project_range(&self, v: ArrayView2<f64>) -> Array2<f64> {
        let u = &self.eig_w.eigenvectors;
        let mut coeffs = u.t().dot(&v);
        for (k, mut row) in coeffs.axis_iter_mut(Axis(0)).enumerate() {
            if self.eig_w.eigenvalues[k] <= self.null_threshold {
                row.fill(0.0);
            }
        }
        u.dot(&coeffs)
    }

    /// `Σ_k x_k' (M − W) x_k` over the coordinate columns.
    pub fn g_seminorm_sq(&self, x: ArrayView2<f64>) -> f64 {
        let gx = self.g_block.dot(&x);
        (&gx * &x).sum()
    }
}

/// Second-smallest eigenvalue of the graph Laplacian.
pub fn algebraic_connectivity(g: &Graph) -> Result<f64, SpectralError> {
    let eig = sym_eig(laplacian(g).matrix().view())?;
    Ok(eig.eigenvalues[1])
}

pub fn compute_spectral_data(
    p: &CommunicationMatrix,
    g: &Graph,
) -> Result<SpectralData, SpectralError> {
    let pm = p.matrix();
    let n = g.node_count();
    let degrees = g.degrees();

    let m = Array1::from_iter((0..n).map(|i| pm.column(i).iter().map(|v| v * v).sum::<f64>()));
    let d = Array1::from_iter(degrees.iter().map(|&di| di as f64 + 1.0));

    let mut scaled = pm.clone();
    for (i, mut row) in scaled.axis_iter_mut(Axis(0)).enumerate() {
        row /= d[i];
    }
    let mut w = pm.t().dot(&scaled);
    symmetrize(&mut w);

    let eig_w = sym_eig(w.view())?;
    let w_max = eig_w.max_eigenvalue();
    let null_threshold = ZERO_EIGENVALUE_REL * w_max.max(0.0);
    let lambda_tilde_m = eig_w
        .eigenvalues
        .iter()
        .copied()
        .find(|&l| l > null_threshold)
        .ok_or(SpectralError::DegenerateSpectrum)?;
    if !(w_max > 0.0) {
        return Err(SpectralError::DegenerateSpectrum);
    }
    let q = eigen::sqrt_from_eig(&eig_w, eigen::inf_norm(w.view()))?;

    let mut g_block = -&w;
    for i in 0..n {
        g_block[[i, i]] += m[i];
    }
    let eig_g = sym_eig(g_block.view())?.eigenvalues;
    let lambda_m = eig_g[n - 1];

    let a_g = algebraic_connectivity(g)?;

    Ok(SpectralData {
        p: pm.clone(),
        degrees,
        m,
        d,
        w,
        q,
        g_block,
        lambda_tilde_m,
        lambda_m,
        a_g,
        eig_w,
        eig_g,
        null_threshold,
    })
}

fn symmetrize(s: &mut Array2<f64>) {
    let n = s.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = avg;
            s[[j, i]] = avg;
        }
    }
}

/// Row-wise Gershgorin bounds plus eigenvalue checks for `W` and `M − W`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdReport {
    /// `[M−W]_ii − Σ_{j≠i} |[M−W]_ij|` per row.
    pub gershgorin_g: Vec<f64>,
    /// `Σ_l P_li² (d_l − 1)/(d_l + 1)` per row.
    pub dominance_g: Vec<f64>,
    /// `W_ii − Σ_{j≠i} |W_ij|` per row.
    pub gershgorin_w: Vec<f64>,
    /// Rows whose Gershgorin disc reaches below zero. Such rows certify nothing, but do
    /// not refute semidefiniteness; the eigenvalue check decides.
    pub inconclusive_rows: Vec<(PsdBlock, usize)>,
    pub min_eig_w: f64,
    pub min_eig_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdBlock {
    /// `M − W`
    Coupling,
    /// `W`
    Averaging,
}

impl PsdReport {
    /// True when every row's Gershgorin disc lies in `[0, ∞)`.
    pub fn gershgorin_certified(&self) -> bool {
        self.inconclusive_rows.is_empty()
    }
}

fn gershgorin_lower(s: &Array2<f64>) -> Vec<f64> {
    s.rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let off: f64 = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.abs())
                .sum();
            row[i] - off
        })
        .collect()
}

/// Certifies that `W` and `M − W` are PSD, first by diagonal dominance and then by
/// eigenvalues. Requires zero row sums in `P` (Laplacian-type).
pub fn psd_certificates(sd: &SpectralData) -> Result<PsdReport, SpectralError> {
    let n = sd.n();
    let scale = 1.0 + eigen::inf_norm(sd.g_block.view()).max(eigen::inf_norm(sd.w.view()));
    let tol = PSD_EIGEN_TOL * scale;

    let gershgorin_g = gershgorin_lower(&sd.g_block);
    let gershgorin_w = gershgorin_lower(&sd.w);
    let dominance_g: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|l| {
                    let dl = sd.degrees[l] as f64;
                    sd.p[[l, i]].powi(2) * (dl - 1.0) / (dl + 1.0)
                })
                .sum()
        })
        .collect();

    let mut inconclusive_rows = Vec::new();
    for (i, lb) in gershgorin_g.iter().enumerate() {
        if *lb < -tol {
            inconclusive_rows.push((PsdBlock::Coupling, i));
        }
    }
    for (i, lb) in gershgorin_w.iter().enumerate() {
        if *lb < -tol {
            inconclusive_rows.push((PsdBlock::Averaging, i));
        }
    }

    let min_eig_w = sd.eig_w.min_eigenvalue();
    let min_eig_g = sd.eig_g[0];
    if min_eig_w < -PSD_EIGEN_TOL {
        return Err(SpectralError::CertificateFailed(format!(
            "smallest eigenvalue of W is {min_eig_w:e}"
        )));
    }
    if min_eig_g < -PSD_EIGEN_TOL {
        return Err(SpectralError::CertificateFailed(format!(
            "smallest eigenvalue of M−W is {min_eig_g:e}"
        )));
    }

    Ok(PsdReport {
        gershgorin_g,
        dominance_g,
        gershgorin_w,
        inconclusive_rows,
        min_eig_w,
        min_eig_g,
    })
}
