//! Local convex objectives `f_i`, their proximal maps, and a centralized oracle for the
//! consensus optimum.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use thiserror::Error;

use crate::spectral::sym_eig;

/// Inner-solver stopping threshold on iterate displacement.
pub const INNER_DISPLACEMENT_TOL: f64 = 1e-13;
/// Inner-solver iteration cap.
pub const INNER_MAX_ITERS: usize = 100_000;
/// Oracle stopping threshold on the (proximal) gradient norm.
pub const ORACLE_TOL: f64 = 1e-12;
/// Oracle iteration cap.
pub const ORACLE_MAX_ITERS: usize = 2_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("dimension mismatch: objective has d = {expected}, input has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("prox weight must be positive, got {0}")]
    InvalidRho(f64),
    #[error("inner prox solver did not converge (residual {residual:e} after {iters} iterations)")]
    InnerSolverNoConvergence { residual: f64, iters: usize },
    #[error("objective {node} has no strong-convexity/Lipschitz metadata")]
    MissingCurvatureMetadata { node: usize },
    #[error("central oracle did not converge (residual {residual:e})")]
    OracleNoConvergence { residual: f64 },
    #[error("invalid objective: {0}")]
    Invalid(String),
}

type ValueFn = dyn Fn(ArrayView1<f64>) -> f64 + Send + Sync;
type GradFn = dyn Fn(ArrayView1<f64>) -> Array1<f64> + Send + Sync;

/// A differentiable objective given by callables, with declared curvature constants.
#[derive(Clone)]
pub struct SmoothFn {
    pub dim: usize,
    pub nu: f64,
    pub lipschitz: f64,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
}

impl SmoothFn {
    pub fn new(
        dim: usize,
        nu: f64,
        lipschitz: f64,
        value: impl Fn(ArrayView1<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(ArrayView1<f64>) -> Array1<f64> + Send + Sync + 'static,
    ) -> Self {
        SmoothFn {
            dim,
            nu,
            lipschitz,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn")
            .field("dim", &self.dim)
            .field("nu", &self.nu)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// The local function held by one node.
#[derive(Debug, Clone)]
pub enum LocalObjective {
    /// `(w/2)‖x − a‖²`.
    Quadratic { target: Array1<f64>, weight: f64 },
    /// `½(x − a)' H (x − a) + τ‖x‖₁` with `H = w·I` unless `coupling` supplies a
    /// symmetric PSD `H`.
    L1Quadratic {
        target: Array1<f64>,
        weight: f64,
        coupling: Option<Array2<f64>>,
        tau: f64,
    },
    Smooth(SmoothFn),
}

/// Strong convexity and gradient-Lipschitz constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    pub nu: f64,
    pub lipschitz: f64,
}

impl LocalObjective {
    pub fn quadratic(target: Vec<f64>, weight: f64) -> Self {
        LocalObjective::Quadratic {
            target: Array1::from(target),
            weight,
        }
    }

    pub fn l1_quadratic(target: Vec<f64>, weight: f64, tau: f64) -> Self {
        LocalObjective::L1Quadratic {
            target: Array1::from(target),
            weight,
            coupling: None,
            tau,
        }
    }

    pub fn l1_coupled(target: Vec<f64>, hessian: Array2<f64>, tau: f64) -> Self {
        LocalObjective::L1Quadratic {
            target: Array1::from(target),
            weight: 0.0,
            coupling: Some(hessian),
            tau,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LocalObjective::Quadratic { target, .. } => target.len(),
            LocalObjective::L1Quadratic { target, .. } => target.len(),
            LocalObjective::Smooth(s) => s.dim,
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            LocalObjective::L1Quadratic { tau, .. } => *tau == 0.0,
            _ => true,
        }
    }

    /// `(ν_i, L_i)` when the function is differentiable and declares them.
    pub fn curvature(&self) -> Option<Curvature> {
        match self {
            LocalObjective::Quadratic { weight, .. } => Some(Curvature {
                nu: *weight,
                lipschitz: *weight,
            }),
            LocalObjective::L1Quadratic { .. } => None,
            LocalObjective::Smooth(s) => Some(Curvature {
                nu: s.nu,
                lipschitz: s.lipschitz,
            }),
        }
    }

    /// Lipschitz constant of the gradient of the smooth part.
    pub fn smooth_lipschitz(&self) -> f64 {
        match self {
            LocalObjective::Quadratic { weight, .. } => *weight,
            LocalObjective::L1Quadratic {
                weight, coupling, ..
            } => match coupling {
                Some(h) => sym_eig(h.view())
                    .map(|e| e.max_eigenvalue().max(0.0))
                    .unwrap_or_else(|_| h.iter().map(|v| v.abs()).sum()),
                None => *weight,
            },
            LocalObjective::Smooth(s) => s.lipschitz,
        }
    }

    fn check_dim(&self, x: ArrayView1<f64>) -> Result<(), ObjectiveError> {
        if x.len() != self.dim() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        match self {
            LocalObjective::Quadratic { target, weight } => {
                0.5 * weight * (&x - target).mapv(|v| v * v).sum()
            }
            LocalObjective::L1Quadratic {
                target,
                weight,
                coupling,
                ..
            } => {
                let r = &x - target;
                match coupling {
                    Some(h) => 0.5 * r.dot(&h.dot(&r)),
                    None => 0.5 * weight * r.dot(&r),
                }
            }
            LocalObjective::Smooth(s) => (s.value)(x),
        }
    }

    pub(crate) fn smooth_gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        match self {
            LocalObjective::Quadratic { target, weight } => (&x - target) * *weight,
            LocalObjective::L1Quadratic {
                target,
                weight,
                coupling,
                ..
            } => {
                let r = &x - target;
                match coupling {
                    Some(h) => h.dot(&r),
                    None => r * *weight,
                }
            }
            LocalObjective::Smooth(s) => (s.gradient)(x),
        }
    }

    fn tau(&self) -> f64 {
        match self {
            LocalObjective::L1Quadratic { tau, .. } => *tau,
            _ => 0.0,
        }
    }

    pub fn value(&self, x: ArrayView1<f64>) -> Result<f64, ObjectiveError> {
        self.check_dim(x)?;
        let l1 = self.tau() * x.iter().map(|v| v.abs()).sum::<f64>();
        Ok(self.smooth_value(x) + l1)
    }

    /// Gradient, or for the `ℓ₁` kind the subgradient that uses `sign(0) = 0`.
    pub fn gradient(&self, x: ArrayView1<f64>) -> Result<Array1<f64>, ObjectiveError> {
        self.check_dim(x)?;
        let mut g = self.smooth_gradient(x);
        let tau = self.tau();
        if tau != 0.0 {
            g.zip_mut_with(&x, |gi, xi| {
                if *xi != 0.0 {
                    *gi += tau * xi.signum()
                }
            });
        }
        Ok(g)
    }

    /// `argmin_x f(x) + (ρ/2)‖x − v‖²`.
    pub fn prox(&self, v: ArrayView1<f64>, rho: f64) -> Result<Array1<f64>, ObjectiveError> {
        self.check_dim(v)?;
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(ObjectiveError::InvalidRho(rho));
        }
        match self {
            LocalObjective::Quadratic { target, weight } => {
                Ok((target * *weight + &v * rho) / (weight + rho))
            }
            LocalObjective::L1Quadratic {
                target,
                weight,
                coupling: None,
                tau,
            } => {
                let center = (target * *weight + &v * rho) / (weight + rho);
                let thresh = tau / (weight + rho);
                Ok(center.mapv(|c| soft_threshold(c, thresh)))
            }
            LocalObjective::L1Quadratic { tau, .. } => {
                let step = 1.0 / (self.smooth_lipschitz() + rho);
                let thresh = tau * step;
                self.inner_solve(v, rho, |z| z.mapv(|c| soft_threshold(c, thresh)), step)
            }
            LocalObjective::Smooth(_) => {
                let step = 1.0 / (self.smooth_lipschitz() + rho);
                self.inner_solve(v, rho, |z| z, step)
            }
        }
    }

    // Proximal-gradient iterations on the ρ-strongly convex prox subproblem.
    fn inner_solve(
        &self,
        v: ArrayView1<f64>,
        rho: f64,
        shrink: impl Fn(Array1<f64>) -> Array1<f64>,
        step: f64,
    ) -> Result<Array1<f64>, ObjectiveError> {
        let mut x = v.to_owned();
        for _ in 0..INNER_MAX_ITERS {
            let grad = self.smooth_gradient(x.view()) + (&x - &v) * rho;
            let next = shrink(&x - &(grad * step));
            let moved = (&next - &x).mapv(f64::abs).fold(0.0f64, |m, d| m.max(*d));
            x = next;
            if moved <= INNER_DISPLACEMENT_TOL * (1.0 + x.mapv(f64::abs).fold(0.0f64, |m, d| m.max(*d))) {
                return Ok(x);
            }
        }
        Err(ObjectiveError::InnerSolverNoConvergence {
            residual: self.prox_residual(v, rho, x.view())?,
            iters: INNER_MAX_ITERS,
        })
    }

    /// Smallest `‖h + ρ(x − v)‖₂` over subgradients `h ∈ ∂f(x)`: zero exactly when
    /// `x` is the prox point.
    pub fn prox_residual(
        &self,
        v: ArrayView1<f64>,
        rho: f64,
        x: ArrayView1<f64>,
    ) -> Result<f64, ObjectiveError> {
        self.check_dim(v)?;
        self.check_dim(x)?;
        let smooth = self.smooth_gradient(x) + (&x - &v) * rho;
        let tau = self.tau();
        let r = ndarray::Zip::from(&smooth).and(&x).map_collect(|s, xi| {
            if tau == 0.0 {
                *s
            } else if *xi != 0.0 {
                s + tau * xi.signum()
            } else {
                // pick the subgradient component in [−τ, τ] closest to cancelling s
                s + (-s).clamp(-tau, tau)
            }
        });
        Ok(r.dot(&r).sqrt())
    }
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Aggregate curvature and subgradient-bound data for `F(x) = Σ f_i(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateInfo {
    /// `Some` only when every `f_i` declares `(ν_i, L_i)`.
    pub curvature: Option<AggregateCurvature>,
    /// Norm of the stacked (sub)gradient at `x*`.
    pub u_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateCurvature {
    pub nu: f64,
    pub lipschitz: f64,
    pub kappa_f: f64,
}

impl AggregateInfo {
    pub fn require_curvature(&self, objectives: &[LocalObjective]) -> Result<AggregateCurvature, ObjectiveError> {
        self.curvature.ok_or_else(|| {
            let node = objectives
                .iter()
                .position(|f| f.curvature().map_or(true, |c| c.nu <= 0.0))
                .unwrap_or(0);
            ObjectiveError::MissingCurvatureMetadata { node }
        })
    }
}

/// `ν = min ν_i`, `L = max L_i`, `κ_f = L/ν`, `U = ‖h(x*)‖`.
pub fn aggregate(objectives: &[LocalObjective], optimal: &OptimalPoint) -> AggregateInfo {
    let mut nu = f64::INFINITY;
    let mut lipschitz = 0.0f64;
    let mut complete = !objectives.is_empty();
    for f in objectives {
        match f.curvature() {
            Some(c) if c.nu > 0.0 => {
                nu = nu.min(c.nu);
                lipschitz = lipschitz.max(c.lipschitz);
            }
            _ => complete = false,
        }
    }
    let curvature = complete.then(|| AggregateCurvature {
        nu,
        lipschitz,
        kappa_f: lipschitz / nu,
    });
    let u_bound = optimal.grad_at_star.iter().map(|v| v * v).sum::<f64>().sqrt();
    AggregateInfo { curvature, u_bound }
}

/// Consensus optimum of `Σ_i f_i(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPoint {
    /// `n×d`, every row equal to the minimizer.
    pub x_star: Array2<f64>,
    pub f_star: f64,
    /// Stacked `h_i(x*)` with `Σ_i h_i = 0`; the true gradient for smooth problems.
    pub grad_at_star: Array2<f64>,
    /// Stationarity norm `‖Σ_i h_i(x*)‖` reported by the oracle.
    pub residual: f64,
}

impl OptimalPoint {
    pub fn consensus_value(&self) -> Array1<f64> {
        self.x_star.row(0).to_owned()
    }
}

/// Ground truth via closed form (all quadratics) or (proximal) gradient descent with
/// step `1/Σ L_i` on the `d`-dimensional consensus problem.
pub fn central_solve(objectives: &[LocalObjective]) -> Result<OptimalPoint, ObjectiveError> {
    let n = objectives.len();
    if n == 0 {
        return Err(ObjectiveError::Invalid("no objectives".into()));
    }
    let d = objectives[0].dim();
    if let Some(bad) = objectives.iter().find(|f| f.dim() != d) {
        return Err(ObjectiveError::DimensionMismatch {
            expected: d,
            got: bad.dim(),
        });
    }

    let all_quadratic = objectives
        .iter()
        .all(|f| matches!(f, LocalObjective::Quadratic { .. }));
    let x = if all_quadratic {
        let mut num = Array1::<f64>::zeros(d);
        let mut den = 0.0;
        for f in objectives {
            if let LocalObjective::Quadratic { target, weight } = f {
                num = num + target * *weight;
                den += weight;
            }
        }
        if !(den > 0.0) {
            return Err(ObjectiveError::Invalid(
                "quadratic weights sum to zero; optimum not unique".into(),
            ));
        }
        num / den
    } else {
        proximal_gradient_consensus(objectives, d)?
    };

    let tau_total: f64 = objectives.iter().map(|f| f.tau()).sum();
    let smooth_grads: Vec<Array1<f64>> = objectives
        .iter()
        .map(|f| f.smooth_gradient(x.view()))
        .collect();
    let smooth_sum = smooth_grads
        .iter()
        .fold(Array1::<f64>::zeros(d), |acc, g| acc + g);
    // Common ℓ₁ subgradient s with smooth_sum + τ_total·s ≈ 0, shared by every node.
    let shared_sign = Array1::from_iter((0..d).map(|k| {
        if x[k] != 0.0 {
            x[k].signum()
        } else if tau_total > 0.0 {
            (-smooth_sum[k] / tau_total).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    }));

    let mut grad_at_star = Array2::<f64>::zeros((n, d));
    let mut f_star = 0.0;
    for (i, f) in objectives.iter().enumerate() {
        let h = &smooth_grads[i] + &(&shared_sign * f.tau());
        grad_at_star.row_mut(i).assign(&h);
        f_star += f.value(x.view())?;
    }
    let total = grad_at_star.sum_axis(Axis(0));
    let residual = total.dot(&total).sqrt();

    let mut x_star = Array2::<f64>::zeros((n, d));
    for mut row in x_star.rows_mut() {
        row.assign(&x);
    }
    Ok(OptimalPoint {
        x_star,
        f_star,
        grad_at_star,
        residual,
    })
}

fn proximal_gradient_consensus(
    objectives: &[LocalObjective],
    d: usize,
) -> Result<Array1<f64>, ObjectiveError> {
    let l_total: f64 = objectives.iter().map(|f| f.smooth_lipschitz()).sum();
    let step = if l_total > 0.0 { 1.0 / l_total } else { 1.0 };
    let tau_total: f64 = objectives.iter().map(|f| f.tau()).sum();
    let mut x = Array1::<f64>::zeros(d);
    let mut residual = f64::INFINITY;
    for _ in 0..ORACLE_MAX_ITERS {
        let grad = objectives
            .iter()
            .fold(Array1::<f64>::zeros(d), |acc, f| acc + f.smooth_gradient(x.view()));
        let next = (&x - &(grad * step)).mapv(|v| soft_threshold(v, tau_total * step));
        let mapping = (&x - &next) / step;
        residual = mapping.dot(&mapping).sqrt();
        x = next;
        if residual <= ORACLE_TOL {
            return Ok(x);
        }
    }
    Err(ObjectiveError::OracleNoConvergence { residual })
}
