use crate::spectral::NetworkSpectrum;

use super::AnalysisError;

/// Relative agreement required between the numeric and closed-form optimal rate.
pub const CROSS_CHECK_REL: f64 = 1e-6;
const GOLDEN_TOL: f64 = 1e-12;
const BRACKET: f64 = 1e6;

/// Linear-rate certificate at a chosen penalty, alongside the optimized one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCertificate {
    pub c: f64,
    pub beta: f64,
    pub delta: f64,
    pub rho: f64,
    pub beta_star: f64,
    pub c_star: f64,
    pub delta_star: f64,
    pub rho_star: f64,
    pub nu: f64,
    pub lipschitz: f64,
    pub kappa_f: f64,
    pub lambda_tilde_m: f64,
    pub lambda_m: f64,
}

impl RateCertificate {
    /// Rounds until `‖x(t) − x*‖₂ ≤ ε` is guaranteed, given `‖q(0) − q*‖_G²`.
    ///
    /// Uses `‖x(t) − x*‖² ≤ (c/2ν)·ρ^{t−1}·‖q(0) − q*‖_G²`.
    pub fn predicted_iterations(&self, eps: f64, initial_gnorm_sq: f64) -> usize {
        if !(eps > 0.0) || initial_gnorm_sq <= 0.0 {
            return 0;
        }
        let scale = self.c / (2.0 * self.nu) * initial_gnorm_sq;
        let needed = (scale / (eps * eps)).ln() / (1.0 / self.rho).ln();
        if needed <= 0.0 {
            0
        } else {
            1 + needed.ceil() as usize
        }
    }

    /// `√κ_f · √(λ_M(2+λ̃_m)) / λ̃_m`: iterations per factor `e` of accuracy, up to a
    /// constant.
    pub fn complexity_coefficient(&self) -> f64 {
        self.kappa_f.sqrt() * (self.lambda_m * (2.0 + self.lambda_tilde_m)).sqrt()
            / self.lambda_tilde_m
    }
}

fn check_curvature(nu: f64, lipschitz: f64) -> Result<(), AnalysisError> {
    if !(nu > 0.0) || !(lipschitz >= nu) || !lipschitz.is_finite() {
        return Err(AnalysisError::InvalidCurvature { nu, lipschitz });
    }
    Ok(())
}

fn check_c(c: f64) -> Result<(), AnalysisError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(AnalysisError::InvalidC(c));
    }
    Ok(())
}

fn k_const(s: &NetworkSpectrum) -> f64 {
    s.lambda_m * (2.0 + s.lambda_tilde_m)
}

/// The two terms whose minimum bounds `δ`.
pub fn delta_terms(
    nu: f64,
    lipschitz: f64,
    c: f64,
    beta: f64,
    s: &NetworkSpectrum,
) -> Result<(f64, f64), AnalysisError> {
    check_curvature(nu, lipschitz)?;
    check_c(c)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(AnalysisError::InvalidBeta(beta));
    }
    let strong = 2.0 * beta * nu / (c * s.lambda_m * (1.0 + 2.0 / s.lambda_tilde_m));
    let smooth = (1.0 - beta) * c * s.lambda_tilde_m / lipschitz;
    Ok((strong, smooth))
}

pub fn delta_bound(
    nu: f64,
    lipschitz: f64,
    c: f64,
    beta: f64,
    s: &NetworkSpectrum,
) -> Result<f64, AnalysisError> {
    let (a, b) = delta_terms(nu, lipschitz, c, beta, s)?;
    Ok(a.min(b))
}

/// The `β` equating both terms at penalty `c`.
pub fn beta_star(nu: f64, lipschitz: f64, c: f64, s: &NetworkSpectrum) -> Result<f64, AnalysisError> {
    check_curvature(nu, lipschitz)?;
    check_c(c)?;
    let ck = c * c * k_const(s);
    Ok(ck / (2.0 * nu * lipschitz + ck))
}

/// `δ(β*(c), c) = 2νλ̃_m c / (2νL + c²λ_M(2+λ̃_m))`.
pub fn delta_at_beta_star(
    nu: f64,
    lipschitz: f64,
    c: f64,
    s: &NetworkSpectrum,
) -> Result<f64, AnalysisError> {
    check_curvature(nu, lipschitz)?;
    check_c(c)?;
    Ok(2.0 * nu * s.lambda_tilde_m * c / (2.0 * nu * lipschitz + c * c * k_const(s)))
}

fn closed_form(nu: f64, lipschitz: f64, s: &NetworkSpectrum) -> (f64, f64) {
    let k = k_const(s);
    let c_star = (2.0 * nu * lipschitz / k).sqrt();
    let kappa = lipschitz / nu;
    let delta_star = 0.5 * (2.0 * s.lambda_tilde_m.powi(2) / (k * kappa)).sqrt();
    (c_star, delta_star)
}

// Golden-section maximization of δ(β*(c), c) over log c.
fn maximize_log_c(nu: f64, lipschitz: f64, s: &NetworkSpectrum) -> Result<f64, AnalysisError> {
    let centre = (nu * lipschitz).sqrt().ln();
    let (lo_edge, hi_edge) = (centre - BRACKET.ln(), centre + BRACKET.ln());
    let f = |u: f64| delta_at_beta_star(nu, lipschitz, u.exp(), s);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo_edge, hi_edge);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a) > GOLDEN_TOL * (1.0 + a.abs().max(b.abs())) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        }
    }
    let u = 0.5 * (a + b);
    let edge = 1e-6 * (hi_edge - lo_edge);
    if u - lo_edge < edge || hi_edge - u < edge {
        return Err(AnalysisError::OptimizationBracketFailure { c: u.exp() });
    }
    Ok(u.exp())
}

/// Certificate at penalty `c` with `β = β*(c)`, plus the optimized values.
pub fn certify(
    nu: f64,
    lipschitz: f64,
    c: f64,
    s: &NetworkSpectrum,
) -> Result<RateCertificate, AnalysisError> {
    check_curvature(nu, lipschitz)?;
    check_c(c)?;
    let c_star = maximize_log_c(nu, lipschitz, s)?;
    let delta_numeric = delta_at_beta_star(nu, lipschitz, c_star, s)?;
    let (_, delta_star) = closed_form(nu, lipschitz, s);
    if (delta_numeric - delta_star).abs() > CROSS_CHECK_REL * delta_star {
        return Err(AnalysisError::CrossCheckFailed {
            numeric: delta_numeric,
            closed_form: delta_star,
        });
    }
    let delta = delta_at_beta_star(nu, lipschitz, c, s)?;
    Ok(RateCertificate {
        c,
        beta: beta_star(nu, lipschitz, c, s)?,
        delta,
        rho: 1.0 / (1.0 + delta),
        beta_star: beta_star(nu, lipschitz, c_star, s)?,
        c_star,
        delta_star,
        rho_star: 1.0 / (1.0 + delta_star),
        nu,
        lipschitz,
        kappa_f: lipschitz / nu,
        lambda_tilde_m: s.lambda_tilde_m,
        lambda_m: s.lambda_m,
    })
}

/// Certificate at the numerically optimal penalty `c*`.
pub fn optimize_rate(
    nu: f64,
    lipschitz: f64,
    s: &NetworkSpectrum,
) -> Result<RateCertificate, AnalysisError> {
    check_curvature(nu, lipschitz)?;
    let c_star = maximize_log_c(nu, lipschitz, s)?;
    certify(nu, lipschitz, c_star, s)
}
