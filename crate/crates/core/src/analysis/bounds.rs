use crate::graph::{laplacian, Graph};
use crate::spectral::{NetworkSpectrum, SpectralData};

use super::AnalysisError;

/// Slack for the spectral sandwich comparisons, scaled by `max(1, |rhs|)`.
pub const SANDWICH_SLACK: f64 = 1e-10;

/// The `O(1/T)` bounds for the ergodic average from a zero start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublinearBound {
    pub u: f64,
    pub lambda_m: f64,
    pub lambda_tilde_m: f64,
    pub x_star_norm_sq: f64,
    pub c: f64,
}

impl SublinearBound {
    /// `(c/2T)‖x*‖²λ_M + (2/cT)·U²/λ̃_m`.
    pub fn objective_bound(&self, t: usize) -> f64 {
        let t = t as f64;
        self.c / (2.0 * t) * self.x_star_norm_sq * self.lambda_m
            + 2.0 / (self.c * t) * self.u * self.u / self.lambda_tilde_m
    }

    /// `(1/2T)‖x*‖²λ_M + (1/2T)(2 + 2U²/(c²λ̃_m))`.
    pub fn feasibility_bound(&self, t: usize) -> f64 {
        let t = t as f64;
        self.x_star_norm_sq * self.lambda_m / (2.0 * t)
            + (2.0 + 2.0 * self.u * self.u / (self.c * self.c * self.lambda_tilde_m)) / (2.0 * t)
    }
}

pub fn sublinear_bounds(u: f64, s: &NetworkSpectrum, x_star_norm_sq: f64, c: f64) -> SublinearBound {
    SublinearBound {
        u,
        lambda_m: s.lambda_m,
        lambda_tilde_m: s.lambda_tilde_m,
        x_star_norm_sq,
        c,
    }
}

/// Degree and connectivity bounds on the spectral constants of a Laplacian network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianBoundsReport {
    pub a_g: f64,
    pub d_max: usize,
    pub d_min: usize,
    pub lambda_tilde_m: f64,
    pub lambda_m: f64,
    /// `a(G)²/(d_max+1)`.
    pub tilde_lower: f64,
    /// `a(G)²/(d_min+1)`.
    pub tilde_upper: f64,
    /// `d_max(d_max+1) + 4d_max²/(d_min+1)`.
    pub lambda_m_upper: f64,
    /// `4d_max²`, the degree-only replacement for `λ_M`.
    pub lambda_m_degree_bound: f64,
    /// `2d_max/a(G)²`, the replacement for `1/λ̃_m`.
    pub inv_tilde_bound: f64,
    /// `λ_M(2+λ̃_m)/λ̃_m²`.
    pub complexity_exact: f64,
    /// `16·d_max⁴/(d_min·a(G)²)`.
    pub complexity_degree_bound: f64,
}

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + SANDWICH_SLACK * rhs.abs().max(1.0)
}

impl LaplacianBoundsReport {
    pub fn sandwich_holds(&self) -> bool {
        leq(self.tilde_lower, self.lambda_tilde_m) && leq(self.lambda_tilde_m, self.tilde_upper)
    }

    pub fn lambda_m_bound_holds(&self) -> bool {
        leq(self.lambda_m, self.lambda_m_upper)
    }

    pub fn degree_replacements_hold(&self) -> bool {
        leq(self.lambda_m, self.lambda_m_degree_bound)
            && leq(1.0 / self.lambda_tilde_m, self.inv_tilde_bound)
    }

    /// May fail on sparse, poorly connected graphs (long paths and cycles).
    pub fn complexity_bound_holds(&self) -> bool {
        leq(self.complexity_exact, self.complexity_degree_bound)
    }

    pub fn all_hold(&self) -> bool {
        self.sandwich_holds()
            && self.lambda_m_bound_holds()
            && self.degree_replacements_hold()
            && self.complexity_bound_holds()
    }

    /// `√κ_f · √(16·d_max⁴/(d_min·a(G)²))`.
    pub fn iteration_coefficient(&self, kappa_f: f64) -> f64 {
        (kappa_f * self.complexity_degree_bound).sqrt()
    }
}

pub fn laplacian_network_bounds(sd: &SpectralData, g: &Graph) -> Result<LaplacianBoundsReport, AnalysisError> {
    if sd.p != *laplacian(g).matrix() {
        return Err(AnalysisError::NotLaplacian);
    }
    let a = sd.a_g;
    let d_max = g.max_degree();
    let d_min = g.min_degree();
    let (dx, dn) = (d_max as f64, d_min as f64);
    Ok(LaplacianBoundsReport {
        a_g: a,
        d_max,
        d_min,
        lambda_tilde_m: sd.lambda_tilde_m,
        lambda_m: sd.lambda_m,
        tilde_lower: a * a / (dx + 1.0),
        tilde_upper: a * a / (dn + 1.0),
        lambda_m_upper: dx * (dx + 1.0) + 4.0 * dx * dx / (dn + 1.0),
        lambda_m_degree_bound: 4.0 * dx * dx,
        inv_tilde_bound: 2.0 * dx / (a * a),
        complexity_exact: sd.lambda_m * (2.0 + sd.lambda_tilde_m) / sd.lambda_tilde_m.powi(2),
        complexity_degree_bound: 16.0 * dx.powi(4) / (dn * a * a),
    })
}
