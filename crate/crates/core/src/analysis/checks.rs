use ndarray::Array2;

use crate::admm::{AdmmTrace, NetworkProblem};
use crate::objectives::OptimalPoint;
use crate::spectral::SpectralData;

use super::{AnalysisError, BoundKind, RateCertificate, SublinearBound};

/// Additive slack on every certificate inequality.
pub const BOUND_SLACK: f64 = 1e-9;
/// Ratios with a denominator below this are not evaluated.
pub const DEFAULT_CONTRACTION_FLOOR: f64 = 1e-24;

fn frob_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// `r(t) = Q Σ_{s≤t} x(s)` and the distances of `q(t) = (r(t); x(t))` to `(r*; x*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxSequences {
    pub c: f64,
    /// `r* = −(1/c) Q⁺ ∇F(x*)`.
    pub r_star: Array2<f64>,
    /// Indexed by `t = 0..=T`.
    pub r: Vec<Array2<f64>>,
    /// `‖q(t) − q*‖_G²`.
    pub gnorm_sq: Vec<f64>,
    /// `‖x(t) − x*‖²`.
    pub dist_sq: Vec<f64>,
    /// `‖(I − QQ⁺) r*‖`.
    pub r_star_range_defect: f64,
    /// `‖Q r* + (1/c)∇F(x*)‖`.
    pub r_star_residual: f64,
}

pub fn aux_sequences(
    trace: &AdmmTrace,
    sd: &SpectralData,
    opt: &OptimalPoint,
    c: f64,
) -> AuxSequences {
    let scaled = &opt.grad_at_star * (-1.0 / c);
    let r_star = sd.apply_q_pinv(scaled.view());
    let r_star_range_defect = frob_sq(&(&r_star - &sd.project_range(r_star.view()))).sqrt();
    let r_star_residual = frob_sq(&(sd.apply_q(r_star.view()) - &scaled)).sqrt();

    let mut r = Vec::with_capacity(trace.len() + 1);
    let mut gnorm_sq = Vec::with_capacity(trace.len() + 1);
    let mut dist_sq = Vec::with_capacity(trace.len() + 1);
    for t in 0..=trace.len() {
        let s = trace.at(t);
        let rt = sd.apply_q(s.x_sum.view());
        let dx = &s.x - &opt.x_star;
        gnorm_sq.push(frob_sq(&(&rt - &r_star)) + sd.g_seminorm_sq(dx.view()));
        dist_sq.push(frob_sq(&dx));
        r.push(rt);
    }
    AuxSequences {
        c,
        r_star,
        r,
        gnorm_sq,
        dist_sq,
        r_star_range_defect,
        r_star_residual,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub bound: f64,
    /// `ratios[t]` compares rounds `t+1` and `t`; `None` when skipped.
    pub ratios: Vec<Option<f64>>,
    pub max_ratio: Option<f64>,
    /// True when some denominator fell below the floor.
    pub converged: bool,
}

/// Checks `‖q(t+1) − q*‖_G² ≤ ρ·‖q(t) − q*‖_G²` with `ρ = 1/(1+δ)` for every round until
/// the distance drops below `floor`.
pub fn contraction_check(
    aux: &AuxSequences,
    cert: &RateCertificate,
    floor: f64,
) -> Result<ContractionReport, AnalysisError> {
    let bound = cert.rho;
    let mut ratios = Vec::with_capacity(aux.gnorm_sq.len().saturating_sub(1));
    let mut max_ratio: Option<f64> = None;
    let mut converged = false;
    for t in 0..aux.gnorm_sq.len().saturating_sub(1) {
        let den = aux.gnorm_sq[t];
        if converged || den < floor {
            converged = true;
            ratios.push(None);
            continue;
        }
        let ratio = aux.gnorm_sq[t + 1] / den;
        if ratio > bound + BOUND_SLACK {
            return Err(AnalysisError::ContractionViolated { t, ratio, bound });
        }
        max_ratio = Some(max_ratio.map_or(ratio, |m| m.max(ratio)));
        ratios.push(Some(ratio));
    }
    Ok(ContractionReport {
        bound,
        ratios,
        max_ratio,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublinearReport {
    /// `|F(x̂(T)) − F*|` for `T = 1..`.
    pub objective_gap: Vec<f64>,
    /// `‖Q x̂(T)‖₂`.
    pub feasibility: Vec<f64>,
    /// `max_T T·|F(x̂(T)) − F*|`.
    pub worst_scaled_objective: f64,
    pub worst_scaled_feasibility: f64,
}

pub fn sublinear_check(
    trace: &AdmmTrace,
    problem: &NetworkProblem,
    bounds: &SublinearBound,
    opt: &OptimalPoint,
    sd: &SpectralData,
) -> Result<SublinearReport, AnalysisError> {
    let mut objective_gap = Vec::with_capacity(trace.len());
    let mut feasibility = Vec::with_capacity(trace.len());
    let mut worst_o = 0.0f64;
    let mut worst_f = 0.0f64;
    for t in 1..=trace.len() {
        let xh = &trace.at(t).ergodic;
        let gap = (problem.total_value(xh)? - opt.f_star).abs();
        let rhs = bounds.objective_bound(t);
        if gap > rhs + BOUND_SLACK {
            return Err(AnalysisError::BoundViolated {
                t,
                kind: BoundKind::Objective,
                lhs: gap,
                rhs,
            });
        }
        let feas = frob_sq(&sd.apply_q(xh.view())).sqrt();
        let rhs = bounds.feasibility_bound(t);
        if feas > rhs + BOUND_SLACK {
            return Err(AnalysisError::BoundViolated {
                t,
                kind: BoundKind::Feasibility,
                lhs: feas,
                rhs,
            });
        }
        worst_o = worst_o.max(gap * t as f64);
        worst_f = worst_f.max(feas * t as f64);
        objective_gap.push(gap);
        feasibility.push(feas);
    }
    Ok(SublinearReport {
        objective_gap,
        feasibility,
        worst_scaled_objective: worst_o,
        worst_scaled_feasibility: worst_f,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelescopingReport {
    /// `rhs − lhs` per round with anchor `r = 0`.
    pub slack_zero: Vec<f64>,
    /// Same with anchor `r = r*`.
    pub slack_star: Vec<f64>,
}

/// Per-round check of
/// `(2/c)(F(x(t+1)) − F*) + 2r'Qx(t+1) ≤ ‖q(t) − q̄‖_G² − ‖q(t+1) − q̄‖_G² − ‖q(t) − q(t+1)‖_G²`
/// with `q̄ = (r; x*)`, for `r = 0` and `r = r*`.
///
/// The right side is evaluated as `2(q(t) − q(t+1))'G(q(t+1) − q̄)`, which is the same
/// quantity without the cancellation of three large squared norms.
pub fn telescoping_check(
    trace: &AdmmTrace,
    problem: &NetworkProblem,
    sd: &SpectralData,
    aux: &AuxSequences,
    opt: &OptimalPoint,
) -> Result<TelescopingReport, AnalysisError> {
    let c = trace.c;
    let zero = Array2::<f64>::zeros(aux.r_star.dim());
    let mut slack_zero = Vec::with_capacity(trace.len());
    let mut slack_star = Vec::with_capacity(trace.len());
    for t in 0..trace.len() {
        let next = trace.at(t + 1);
        let value_gap = problem.total_value(&next.x)? - opt.f_star;
        let qx = sd.apply_q(next.x.view());
        let dr = &aux.r[t] - &aux.r[t + 1];
        let dx = &trace.at(t).x - &next.x;
        let ex = &next.x - &opt.x_star;
        let x_part = 2.0 * (&sd.g_block.dot(&dx) * &ex).sum();
        let scale = 1.0
            + value_gap.abs()
            + frob_sq(&aux.r[t + 1]).sqrt() * frob_sq(&dr).sqrt()
            + x_part.abs();
        for (anchor, r, out) in [
            ("0", &zero, &mut slack_zero),
            ("r*", &aux.r_star, &mut slack_star),
        ] {
            let lhs = 2.0 / c * value_gap + 2.0 * (r * &qx).sum();
            let rhs = 2.0 * (&dr * &(&aux.r[t + 1] - r)).sum() + x_part;
            let slack = rhs - lhs;
            if slack < -BOUND_SLACK * scale {
                return Err(AnalysisError::TelescopingViolated {
                    t,
                    anchor,
                    slack,
                });
            }
            out.push(slack);
        }
    }
    Ok(TelescopingReport {
        slack_zero,
        slack_star,
    })
}

/// One row of the per-iteration trace file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub t: usize,
    pub obj_gap: f64,
    pub ergodic_obj_gap: f64,
    pub feasibility: f64,
    pub dist_sq: f64,
    pub gnorm_sq: f64,
    /// `NaN` when the previous G-distance is below the floor.
    pub contraction_ratio: f64,
    pub messages: usize,
}

pub fn diagnostics(
    trace: &AdmmTrace,
    problem: &NetworkProblem,
    sd: &SpectralData,
    opt: &OptimalPoint,
    aux: &AuxSequences,
) -> Result<Vec<DiagnosticRow>, AnalysisError> {
    let per_round = trace.accounting.messages_per_round;
    (1..=trace.len())
        .map(|t| {
            let s = trace.at(t);
            let obj_gap = problem.total_value(&s.x)? - opt.f_star;
            let ergodic_obj_gap = problem.total_value(&s.ergodic)? - opt.f_star;
            let qx = sd.apply_q(s.ergodic.view());
            let feasibility = frob_sq(&qx).sqrt();
            let prev = aux.gnorm_sq[t - 1];
            let contraction_ratio = if prev < DEFAULT_CONTRACTION_FLOOR {
                f64::NAN
            } else {
                aux.gnorm_sq[t] / prev
            };
            Ok(DiagnosticRow {
                t,
                obj_gap,
                ergodic_obj_gap,
                feasibility,
                dist_sq: aux.dist_sq[t],
                gnorm_sq: aux.gnorm_sq[t],
                contraction_ratio,
                messages: t * per_round,
            })
        })
        .collect()
}
