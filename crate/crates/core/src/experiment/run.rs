use std::fmt::Write as _;
use std::path::Path;

use crate::admm::{self, update_identity_residual, AdmmConfig, AdmmTrace, Engine, NetworkProblem, RoundAccounting};
use crate::analysis::{
    aux_sequences, certify, contraction_check, diagnostics, log_error_fit, optimize_rate,
    sublinear_bounds, sublinear_check, telescoping_check, DiagnosticRow, LogFit, RateCertificate,
    SublinearBound, DEFAULT_CONTRACTION_FLOOR,
};
use crate::objectives::{aggregate, central_solve, AggregateInfo, OptimalPoint};
use crate::spectral::{compute_spectral_data, SpectralData};

use super::config::{ExperimentConfig, Penalty};
use super::{trace_file, write_file, ExperimentError};

/// Largest update-identity residual accepted by the run checks.
pub const UPDATE_IDENTITY_TOL: f64 = 1e-8;
/// Largest node/edge iterate gap accepted by the equivalence check.
pub const EQUIVALENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything produced by one configured run.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub problem: NetworkProblem,
    pub spectral: SpectralData,
    pub optimal: OptimalPoint,
    pub aggregate: AggregateInfo,
    pub c: f64,
    pub certificate: Option<RateCertificate>,
    pub bounds: SublinearBound,
    pub trace: AdmmTrace,
    pub rows: Vec<DiagnosticRow>,
    /// Tail fit of `log₁₀‖x(t) − x*‖₂`.
    pub fit: Option<LogFit>,
    pub checks: Vec<CheckOutcome>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn accounting(&self) -> RoundAccounting {
        self.trace.accounting
    }

    pub fn trace_csv(&self) -> String {
        trace_file::render(self)
    }

    pub fn report(&self) -> String {
        render_report(self)
    }

    /// Writes `<stem>.csv` and `<stem>.report.txt` into `dir`, or the paths named in the
    /// config's `[output]` section when `dir` is `None`.
    pub fn write_outputs(&self, dir: Option<&Path>, stem: &str) -> Result<Vec<std::path::PathBuf>, ExperimentError> {
        let (trace, report) = match dir {
            Some(d) => (
                Some(d.join(format!("{stem}.csv"))),
                Some(d.join(format!("{stem}.report.txt"))),
            ),
            None => (self.config.output.trace.clone(), self.config.output.report.clone()),
        };
        let mut written = Vec::new();
        if let Some(p) = trace {
            write_file(&p, &self.trace_csv())?;
            written.push(p);
        }
        if let Some(p) = report {
            write_file(&p, &self.report())?;
            written.push(p);
        }
        Ok(written)
    }
}

fn resolve_penalty(
    cfg: &ExperimentConfig,
    sd: &SpectralData,
    info: &AggregateInfo,
    problem: &NetworkProblem,
) -> Result<f64, ExperimentError> {
    match cfg.penalty()? {
        Penalty::Fixed(c) => Ok(c),
        Penalty::Optimal { scale } => {
            let curv = info.require_curvature(problem.objectives())?;
            let cert = optimize_rate(curv.nu, curv.lipschitz, &sd.spectrum())?;
            Ok(cert.c_star * scale)
        }
    }
}

fn max_abs(a: &ndarray::Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Builds the problem, runs ADMM, evaluates the requested certificates.
///
/// Certificate failures are recorded in `checks`, not returned as errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let sd = compute_spectral_data(problem.comm(), problem.graph())?;
    let optimal = central_solve(problem.objectives())?;
    let info = aggregate(problem.objectives(), &optimal);
    let c = resolve_penalty(cfg, &sd, &info, &problem)?;
    let engine = cfg.engine()?;
    let init = cfg.build_init(problem.node_count())?;
    let admm_cfg = AdmmConfig::new(c, cfg.admm.iterations)
        .with_engine(engine)
        .with_init(init);
    let trace = admm::run(&problem, &admm_cfg)?;

    let certificate = match info.curvature {
        Some(k) => Some(certify(k.nu, k.lipschitz, c, &sd.spectrum())?),
        None => None,
    };
    let x_star_norm_sq = optimal.x_star.iter().map(|v| v * v).sum();
    let bounds = sublinear_bounds(info.u_bound, &sd.spectrum(), x_star_norm_sq, c);
    let aux = aux_sequences(&trace, &sd, &optimal, c);
    let rows = diagnostics(&trace, &problem, &sd, &optimal, &aux)?;
    let errors: Vec<f64> = aux.dist_sq[1..].iter().map(|d| d.sqrt()).collect();
    let fit = log_error_fit(&errors, 1).ok();

    let mut checks = Vec::new();
    let zero_start = cfg.is_zero_init();
    if cfg.checks.update_identity {
        let worst = update_identity_residual(&trace, &problem)
            .into_iter()
            .fold(0.0f64, f64::max);
        checks.push(CheckOutcome::new(
            "update_identity",
            worst <= UPDATE_IDENTITY_TOL,
            format!("max residual {worst:.3e} (tol {UPDATE_IDENTITY_TOL:e})"),
        ));
    }
    if cfg.checks.sublinear {
        if zero_start {
            let outcome = match sublinear_check(&trace, &problem, &bounds, &optimal, &sd) {
                Ok(r) => CheckOutcome::new(
                    "sublinear",
                    true,
                    format!(
                        "max T*|F(xhat)-F*| = {:.4e} <= {:.4e}; max T*||Q xhat|| = {:.4e} <= {:.4e}",
                        r.worst_scaled_objective,
                        bounds.objective_bound(1),
                        r.worst_scaled_feasibility,
                        bounds.feasibility_bound(1)
                    ),
                ),
                Err(e) => CheckOutcome::new("sublinear", false, e.to_string()),
            };
            checks.push(outcome);
        } else {
            checks.push(CheckOutcome::new("sublinear", true, "skipped: needs a zero start"));
        }
    }
    if cfg.checks.contraction {
        match &certificate {
            Some(cert) => {
                let outcome = match contraction_check(&aux, cert, DEFAULT_CONTRACTION_FLOOR) {
                    Ok(r) => CheckOutcome::new(
                        "contraction",
                        true,
                        format!(
                            "max ratio {} <= {:.6}{}",
                            r.max_ratio.map_or("n/a".into(), |m| format!("{m:.6}")),
                            r.bound,
                            if r.converged { " (converged)" } else { "" }
                        ),
                    ),
                    Err(e) => CheckOutcome::new("contraction", false, e.to_string()),
                };
                checks.push(outcome);
            }
            None => checks.push(CheckOutcome::new(
                "contraction",
                true,
                "skipped: objective is not smooth and strongly convex",
            )),
        }
    }
    if cfg.checks.telescoping {
        if zero_start || matches!(cfg.admm.init, super::InitSpec::Primal(_)) {
            let outcome = match telescoping_check(&trace, &problem, &sd, &aux, &optimal) {
                Ok(r) => {
                    let min = r
                        .slack_zero
                        .iter()
                        .chain(&r.slack_star)
                        .fold(f64::INFINITY, |m, v| m.min(*v));
                    CheckOutcome::new("telescoping", true, format!("min slack {min:.3e}"))
                }
                Err(e) => CheckOutcome::new("telescoping", false, e.to_string()),
            };
            checks.push(outcome);
        }
    }
    if cfg.checks.equivalence {
        let other = match engine {
            Engine::Node => Engine::Edge,
            Engine::Edge => Engine::Node,
        };
        let twin = admm::run(&problem, &admm_cfg.clone().with_engine(other))?;
        let worst = (1..=trace.len())
            .map(|t| max_abs(&(&trace.at(t).x - &twin.at(t).x)))
            .fold(0.0f64, f64::max);
        checks.push(CheckOutcome::new(
            "equivalence",
            worst <= EQUIVALENCE_TOL,
            format!("max node/edge gap {worst:.3e} (tol {EQUIVALENCE_TOL:e})"),
        ));
    }
    if let Some(min_r2) = cfg.checks.linear_fit_r2 {
        let outcome = match &fit {
            Some(f) => CheckOutcome::new(
                "linear_fit",
                f.r_squared >= min_r2 && f.slope < 0.0,
                format!("slope {:.6e}, R^2 {:.6} (min {min_r2})", f.slope, f.r_squared),
            ),
            None => CheckOutcome::new("linear_fit", false, "not enough nonzero errors to fit"),
        };
        checks.push(outcome);
    }

    Ok(ExperimentOutcome {
        config: cfg.clone(),
        problem,
        spectral: sd,
        optimal,
        aggregate: info,
        c,
        certificate,
        bounds,
        trace,
        rows,
        fit,
        checks,
    })
}

fn render_report(o: &ExperimentOutcome) -> String {
    let mut s = String::new();
    let g = o.problem.graph();
    let sd = &o.spectral;
    let _ = writeln!(s, "experiment: {}", o.config.name);
    let _ = writeln!(s, "nodes: {}", g.node_count());
    let _ = writeln!(s, "edges: {}", g.edge_count());
    let _ = writeln!(s, "degree range: [{}, {}]", g.min_degree(), g.max_degree());
    let _ = writeln!(s, "dimension: {}", o.problem.dim());
    let _ = writeln!(s, "algebraic connectivity a(G): {:.12}", sd.a_g);
    let _ = writeln!(s, "lambda_tilde_m: {:.12}", sd.lambda_tilde_m);
    let _ = writeln!(s, "lambda_M: {:.12}", sd.lambda_m);
    let _ = writeln!(s, "penalty c: {:.12}", o.c);
    let _ = writeln!(s, "rounds T: {}", o.trace.len());
    let _ = writeln!(s, "engine: {:?}", o.trace.engine);
    let xs = o.optimal.consensus_value();
    let _ = writeln!(
        s,
        "x*: [{}]",
        xs.iter().map(|v| format!("{v:.12}")).collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(s, "F*: {:.12}", o.optimal.f_star);
    let _ = writeln!(s, "U: {:.12}", o.aggregate.u_bound);
    match &o.certificate {
        Some(c) => {
            let _ = writeln!(s, "nu: {}", c.nu);
            let _ = writeln!(s, "L: {}", c.lipschitz);
            let _ = writeln!(s, "kappa_f: {}", c.kappa_f);
            let _ = writeln!(s, "beta at c: {:.12}", c.beta);
            let _ = writeln!(s, "delta at c: {:.12}", c.delta);
            let _ = writeln!(s, "rho at c: {:.12}", c.rho);
            let _ = writeln!(s, "c*: {:.12}", c.c_star);
            let _ = writeln!(s, "beta*: {:.12}", c.beta_star);
            let _ = writeln!(s, "delta*: {:.12}", c.delta_star);
            let _ = writeln!(s, "rho*: {:.12}", c.rho_star);
        }
        None => {
            let _ = writeln!(s, "linear-rate certificate: not available");
        }
    }
    let _ = writeln!(s, "objective bound constant (T*bound): {:.12}", o.bounds.objective_bound(1));
    let _ = writeln!(s, "feasibility bound constant (T*bound): {:.12}", o.bounds.feasibility_bound(1));
    if let Some(last) = o.rows.last() {
        let _ = writeln!(s, "final ||x(T)-x*||^2: {:.6e}", last.dist_sq);
        let _ = writeln!(s, "final ergodic objective gap: {:.6e}", last.ergodic_obj_gap);
        let _ = writeln!(s, "final feasibility ||Q xhat(T)||: {:.6e}", last.feasibility);
    }
    if let Some(f) = &o.fit {
        let _ = writeln!(s, "tail log10-error slope: {:.6e}", f.slope);
        let _ = writeln!(s, "tail fit R^2: {:.6}", f.r_squared);
    }
    let a = o.accounting();
    let _ = writeln!(s, "storage per network: {} vectors ({} scalars)", a.storage_vectors, a.storage_scalars);
    let _ = writeln!(
        s,
        "link messages per round: {} ({} phases x {})",
        a.messages_per_round, a.phases_per_round, a.messages_per_phase
    );
    let _ = writeln!(s, "edge-based storage for comparison: {} vectors", a.edge_storage_vectors);
    for c in &o.checks {
        let _ = writeln!(
            s,
            "check {}: {} ({})",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    let _ = writeln!(s, "overall: {}", if o.passed() { "PASS" } else { "FAIL" });
    s
}
