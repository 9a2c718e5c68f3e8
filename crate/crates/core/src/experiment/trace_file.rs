use std::fmt::Write as _;

use crate::analysis::{DiagnosticRow, BOUND_SLACK};

use super::run::{run_experiment, CheckOutcome, ExperimentOutcome};
use super::{ExperimentConfig, ExperimentError};

pub const TRACE_VERSION: &str = "netadmm-trace v1";
pub const TRACE_COLUMNS: [&str; 8] = [
    "t",
    "obj_gap",
    "ergodic_obj_gap",
    "feasibility",
    "dist_sq",
    "gnorm_sq",
    "contraction_ratio",
    "messages",
];

pub(crate) fn render(o: &ExperimentOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# {TRACE_VERSION} name={} n={} d={} c={:.17e} T={} engine={}",
        o.config.name,
        o.problem.node_count(),
        o.problem.dim(),
        o.c,
        o.trace.len(),
        o.config.admm.engine
    );
    let _ = writeln!(s, "{}", TRACE_COLUMNS.join(","));
    for r in &o.rows {
        let _ = writeln!(
            s,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            r.t,
            r.obj_gap,
            r.ergodic_obj_gap,
            r.feasibility,
            r.dist_sq,
            r.gnorm_sq,
            r.contraction_ratio,
            r.messages
        );
    }
    s
}

/// A parsed trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub header: String,
    pub rows: Vec<DiagnosticRow>,
}

pub fn parse_trace(text: &str) -> Result<TraceFile, ExperimentError> {
    let err = |line: usize, message: String| ExperimentError::TraceParse { line, message };
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) if h.starts_with(&format!("# {TRACE_VERSION}")) => h.to_string(),
        Some((_, h)) => return Err(err(1, format!("expected '# {TRACE_VERSION}' header, got {h:?}"))),
        None => return Err(err(1, "empty trace file".into())),
    };
    match lines.next() {
        Some((_, cols)) if cols == TRACE_COLUMNS.join(",") => {}
        Some((_, cols)) => return Err(err(2, format!("unexpected columns {cols:?}"))),
        None => return Err(err(2, "missing column header".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != TRACE_COLUMNS.len() {
            return Err(err(lineno, format!("expected {} fields, got {}", TRACE_COLUMNS.len(), fields.len())));
        }
        let float = |k: usize| {
            fields[k]
                .parse::<f64>()
                .map_err(|e| err(lineno, format!("{}: {e}", TRACE_COLUMNS[k])))
        };
        let int = |k: usize| {
            fields[k]
                .parse::<usize>()
                .map_err(|e| err(lineno, format!("{}: {e}", TRACE_COLUMNS[k])))
        };
        rows.push(DiagnosticRow {
            t: int(0)?,
            obj_gap: float(1)?,
            ergodic_obj_gap: float(2)?,
            feasibility: float(3)?,
            dist_sq: float(4)?,
            gnorm_sq: float(5)?,
            contraction_ratio: float(6)?,
            messages: int(7)?,
        });
    }
    Ok(TraceFile { header, rows })
}

/// Re-checks a trace file against the certificates implied by its config, and against a
/// fresh run of that config.
pub fn replay_check(text: &str, cfg: &ExperimentConfig) -> Result<Vec<CheckOutcome>, ExperimentError> {
    let file = parse_trace(text)?;
    let fresh = run_experiment(cfg)?;
    let mut out = Vec::new();
    let pass = |name: &str, ok: bool, detail: String| CheckOutcome {
        name: name.into(),
        passed: ok,
        detail,
    };

    let expected_t: Vec<usize> = (1..=cfg.admm.iterations).collect();
    let got_t: Vec<usize> = file.rows.iter().map(|r| r.t).collect();
    out.push(pass(
        "rows",
        got_t == expected_t,
        format!("{} rows, expected {}", got_t.len(), expected_t.len()),
    ));

    if cfg.is_zero_init() {
        let bad = file.rows.iter().find(|r| {
            r.ergodic_obj_gap.abs() > fresh.bounds.objective_bound(r.t) + BOUND_SLACK
        });
        out.push(pass(
            "sublinear_objective",
            bad.is_none(),
            bad.map_or("all rows within bound".into(), |r| format!("violated at t = {}", r.t)),
        ));
        let bad = file
            .rows
            .iter()
            .find(|r| r.feasibility > fresh.bounds.feasibility_bound(r.t) + BOUND_SLACK);
        out.push(pass(
            "sublinear_feasibility",
            bad.is_none(),
            bad.map_or("all rows within bound".into(), |r| format!("violated at t = {}", r.t)),
        ));
    }

    if let Some(cert) = &fresh.certificate {
        // NaN marks rounds whose previous distance was below the floor
        let bad = file
            .rows
            .iter()
            .find(|r| !r.contraction_ratio.is_nan() && r.contraction_ratio > cert.rho + BOUND_SLACK);
        out.push(pass(
            "contraction",
            bad.is_none(),
            match bad {
                Some(r) => format!("ratio {:.6} above {:.6} at t = {}", r.contraction_ratio, cert.rho, r.t),
                None => format!("all ratios <= {:.6}", cert.rho),
            },
        ));
    }

    let same = fresh.trace_csv() == text;
    out.push(pass(
        "reproducible",
        same,
        if same {
            "fresh run reproduces the file byte for byte".into()
        } else {
            "fresh run differs from the file".into()
        },
    ));
    Ok(out)
}
