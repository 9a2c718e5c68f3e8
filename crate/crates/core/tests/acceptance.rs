//! Acceptance suite. Run with `cargo test -p netadmm --test acceptance -- --nocapture` to
//! see one PASS/FAIL line per criterion.

use ndarray::{array, Array1, Array2};
use netadmm::admm::{update_identity_residual, run, AdmmConfig, Engine, NetworkProblem};
use netadmm::analysis::{
    aux_sequences, certify, contraction_check, delta_terms, beta_star, laplacian_network_bounds,
    optimize_rate, sublinear_bounds, sublinear_check,
};
use netadmm::experiment::{figure1_configs, run_figure1, FIGURE1_MIN_R2};
use netadmm::graph::{generate_graph, laplacian, GraphKind};
use netadmm::objectives::{aggregate, central_solve, LocalObjective, SmoothFn};
use netadmm::spectral::{compute_spectral_data, psd_certificates, NetworkSpectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("[PASS] criterion {id:>2}: {title}: {detail}"),
        Err(detail) => {
            println!("[FAIL] criterion {id:>2}: {title}: {detail}");
            panic!("criterion {id} failed: {detail}");
        }
    }
}

fn estimation(kind: GraphKind, targets: &[f64]) -> NetworkProblem {
    let g = generate_graph(kind, targets.len()).unwrap();
    let p = laplacian(&g);
    let objs = targets
        .iter()
        .map(|&a| LocalObjective::quadratic(vec![a], 1.0))
        .collect();
    NetworkProblem::new(g, p, objs).unwrap()
}

fn triangle() -> NetworkProblem {
    estimation(GraphKind::Complete, &[1.0, 2.0, 3.0])
}

fn small_instances() -> Vec<(&'static str, NetworkProblem)> {
    vec![
        ("K3", triangle()),
        ("P3", estimation(GraphKind::Path, &[0.0, 0.0, 3.0])),
    ]
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn criterion_01_node_edge_equivalence() {
    let result = (|| {
        let mut worst = 0.0f64;
        for (name, prob) in small_instances() {
            for c in [0.25, 1.0, 4.0] {
                let node = run(&prob, &AdmmConfig::new(c, 100)).map_err(|e| e.to_string())?;
                let edge = run(&prob, &AdmmConfig::new(c, 100).with_engine(Engine::Edge))
                    .map_err(|e| e.to_string())?;
                for t in 1..=100 {
                    let gap = max_abs(&(&node.at(t).x - &edge.at(t).x));
                    if gap > 1e-9 {
                        return Err(format!("{name} c={c} t={t}: gap {gap:e}"));
                    }
                    worst = worst.max(gap);
                }
            }
        }
        Ok(format!("max gap {worst:.3e} <= 1e-9"))
    })();
    report(1, "node/edge ADMM equivalence", result);
}

#[test]
fn criterion_02_update_identity() {
    let result = (|| {
        let mut worst = 0.0f64;
        for (name, prob) in small_instances() {
            for c in [0.25, 1.0, 4.0] {
                for engine in [Engine::Node, Engine::Edge] {
                    let trace = run(&prob, &AdmmConfig::new(c, 100).with_engine(engine))
                        .map_err(|e| e.to_string())?;
                    for (t, r) in update_identity_residual(&trace, &prob).into_iter().enumerate() {
                        if r > 1e-8 {
                            return Err(format!("{name} c={c} {engine:?} t={t}: residual {r:e}"));
                        }
                        worst = worst.max(r);
                    }
                }
            }
        }
        Ok(format!("max residual {worst:.3e} <= 1e-8"))
    })();
    report(2, "perturbed linear update identity", result);
}

#[test]
fn criterion_03_first_iterate() {
    let result = (|| {
        let trace = run(&triangle(), &AdmmConfig::new(1.0, 1)).map_err(|e| e.to_string())?;
        let s = trace.at(1);
        // v_i = 0 at t = 0, so x_i(1) = a_i/(1 + c·M_ii) = a_i/7; y = Px/3 with P = 3I − J.
        let x = [1.0 / 7.0, 2.0 / 7.0, 3.0 / 7.0];
        let y = [-1.0 / 7.0, 0.0, 1.0 / 7.0];
        let mut worst = 0.0f64;
        for i in 0..3 {
            for (got, want) in [(s.x[[i, 0]], x[i]), (s.y[[i, 0]], y[i]), (s.p[[i, 0]], y[i])] {
                let e = (got - want).abs();
                if e > 1e-12 {
                    return Err(format!("node {i}: {got} vs {want}"));
                }
                worst = worst.max(e);
            }
        }
        Ok(format!("max entry error {worst:.3e} <= 1e-12"))
    })();
    report(3, "first-iterate ground truth", result);
}

#[test]
fn criterion_04_sublinear_bounds() {
    let result = (|| {
        let prob = triangle();
        let sd = compute_spectral_data(prob.comm(), prob.graph()).map_err(|e| e.to_string())?;
        let opt = central_solve(prob.objectives()).map_err(|e| e.to_string())?;
        let info = aggregate(prob.objectives(), &opt);
        // hand constants: λ_M = 6, λ̃ = 3, ‖x*‖² = 12, U² = 2
        let hand = sublinear_bounds(2f64.sqrt(), &NetworkSpectrum { lambda_tilde_m: 3.0, lambda_m: 6.0 }, 12.0, 1.0);
        let bounds = sublinear_bounds(info.u_bound, &sd.spectrum(), 12.0, 1.0);
        if (bounds.objective_bound(1) - hand.objective_bound(1)).abs() > 1e-9 {
            return Err(format!("objective constant {}", bounds.objective_bound(1)));
        }
        let trace = run(&prob, &AdmmConfig::new(1.0, 1000)).map_err(|e| e.to_string())?;
        let rep = sublinear_check(&trace, &prob, &bounds, &opt, &sd).map_err(|e| e.to_string())?;
        for (k, gap) in rep.objective_gap.iter().enumerate() {
            let t = (k + 1) as f64;
            if *gap > 37.34 / t + 1e-9 {
                return Err(format!("T={t}: objective gap {gap:e} > 37.34/T"));
            }
        }
        Ok(format!(
            "max T*|F-F*| = {:.4} <= 37.34, max T*||Q xhat|| = {:.4} <= {:.4}",
            rep.worst_scaled_objective,
            rep.worst_scaled_feasibility,
            bounds.feasibility_bound(1)
        ))
    })();
    report(4, "O(1/T) objective and feasibility bounds", result);
}

#[test]
fn criterion_05_linear_rate() {
    let result = (|| {
        let prob = triangle();
        let sd = compute_spectral_data(prob.comm(), prob.graph()).map_err(|e| e.to_string())?;
        let opt = central_solve(prob.objectives()).map_err(|e| e.to_string())?;
        let cert = optimize_rate(1.0, 1.0, &sd.spectrum()).map_err(|e| e.to_string())?;
        if (cert.c_star - 0.2582).abs() > 1e-4 || (cert.rho_star - 0.7208).abs() > 1e-4 {
            return Err(format!("c* = {}, rho = {}", cert.c_star, cert.rho_star));
        }
        let trace = run(&prob, &AdmmConfig::new(cert.c_star, 300)).map_err(|e| e.to_string())?;
        let aux = aux_sequences(&trace, &sd, &opt, cert.c_star);
        let rep = contraction_check(&aux, &cert, 1e-20).map_err(|e| e.to_string())?;
        let g0 = aux.gnorm_sq[0];
        for (t, d) in aux.dist_sq.iter().enumerate() {
            if t >= 1 && *d > cert.rho.powi(t as i32) * g0 + 1e-9 {
                return Err(format!("t={t}: ||x-x*||^2 = {d:e} above rho^t G0"));
            }
        }
        Ok(format!(
            "max G-norm ratio {:.6} <= {:.6} over {} rounds",
            rep.max_ratio.unwrap_or(0.0),
            rep.bound,
            rep.ratios.iter().filter(|r| r.is_some()).count()
        ))
    })();
    report(5, "G-norm linear contraction at c*", result);
}

#[test]
fn criterion_06_certificate_consistency() {
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut worst_rel = 0.0f64;
        let mut worst_gap = 0.0f64;
        for k in 0..50 {
            let n = rng.gen_range(4..=30);
            let p = rng.gen_range(0.2..0.9);
            let g = generate_graph(GraphKind::ErdosRenyi { p, seed: 1000 + k }, n)
                .map_err(|e| e.to_string())?;
            let sd = compute_spectral_data(&laplacian(&g), &g).map_err(|e| e.to_string())?;
            let s = sd.spectrum();
            let nu = 10f64.powf(rng.gen_range(-1.0..1.0));
            let lip = nu * 10f64.powf(rng.gen_range(0.0..3.0));
            let cert = optimize_rate(nu, lip, &s).map_err(|e| e.to_string())?;
            // independent closed form
            let kk = s.lambda_m * (2.0 + s.lambda_tilde_m);
            let closed = 0.5 * (2.0 * s.lambda_tilde_m.powi(2) / (kk * lip / nu)).sqrt();
            let c = cert.c_star;
            let numeric = 2.0 * nu * s.lambda_tilde_m * c / (2.0 * nu * lip + c * c * kk);
            let rel = (numeric - closed).abs() / closed;
            if rel > 1e-6 {
                return Err(format!("tuple {k}: delta(c*) = {numeric}, closed form {closed}"));
            }
            worst_rel = worst_rel.max(rel);
            for c in [0.01, c, 1.0, 50.0] {
                let b = beta_star(nu, lip, c, &s).map_err(|e| e.to_string())?;
                let (t1, t2) = delta_terms(nu, lip, c, b, &s).map_err(|e| e.to_string())?;
                let gap = (t1 - t2).abs() / t1.abs().max(1.0);
                if gap > 1e-12 {
                    return Err(format!("tuple {k}, c={c}: terms {t1} vs {t2}"));
                }
                worst_gap = worst_gap.max(gap);
            }
        }
        Ok(format!(
            "50 tuples: max rel error {worst_rel:.2e} <= 1e-6, max term gap {worst_gap:.2e} <= 1e-12"
        ))
    })();
    report(6, "rate certificate internal consistency", result);
}

#[test]
fn criterion_07_spectral_inequalities() {
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut failures = Vec::new();
        for k in 0..25 {
            let n = rng.gen_range(4..=40);
            let g = generate_graph(GraphKind::ErdosRenyi { p: 0.5, seed: 7000 + k }, n)
                .map_err(|e| e.to_string())?;
            let sd = compute_spectral_data(&laplacian(&g), &g).map_err(|e| e.to_string())?;
            let r = laplacian_network_bounds(&sd, &g).map_err(|e| e.to_string())?;
            let psd = psd_certificates(&sd).map_err(|e| e.to_string())?;
            let checks = [
                ("sandwich", r.sandwich_holds()),
                ("lambda_M bound", r.lambda_m_bound_holds()),
                ("complexity bound", r.complexity_bound_holds()),
                ("min eig W", psd.min_eig_w >= -1e-10),
                ("min eig M-W", psd.min_eig_g >= -1e-10),
            ];
            for (what, ok) in checks {
                if !ok {
                    failures.push(format!("graph {k} (n={n}): {what}"));
                }
            }
        }
        if failures.is_empty() {
            Ok("25 random connected graphs, all four families of inequalities hold".into())
        } else {
            Err(failures.join("; "))
        }
    })();
    report(7, "Laplacian spectral inequalities", result);
}

fn check_pair_properties(
    name: &str,
    f: &LocalObjective,
    nu: Option<f64>,
    lip: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let d = f.dim();
    let sample = |rng: &mut ChaCha8Rng| Array1::from_iter((0..d).map(|_| rng.gen_range(-5.0..5.0)));
    for k in 0..1000 {
        let x = sample(rng);
        let y = sample(rng);
        let v = sample(rng);
        let rho = 10f64.powf(rng.gen_range(-2.0..2.0));
        let px = f.prox(v.view(), rho).map_err(|e| e.to_string())?;
        let res = f.prox_residual(v.view(), rho, px.view()).map_err(|e| e.to_string())?;
        if res > 1e-10 * rho * (1.0 + v.dot(&v).sqrt()) {
            return Err(format!("{name} pair {k}: prox residual {res:e} at rho={rho}"));
        }
        let gx = f.gradient(x.view()).map_err(|e| e.to_string())?;
        let gy = f.gradient(y.view()).map_err(|e| e.to_string())?;
        let dx = &x - &y;
        let dg = &gx - &gy;
        if f.is_smooth() {
            for j in 0..d {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (f.value(xp.view()).unwrap() - f.value(xm.view()).unwrap()) / (2.0 * h);
                if (fd - gx[j]).abs() > 1e-5 * gx[j].abs().max(1.0) {
                    return Err(format!("{name} pair {k}: gradient {} vs finite difference {fd}", gx[j]));
                }
            }
        } else {
            let gap = f.value(x.view()).unwrap() - f.value(y.view()).unwrap();
            if gx.dot(&dx) < gap - 1e-10 {
                return Err(format!("{name} pair {k}: subgradient inequality"));
            }
        }
        if let (Some(nu), Some(lip)) = (nu, lip) {
            let inner = dg.dot(&dx);
            if inner < nu * dx.dot(&dx) - 1e-9 {
                return Err(format!("{name} pair {k}: strong convexity"));
            }
            if inner < dg.dot(&dg) / lip - 1e-9 {
                return Err(format!("{name} pair {k}: co-coercivity"));
            }
        }
    }
    Ok(())
}

#[test]
fn criterion_09_objective_properties() {
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let logistic = LocalObjective::Smooth(SmoothFn::new(
            3,
            0.5,
            0.75,
            |x| x.iter().map(|v| (1.0 + v.exp()).ln()).sum::<f64>() + 0.25 * x.dot(&x),
            |x| x.mapv(|v| 1.0 / (1.0 + (-v).exp())) + &x.mapv(|v| 0.5 * v),
        ));
        let kinds: Vec<(&str, LocalObjective, Option<f64>, Option<f64>)> = vec![
            ("quadratic", LocalObjective::quadratic(vec![1.0, -2.0, 0.5], 2.5), Some(2.5), Some(2.5)),
            ("l1_quadratic", LocalObjective::l1_quadratic(vec![0.5, 1.0, -3.0], 1.5, 0.7), None, None),
            (
                "l1_coupled",
                LocalObjective::l1_coupled(
                    vec![1.0, 0.0, -1.0],
                    array![[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 0.8]],
                    0.4,
                ),
                None,
                None,
            ),
            ("smooth_custom", logistic, Some(0.5), Some(0.75)),
        ];
        for (name, f, nu, lip) in &kinds {
            check_pair_properties(name, f, *nu, *lip, &mut rng)?;
        }
        Ok("1000 randomized pairs per kind across 4 kinds".into())
    })();
    report(9, "objective-layer properties", result);
}

#[test]
fn criterion_08_figure1_reproduction() {
    let result = (|| {
        let out = run_figure1(&figure1_configs(), true).map_err(|e| e.to_string())?;
        let mut parts = Vec::new();
        for r in &out.runs {
            let fit = r.fit.ok_or_else(|| format!("{}: no fit", r.config.name))?;
            if fit.r_squared < FIGURE1_MIN_R2 {
                return Err(format!("{}: R^2 {:.4} < {FIGURE1_MIN_R2}", r.config.name, fit.r_squared));
            }
            parts.push(format!("{} slope {:.4e} R^2 {:.5}", r.config.name, fit.slope, fit.r_squared));
        }
        if !out.ordering.passed {
            return Err(format!("slopes not strictly decreasing: {}", out.ordering.detail));
        }
        Ok(parts.join(", "))
    })();
    report(8, "regular-graph slope ordering", result);
}

#[test]
fn criterion_10_determinism() {
    let result = (|| {
        let a = run_figure1(&figure1_configs(), true).map_err(|e| e.to_string())?;
        let b = run_figure1(&figure1_configs(), false).map_err(|e| e.to_string())?;
        for (x, y) in a.runs.iter().zip(&b.runs) {
            if x.trace_csv() != y.trace_csv() {
                return Err(format!("{}: CSV differs between runs", x.config.name));
            }
        }
        Ok("concurrent and sequential figure1 runs give byte-identical CSVs".into())
    })();
    report(10, "determinism", result);
}

#[test]
fn certificate_at_unit_penalty_contracts() {
    // Companion to criterion 5 at c = 1 where δ = 0.1875.
    let prob = triangle();
    let sd = compute_spectral_data(prob.comm(), prob.graph()).unwrap();
    let opt = central_solve(prob.objectives()).unwrap();
    let cert = certify(1.0, 1.0, 1.0, &sd.spectrum()).unwrap();
    assert!((cert.delta - 0.1875).abs() < 1e-12);
    let trace = run(&prob, &AdmmConfig::new(1.0, 300)).unwrap();
    let aux = aux_sequences(&trace, &sd, &opt, 1.0);
    let rep = contraction_check(&aux, &cert, 1e-20).unwrap();
    assert!(rep.max_ratio.unwrap() <= 1.0 / 1.1875 + 1e-9);
}
