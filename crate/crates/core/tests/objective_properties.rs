use ndarray::{Array1, Array2};
use netadmm::objectives::{soft_threshold, LocalObjective};
use proptest::prelude::*;

const DIM: usize = 3;

fn vec3() -> impl Strategy<Value = Array1<f64>> {
    prop::collection::vec(-10.0..10.0f64, DIM).prop_map(Array1::from)
}

/// Symmetric positive definite `AᵀA + εI`.
fn spd() -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-2.0..2.0f64, DIM * DIM).prop_map(|v| {
        let a = Array2::from_shape_vec((DIM, DIM), v).unwrap();
        a.t().dot(&a) + Array2::<f64>::eye(DIM) * 0.1
    })
}

fn objective() -> impl Strategy<Value = LocalObjective> {
    prop_oneof![
        (vec3(), 0.1..10.0f64).prop_map(|(a, w)| LocalObjective::quadratic(a.to_vec(), w)),
        (vec3(), 0.1..10.0f64, 0.0..3.0f64)
            .prop_map(|(a, w, tau)| LocalObjective::l1_quadratic(a.to_vec(), w, tau)),
        (vec3(), spd(), 0.0..3.0f64)
            .prop_map(|(a, h, tau)| LocalObjective::l1_coupled(a.to_vec(), h, tau)),
    ]
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prox_is_nonexpansive(f in objective(), u in vec3(), v in vec3(), rho in 0.01..100.0f64) {
        let pu = f.prox(u.view(), rho).unwrap();
        let pv = f.prox(v.view(), rho).unwrap();
        prop_assert!(norm(&(&pu - &pv)) <= norm(&(&u - &v)) * (1.0 + 1e-8) + 1e-10);
    }

    #[test]
    fn prox_solves_its_optimality_condition(f in objective(), v in vec3(), rho in 0.01..100.0f64) {
        let p = f.prox(v.view(), rho).unwrap();
        let res = f.prox_residual(v.view(), rho, p.view()).unwrap();
        prop_assert!(res <= 1e-10 * rho * (1.0 + norm(&v)), "residual {res:e}");
    }

    #[test]
    fn prox_beats_nearby_points(f in objective(), v in vec3(), rho in 0.01..100.0f64, dir in vec3()) {
        let p = f.prox(v.view(), rho).unwrap();
        let obj = |x: &Array1<f64>| f.value(x.view()).unwrap() + 0.5 * rho * (x - &v).dot(&(x - &v));
        let q = &p + &(&dir * 1e-3);
        prop_assert!(obj(&p) <= obj(&q) + 1e-9);
    }

    #[test]
    fn gradient_is_a_subgradient(f in objective(), x in vec3(), y in vec3()) {
        let g = f.gradient(x.view()).unwrap();
        let lhs = f.value(y.view()).unwrap();
        let rhs = f.value(x.view()).unwrap() + g.dot(&(&y - &x));
        prop_assert!(lhs >= rhs - 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn smooth_curvature_bounds(a in vec3(), w in 0.1..10.0f64, x in vec3(), y in vec3()) {
        let f = LocalObjective::quadratic(a.to_vec(), w);
        let c = f.curvature().unwrap();
        let dx = &x - &y;
        let dg = f.gradient(x.view()).unwrap() - f.gradient(y.view()).unwrap();
        let inner = dg.dot(&dx);
        prop_assert!(inner >= c.nu * dx.dot(&dx) - 1e-9);
        prop_assert!(inner >= dg.dot(&dg) / c.lipschitz - 1e-9);
    }

    #[test]
    fn soft_threshold_is_shrinkage(v in -10.0..10.0f64, t in 0.0..5.0f64) {
        let s = soft_threshold(v, t);
        prop_assert!(s.abs() <= v.abs());
        prop_assert!((v - s).abs() <= t + 1e-15);
        prop_assert!(s == 0.0 || s.signum() == v.signum());
    }
}

#[test]
fn smooth_quadratic_gradient_matches_finite_differences() {
    let f = LocalObjective::quadratic(vec![1.0, -2.0, 0.5], 3.0);
    let x = Array1::from(vec![0.3, 0.7, -1.1]);
    let g = f.gradient(x.view()).unwrap();
    for j in 0..DIM {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += 1e-6;
        xm[j] -= 1e-6;
        let fd = (f.value(xp.view()).unwrap() - f.value(xm.view()).unwrap()) / 2e-6;
        assert!((fd - g[j]).abs() < 1e-5 * g[j].abs().max(1.0));
    }
}
