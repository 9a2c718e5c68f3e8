use ndarray::Array2;
use netadmm::analysis::laplacian_network_bounds;
use netadmm::graph::{generate_graph, laplacian, GraphKind};
use netadmm::spectral::{compute_spectral_data, psd_certificates};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = GraphKind> {
    prop_oneof![
        Just(GraphKind::Path),
        Just(GraphKind::Cycle),
        Just(GraphKind::Complete),
        (0.2..0.9f64, any::<u64>()).prop_map(|(p, seed)| GraphKind::ErdosRenyi { p, seed }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_inequalities(kind in kind(), n in 3usize..25) {
        let g = generate_graph(kind, n).unwrap();
        let sd = compute_spectral_data(&laplacian(&g), &g).unwrap();
        let r = laplacian_network_bounds(&sd, &g).unwrap();
        prop_assert!(r.sandwich_holds(), "{r:?}");
        prop_assert!(r.lambda_m_bound_holds(), "{r:?}");
        prop_assert!(r.degree_replacements_hold(), "{r:?}");
        let psd = psd_certificates(&sd).unwrap();
        prop_assert!(psd.min_eig_w >= -1e-10 && psd.min_eig_g >= -1e-10);
    }

    #[test]
    fn consensus_lies_in_the_null_space(kind in kind(), n in 3usize..25) {
        let g = generate_graph(kind, n).unwrap();
        let sd = compute_spectral_data(&laplacian(&g), &g).unwrap();
        let ones = Array2::<f64>::ones((n, 1));
        let scale = 1.0 + sd.lambda_m;
        for v in [sd.w.dot(&ones), sd.apply_q(ones.view())] {
            prop_assert!(v.iter().all(|e| e.abs() < 1e-9 * scale));
        }
        // Q² reproduces W
        let q2 = sd.q.dot(&sd.q);
        prop_assert!((&q2 - &sd.w).iter().all(|e| e.abs() < 1e-8 * scale));
    }
}

#[test]
fn regular_circulant_has_equal_degrees() {
    let g = generate_graph(GraphKind::Circulant { degree: 4 }, 12).unwrap();
    assert!(g.degrees().iter().all(|&d| d == 4));
    let sd = compute_spectral_data(&laplacian(&g), &g).unwrap();
    assert!(laplacian_network_bounds(&sd, &g).unwrap().all_hold());
}
