use dyadnet::srm::{assemble_design, linear_predictor, poisson_loglik, SrmSpec};
use dyadnet::synth::{simulate_stage1, SyntheticStage1, SyntheticTruth};
use dyadnet::Design;
use proptest::prelude::*;

fn synthetic(n: usize, seed: u64) -> SyntheticStage1 {
    simulate_stage1(&SyntheticTruth::benchmark(n, seed)).unwrap()
}

fn design(sim: &SyntheticStage1, spec: &SrmSpec) -> Design {
    assemble_design(&sim.nodes, &sim.dyads, &sim.network, spec).unwrap()
}

fn rich_spec(standardize: bool) -> SrmSpec {
    SrmSpec {
        standardize,
        ..SrmSpec::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn back_transform_reproduces_original_scale(
        seed in 0u64..1000,
        working in prop::collection::vec(-1.0f64..1.0, 32),
    ) {
        let sim = synthetic(12, seed);
        let std = design(&sim, &rich_spec(true));
        let raw = design(&sim, &rich_spec(false));
        prop_assert_eq!(std.columns(), raw.columns());
        let w = &working[..std.dim()];
        let original = std.transform().apply(w);
        for r in 0..std.rows() {
            let a = std.dot(r, w);
            let b = raw.dot(r, &original);
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "row {}: {} vs {}", r, a, b);
        }
    }

    #[test]
    fn linear_predictor_is_affine(
        seed in 0u64..1000,
        v in prop::collection::vec(-0.3f64..0.3, 4 * 90 + 64),
    ) {
        let sim = synthetic(10, seed);
        let d = design(&sim, &SyntheticTruth::benchmark(10, seed).spec);
        let (n, p, rows) = (d.node_count(), d.dim(), d.rows());
        let beta1 = &v[..p];
        let beta2 = &v[p..2 * p];
        let a = &v[16..16 + n];
        let b = &v[32..32 + n];
        let nu1 = &v[64..64 + rows];
        let nu2 = &v[64 + rows..64 + 2 * rows];
        let zero_b = vec![0.0; p];
        let zero_n = vec![0.0; n];
        let zero_r = vec![0.0; rows];
        let lp = |beta: &[f64], a: &[f64], b: &[f64], nu: &[f64]| {
            linear_predictor(&d, beta, a, b, nu).unwrap()
        };
        let sum = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p + q).collect() };
        let base = lp(&zero_b, &zero_n, &zero_n, &zero_r);
        let checks = [
            (lp(&sum(beta1, beta2), a, b, nu1), lp(beta1, a, b, nu1), lp(beta2, &zero_n, &zero_n, &zero_r)),
            (lp(beta1, a, b, &sum(nu1, nu2)), lp(beta1, a, b, nu1), lp(&zero_b, &zero_n, &zero_n, nu2)),
            (lp(beta1, &sum(a, b), b, nu1), lp(beta1, a, b, nu1), lp(&zero_b, b, &zero_n, &zero_r)),
        ];
        for (joint, left, right) in checks {
            for r in 0..rows {
                prop_assert!((joint[r] - (left[r] + right[r] - base[r])).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn every_ordered_pair_is_one_row() {
    let sim = synthetic(15, 3);
    let d = design(&sim, &rich_spec(true));
    assert_eq!(d.rows(), 15 * 14);
    let pairs = d.pair_rows();
    assert_eq!(pairs.len(), 15 * 14 / 2);
    let mut seen = vec![false; d.rows()];
    for (r1, r2) in pairs {
        let (i, j) = d.endpoints(r1);
        assert_eq!(d.endpoints(r2), (j, i));
        assert!(!seen[r1] && !seen[r2]);
        seen[r1] = true;
        seen[r2] = true;
    }
    assert!(seen.iter().all(|&s| s));
    assert_eq!(d.columns()[0], "(Intercept)");
}

#[test]
fn quality_covariates_dropped_unless_requested() {
    let sim = synthetic(12, 4);
    let d = design(&sim, &rich_spec(true));
    assert!(!d.columns().iter().any(|c| c.ends_with(":AM") || c.ends_with(":AR")));
    assert!(!d.provenance().quality_in_design);
    let with = design(
        &sim,
        &SrmSpec {
            include_quality: true,
            ..rich_spec(true)
        },
    );
    assert!(with.columns().iter().any(|c| c == "sender:AM"));
    assert!(with.provenance().quality_in_design);
}

#[test]
fn loglik_hand_value() {
    let ll = poisson_loglik(&[2.0_f64], &[2f64.ln()]).unwrap();
    assert!((ll - (2.0 * 2f64.ln() - 2.0 - 2f64.ln())).abs() < 1e-12);
}
