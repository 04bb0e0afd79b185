use dyadnet::mcmc::{fit_srm, McmcConfig};
use dyadnet::srm::{assemble_design, SrmSpec};
use dyadnet::synth::{node_ids, simulate_stage1, simulate_stage2, SyntheticStage1, SyntheticTruth};
use dyadnet::two_stage::{
    assemble_quality_design, effect_size, fit_quality_model, heatmap_export, overall_quality,
    predict_transfers, OwnershipFilter, PredictedTransfers, QualityModelSpec,
};
use dyadnet::Error;
use proptest::prelude::*;

proptest! {
    #[test]
    fn overall_quality_is_pairwise_sum(outcomes in prop::collection::vec(0i64..10_000, 3..20)) {
        let ids = node_ids(outcomes.len());
        let w = overall_quality(&ids, &outcomes).unwrap();
        for i in 0..ids.len() {
            for j in 0..ids.len() {
                if i != j {
                    prop_assert_eq!(w.get(i, j) as i64 - outcomes[i] - outcomes[j], 0);
                    prop_assert_eq!(w.get(i, j), w.get(j, i));
                }
            }
        }
    }

    #[test]
    fn effect_size_strictly_decreasing(a in -5.0f64..5.0, d in 1e-6f64..5.0) {
        prop_assert!(effect_size(a) > effect_size(a + d));
    }
}

fn stage1(n: usize, seed: u64) -> (SyntheticTruth, SyntheticStage1) {
    let truth = SyntheticTruth::benchmark(n, seed);
    let sim = simulate_stage1(&truth).unwrap();
    (truth, sim)
}

#[test]
fn predictions_do_not_depend_on_input_order() {
    let (truth, sim) = stage1(15, 1);
    let design = assemble_design(&sim.nodes, &sim.dyads, &sim.network, &truth.spec).unwrap();
    let samples = fit_srm(&design, &McmcConfig::short(100, 200, 4, 2)).unwrap();
    let that = predict_transfers(&samples, &design).unwrap();
    assert!(that.provenance.effects_excluded);
    assert!(!that.provenance.quality_in_design);
    let n = that.len();
    let order: Vec<usize> = (0..n).rev().collect();
    let net = sim.network.permuted(&order);
    let d2 = assemble_design(&sim.nodes, &sim.dyads, &net, &truth.spec).unwrap();
    let again = predict_transfers(&samples, &d2).unwrap();
    assert_eq!(that, again);
    for i in 0..n {
        for j in 0..n {
            assert!(i == j || that.values[i][j] > 0.0);
        }
    }
}

#[test]
fn quality_fit_is_refused_downstream() {
    let (_, sim) = stage1(15, 3);
    let spec = SrmSpec {
        include_quality: true,
        ..SrmSpec::default()
    };
    let design = assemble_design(&sim.nodes, &sim.dyads, &sim.network, &spec).unwrap();
    let samples = fit_srm(&design, &McmcConfig::short(50, 100, 2, 4)).unwrap();
    assert!(samples.provenance.quality_in_design);
    assert!(matches!(predict_transfers(&samples, &design), Err(Error::Provenance(_))));

    let mut that = sim.true_transfers().unwrap();
    that.provenance.effects_excluded = false;
    let w = overall_quality(sim.nodes.ids(), &vec![10; 15]).unwrap();
    let err = assemble_quality_design(&w, &that, &sim.nodes, &QualityModelSpec::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn design_has_declared_references() {
    let (truth, sim) = stage1(30, 5);
    let that = sim.true_transfers().unwrap();
    let w = simulate_stage2(&truth.stage2, &that, &sim.nodes, 6).unwrap();
    let spec = QualityModelSpec {
        interaction: true,
        ..QualityModelSpec::default()
    };
    let d = assemble_quality_design(&w, &that, &sim.nodes, &spec).unwrap();
    assert_eq!(d.rows(), 30 * 29 / 2);
    for name in ["OWN:public-public", "Teach:neither", "Mono:neither", "Techno:neither"] {
        assert!(d.column_index(name).is_none(), "{name} should be the reference");
    }
    for name in ["That", "OWN:private-private", "That:OWN:public-private", "Techno:one"] {
        assert!(d.column_index(name).is_some(), "{name} missing");
    }
}

#[test]
fn empty_category_is_named() {
    let (_, mut sim) = stage1(12, 7);
    sim.nodes.set_values("Public", &vec![1.0; 12]).unwrap();
    let that = sim.true_transfers().unwrap();
    let w = overall_quality(sim.nodes.ids(), &vec![5; 12]).unwrap();
    let err = assemble_quality_design(&w, &that, &sim.nodes, &QualityModelSpec::default()).unwrap_err();
    assert!(err.to_string().contains("OWN"), "{err}");
}

#[test]
fn interaction_flag_leaves_shared_parameters_alone_on_null_data() {
    let (truth, sim) = stage1(40, 8);
    let that = sim.true_transfers().unwrap();
    let w = simulate_stage2(&truth.stage2, &that, &sim.nodes, 9).unwrap();
    let cfg = McmcConfig::short(500, 2000, 5, 10);
    let off = fit_quality_model(
        &assemble_quality_design(&w, &that, &sim.nodes, &QualityModelSpec::default()).unwrap(),
        &cfg,
    )
    .unwrap();
    let on_spec = QualityModelSpec {
        interaction: true,
        ..QualityModelSpec::default()
    };
    let on = fit_quality_model(&assemble_quality_design(&w, &that, &sim.nodes, &on_spec).unwrap(), &cfg).unwrap();
    let off_s = off.summarize();
    let on_s = on.summarize();
    for name in ["HD", "DW", "OWN:private-private", "Teach:one", "sigma_u2"] {
        let a = off_s.iter().find(|s| s.parameter == name).unwrap();
        let b = on_s.iter().find(|s| s.parameter == name).unwrap();
        assert!(
            (a.mean - b.mean).abs() < a.sd.max(b.sd),
            "{name}: {} vs {} (sd {})",
            a.mean,
            b.mean,
            a.sd
        );
    }
    assert_eq!(on.marginal_slopes().len(), 3);
    assert!(off.marginal_slopes().is_empty());
}

#[test]
fn stage_two_recovers_a_strong_transfer_effect() {
    let mut truth = SyntheticTruth::full_table(100, 11);
    let sim = simulate_stage1(&truth).unwrap();
    truth.stage2.coefficients.insert("That".into(), -0.05);
    let that = sim.true_transfers().unwrap();
    let w = simulate_stage2(&truth.stage2, &that, &sim.nodes, 12).unwrap();
    let d = assemble_quality_design(&w, &that, &sim.nodes, &truth.stage2.spec).unwrap();
    let post = fit_quality_model(&d, &McmcConfig::short(500, 2000, 5, 13)).unwrap();
    let s = post.summarize();
    let row = s.iter().find(|r| r.parameter == "That").unwrap();
    assert!(row.covers(-0.05), "That {:?}", row);
    assert!(row.ci_upper < 0.0, "That {:?}", row);
}

#[test]
fn heatmap_sorted_and_flagged() {
    let (truth, sim) = stage1(40, 14);
    let that: PredictedTransfers = sim.true_transfers().unwrap();
    let w = simulate_stage2(&truth.stage2, &that, &sim.nodes, 15).unwrap();
    let d = assemble_quality_design(&w, &that, &sim.nodes, &truth.stage2.spec).unwrap();
    let post = fit_quality_model(&d, &McmcConfig::short(100, 200, 2, 16)).unwrap();
    let map = heatmap_export(&post, &sim.network, &sim.nodes, OwnershipFilter::All).unwrap();
    let hd = |id: &str| sim.nodes.require(id, "HD").unwrap();
    assert!(map.rows.windows(2).all(|p| hd(&p[0]) >= hd(&p[1])));
    assert_eq!(map.cells.len(), 40 * 39);
    for c in &map.cells {
        assert_eq!(c.is_zero, c.observed_transfers == 0);
        assert_eq!(c.log_value.is_none(), c.is_zero);
        assert!(c.predicted_outcome_per_discharge > 0.0);
    }
    let pp = heatmap_export(&post, &sim.network, &sim.nodes, OwnershipFilter::PublicPublic).unwrap();
    let public = |id: &str| sim.nodes.require(id, "Public").unwrap() == 1.0;
    assert!(pp.rows.iter().chain(&pp.cols).all(|id| public(id)));
}
