use proptest::prelude::*;
use seirah_core::inference::{forward_loss, infer_beta_day, search_beta, Evaluation};
use seirah_core::{Indicator, InferenceConfig, Scenario, SimState, Status};

fn uniform(days: usize) -> Vec<Indicator> {
    vec![Indicator::Uniform(1.0); days]
}

#[test]
fn true_beta_beats_a_distant_one() {
    let mut wins = 0;
    let cfg = InferenceConfig::default();
    for s in 0..100u64 {
        let sc = Scenario::toy(2000 + s);
        let topo = sc.build_topology().unwrap();
        let truth = sc.simulate_with_seed(&topo, &[0.15; 8], &uniform(8), s.wrapping_mul(0x9e37)).unwrap();
        let observed: Vec<u64> = truth.iter().map(|c| c.new_h).collect();
        let snap = sc.initial_state(&topo).unwrap().snapshot();
        let model = sc.model(&topo);
        let near = forward_loss(&snap, model, 0.15, &observed, &uniform(8), &cfg, s).unwrap();
        let far = forward_loss(&snap, model, 0.6, &observed, &uniform(8), &cfg, s).unwrap();
        wins += (near.loss < far.loss) as usize;
    }
    assert!(wins >= 95, "{wins}/100");
}

#[test]
fn replicate_means_increase_with_beta() {
    let mut cfg = InferenceConfig::default();
    cfg.replicates = 60;
    for s in 0..3u64 {
        let sc = Scenario::toy(40 + s);
        let topo = sc.build_topology().unwrap();
        let mut st = sc.initial_state(&topo).unwrap();
        st.simulate_horizon(&topo, &sc.thresholds, &[0.15; 3], &uniform(3), 3).unwrap();
        let snap = st.snapshot();
        let mut last = -1.0;
        for beta in [0.0, 0.05, 0.1, 0.2, 0.4, 0.8] {
            let eval = forward_loss(&snap, sc.model(&topo), beta, &[0; 8], &uniform(8), &cfg, s).unwrap();
            let mean: f64 = eval.predicted.iter().sum::<f64>() / eval.predicted.len() as f64;
            assert!(mean >= last, "seed {s} beta {beta}: {mean} < {last}");
            last = mean;
        }
    }
}

#[test]
fn forward_loss_leaves_the_snapshot_untouched() {
    let sc = Scenario::toy(3);
    let topo = sc.build_topology().unwrap();
    let st = sc.initial_state(&topo).unwrap();
    let snap = st.snapshot();
    let cfg = InferenceConfig::default();
    let a = forward_loss(&snap, sc.model(&topo), 0.2, &[1; 8], &uniform(8), &cfg, 1).unwrap();
    let b = forward_loss(&snap, sc.model(&topo), 0.2, &[1; 8], &uniform(8), &cfg, 1).unwrap();
    assert_eq!(a, b);
    assert_eq!(snap.day(), 0);
}

#[test]
fn single_term_loss_is_a_square() {
    // all nodes in I: the next day's admissions are Binomial(n, 0.95), never beta dependent
    let sc = Scenario::toy(3);
    let topo = sc.build_topology().unwrap();
    let n = topo.node_count();
    let st = SimState::from_statuses(vec![Status::I; n], 0);
    let mut cfg = InferenceConfig::default();
    cfg.window = 0;
    cfg.replicates = 1;
    let eval = forward_loss(&st.snapshot(), sc.model(&topo), 0.5, &[10], &uniform(1), &cfg, 0).unwrap();
    let predicted = eval.predicted[0];
    assert_eq!(eval.loss, (predicted - 10.0).powi(2));
}

#[test]
fn perfect_prediction_has_zero_loss() {
    let sc = Scenario::toy(4);
    let topo = sc.build_topology().unwrap();
    let st = sc.initial_state(&topo).unwrap();
    let mut cfg = InferenceConfig::default();
    cfg.replicates = 1;
    let snap = st.snapshot();
    let probe = forward_loss(&snap, sc.model(&topo), 0.3, &[0; 8], &uniform(8), &cfg, 77).unwrap();
    let observed: Vec<u64> = probe.predicted.iter().map(|&x| x as u64).collect();
    let again = forward_loss(&snap, sc.model(&topo), 0.3, &observed, &uniform(8), &cfg, 77).unwrap();
    assert_eq!(again.loss, 0.0);
}

#[test]
fn zero_branch_skips_simulation() {
    let sc = Scenario::toy(6);
    let topo = sc.build_topology().unwrap();
    let st = SimState::new(topo.node_count(), 0);
    let est = infer_beta_day(&st, sc.model(&topo), &[3; 8], &uniform(8), 0.7, &InferenceConfig::default(), 0).unwrap();
    assert_eq!(est.beta, 0.0);
    assert_eq!(est.evaluations, 0);
}

#[test]
fn all_zero_observations_with_no_seeds() {
    let mut sc = Scenario::toy(6);
    sc.seeding.exposed_per_region = 0;
    let topo = sc.build_topology().unwrap();
    let series = sc.infer(&topo, &[0; 15], &uniform(15)).unwrap();
    assert_eq!(series.betas(), vec![0.0; 15]);
}

#[test]
fn inference_is_reproducible() {
    let mut sc = Scenario::toy(14);
    sc.inference.replicates = 4;
    let topo = sc.build_topology().unwrap();
    let observed: Vec<u64> = sc
        .simulate_with_seed(&topo, &[0.2; 12], &uniform(12), 5)
        .unwrap()
        .iter()
        .map(|c| c.new_h)
        .collect();
    let a = sc.infer(&topo, &observed, &uniform(12)).unwrap();
    let b = sc.infer(&topo, &observed, &uniform(12)).unwrap();
    assert_eq!(a, b);
    assert!(a.betas().iter().all(|b| (0.0..=1.0).contains(b)));
    assert!(a.days.iter().all(|d| d.loss >= 0.0));
}

#[test]
fn short_indicator_series_is_an_error() {
    let sc = Scenario::toy(1);
    let topo = sc.build_topology().unwrap();
    assert!(sc.infer(&topo, &[1; 10], &uniform(4)).is_err());
    assert!(sc.infer(&topo, &[], &uniform(4)).is_err());
}

fn quadratic(target: f64) -> impl FnMut(f64) -> seirah_core::Result<Evaluation> {
    move |b| {
        Ok(Evaluation {
            loss: (b - target).powi(2),
            predicted: vec![],
        })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn search_stays_in_range_and_terminates(prior in 0.0f64..=1.0, eps in 0.001f64..0.5, losses in prop::collection::vec(0.0f64..10.0, 64)) {
        let cfg = InferenceConfig { epsilon: eps, ..InferenceConfig::default() };
        let mut i = 0;
        let est = search_beta(prior, &cfg, |_| {
            i += 1;
            Ok(Evaluation { loss: losses[i % losses.len()], predicted: vec![] })
        }).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.beta));
        prop_assert!(est.converged);
        let bound = (1.0 / eps).log2().ceil() as usize + 1;
        prop_assert!(est.iterations <= bound);
        prop_assert_eq!(est.evaluations, est.iterations + 3);
    }

    #[test]
    fn convex_loss_is_found_from_a_central_prior(target in 0.0f64..=1.0) {
        let cfg = InferenceConfig::default();
        let est = search_beta(0.5, &cfg, quadratic(target)).unwrap();
        prop_assert!((est.beta - target).abs() <= 2.0 * cfg.epsilon + 1e-12, "{} vs {}", est.beta, target);
    }

    #[test]
    fn estimate_is_capped_by_the_prior_when_the_top_is_worse(prior in 0.01f64..0.99, target in 0.0f64..0.5) {
        // D(1) > D(0) sends the first cut onto the prior from above
        prop_assume!((1.0 - target).powi(2) > target.powi(2));
        let est = search_beta(prior, &InferenceConfig::default(), quadratic(target)).unwrap();
        prop_assert!(est.beta <= prior + 1e-12);
    }
}
