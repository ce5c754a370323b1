//! Daily social-infectivity inference.
//!
//! For each day `t` the search keeps a bracket `[A, B]` (initially `[0, 1]`)
//! and a candidate `b`, starting from the previous day's estimate. Every
//! iteration scores the candidate by forward simulation,
//!
//! ```text
//! D(x) = sum_{i=0..m} (mean_H_hat(t+i | x) - H(t+i))^2
//! ```
//!
//! then moves the endpoint with the larger loss onto the candidate and sets
//! the candidate to the bracket midpoint, until `B - A <= epsilon`. A day
//! whose state holds no E, A or I node gets `beta = 0` without any
//! simulation.
//!
//! Forward runs restore a snapshot of the canonical state, hold the candidate
//! constant over the window and average `new_h` across replicates. The
//! replicate seeds depend only on the master seed, the day and the replicate
//! index, so all candidates of a day share them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epidemic::{DailyCounts, SimState, StateSnapshot, TransitionThresholds};
use crate::rng::{derive_seed, TAG_CANONICAL, TAG_REPLICATE};
use crate::topology::{check_probability, Indicator, MetroTopology};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceConfig {
    /// Bracket width at which the search stops.
    pub epsilon: f64,
    /// Forward horizon `m`; the loss covers `m + 1` days.
    pub window: usize,
    /// Stochastic forward runs averaged per candidate.
    pub replicates: usize,
    /// Starting candidate on the first day.
    pub beta_prior: f64,
    pub max_iterations: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            window: 7,
            replicates: 20,
            beta_prior: 0.5,
            max_iterations: 64,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::param("inference.epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if self.replicates < 1 {
            return Err(Error::param("inference.replicates", "must be >= 1"));
        }
        if self.max_iterations < 1 {
            return Err(Error::param("inference.max_iterations", "must be >= 1"));
        }
        check_probability("inference.beta_prior", self.beta_prior)
    }
}

/// What the simulator needs besides the state: the network and thresholds.
#[derive(Debug, Clone, Copy)]
pub struct Model<'a> {
    pub topology: &'a MetroTopology,
    pub thresholds: &'a TransitionThresholds,
}

/// Loss of one candidate and the mean predicted `new_h` over the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub predicted: Vec<f64>,
}

/// Outcome of the search for one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayEstimate {
    pub beta: f64,
    /// Loss at the returned `beta`; 0 on zero-branch days.
    pub loss: f64,
    /// Midpoint updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// Candidate losses computed, each one a batch of forward simulations.
    pub evaluations: usize,
    /// Mean predicted `new_h` over the window at the returned `beta`.
    pub predicted: Vec<f64>,
}

impl DayEstimate {
    fn zero() -> Self {
        Self {
            beta: 0.0,
            loss: 0.0,
            iterations: 0,
            converged: true,
            evaluations: 0,
            predicted: Vec::new(),
        }
    }
}

/// Bracket search over `[0, 1]` given a loss oracle.
///
/// `evaluate` is called on the endpoints once and on every candidate; the
/// final estimate is evaluated once more to report its loss.
pub fn search_beta<F>(prior: f64, config: &InferenceConfig, mut evaluate: F) -> Result<DayEstimate>
where
    F: FnMut(f64) -> Result<Evaluation>,
{
    config.validate()?;
    check_probability("beta_prior", prior)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut candidate = prior;
    // A prior sitting on an endpoint would not shrink the bracket.
    if candidate <= lo || candidate >= hi {
        candidate = 0.5 * (lo + hi);
    }
    let mut evaluations = 0;
    let mut eval = |x: f64| {
        evaluations += 1;
        evaluate(x)
    };
    let mut loss_lo = eval(lo)?.loss;
    let mut loss_hi = eval(hi)?.loss;
    let mut iterations = 0;
    while hi - lo > config.epsilon && iterations < config.max_iterations {
        debug_assert!(lo < candidate && candidate < hi);
        let loss_c = eval(candidate)?.loss;
        let replace_lo = if loss_lo != loss_hi {
            loss_lo > loss_hi
        } else {
            // Tie: drop the endpoint farther from the prior, which keeps the
            // prior inside the bracket when the loss carries no signal.
            prior - lo > hi - prior
        };
        if replace_lo {
            lo = candidate;
            loss_lo = loss_c;
        } else {
            hi = candidate;
            loss_hi = loss_c;
        }
        candidate = 0.5 * (lo + hi);
        iterations += 1;
    }
    let converged = hi - lo <= config.epsilon;
    if !converged {
        log::warn!(
            "beta search stopped after {iterations} iterations with bracket [{lo}, {hi}]"
        );
    }
    let last = eval(candidate)?;
    Ok(DayEstimate {
        beta: candidate,
        loss: last.loss,
        iterations,
        converged,
        evaluations,
        predicted: last.predicted,
    })
}

/// Seeds of the forward replicates for day `day`.
pub fn replicate_seeds(master_seed: u64, day: u32, replicates: usize) -> Vec<u64> {
    (0..replicates as u64)
        .map(|r| derive_seed(master_seed, &[TAG_REPLICATE, day as u64, r]))
        .collect()
}

fn simulate_window(
    snapshot: &StateSnapshot,
    model: Model<'_>,
    beta: f64,
    observed: &[u64],
    indicators: &[Indicator],
    seeds: &[u64],
) -> Result<Evaluation> {
    let days = observed.len();
    if indicators.len() < days {
        return Err(Error::SeriesTooShort {
            name: "indicator",
            needed: days,
            available: indicators.len(),
        });
    }
    let runs: Vec<Result<Vec<u64>>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut state = snapshot.restore(model.topology.node_count())?;
            state.reseed(seed);
            (0..days)
                .map(|d| {
                    state
                        .simulate_day(model.topology, model.thresholds, beta, &indicators[d])
                        .map(|c| c.new_h)
                })
                .collect()
        })
        .collect();
    let mut sums = vec![0u64; days];
    for run in runs {
        for (s, h) in sums.iter_mut().zip(run?) {
            *s += h;
        }
    }
    let predicted: Vec<f64> = sums.iter().map(|&s| s as f64 / seeds.len() as f64).collect();
    let loss = predicted
        .iter()
        .zip(observed)
        .map(|(p, &h)| (p - h as f64).powi(2))
        .sum();
    Ok(Evaluation { loss, predicted })
}

/// Loss of a constant `beta` over the window starting at the snapshot's day.
///
/// `observed` and `indicators` start at that day. The window covers
/// `config.window + 1` days, truncated (with a warning) to the observed data.
/// Replicates use the standard replicate seeds of `master_seed` for that day.
pub fn forward_loss(
    snapshot: &StateSnapshot,
    model: Model<'_>,
    beta: f64,
    observed: &[u64],
    indicators: &[Indicator],
    config: &InferenceConfig,
    master_seed: u64,
) -> Result<Evaluation> {
    check_probability("beta", beta)?;
    config.validate()?;
    let window = window_len(config, observed.len());
    let seeds = replicate_seeds(master_seed, snapshot.day(), config.replicates);
    simulate_window(snapshot, model, beta, &observed[..window], indicators, &seeds)
}

fn window_len(config: &InferenceConfig, available: usize) -> usize {
    let wanted = config.window + 1;
    if available < wanted {
        log::warn!("loss window truncated to {available} of {wanted} days (end of observed series)");
    }
    wanted.min(available)
}

/// Estimate `beta_t` for the day of `state`.
///
/// `observed` and `indicators` start at the state's day.
pub fn infer_beta_day(
    state: &SimState,
    model: Model<'_>,
    observed: &[u64],
    indicators: &[Indicator],
    beta_previous: f64,
    config: &InferenceConfig,
    master_seed: u64,
) -> Result<DayEstimate> {
    check_probability("beta_previous", beta_previous)?;
    if state.infectious() == 0 {
        return Ok(DayEstimate::zero());
    }
    if observed.is_empty() {
        return Err(Error::SeriesTooShort {
            name: "observed",
            needed: 1,
            available: 0,
        });
    }
    let window = window_len(config, observed.len());
    let snapshot = state.snapshot();
    let seeds = replicate_seeds(master_seed, state.day(), config.replicates);
    search_beta(beta_previous, config, |beta| {
        simulate_window(&snapshot, model, beta, &observed[..window], indicators, &seeds)
    })
}

/// Inferred series with the canonical trajectory it was chained along.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BetaSeries {
    pub days: Vec<DayEstimate>,
    /// Canonical state's counts for each day, simulated under the accepted beta.
    pub trajectory: Vec<DailyCounts>,
}

impl BetaSeries {
    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.beta).collect()
    }

    /// Mean beta over `range` (clipped to the series).
    pub fn mean_beta(&self, range: std::ops::Range<usize>) -> f64 {
        let end = range.end.min(self.days.len());
        let start = range.start.min(end);
        let slice = &self.days[start..end];
        if slice.is_empty() {
            return 0.0;
        }
        slice.iter().map(|d| d.beta).sum::<f64>() / slice.len() as f64
    }

    /// One-step-ahead predicted `new_h`: the canonical trajectory's admissions.
    pub fn predicted_h(&self) -> Vec<u64> {
        self.trajectory.iter().map(|c| c.new_h).collect()
    }

    /// Root-mean-square error of [`predicted_h`](Self::predicted_h) against `observed`.
    pub fn rmse(&self, observed: &[u64]) -> f64 {
        rmse(&self.predicted_h(), observed)
    }
}

pub fn rmse(predicted: &[u64], observed: &[u64]) -> f64 {
    let n = predicted.len().min(observed.len());
    if n == 0 {
        return 0.0;
    }
    let sse: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(&p, &o)| (p as f64 - o as f64).powi(2))
        .sum();
    (sse / n as f64).sqrt()
}

/// Chains [`infer_beta_day`] over the observed series, advancing a canonical
/// copy of `initial` one day at a time under each accepted estimate.
pub fn infer_beta_series(
    model: Model<'_>,
    observed: &[u64],
    indicators: &[Indicator],
    initial: &SimState,
    config: &InferenceConfig,
    master_seed: u64,
) -> Result<BetaSeries> {
    config.validate()?;
    if observed.is_empty() {
        return Err(Error::SeriesTooShort {
            name: "observed",
            needed: 1,
            available: 0,
        });
    }
    if indicators.len() < observed.len() {
        return Err(Error::SeriesTooShort {
            name: "indicator",
            needed: observed.len(),
            available: indicators.len(),
        });
    }
    let mut canonical = initial.clone();
    canonical.reseed(derive_seed(master_seed, &[TAG_CANONICAL]));
    let mut out = BetaSeries::default();
    let mut previous = config.beta_prior;
    let mut warned = false;
    for t in 0..observed.len() {
        let rest = &observed[t..];
        if !warned && rest.len() < config.window + 1 && canonical.infectious() > 0 {
            warned = true;
        }
        let estimate = if canonical.infectious() == 0 {
            DayEstimate::zero()
        } else {
            let window = (config.window + 1).min(rest.len());
            let snapshot = canonical.snapshot();
            let seeds = replicate_seeds(master_seed, canonical.day(), config.replicates);
            search_beta(previous, config, |beta| {
                simulate_window(&snapshot, model, beta, &rest[..window], &indicators[t..], &seeds)
            })?
        };
        let counts = canonical.simulate_day(model.topology, model.thresholds, estimate.beta, &indicators[t])?;
        log::info!(
            target: "seirah::progress",
            "day {t}: beta {:.4} loss {:.3} iterations {}",
            estimate.beta,
            estimate.loss,
            estimate.iterations
        );
        previous = estimate.beta;
        out.days.push(estimate);
        out.trajectory.push(counts);
    }
    if warned {
        log::warn!(
            "loss windows of the last {} days were truncated at the end of the observed series",
            config.window
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemic::Status;
    use crate::topology::{build_metro, toy_regions};

    fn quadratic(target: f64) -> impl FnMut(f64) -> Result<Evaluation> {
        move |x| {
            Ok(Evaluation {
                loss: (x - target).powi(2),
                predicted: vec![x],
            })
        }
    }

    #[test]
    fn finds_minimum_of_symmetric_loss() {
        let cfg = InferenceConfig::default();
        for target in [0.0, 0.07, 0.15, 0.5, 0.93, 1.0] {
            for prior in [0.0, 0.5, 1.0] {
                let est = search_beta(prior, &cfg, quadratic(target)).unwrap();
                assert!((est.beta - target).abs() <= cfg.epsilon, "target {target} prior {prior}: {est:?}");
                assert!(est.converged);
            }
        }
    }

    #[test]
    fn first_cut_moves_the_worse_endpoint_onto_the_prior() {
        // D(0) < D(1), so the bracket becomes [0, prior] and the estimate
        // cannot exceed the prior even though the minimum lies above it.
        let cfg = InferenceConfig::default();
        let est = search_beta(0.1, &cfg, quadratic(0.15)).unwrap();
        assert!(est.beta < 0.1, "{est:?}");
        assert!(est.beta > 0.1 - 2.0 * cfg.epsilon, "{est:?}");
        // With the minimum below the prior the search recovers it.
        let est = search_beta(0.4, &cfg, quadratic(0.15)).unwrap();
        assert!((est.beta - 0.15).abs() <= cfg.epsilon, "{est:?}");
    }

    #[test]
    fn midpoint_prior_halves_to_epsilon_in_seven_steps() {
        let cfg = InferenceConfig::default();
        for target in [0.01, 0.33, 0.77] {
            let est = search_beta(0.5, &cfg, quadratic(target)).unwrap();
            assert!(est.iterations <= 7, "{est:?}");
            // endpoints + candidates + final
            assert_eq!(est.evaluations, 2 + est.iterations + 1);
        }
    }

    #[test]
    fn bracket_contains_candidate_and_shrinks() {
        let cfg = InferenceConfig::default();
        let mut seen: Vec<f64> = Vec::new();
        search_beta(0.2, &cfg, |x| {
            seen.push(x);
            Ok(Evaluation {
                loss: (x - 0.61).abs(),
                predicted: vec![],
            })
        })
        .unwrap();
        // candidates after the two endpoints lie strictly inside (0, 1)
        assert!(seen[2..].iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn flat_loss_keeps_the_prior() {
        let cfg = InferenceConfig::default();
        for prior in [0.05, 0.3, 0.5, 0.8] {
            let est = search_beta(prior, &cfg, |_| {
                Ok(Evaluation {
                    loss: 1.0,
                    predicted: vec![],
                })
            })
            .unwrap();
            assert!(est.converged);
            assert!((est.beta - prior).abs() <= cfg.epsilon, "prior {prior}: {est:?}");
        }
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let cfg = InferenceConfig {
            max_iterations: 2,
            ..Default::default()
        };
        let est = search_beta(0.5, &cfg, quadratic(0.2)).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 2);
        assert!((0.0..=1.0).contains(&est.beta));
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = InferenceConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = InferenceConfig {
            replicates: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_term_loss() {
        let ev = Evaluation {
            loss: (12.0f64 - 10.0).powi(2),
            predicted: vec![12.0],
        };
        assert_eq!(ev.loss, 4.0);
        assert_eq!(rmse(&[12], &[10]), 2.0);
    }

    #[test]
    fn zero_branch_skips_simulation() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 1).unwrap();
        let th = TransitionThresholds::default();
        let model = Model {
            topology: &topo,
            thresholds: &th,
        };
        let mut st = SimState::new(1000, 0);
        st.set_status(3, Status::H);
        let est = infer_beta_day(&st, model, &[5, 5], &vec![Indicator::Uniform(1.0); 2], 0.4, &InferenceConfig::default(), 1)
            .unwrap();
        assert_eq!(est.beta, 0.0);
        assert_eq!(est.evaluations, 0);
    }

    #[test]
    fn perfect_prediction_has_zero_loss() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 1).unwrap();
        let th = TransitionThresholds::default();
        let model = Model {
            topology: &topo,
            thresholds: &th,
        };
        let st = SimState::seeded(&topo, 5, 3).unwrap();
        let cfg = InferenceConfig {
            replicates: 1,
            window: 4,
            ..Default::default()
        };
        let ind = vec![Indicator::Uniform(1.0); 5];
        let seed = replicate_seeds(9, 0, 1)[0];
        let mut rerun = st.clone();
        rerun.reseed(seed);
        let observed: Vec<u64> = (0..5)
            .map(|d| rerun.simulate_day(&topo, &th, 0.2, &ind[d]).unwrap().new_h)
            .collect();
        let ev = forward_loss(&st.snapshot(), model, 0.2, &observed, &ind, &cfg, 9).unwrap();
        assert_eq!(ev.loss, 0.0);
        assert_eq!(ev.predicted, observed.iter().map(|&h| h as f64).collect::<Vec<_>>());
    }

    #[test]
    fn truncated_window_uses_available_days() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 1).unwrap();
        let th = TransitionThresholds::default();
        let model = Model {
            topology: &topo,
            thresholds: &th,
        };
        let st = SimState::seeded(&topo, 5, 3).unwrap();
        let ind = vec![Indicator::Uniform(1.0); 3];
        let ev = forward_loss(&st.snapshot(), model, 0.2, &[0, 0, 0], &ind, &InferenceConfig::default(), 1).unwrap();
        assert_eq!(ev.predicted.len(), 3);
    }

    #[test]
    fn all_zero_series_gives_zero_betas() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 1).unwrap();
        let th = TransitionThresholds::default();
        let model = Model {
            topology: &topo,
            thresholds: &th,
        };
        let st = SimState::new(1000, 0);
        let ind = vec![Indicator::Uniform(1.0); 10];
        let series = infer_beta_series(model, &[0; 10], &ind, &st, &InferenceConfig::default(), 4).unwrap();
        assert!(series.betas().iter().all(|&b| b == 0.0));
        assert!(series.days.iter().all(|d| d.evaluations == 0));
        assert_eq!(series.trajectory.len(), 10);
    }
}
