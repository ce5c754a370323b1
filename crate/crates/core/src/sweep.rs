//! Grid search over `(p_residence, p_work)` network patterns.
//!
//! Every cell rebuilds the topology with its own pair, runs the full
//! inference chain and scores the one-step-ahead predicted admissions
//! against the observations by RMSE. Cells run in parallel and fail
//! independently.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;
use crate::topology::{check_probability, Indicator};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub p_residence: Vec<f64>,
    pub p_work: Vec<f64>,
    /// Master seeds per cell: `base, base + 1, ...`; scores are averaged.
    #[serde(default = "one")]
    pub seeds: usize,
}

fn one() -> usize {
    1
}

impl SweepGrid {
    pub fn new(p_residence: Vec<f64>, p_work: Vec<f64>, seeds: usize) -> Self {
        Self {
            p_residence,
            p_work,
            seeds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_residence.is_empty() {
            return Err(Error::param("sweep.p_residence", "must not be empty"));
        }
        if self.p_work.is_empty() {
            return Err(Error::param("sweep.p_work", "must not be empty"));
        }
        if self.seeds < 1 {
            return Err(Error::param("sweep.seeds", "must be >= 1"));
        }
        for &p in &self.p_residence {
            check_probability("sweep.p_residence", p)?;
        }
        for &p in &self.p_work {
            check_probability("sweep.p_work", p)?;
        }
        Ok(())
    }

    /// Cells in row-major order (`p_residence` outer).
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.p_residence
            .iter()
            .flat_map(|&r| self.p_work.iter().map(move |&w| (r, w)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub rmse: f64,
    pub mean_beta: f64,
    pub appropriate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub p_residence: f64,
    pub p_work: f64,
    /// The score, or the error message of a failed cell.
    pub outcome: std::result::Result<CellScore, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rmse_threshold: f64,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, p_residence: f64, p_work: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.p_residence == p_residence && c.p_work == p_work)
    }

    /// Re-apply a different acceptance threshold without re-running.
    pub fn reclassify(&mut self, rmse_threshold: f64) {
        self.rmse_threshold = rmse_threshold;
        for c in &mut self.cells {
            if let Ok(score) = &mut c.outcome {
                score.appropriate = score.rmse <= rmse_threshold;
            }
        }
    }
}

/// Scores one `(p_residence, p_work)` pair with a single master seed.
pub fn score_cell(base: &Scenario, p_residence: f64, p_work: f64, observed: &[u64], indicators: &[Indicator]) -> Result<(f64, f64)> {
    let scenario = base.clone().with_p(p_residence, p_work);
    let topology = scenario.build_topology()?;
    let series = scenario.infer(&topology, observed, indicators)?;
    Ok((series.rmse(observed), series.mean_beta(0..series.len())))
}

pub fn run_sweep(
    grid: &SweepGrid,
    base: &Scenario,
    observed: &[u64],
    indicators: &[Indicator],
    rmse_threshold: f64,
) -> Result<SweepResult> {
    grid.validate()?;
    base.validate()?;
    if !(rmse_threshold >= 0.0) {
        return Err(Error::param("sweep.rmse_threshold", "must be >= 0"));
    }
    let cells = grid
        .cells()
        .into_par_iter()
        .map(|(pr, pw)| {
            let outcome = (0..grid.seeds)
                .map(|s| {
                    let mut scenario = base.clone();
                    scenario.master_seed = base.master_seed.wrapping_add(s as u64);
                    score_cell(&scenario, pr, pw, observed, indicators)
                })
                .collect::<Result<Vec<_>>>()
                .map(|scores| {
                    let n = scores.len() as f64;
                    let rmse = scores.iter().map(|s| s.0).sum::<f64>() / n;
                    let mean_beta = scores.iter().map(|s| s.1).sum::<f64>() / n;
                    CellScore {
                        rmse,
                        mean_beta,
                        appropriate: rmse <= rmse_threshold,
                    }
                })
                .map_err(|e| {
                    log::warn!("sweep cell ({pr}, {pw}) failed: {e}");
                    e.to_string()
                });
            SweepCell {
                p_residence: pr,
                p_work: pw,
                outcome,
            }
        })
        .collect();
    Ok(SweepResult { rmse_threshold, cells })
}
