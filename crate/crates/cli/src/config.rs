//! Run configuration: one TOML file, overridable from the command line.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use seirah_core::topology::tokyo_regions;
use seirah_core::{InferenceConfig, NetworkConfig, RegionSpec, Scenario, SeedingSpec, TransitionThresholds};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed every random stream derives from.
    pub seed: u64,
    /// Divisor applied to region populations and commuter counts.
    pub scale: u64,
    /// Omitted: the four Tokyo metropolitan prefectures.
    pub regions: Option<Vec<RegionEntry>>,
    pub network: NetworkConfig,
    pub thresholds: TransitionThresholds,
    pub seeding: SeedingSpec,
    pub inference: InferenceConfig,
    pub simulate: SimulateSection,
    pub infer: InferSection,
    pub sweep: SweepSection,
    pub fixtures: FixtureSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            scale: 100,
            regions: None,
            network: NetworkConfig::default(),
            thresholds: TransitionThresholds::default(),
            seeding: SeedingSpec::default(),
            inference: InferenceConfig::default(),
            simulate: SimulateSection::default(),
            infer: InferSection::default(),
            sweep: SweepSection::default(),
            fixtures: FixtureSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionEntry {
    pub name: String,
    /// Persons at full scale.
    pub population: u64,
    /// Daily commuters to the centre at full scale.
    pub commuting: u64,
}

/// Where a run's daily beta comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub days: usize,
    /// Constant beta, used when `beta_file` is unset.
    pub beta: f64,
    /// CSV with `date` and `beta` columns (e.g. an inferred series).
    pub beta_file: Option<PathBuf>,
    /// CSV indicator; constant 1 when unset.
    pub indicator: Option<PathBuf>,
    pub start_date: NaiveDate,
    pub node_history: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            days: 60,
            beta: 0.15,
            beta_file: None,
            indicator: None,
            start_date: default_start(),
            node_history: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferSection {
    /// `date,h` daily admissions.
    pub observed: Option<PathBuf>,
    /// Indicator CSV covering the observed dates; constant 1 when unset.
    pub indicator: Option<PathBuf>,
    /// Zero-fill missing interior dates instead of failing.
    pub zero_fill: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub p_residence: Vec<f64>,
    pub p_work: Vec<f64>,
    /// Master seeds averaged per cell.
    pub seeds: usize,
    /// Cells at or below this RMSE are flagged appropriate.
    pub rmse_threshold: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            p_residence: vec![0.0, 0.05, 0.1, 0.5],
            p_work: vec![0.0, 0.05, 0.1, 0.5],
            seeds: 1,
            rmse_threshold: 10.0,
        }
    }
}

/// Synthetic observation generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureSection {
    pub days: usize,
    /// Ground-truth beta for each segment; `change_days` splits them.
    pub beta: Vec<f64>,
    pub change_days: Vec<usize>,
    /// Constant commuting indicator written alongside.
    pub indicator: f64,
    pub start_date: NaiveDate,
}

impl Default for FixtureSection {
    fn default() -> Self {
        Self {
            days: 120,
            beta: vec![0.15],
            change_days: Vec::new(),
            indicator: 1.0,
            start_date: default_start(),
        }
    }
}

impl FixtureSection {
    /// Piecewise-constant truth over `days`.
    pub fn beta_series(&self) -> Vec<f64> {
        (0..self.days)
            .map(|d| {
                let segment = self.change_days.iter().filter(|&&c| d >= c).count();
                self.beta[segment]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 3, 1).expect("valid date")
}

fn invalid(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {message}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn region_specs(&self) -> Vec<RegionSpec> {
        match &self.regions {
            Some(list) => list
                .iter()
                .map(|r| RegionSpec::new(r.name.clone(), r.population, r.commuting, self.scale))
                .collect(),
            None => tokyo_regions(self.scale),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            regions: self.region_specs(),
            network: self.network,
            thresholds: self.thresholds,
            seeding: self.seeding,
            inference: self.inference,
            master_seed: self.seed,
        }
    }

    /// Checks everything the library does not: sections and scale.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.scale == 0 {
            return Err(invalid("scale", "must be >= 1"));
        }
        self.scenario().validate()?;
        let sim = &self.simulate;
        if !(0.0..=1.0).contains(&sim.beta) {
            return Err(invalid("simulate.beta", format!("{} not in [0, 1]", sim.beta)));
        }
        let sweep = &self.sweep;
        if !(sweep.rmse_threshold >= 0.0) {
            return Err(invalid("sweep.rmse_threshold", "must be >= 0"));
        }
        seirah_core::SweepGrid::new(sweep.p_residence.clone(), sweep.p_work.clone(), sweep.seeds).validate()?;
        let fx = &self.fixtures;
        if fx.beta.len() != fx.change_days.len() + 1 {
            return Err(invalid(
                "fixtures.beta",
                format!("{} values for {} change days (need one more)", fx.beta.len(), fx.change_days.len()),
            ));
        }
        if fx.beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(invalid("fixtures.beta", "values must lie in [0, 1]"));
        }
        if fx.change_days.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("fixtures.change_days", "must be strictly increasing"));
        }
        if !(fx.indicator >= 0.0) {
            return Err(invalid("fixtures.indicator", "must be >= 0"));
        }
        if fx.days == 0 {
            return Err(invalid("fixtures.days", "must be >= 1"));
        }
        Ok(())
    }
}
