//! A complete run description: regions, network parameters, thresholds,
//! seeding, inference settings and the master seed every stream derives from.

use serde::{Deserialize, Serialize};

use crate::epidemic::{DailyCounts, SimState, TransitionThresholds};
use crate::inference::{infer_beta_series, BetaSeries, InferenceConfig, Model};
use crate::rng::{derive_seed, TAG_CANONICAL, TAG_SEEDING, TAG_TOPOLOGY};
use crate::topology::{build_metro, check_probability, tokyo_regions, toy_regions, Indicator, MetroTopology, RegionSpec};
use crate::{Error, Result};

/// Contact degree `k` and shortcut probability `p` of both network kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub k_residence: usize,
    pub p_residence: f64,
    pub k_work: usize,
    pub p_work: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            k_residence: 4,
            p_residence: 0.05,
            k_work: 10,
            p_work: 0.1,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_residence < 1 {
            return Err(Error::param("network.k_residence", "must be >= 1"));
        }
        if self.k_work < 1 {
            return Err(Error::param("network.k_work", "must be >= 1"));
        }
        check_probability("network.p_residence", self.p_residence)?;
        check_probability("network.p_work", self.p_work)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedingSpec {
    /// Exposed nodes placed uniformly at random in each region at day 0.
    pub exposed_per_region: usize,
}

impl Default for SeedingSpec {
    fn default() -> Self {
        Self { exposed_per_region: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub regions: Vec<RegionSpec>,
    pub network: NetworkConfig,
    pub thresholds: TransitionThresholds,
    pub seeding: SeedingSpec,
    pub inference: InferenceConfig,
    pub master_seed: u64,
}

impl Scenario {
    /// Five 200-node regions with default parameters.
    pub fn toy(master_seed: u64) -> Self {
        Self {
            regions: toy_regions(),
            network: NetworkConfig::default(),
            thresholds: TransitionThresholds::default(),
            seeding: SeedingSpec::default(),
            inference: InferenceConfig::default(),
            master_seed,
        }
    }

    /// The four Tokyo metropolitan prefectures at `1 / scale`.
    pub fn tokyo(scale: u64, master_seed: u64) -> Self {
        Self {
            regions: tokyo_regions(scale),
            ..Self::toy(master_seed)
        }
    }

    pub fn with_p(mut self, p_residence: f64, p_work: f64) -> Self {
        self.network.p_residence = p_residence;
        self.network.p_work = p_work;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions.is_empty() {
            return Err(Error::param("regions", "at least one region is required"));
        }
        for (i, r) in self.regions.iter().enumerate() {
            r.validate(i)?;
            if self.network.k_residence >= r.nodes() {
                return Err(Error::param(
                    "network.k_residence",
                    format!("k = {} must be below region {} size {}", self.network.k_residence, r.name, r.nodes()),
                ));
            }
        }
        self.network.validate()?;
        self.thresholds.validate()?;
        self.inference.validate()
    }

    pub fn topology_seed(&self) -> u64 {
        derive_seed(self.master_seed, &[TAG_TOPOLOGY])
    }

    pub fn build_topology(&self) -> Result<MetroTopology> {
        self.validate()?;
        build_metro(
            &self.regions,
            (self.network.k_residence, self.network.p_residence),
            (self.network.k_work, self.network.p_work),
            self.topology_seed(),
        )
    }

    /// Seeded day-0 state, its generator positioned on the canonical stream.
    pub fn initial_state(&self, topology: &MetroTopology) -> Result<SimState> {
        let mut state = SimState::seeded(
            topology,
            self.seeding.exposed_per_region,
            derive_seed(self.master_seed, &[TAG_SEEDING]),
        )?;
        state.reseed(self.canonical_seed());
        Ok(state)
    }

    pub fn canonical_seed(&self) -> u64 {
        derive_seed(self.master_seed, &[TAG_CANONICAL])
    }

    pub fn model<'a>(&'a self, topology: &'a MetroTopology) -> Model<'a> {
        Model {
            topology,
            thresholds: &self.thresholds,
        }
    }

    /// Runs `betas.len()` days from the initial state on the canonical stream.
    pub fn simulate(&self, topology: &MetroTopology, betas: &[f64], indicators: &[Indicator]) -> Result<Vec<DailyCounts>> {
        let mut state = self.initial_state(topology)?;
        state.simulate_horizon(topology, &self.thresholds, betas, indicators, betas.len())
    }

    /// As [`simulate`](Self::simulate) but on an independent stream `seed`,
    /// e.g. for generating synthetic observations.
    pub fn simulate_with_seed(
        &self,
        topology: &MetroTopology,
        betas: &[f64],
        indicators: &[Indicator],
        seed: u64,
    ) -> Result<Vec<DailyCounts>> {
        let mut state = self.initial_state(topology)?;
        state.reseed(seed);
        state.simulate_horizon(topology, &self.thresholds, betas, indicators, betas.len())
    }

    pub fn infer(&self, topology: &MetroTopology, observed: &[u64], indicators: &[Indicator]) -> Result<BetaSeries> {
        let initial = self.initial_state(topology)?;
        infer_beta_series(
            self.model(topology),
            observed,
            indicators,
            &initial,
            &self.inference,
            self.master_seed,
        )
    }
}
