//! SEIRAH dynamics on the interconnected networks.
//!
//! A simulated day runs three phases in order:
//!
//! 1. residence hours: contagion over every residence graph;
//! 2. working hours: contagion over the day's work graph, plus residence
//!    edges whose endpoints both stayed home;
//! 3. progression: one stochastic compartment update per node.
//!
//! Contagion within a phase is synchronous. A susceptible node with `m`
//! infectious neighbours (status E, A or I) on active edges is exposed with
//! probability `1 - (1 - beta)^m`, i.e. at least one success among `m`
//! independent per-edge trials. Nodes exposed in phase 1 are already
//! infectious in phase 2, but do not progress until the next day. H and R
//! nodes neither transmit nor receive.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed, SimRng, TAG_SEEDING};
use crate::topology::{check_probability, Graph, Indicator, MetroTopology};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Status {
    S = 0,
    E = 1,
    I = 2,
    R = 3,
    A = 4,
    H = 5,
}

impl Status {
    pub const ALL: [Status; 6] = [Status::S, Status::E, Status::I, Status::R, Status::A, Status::H];

    #[inline]
    pub fn is_infectious(self) -> bool {
        matches!(self, Status::E | Status::A | Status::I)
    }

    pub fn code(self) -> char {
        match self {
            Status::S => 'S',
            Status::E => 'E',
            Status::I => 'I',
            Status::R => 'R',
            Status::A => 'A',
            Status::H => 'H',
        }
    }

    pub fn from_code(c: char) -> Option<Status> {
        Some(match c.to_ascii_uppercase() {
            'S' => Status::S,
            'E' => Status::E,
            'I' => Status::I,
            'R' => Status::R,
            'A' => Status::A,
            'H' => Status::H,
            _ => return None,
        })
    }

    /// Whether `from -> to` is one of the model's arrows.
    pub fn is_legal_transition(from: Status, to: Status) -> bool {
        use Status::*;
        matches!(
            (from, to),
            (S, E) | (E, A) | (E, I) | (A, H) | (A, R) | (I, H) | (H, R)
        )
    }
}

/// Daily transition probabilities.
///
/// Defaults are the reference values: E→A 0.036, E→I 0.164, A→H 0.028,
/// A→R 0.08, I→H 0.950, H→R 0.100. A transition fires when a uniform draw
/// falls below its threshold; competing exits from E and from A partition a
/// single draw. Setting `literal` flips every threshold to `1 - t` (the
/// transition fires when the draw *exceeds* the threshold), intended only
/// for sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitionThresholds {
    pub e_to_a: f64,
    pub e_to_i: f64,
    pub a_to_h: f64,
    pub a_to_r: f64,
    pub i_to_h: f64,
    pub h_to_r: f64,
    pub literal: bool,
}

impl Default for TransitionThresholds {
    fn default() -> Self {
        Self {
            e_to_a: 0.036,
            e_to_i: 0.164,
            a_to_h: 0.028,
            a_to_r: 0.08,
            i_to_h: 0.950,
            h_to_r: 0.100,
            literal: false,
        }
    }
}

impl TransitionThresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("thresholds.e_to_a", self.e_to_a),
            ("thresholds.e_to_i", self.e_to_i),
            ("thresholds.a_to_h", self.a_to_h),
            ("thresholds.a_to_r", self.a_to_r),
            ("thresholds.i_to_h", self.i_to_h),
            ("thresholds.h_to_r", self.h_to_r),
        ] {
            check_probability(name, v)?;
        }
        if !self.literal {
            if self.e_to_a + self.e_to_i > 1.0 {
                return Err(Error::param("thresholds.e_to_i", "e_to_a + e_to_i must be <= 1"));
            }
            if self.a_to_h + self.a_to_r > 1.0 {
                return Err(Error::param("thresholds.a_to_r", "a_to_h + a_to_r must be <= 1"));
            }
        }
        Ok(())
    }

    /// Per-day probabilities actually applied.
    fn effective(&self) -> [f64; 6] {
        if !self.literal {
            return [self.e_to_a, self.e_to_i, self.a_to_h, self.a_to_r, self.i_to_h, self.h_to_r];
        }
        let ea = 1.0 - self.e_to_a;
        let ah = 1.0 - self.a_to_h;
        [
            ea,
            (1.0 - self.e_to_i).min(1.0 - ea),
            ah,
            (1.0 - self.a_to_r).min(1.0 - ah),
            1.0 - self.i_to_h,
            1.0 - self.h_to_r,
        ]
    }
}

/// Transitions performed by one progression step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionTally {
    pub e_to_a: u64,
    pub e_to_i: u64,
    pub a_to_h: u64,
    pub a_to_r: u64,
    pub i_to_h: u64,
    pub h_to_r: u64,
}

impl TransitionTally {
    pub fn new_h(&self) -> u64 {
        self.a_to_h + self.i_to_h
    }

    pub fn total(&self) -> u64 {
        self.e_to_a + self.e_to_i + self.a_to_h + self.a_to_r + self.i_to_h + self.h_to_r
    }
}

/// End-of-day class totals and the day's flows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyCounts {
    pub day: u32,
    pub s: u64,
    pub e: u64,
    pub i: u64,
    pub r: u64,
    pub a: u64,
    pub h: u64,
    /// S→E conversions over both time zones.
    pub new_e: u64,
    /// A→H plus I→H admissions: the simulated daily hospitalized count.
    pub new_h: u64,
}

impl DailyCounts {
    pub fn total(&self) -> u64 {
        self.s + self.e + self.i + self.r + self.a + self.h
    }

    pub fn class(&self, status: Status) -> u64 {
        match status {
            Status::S => self.s,
            Status::E => self.e,
            Status::I => self.i,
            Status::R => self.r,
            Status::A => self.a,
            Status::H => self.h,
        }
    }

    pub fn infectious(&self) -> u64 {
        self.e + self.a + self.i
    }
}

/// A status change; zone 0 marks the initial status, 1 and 2 the time zones
/// (progression is recorded in zone 2, at the end of working hours).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatusEvent {
    pub node: u32,
    pub day: u32,
    pub zone: u8,
    pub status: Status,
}

/// Frozen copy of a [`SimState`], including its generator position.
#[derive(Debug, Clone)]
pub struct StateSnapshot {
    statuses: Vec<Status>,
    day: u32,
    counts: [u64; 6],
    cumulative_h: u64,
    rng: SimRng,
}

impl StateSnapshot {
    pub fn node_count(&self) -> usize {
        self.statuses.len()
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    /// Restores into a state for a topology of `node_count` nodes.
    pub fn restore(&self, node_count: usize) -> Result<SimState> {
        if node_count != self.statuses.len() {
            return Err(Error::SizeMismatch {
                snapshot: self.statuses.len(),
                topology: node_count,
            });
        }
        Ok(SimState {
            statuses: self.statuses.clone(),
            day: self.day,
            counts: self.counts,
            cumulative_h: self.cumulative_h,
            rng: self.rng.clone(),
            fresh: vec![false; node_count],
            fresh_list: Vec::new(),
            pressure: vec![0; node_count],
            touched: Vec::new(),
            history: None,
        })
    }
}

#[derive(Clone, Copy)]
enum IdMap<'a> {
    Offset(u32),
    List(&'a [u32]),
}

impl IdMap<'_> {
    #[inline]
    fn global(&self, local: u32) -> usize {
        match self {
            IdMap::Offset(o) => (o + local) as usize,
            IdMap::List(ids) => ids[local as usize] as usize,
        }
    }
}

/// One contact layer of a time zone: a graph, how its ids map to global
/// ids, and an optional mask of nodes whose edges are switched off.
struct Layer<'a> {
    graph: &'a Graph,
    ids: IdMap<'a>,
    off: Option<&'a [bool]>,
}

/// Per-node epidemic state of the whole metropolitan population.
#[derive(Debug, Clone)]
pub struct SimState {
    statuses: Vec<Status>,
    day: u32,
    counts: [u64; 6],
    cumulative_h: u64,
    rng: SimRng,
    fresh: Vec<bool>,
    fresh_list: Vec<u32>,
    pressure: Vec<u32>,
    touched: Vec<u32>,
    history: Option<Vec<StatusEvent>>,
}

impl SimState {
    /// All-susceptible population of `n` nodes at day 0.
    pub fn new(n: usize, seed: u64) -> Self {
        let mut counts = [0; 6];
        counts[Status::S as usize] = n as u64;
        Self {
            statuses: vec![Status::S; n],
            day: 0,
            counts,
            cumulative_h: 0,
            rng: rng_from_seed(seed),
            fresh: vec![false; n],
            fresh_list: Vec::new(),
            pressure: vec![0; n],
            touched: Vec::new(),
            history: None,
        }
    }

    pub fn from_statuses(statuses: Vec<Status>, seed: u64) -> Self {
        let mut state = Self::new(statuses.len(), seed);
        state.counts = [0; 6];
        for &s in &statuses {
            state.counts[s as usize] += 1;
        }
        state.statuses = statuses;
        state
    }

    /// Places `per_region` exposed nodes uniformly at random in each region.
    pub fn seeded(topology: &MetroTopology, per_region: usize, seed: u64) -> Result<Self> {
        let mut state = Self::new(topology.node_count(), seed);
        for r in 0..topology.region_count() {
            let size = topology.region_size(r);
            if per_region > size {
                return Err(Error::param(
                    "seeding.exposed_per_region",
                    format!("{per_region} exceeds region {} size {size}", topology.regions()[r].name),
                ));
            }
            let mut rng = rng_from_seed(derive_seed(seed, &[TAG_SEEDING, r as u64]));
            for local in rand::seq::index::sample(&mut rng, size, per_region) {
                state.set_status(topology.global_id(r, local as u32) as usize, Status::E);
            }
        }
        Ok(state)
    }

    pub fn node_count(&self) -> usize {
        self.statuses.len()
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn status(&self, node: usize) -> Status {
        self.statuses[node]
    }

    pub fn statuses(&self) -> &[Status] {
        &self.statuses
    }

    pub fn count(&self, status: Status) -> u64 {
        self.counts[status as usize]
    }

    /// E + A + I.
    pub fn infectious(&self) -> u64 {
        self.count(Status::E) + self.count(Status::A) + self.count(Status::I)
    }

    pub fn cumulative_h(&self) -> u64 {
        self.cumulative_h
    }

    /// Overwrites one node's status (setup only; not recorded as an event).
    pub fn set_status(&mut self, node: usize, status: Status) {
        let old = self.statuses[node];
        self.counts[old as usize] -= 1;
        self.counts[status as usize] += 1;
        self.statuses[node] = status;
    }

    /// Replaces the generator stream.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = rng_from_seed(seed);
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            statuses: self.statuses.clone(),
            day: self.day,
            counts: self.counts,
            cumulative_h: self.cumulative_h,
            rng: self.rng.clone(),
        }
    }

    /// Start recording status changes, beginning with every node's current
    /// status as a zone-0 event.
    pub fn enable_history(&mut self) {
        let day = self.day;
        self.history = Some(
            self.statuses
                .iter()
                .enumerate()
                .map(|(node, &status)| StatusEvent {
                    node: node as u32,
                    day,
                    zone: 0,
                    status,
                })
                .collect(),
        );
    }

    pub fn history(&self) -> Option<&[StatusEvent]> {
        self.history.as_deref()
    }

    pub fn take_history(&mut self) -> Option<Vec<StatusEvent>> {
        self.history.take()
    }

    /// Recount of statuses; equals the cached totals at all times.
    pub fn recount(&self) -> [u64; 6] {
        let mut c = [0u64; 6];
        for &s in &self.statuses {
            c[s as usize] += 1;
        }
        c
    }

    fn transition(&mut self, node: usize, to: Status, zone: u8) {
        let from = self.statuses[node];
        debug_assert!(Status::is_legal_transition(from, to));
        self.counts[from as usize] -= 1;
        self.counts[to as usize] += 1;
        self.statuses[node] = to;
        if let Some(h) = self.history.as_mut() {
            h.push(StatusEvent {
                node: node as u32,
                day: self.day,
                zone,
                status: to,
            });
        }
    }

    fn run_zone(&mut self, layers: &[Layer<'_>], beta: f64, zone: u8) -> u64 {
        for layer in layers {
            let g = layer.graph;
            for u in 0..g.node_count() {
                let gu = layer.ids.global(u as u32);
                if !self.statuses[gu].is_infectious() {
                    continue;
                }
                if layer.off.is_some_and(|off| off[gu]) {
                    continue;
                }
                for &v in g.neighbors(u) {
                    let gv = layer.ids.global(v);
                    if self.statuses[gv] != Status::S || layer.off.is_some_and(|off| off[gv]) {
                        continue;
                    }
                    if self.pressure[gv] == 0 {
                        self.touched.push(gv as u32);
                    }
                    self.pressure[gv] += 1;
                }
            }
        }

        let escape = 1.0 - beta;
        let mut exposed = 0;
        let touched = std::mem::take(&mut self.touched);
        for &gv in &touched {
            let gv = gv as usize;
            let m = std::mem::replace(&mut self.pressure[gv], 0);
            let p = 1.0 - escape.powi(m as i32);
            if self.rng.gen::<f64>() < p {
                self.transition(gv, Status::E, zone);
                self.fresh[gv] = true;
                self.fresh_list.push(gv as u32);
                exposed += 1;
            }
        }
        self.touched = touched;
        self.touched.clear();
        exposed
    }

    /// Per-edge contagion over one graph whose node ids are global ids.
    /// Returns the number of S→E conversions.
    pub fn contagion_step(&mut self, graph: &Graph, beta: f64) -> Result<u64> {
        check_probability("beta", beta)?;
        if graph.node_count() > self.node_count() {
            return Err(Error::param(
                "graph",
                format!("{} nodes exceed state size {}", graph.node_count(), self.node_count()),
            ));
        }
        let layer = Layer {
            graph,
            ids: IdMap::Offset(0),
            off: None,
        };
        Ok(self.run_zone(&[layer], beta, 1))
    }

    /// Daily compartment progression. Nodes exposed earlier the same day
    /// are skipped.
    pub fn progression_step(&mut self, thresholds: &TransitionThresholds) -> Result<TransitionTally> {
        thresholds.validate()?;
        let [ea, ei, ah, ar, ih, hr] = thresholds.effective();
        let mut tally = TransitionTally::default();
        for node in 0..self.statuses.len() {
            let status = self.statuses[node];
            if status == Status::S || status == Status::R || self.fresh[node] {
                continue;
            }
            let u: f64 = self.rng.gen();
            match status {
                Status::E => {
                    if u < ea {
                        self.transition(node, Status::A, 2);
                        tally.e_to_a += 1;
                    } else if u < ea + ei {
                        self.transition(node, Status::I, 2);
                        tally.e_to_i += 1;
                    }
                }
                Status::A => {
                    if u < ah {
                        self.transition(node, Status::H, 2);
                        tally.a_to_h += 1;
                    } else if u < ah + ar {
                        self.transition(node, Status::R, 2);
                        tally.a_to_r += 1;
                    }
                }
                Status::I => {
                    if u < ih {
                        self.transition(node, Status::H, 2);
                        tally.i_to_h += 1;
                    }
                }
                Status::H => {
                    if u < hr {
                        self.transition(node, Status::R, 2);
                        tally.h_to_r += 1;
                    }
                }
                Status::S | Status::R => unreachable!(),
            }
        }
        for &n in &self.fresh_list {
            self.fresh[n as usize] = false;
        }
        self.fresh_list.clear();
        self.cumulative_h += tally.new_h();
        Ok(tally)
    }

    /// One full day: residence hours, working hours, progression.
    pub fn simulate_day(
        &mut self,
        topology: &MetroTopology,
        thresholds: &TransitionThresholds,
        beta: f64,
        indicator: &Indicator,
    ) -> Result<DailyCounts> {
        check_probability("beta", beta)?;
        if topology.node_count() != self.node_count() {
            return Err(Error::SizeMismatch {
                snapshot: self.node_count(),
                topology: topology.node_count(),
            });
        }

        let residence: Vec<Layer<'_>> = (0..topology.region_count())
            .map(|r| Layer {
                graph: topology.residence_graph(r),
                ids: IdMap::Offset(topology.region_offset(r)),
                off: None,
            })
            .collect();
        let mut new_e = self.run_zone(&residence, beta, 1);

        let work = topology.work_day(self.day, indicator)?;
        let mut zone2: Vec<Layer<'_>> = residence
            .into_iter()
            .map(|l| Layer {
                off: Some(&work.at_work),
                ..l
            })
            .collect();
        zone2.push(Layer {
            graph: &work.graph,
            ids: IdMap::List(&work.active),
            off: None,
        });
        new_e += self.run_zone(&zone2, beta, 2);

        let tally = self.progression_step(thresholds)?;
        let counts = self.daily_counts(new_e, tally.new_h());
        self.day += 1;
        Ok(counts)
    }

    fn daily_counts(&self, new_e: u64, new_h: u64) -> DailyCounts {
        let c = &self.counts;
        DailyCounts {
            day: self.day,
            s: c[Status::S as usize],
            e: c[Status::E as usize],
            i: c[Status::I as usize],
            r: c[Status::R as usize],
            a: c[Status::A as usize],
            h: c[Status::H as usize],
            new_e,
            new_h,
        }
    }

    /// Iterates [`simulate_day`](Self::simulate_day) for `days` days.
    pub fn simulate_horizon(
        &mut self,
        topology: &MetroTopology,
        thresholds: &TransitionThresholds,
        betas: &[f64],
        indicators: &[Indicator],
        days: usize,
    ) -> Result<Vec<DailyCounts>> {
        if betas.len() < days {
            return Err(Error::SeriesTooShort {
                name: "beta",
                needed: days,
                available: betas.len(),
            });
        }
        if indicators.len() < days {
            return Err(Error::SeriesTooShort {
                name: "indicator",
                needed: days,
                available: indicators.len(),
            });
        }
        (0..days)
            .map(|d| self.simulate_day(topology, thresholds, betas[d], &indicators[d]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_metro, toy_regions, RegionSpec};

    fn star(leaves: u32) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_edges(leaves as usize + 1, &edges).unwrap()
    }

    #[test]
    fn zero_beta_never_infects() {
        let mut st = SimState::new(6, 1);
        st.set_status(0, Status::I);
        assert_eq!(st.contagion_step(&star(5), 0.0).unwrap(), 0);
        assert_eq!(st.count(Status::S), 5);
    }

    #[test]
    fn certain_transmission_on_star() {
        let mut st = SimState::new(6, 1);
        st.set_status(0, Status::I);
        assert_eq!(st.contagion_step(&star(5), 1.0).unwrap(), 5);
        assert_eq!(st.count(Status::E), 5);
    }

    #[test]
    fn h_and_r_do_not_transmit_or_receive() {
        for blocked in [Status::H, Status::R] {
            let mut st = SimState::new(6, 1);
            st.set_status(0, blocked);
            assert_eq!(st.contagion_step(&star(5), 1.0).unwrap(), 0);
        }
        let mut st = SimState::new(3, 1);
        st.set_status(0, Status::I);
        st.set_status(1, Status::H);
        st.set_status(2, Status::R);
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(st.contagion_step(&g, 1.0).unwrap(), 0);
    }

    #[test]
    fn exposure_is_synchronous_within_a_zone() {
        // path 0 - 1 - 2: node 1 is exposed this step but must not pass it on.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut st = SimState::new(3, 1);
        st.set_status(0, Status::E);
        assert_eq!(st.contagion_step(&g, 1.0).unwrap(), 1);
        assert_eq!(st.status(2), Status::S);
    }

    #[test]
    fn bad_beta_rejected() {
        let mut st = SimState::new(3, 1);
        assert!(st.contagion_step(&star(2), 1.5).is_err());
        assert!(st.contagion_step(&star(2), -0.1).is_err());
    }

    #[test]
    fn reference_partition_of_e_draws() {
        let [ea, ei, ..] = TransitionThresholds::default().effective();
        let classify = |u: f64| {
            if u < ea {
                Status::A
            } else if u < ea + ei {
                Status::I
            } else {
                Status::E
            }
        };
        assert_eq!(classify(0.01), Status::A);
        assert_eq!(classify(0.10), Status::I);
        assert_eq!(classify(0.50), Status::E);
        assert!((ea + ei - 0.200).abs() < 1e-12);
    }

    #[test]
    fn all_susceptible_has_no_transitions() {
        let mut st = SimState::new(100, 3);
        let tally = st.progression_step(&TransitionThresholds::default()).unwrap();
        assert_eq!(tally.total(), 0);
    }

    #[test]
    fn certain_thresholds_drive_every_arrow() {
        let th = TransitionThresholds {
            e_to_a: 1.0,
            e_to_i: 0.0,
            a_to_h: 1.0,
            a_to_r: 0.0,
            i_to_h: 1.0,
            h_to_r: 1.0,
            literal: false,
        };
        let mut st = SimState::from_statuses(vec![Status::E, Status::A, Status::I, Status::H], 0);
        let t = st.progression_step(&th).unwrap();
        assert_eq!((t.e_to_a, t.a_to_h, t.i_to_h, t.h_to_r), (1, 1, 1, 1));
        assert_eq!(st.statuses(), &[Status::A, Status::H, Status::H, Status::R]);
        assert_eq!(st.cumulative_h(), 2);
    }

    #[test]
    fn literal_mode_complements_thresholds() {
        let th = TransitionThresholds {
            i_to_h: 0.0,
            literal: true,
            ..Default::default()
        };
        let mut st = SimState::from_statuses(vec![Status::I; 50], 0);
        let t = st.progression_step(&th).unwrap();
        assert_eq!(t.i_to_h, 50);
    }

    #[test]
    fn freshly_exposed_do_not_progress_same_day() {
        let th = TransitionThresholds {
            e_to_a: 1.0,
            e_to_i: 0.0,
            ..Default::default()
        };
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let mut st = SimState::new(2, 0);
        st.set_status(0, Status::I);
        st.contagion_step(&g, 1.0).unwrap();
        st.progression_step(&th).unwrap();
        assert_eq!(st.status(1), Status::E);
        st.progression_step(&th).unwrap();
        assert_eq!(st.status(1), Status::A);
    }

    #[test]
    fn invalid_thresholds_rejected() {
        let th = TransitionThresholds {
            e_to_a: 0.6,
            e_to_i: 0.6,
            ..Default::default()
        };
        assert!(SimState::new(2, 0).progression_step(&th).is_err());
    }

    #[test]
    fn quiet_population_stays_quiet() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 1).unwrap();
        let mut st = SimState::new(topo.node_count(), 1);
        let c = st
            .simulate_day(&topo, &TransitionThresholds::default(), 0.5, &Indicator::Uniform(1.0))
            .unwrap();
        assert_eq!((c.e, c.a, c.i, c.new_h, c.new_e), (0, 0, 0, 0, 0));
        assert_eq!(c.s, 1000);
        assert_eq!(st.day(), 1);
    }

    #[test]
    fn commuters_leave_home_edges_in_zone_two() {
        // Two regions of 3 nodes in a triangle; everyone in region 0 commutes.
        let regions = vec![RegionSpec::new("a", 3, 3, 1), RegionSpec::new("b", 3, 0, 1)];
        let topo = build_metro(&regions, (2, 0.0), (2, 0.0), 0).unwrap();
        let work = topo.work_day(0, &Indicator::Uniform(1.0)).unwrap();
        assert_eq!(work.active.len(), 3);
        assert!(work.at_work[..3].iter().all(|&x| x));
        // With beta = 1 an infectious node in region 1 reaches its whole triangle
        // in zone 1 and nothing in region 0.
        let mut st = SimState::new(6, 0);
        st.set_status(3, Status::I);
        let th = TransitionThresholds {
            i_to_h: 0.0,
            ..Default::default()
        };
        let c = st.simulate_day(&topo, &th, 1.0, &Indicator::Uniform(1.0)).unwrap();
        assert_eq!(c.new_e, 2);
        assert!(st.statuses()[..3].iter().all(|&s| s == Status::S));
    }

    #[test]
    fn snapshot_roundtrip_and_replay() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 4).unwrap();
        let th = TransitionThresholds::default();
        let mut st = SimState::seeded(&topo, 5, 11).unwrap();
        let snap = st.snapshot();
        let ind = Indicator::Uniform(1.0);
        let first: Vec<_> = (0..5).map(|_| st.simulate_day(&topo, &th, 0.3, &ind).unwrap()).collect();
        assert_ne!(st.statuses(), snap.restore(1000).unwrap().statuses());
        let mut again = snap.restore(1000).unwrap();
        assert_eq!(again.statuses(), snap.restore(1000).unwrap().statuses());
        let second: Vec<_> = (0..5).map(|_| again.simulate_day(&topo, &th, 0.3, &ind).unwrap()).collect();
        assert_eq!(first, second);
        assert_eq!(st.statuses(), again.statuses());
    }

    #[test]
    fn restore_into_wrong_size_fails() {
        let snap = SimState::new(10, 0).snapshot();
        assert!(matches!(snap.restore(11), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn horizon_checks_series_length() {
        let topo = build_metro(&toy_regions(), (4, 0.0), (10, 0.0), 4).unwrap();
        let mut st = SimState::new(1000, 0);
        let th = TransitionThresholds::default();
        let ind = vec![Indicator::Uniform(1.0); 3];
        assert!(st.simulate_horizon(&topo, &th, &[0.1; 2], &ind, 3).is_err());
        assert!(st.simulate_horizon(&topo, &th, &[0.1; 3], &ind[..2], 3).is_err());
        let before = st.snapshot();
        assert!(st.simulate_horizon(&topo, &th, &[], &[], 0).unwrap().is_empty());
        assert_eq!(st.statuses(), before.restore(1000).unwrap().statuses());
        assert_eq!(st.day(), 0);
    }

    #[test]
    fn zero_beta_horizon_only_drains() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 4).unwrap();
        let mut st = SimState::seeded(&topo, 5, 2).unwrap();
        let th = TransitionThresholds::default();
        let days = 200;
        let out = st
            .simulate_horizon(&topo, &th, &vec![0.0; days], &vec![Indicator::Uniform(1.0); days], days)
            .unwrap();
        assert!(out.iter().all(|c| c.new_e == 0 && c.s == 975));
        let last = out.last().unwrap();
        assert_eq!(last.infectious() + last.h, 0, "{last:?}");
        assert_eq!(last.r, 25);
    }

    #[test]
    fn history_starts_with_every_node() {
        let mut st = SimState::new(4, 0);
        st.set_status(1, Status::I);
        st.enable_history();
        let h = st.history().unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(h[1].status, Status::I);
        assert!(h.iter().all(|e| e.zone == 0));
    }

    #[test]
    fn seeding_places_exact_counts() {
        let topo = build_metro(&toy_regions(), (4, 0.0), (10, 0.0), 4).unwrap();
        let st = SimState::seeded(&topo, 7, 1).unwrap();
        assert_eq!(st.count(Status::E), 35);
        for r in 0..5 {
            let off = topo.region_offset(r) as usize;
            let n = st.statuses()[off..off + 200].iter().filter(|&&s| s == Status::E).count();
            assert_eq!(n, 7);
        }
        assert!(SimState::seeded(&topo, 201, 1).is_err());
    }

    #[test]
    fn legal_transition_table() {
        use Status::*;
        let legal: Vec<_> = Status::ALL
            .iter()
            .flat_map(|&a| Status::ALL.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| Status::is_legal_transition(a, b))
            .collect();
        assert_eq!(legal, vec![(S, E), (E, I), (E, A), (I, H), (A, R), (A, H), (H, R)]);
        for s in Status::ALL {
            assert_eq!(Status::from_code(s.code()), Some(s));
        }
    }
}
