//! Newman-Watts small-world generation and the interconnected metropolitan
//! structure: one residence network per region, coupled only through a work
//! network that is recomposed every day from the commuters who travel.

use std::collections::{HashSet, VecDeque};
use std::io::Write;
use std::sync::{Arc, Mutex};

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed, SimRng, TAG_POOL, TAG_RESIDENCE, TAG_WORK};
use crate::{Error, Result};

/// `(n, k, p)` for one Newman-Watts graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub n: usize,
    pub k: usize,
    pub p: f64,
}

impl NetworkParams {
    pub fn new(n: usize, k: usize, p: f64) -> Self {
        Self { n, k, p }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::param("n", format!("must be >= 3, got {}", self.n)));
        }
        if self.k < 1 || self.k >= self.n {
            return Err(Error::param(
                "k",
                format!("must satisfy 1 <= k < n (n = {}), got {}", self.n, self.k),
            ));
        }
        check_probability("p", self.p)
    }
}

pub(crate) fn check_probability(field: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::param(field, format!("must lie in [0, 1], got {value}")));
    }
    Ok(())
}

/// Round-half-up of `num / den` for non-negative integers.
pub(crate) fn div_round(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

/// Round-half-up of a non-negative float.
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Undirected simple graph over dense ids `0..n`, stored as an edge list
/// plus compressed adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self::from_edges_unchecked(n, Vec::new())
    }

    /// Build from an explicit edge list, rejecting self-loops, duplicates
    /// and out-of-range ids.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::param("edges", format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::param("edges", format!("self-loop at {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::param("edges", format!("duplicate edge ({u}, {v})")));
            }
            normalized.push(e);
        }
        Ok(Self::from_edges_unchecked(n, normalized))
    }

    fn from_edges_unchecked(n: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in &edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for &(u, v) in &edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        Self {
            n,
            edges,
            offsets,
            targets,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in generation order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u as usize).contains(&v)
    }

    /// Writes one `u v` line per edge; `id_of` maps local ids to the ids
    /// written (e.g. global ids).
    pub fn write_edge_list<W: Write>(&self, mut out: W, id_of: impl Fn(u32) -> u32) -> std::io::Result<()> {
        for &(u, v) in &self.edges {
            writeln!(out, "{} {}", id_of(u), id_of(v))?;
        }
        Ok(())
    }
}

/// Ring lattice plus random shortcuts; no edge is ever removed.
///
/// Each node links to its `k` nearest ring neighbours (`k - 1` when `k` is
/// odd). Then, for every lattice edge, with probability `p` a shortcut is
/// attempted between two nodes drawn uniformly and independently; attempts
/// that would create a self-loop or duplicate edge are dropped.
pub fn generate_newman_watts(params: NetworkParams, seed: u64) -> Result<Graph> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    Ok(newman_watts(params.n, params.k, params.p, &mut rng))
}

/// Generator without parameter validation; requires `k < n` when `n > 0`.
fn newman_watts(n: usize, k: usize, p: f64, rng: &mut SimRng) -> Graph {
    if n < 2 {
        return Graph::empty(n);
    }
    let half = k / 2;
    let lattice = n * half;
    let mut edges = Vec::with_capacity(lattice + (lattice as f64 * p * 1.1) as usize + 8);
    for i in 0..n {
        for j in 1..=half {
            let t = (i + j) % n;
            edges.push((i.min(t) as u32, i.max(t) as u32));
        }
    }
    if p > 0.0 {
        let mut shortcuts: HashSet<u64> = HashSet::new();
        for _ in 0..lattice {
            if !rng.gen_bool(p) {
                continue;
            }
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let d = u.abs_diff(v);
            if d.min(n - d) <= half {
                continue;
            }
            let (a, b) = (u.min(v) as u32, u.max(v) as u32);
            if shortcuts.insert(((a as u64) << 32) | b as u64) {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges_unchecked(n, edges)
}

/// One region of the metropolitan area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub name: String,
    /// Persons at full scale.
    pub population: u64,
    /// Persons commuting to the center daily, full scale.
    pub commuting: u64,
    /// Divisor applied to both counts.
    pub scale: u64,
}

impl RegionSpec {
    pub fn new(name: impl Into<String>, population: u64, commuting: u64, scale: u64) -> Self {
        Self {
            name: name.into(),
            population,
            commuting,
            scale,
        }
    }

    /// Scaled node count, round-half-up with a floor of one node.
    pub fn nodes(&self) -> usize {
        div_round(self.population, self.scale.max(1)).max(1) as usize
    }

    pub fn pool_size(&self) -> usize {
        div_round(self.commuting, self.scale.max(1)) as usize
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let field = |f: &str| format!("regions[{index}].{f}");
        if self.scale == 0 {
            return Err(Error::param(field("scale"), "must be >= 1"));
        }
        if self.commuting > self.population {
            return Err(Error::param(
                field("commuting"),
                format!("{} exceeds population {}", self.commuting, self.population),
            ));
        }
        if self.pool_size() > self.nodes() {
            return Err(Error::param(
                field("commuting"),
                format!("scaled pool {} exceeds region size {}", self.pool_size(), self.nodes()),
            ));
        }
        Ok(())
    }
}

/// The four Tokyo metropolitan prefectures (thousands of persons expanded),
/// population and daily commuters to the center.
pub fn tokyo_regions(scale: u64) -> Vec<RegionSpec> {
    vec![
        RegionSpec::new("Tokyo", 13_520_000, 4_864_000, scale),
        RegionSpec::new("Kanagawa", 9_200_000, 888_000, scale),
        RegionSpec::new("Saitama", 7_340_000, 780_000, scale),
        RegionSpec::new("Chiba", 6_280_000, 598_000, scale),
    ]
}

/// Five regions of 200 nodes each with Tokyo-like commuting shares.
pub fn toy_regions() -> Vec<RegionSpec> {
    vec![
        RegionSpec::new("center", 20_000, 7_200, 100),
        RegionSpec::new("north", 20_000, 2_000, 100),
        RegionSpec::new("east", 20_000, 2_100, 100),
        RegionSpec::new("south", 20_000, 1_900, 100),
        RegionSpec::new("west", 20_000, 2_000, 100),
    ]
}

/// Fraction of the baseline commuter volume travelling on a given day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Indicator {
    Uniform(f64),
    PerRegion(Vec<f64>),
}

impl Default for Indicator {
    fn default() -> Self {
        Indicator::Uniform(1.0)
    }
}

impl Indicator {
    fn for_region(&self, region: usize) -> f64 {
        match self {
            Indicator::Uniform(x) => *x,
            Indicator::PerRegion(v) => v[region],
        }
    }

    pub(crate) fn validate(&self, regions: usize) -> Result<()> {
        let values: &[f64] = match self {
            Indicator::Uniform(x) => std::slice::from_ref(x),
            Indicator::PerRegion(v) => {
                if v.len() != regions {
                    return Err(Error::param(
                        "indicator",
                        format!("{} per-region values for {} regions", v.len(), regions),
                    ));
                }
                v
            }
        };
        for &x in values {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::param("indicator", format!("must be finite and >= 0, got {x}")));
            }
        }
        Ok(())
    }

    fn cache_key(&self) -> Vec<u64> {
        match self {
            Indicator::Uniform(x) => vec![x.to_bits()],
            Indicator::PerRegion(v) => v.iter().map(|x| x.to_bits()).collect(),
        }
    }
}

/// The work network in force on one day.
#[derive(Debug)]
pub struct WorkDay {
    /// Global ids of the day's active commuters; work-graph node `i` is `active[i]`.
    pub active: Vec<u32>,
    pub graph: Graph,
    /// `at_work[g]` is true when global node `g` is an active commuter.
    pub at_work: Vec<bool>,
}

const WORK_CACHE_CAPACITY: usize = 32;

#[derive(Default)]
struct WorkCache {
    entries: VecDeque<((u32, Vec<u64>), Arc<WorkDay>)>,
}

/// Residence graphs, commuter pools and the work-network template.
pub struct MetroTopology {
    regions: Vec<RegionSpec>,
    residence: Vec<Graph>,
    offsets: Vec<u32>,
    pools: Vec<Vec<u32>>,
    work_k: usize,
    work_p: f64,
    seed: u64,
    cache: Mutex<WorkCache>,
}

impl std::fmt::Debug for MetroTopology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetroTopology")
            .field("regions", &self.regions)
            .field("nodes", &self.node_count())
            .field("pool_total", &self.pool_total())
            .field("work_k", &self.work_k)
            .field("work_p", &self.work_p)
            .field("seed", &self.seed)
            .finish()
    }
}

/// Builds one residence graph per region and draws each region's fixed
/// commuter pool.
pub fn build_metro(
    regions: &[RegionSpec],
    residence: (usize, f64),
    work: (usize, f64),
    seed: u64,
) -> Result<MetroTopology> {
    if regions.is_empty() {
        return Err(Error::param("regions", "at least one region is required"));
    }
    for (i, r) in regions.iter().enumerate() {
        r.validate(i)?;
    }
    if work.0 < 1 {
        return Err(Error::param("k_work", "must be >= 1"));
    }
    check_probability("p_work", work.1)?;
    check_probability("p_residence", residence.1)?;

    let mut offsets = Vec::with_capacity(regions.len() + 1);
    let mut total = 0u32;
    offsets.push(0);
    for r in regions {
        total += r.nodes() as u32;
        offsets.push(total);
    }

    let built: Vec<Result<(Graph, Vec<u32>)>> = {
        use rayon::prelude::*;
        regions
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                let params = NetworkParams::new(r.nodes(), residence.0, residence.1);
                params.validate().map_err(|e| match e {
                    Error::Param { field, message } => Error::param(
                        format!("regions[{i}] ({}): residence {field}", r.name),
                        message,
                    ),
                    other => other,
                })?;
                let graph = generate_newman_watts(params, derive_seed(seed, &[TAG_RESIDENCE, i as u64]))?;
                let mut rng = rng_from_seed(derive_seed(seed, &[TAG_POOL, i as u64]));
                let mut pool: Vec<u32> = index::sample(&mut rng, r.nodes(), r.pool_size())
                    .into_iter()
                    .map(|local| offsets[i] + local as u32)
                    .collect();
                pool.sort_unstable();
                Ok((graph, pool))
            })
            .collect()
    };
    let mut residence_graphs = Vec::with_capacity(regions.len());
    let mut pools = Vec::with_capacity(regions.len());
    for b in built {
        let (g, p) = b?;
        residence_graphs.push(g);
        pools.push(p);
    }

    Ok(MetroTopology {
        regions: regions.to_vec(),
        residence: residence_graphs,
        offsets,
        pools,
        work_k: work.0,
        work_p: work.1,
        seed,
        cache: Mutex::new(WorkCache::default()),
    })
}

impl MetroTopology {
    pub fn regions(&self) -> &[RegionSpec] {
        &self.regions
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn node_count(&self) -> usize {
        *self.offsets.last().unwrap() as usize
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn work_params(&self) -> (usize, f64) {
        (self.work_k, self.work_p)
    }

    pub fn residence_graph(&self, region: usize) -> &Graph {
        &self.residence[region]
    }

    /// First global id of `region`.
    pub fn region_offset(&self, region: usize) -> u32 {
        self.offsets[region]
    }

    pub fn region_size(&self, region: usize) -> usize {
        (self.offsets[region + 1] - self.offsets[region]) as usize
    }

    pub fn global_id(&self, region: usize, local: u32) -> u32 {
        self.offsets[region] + local
    }

    /// `(region, local id)` of a global id.
    pub fn locate(&self, global: u32) -> (usize, u32) {
        let region = self.offsets.partition_point(|&o| o <= global) - 1;
        (region, global - self.offsets[region])
    }

    /// Fixed commuter pool of `region`, as sorted global ids.
    pub fn commuter_pool(&self, region: usize) -> &[u32] {
        &self.pools[region]
    }

    pub fn pool_total(&self) -> usize {
        self.pools.iter().map(Vec::len).sum()
    }

    /// Seed of the work network on `day`.
    pub fn day_seed(&self, day: u32) -> u64 {
        derive_seed(self.seed, &[TAG_WORK, day as u64])
    }

    /// Active commuters for the day and the work graph over them.
    ///
    /// Each region contributes a uniform subset of its pool of size
    /// `round(indicator * pool)`; indicators above 1 are clamped. The union is
    /// shuffled before being laid on the ring so workplaces mix regions.
    pub fn active_work_network(&self, indicator: &Indicator, day_seed: u64) -> Result<(Vec<u32>, Graph)> {
        indicator.validate(self.regions.len())?;
        let mut rng = rng_from_seed(day_seed);
        let mut active = Vec::new();
        for (r, pool) in self.pools.iter().enumerate() {
            let mut frac = indicator.for_region(r);
            if frac > 1.0 {
                log::warn!("indicator {frac} for region {} clamped to 1", self.regions[r].name);
                frac = 1.0;
            }
            let count = round_half_up(frac * pool.len() as f64).min(pool.len());
            active.extend(index::sample(&mut rng, pool.len(), count).into_iter().map(|i| pool[i]));
        }
        active.shuffle(&mut rng);
        let n = active.len();
        let k = self.work_k.min(n.saturating_sub(1));
        let graph = newman_watts(n, k, self.work_p, &mut rng);
        Ok((active, graph))
    }

    /// Work network for simulation `day`, memoised over recent days.
    pub fn work_day(&self, day: u32, indicator: &Indicator) -> Result<Arc<WorkDay>> {
        let key = (day, indicator.cache_key());
        if let Some(hit) = self.lookup(&key) {
            return Ok(hit);
        }
        let (active, graph) = self.active_work_network(indicator, self.day_seed(day))?;
        let mut at_work = vec![false; self.node_count()];
        for &g in &active {
            at_work[g as usize] = true;
        }
        let entry = Arc::new(WorkDay { active, graph, at_work });
        let mut cache = self.cache.lock().unwrap();
        if !cache.entries.iter().any(|(k, _)| *k == key) {
            if cache.entries.len() == WORK_CACHE_CAPACITY {
                cache.entries.pop_front();
            }
            cache.entries.push_back((key, entry.clone()));
        }
        Ok(entry)
    }

    fn lookup(&self, key: &(u32, Vec<u64>)) -> Option<Arc<WorkDay>> {
        let cache = self.cache.lock().unwrap();
        cache.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn assert_simple(g: &Graph) {
        let mut seen = HashSet::new();
        for &(u, v) in g.edges() {
            assert_ne!(u, v, "self-loop");
            assert!(u < v);
            assert!(seen.insert((u, v)), "duplicate edge {u}-{v}");
        }
        for u in 0..g.node_count() {
            for &v in g.neighbors(u) {
                assert!(g.neighbors(v as usize).contains(&(u as u32)), "asymmetric {u}-{v}");
            }
        }
        let deg_sum: usize = (0..g.node_count()).map(|u| g.degree(u)).sum();
        assert_eq!(deg_sum, 2 * g.edge_count());
    }

    #[test]
    fn pure_ring_when_p_zero() {
        let g = generate_newman_watts(NetworkParams::new(10, 2, 0.0), 1).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert!((0..10).all(|u| g.degree(u) == 2));
        assert_simple(&g);
    }

    #[test]
    fn odd_k_uses_k_minus_one() {
        let g = generate_newman_watts(NetworkParams::new(12, 5, 0.0), 1).unwrap();
        assert_eq!(g.edge_count(), 24);
        assert!((0..12).all(|u| g.degree(u) == 4));
    }

    #[test]
    fn triangle_saturates() {
        for seed in 0..50 {
            let g = generate_newman_watts(NetworkParams::new(3, 2, 1.0), seed).unwrap();
            assert_eq!(g.edge_count(), 3);
            assert_simple(&g);
        }
    }

    #[test]
    fn invalid_params_name_the_bound() {
        let err = generate_newman_watts(NetworkParams::new(2, 1, 0.0), 0).unwrap_err();
        assert!(err.to_string().contains("`n`"), "{err}");
        let err = generate_newman_watts(NetworkParams::new(10, 10, 0.0), 0).unwrap_err();
        assert!(err.to_string().contains("`k`"), "{err}");
        let err = generate_newman_watts(NetworkParams::new(10, 0, 0.0), 0).unwrap_err();
        assert!(err.to_string().contains("`k`"), "{err}");
        let err = generate_newman_watts(NetworkParams::new(10, 2, 1.5), 0).unwrap_err();
        assert!(err.to_string().contains("`p`"), "{err}");
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
        let g = Graph::from_edges(3, &[(2, 0)]).unwrap();
        assert!(g.has_edge(0, 2) && g.has_edge(2, 0));
    }

    #[test]
    fn edge_list_export() {
        let g = generate_newman_watts(NetworkParams::new(4, 2, 0.0), 0).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf, |u| u + 100).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().all(|l| l.split(' ').all(|x| x.parse::<u32>().unwrap() >= 100)));
    }

    #[test]
    fn scaled_sizes_round_half_up() {
        let r = RegionSpec::new("x", 150, 50, 100);
        assert_eq!(r.nodes(), 2);
        assert_eq!(r.pool_size(), 1);
        let r = RegionSpec::new("x", 10, 0, 100);
        assert_eq!(r.nodes(), 1);
    }

    #[test]
    fn locate_roundtrip() {
        let topo = build_metro(&toy_regions(), (4, 0.0), (10, 0.1), 3).unwrap();
        for g in [0u32, 199, 200, 999] {
            let (r, l) = topo.locate(g);
            assert_eq!(topo.global_id(r, l), g);
        }
        assert_eq!(topo.locate(200), (1, 0));
    }

    #[test]
    fn pools_disjoint_and_within_region() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 9).unwrap();
        let mut all = HashSet::new();
        for r in 0..topo.region_count() {
            let pool = topo.commuter_pool(r);
            assert_eq!(pool.len(), topo.regions()[r].pool_size());
            for &g in pool {
                assert_eq!(topo.locate(g).0, r);
                assert!(all.insert(g));
            }
        }
    }

    #[test]
    fn empty_region_list_rejected() {
        assert!(build_metro(&[], (4, 0.0), (10, 0.0), 0).is_err());
        let bad = vec![RegionSpec::new("a", 1000, 2000, 100)];
        assert!(build_metro(&bad, (4, 0.0), (10, 0.0), 0).is_err());
    }

    #[test]
    fn proportional_active_sets() {
        let regions: Vec<_> = (0..3).map(|i| RegionSpec::new(format!("r{i}"), 1000, 500, 1)).collect();
        let topo = build_metro(&regions, (4, 0.0), (10, 0.0), 1).unwrap();
        let (active, g) = topo.active_work_network(&Indicator::Uniform(0.6), 5).unwrap();
        assert_eq!(active.len(), 900);
        assert_eq!(g.node_count(), 900);
        for r in 0..3 {
            assert_eq!(active.iter().filter(|&&a| topo.locate(a).0 == r).count(), 300);
        }
        let (active, g) = topo.active_work_network(&Indicator::Uniform(0.0), 5).unwrap();
        assert!(active.is_empty());
        assert_eq!(g.edge_count(), 0);
        let (active, _) = topo.active_work_network(&Indicator::Uniform(3.0), 5).unwrap();
        assert_eq!(active.len(), 1500);
        let (active, _) = topo
            .active_work_network(&Indicator::PerRegion(vec![1.0, 0.0, 0.5]), 5)
            .unwrap();
        assert_eq!(active.len(), 750);
        assert!(topo.active_work_network(&Indicator::PerRegion(vec![1.0]), 5).is_err());
        assert!(topo.active_work_network(&Indicator::Uniform(-0.1), 5).is_err());
    }

    #[test]
    fn tiny_active_sets_clamp_k() {
        let regions = vec![RegionSpec::new("a", 50, 3, 1)];
        let topo = build_metro(&regions, (4, 0.0), (10, 0.5), 1).unwrap();
        let (active, g) = topo.active_work_network(&Indicator::Uniform(1.0), 1).unwrap();
        assert_eq!(active.len(), 3);
        assert_eq!(g.edge_count(), 3);
        let (active, g) = topo.active_work_network(&Indicator::Uniform(0.34), 1).unwrap();
        assert_eq!(active.len(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn work_day_cache_is_transparent() {
        let topo = build_metro(&toy_regions(), (4, 0.05), (10, 0.1), 2).unwrap();
        let ind = Indicator::Uniform(0.8);
        let a = topo.work_day(3, &ind).unwrap();
        let (active, graph) = topo.active_work_network(&ind, topo.day_seed(3)).unwrap();
        assert_eq!(a.active, active);
        assert_eq!(a.graph, graph);
        for day in 0..100 {
            topo.work_day(day, &ind).unwrap();
        }
        let again = topo.work_day(3, &ind).unwrap();
        assert_eq!(again.graph, graph);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn generated_graphs_are_simple(n in 3usize..200, kf in 0.0f64..1.0, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let k = 1 + ((n - 2) as f64 * kf) as usize;
            let g = generate_newman_watts(NetworkParams::new(n, k, p), seed).unwrap();
            assert_simple(&g);
            prop_assert!(g.edge_count() >= n * (k / 2));
            prop_assert_eq!(g.clone(), generate_newman_watts(NetworkParams::new(n, k, p), seed).unwrap());
        }
    }
}
