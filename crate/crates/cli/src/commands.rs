use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use seirah_core::data_io::{
    align, export_beta_series, export_indicator, export_node_history, export_observed, export_timeseries,
    load_beta_column, load_indicator, load_observed, node_history_records, FillPolicy, IndicatorSeries,
    ObservedSeries,
};
use seirah_core::rng::derive_seed;
use seirah_core::sweep::run_sweep;
use seirah_core::{Graph, Indicator, MetroTopology, SweepGrid};

use crate::config::RunConfig;
use crate::manifest::{write_manifest, Manifest};
use crate::{io_error, CliError};

/// Stream tag of synthetic observations, independent of the canonical run.
const TAG_FIXTURE: u64 = 0x6669_7874;

/// Command-line values that win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub days: Option<usize>,
    pub beta: Option<f64>,
    pub beta_file: Option<PathBuf>,
    pub observed: Option<PathBuf>,
    pub indicator: Option<PathBuf>,
    pub p_residence: Option<Vec<f64>>,
    pub p_work: Option<Vec<f64>>,
    pub rmse_threshold: Option<f64>,
    pub no_node_history: bool,
}

impl Overrides {
    /// Applies the overrides relevant to `command`.
    pub fn apply(&self, config: &mut RunConfig, command: &str) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(d) = &self.out_dir {
            config.output.dir = d.clone();
        }
        match command {
            "simulate" => {
                if let Some(d) = self.days {
                    config.simulate.days = d;
                }
                if let Some(b) = self.beta {
                    config.simulate.beta = b;
                    config.simulate.beta_file = None;
                }
                if let Some(f) = &self.beta_file {
                    config.simulate.beta_file = Some(f.clone());
                }
                if let Some(i) = &self.indicator {
                    config.simulate.indicator = Some(i.clone());
                }
                if self.no_node_history {
                    config.simulate.node_history = false;
                }
            }
            "infer" | "sweep" => {
                if let Some(o) = &self.observed {
                    config.infer.observed = Some(o.clone());
                }
                if let Some(i) = &self.indicator {
                    config.infer.indicator = Some(i.clone());
                }
                if let Some(p) = &self.p_residence {
                    config.sweep.p_residence = p.clone();
                }
                if let Some(p) = &self.p_work {
                    config.sweep.p_work = p.clone();
                }
                if let Some(t) = self.rmse_threshold {
                    config.sweep.rmse_threshold = t;
                }
            }
            "export-fixtures" => {
                if let Some(d) = self.days {
                    config.fixtures.days = d;
                }
                if let Some(b) = self.beta {
                    config.fixtures.beta = vec![b];
                    config.fixtures.change_days.clear();
                }
            }
            _ => {}
        }
    }
}

fn prepare(config: &RunConfig) -> Result<PathBuf, CliError> {
    config.validate()?;
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serialisable");
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

fn build_topology(config: &RunConfig) -> Result<MetroTopology, CliError> {
    let scenario = config.scenario();
    let topology = scenario.build_topology()?;
    log::info!(
        "topology: {} nodes in {} regions, {} commuters",
        topology.node_count(),
        topology.region_count(),
        topology.pool_total()
    );
    Ok(topology)
}

#[derive(Debug, Serialize)]
struct DegreeStats {
    edges: usize,
    mean: f64,
    min: usize,
    max: usize,
}

impl DegreeStats {
    fn of(g: &Graph) -> Self {
        let n = g.node_count();
        let degrees = (0..n).map(|u| g.degree(u));
        Self {
            edges: g.edge_count(),
            mean: if n == 0 { 0.0 } else { 2.0 * g.edge_count() as f64 / n as f64 },
            min: degrees.clone().min().unwrap_or(0),
            max: degrees.max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Serialize)]
struct RegionSummary {
    name: String,
    nodes: usize,
    commuter_pool: usize,
    residence: DegreeStats,
}

#[derive(Debug, Serialize)]
struct TopologySummary {
    total_nodes: usize,
    total_commuters: usize,
    regions: Vec<RegionSummary>,
    /// Work network of day 0 at full commuting.
    work_day0: DegreeStats,
    work_day0_active: usize,
}

fn write_edges(path: &Path, graph: &Graph, id_of: impl Fn(u32) -> u32) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut out = BufWriter::new(file);
    graph
        .write_edge_list(&mut out, id_of)
        .and_then(|_| out.flush())
        .map_err(|e| io_error(path, e))
}

/// Builds the topology and writes edge lists (global ids) plus a summary.
pub fn cmd_generate(config: &RunConfig) -> Result<Manifest, CliError> {
    let dir = prepare(config)?;
    let topology = build_topology(config)?;
    let edges_dir = dir.join("edges");
    fs::create_dir_all(&edges_dir).map_err(|e| io_error(&edges_dir, e))?;
    let mut outputs = Vec::new();
    let mut regions = Vec::new();
    for (r, spec) in topology.regions().iter().enumerate() {
        let graph = topology.residence_graph(r);
        let path = edges_dir.join(format!("residence_{r}.txt"));
        write_edges(&path, graph, |u| topology.global_id(r, u))?;
        outputs.push(path);
        regions.push(RegionSummary {
            name: spec.name.clone(),
            nodes: topology.region_size(r),
            commuter_pool: topology.commuter_pool(r).len(),
            residence: DegreeStats::of(graph),
        });
    }
    let work = topology.work_day(0, &Indicator::Uniform(1.0))?;
    let path = edges_dir.join("work_day0.txt");
    write_edges(&path, &work.graph, |u| work.active[u as usize])?;
    outputs.push(path);
    let summary = TopologySummary {
        total_nodes: topology.node_count(),
        total_commuters: topology.pool_total(),
        regions,
        work_day0: DegreeStats::of(&work.graph),
        work_day0_active: work.active.len(),
    };
    let path = dir.join("summary.json");
    write_json(&path, &summary)?;
    outputs.push(path);
    log::info!("total nodes: {}", summary.total_nodes);
    write_manifest(&dir, "generate", config, &[], &outputs)
}

/// Indicator values for `days` days from `start`, constant 1 without a file.
fn indicator_for(
    path: Option<&Path>,
    start: chrono::NaiveDate,
    days: usize,
    inputs: &mut Vec<PathBuf>,
) -> Result<Vec<Indicator>, CliError> {
    let Some(path) = path else {
        return Ok(vec![Indicator::Uniform(1.0); days]);
    };
    let series = load_indicator(path)?;
    inputs.push(path.to_path_buf());
    let offset = (start - series.start).num_days();
    if offset < 0 || offset as usize + days > series.len() {
        return Err(CliError::Validation(format!(
            "indicator {}: covers {} days from {}, need {days} days from {start}",
            path.display(),
            series.len(),
            series.start
        )));
    }
    Ok(series.values[offset as usize..offset as usize + days].to_vec())
}

/// Simulates the configured horizon; writes the daily time series and,
/// unless disabled, the node history.
pub fn cmd_simulate(config: &RunConfig) -> Result<Manifest, CliError> {
    let dir = prepare(config)?;
    let sim = &config.simulate;
    let mut inputs = Vec::new();
    let days = sim.days;
    let betas = match &sim.beta_file {
        Some(path) => {
            let (start, values) = load_beta_column(path)?;
            inputs.push(path.clone());
            if start != sim.start_date || values.len() < days {
                return Err(CliError::Validation(format!(
                    "simulate.beta_file: {} covers {} days from {start}, need {days} days from {}",
                    path.display(),
                    values.len(),
                    sim.start_date
                )));
            }
            values[..days].to_vec()
        }
        None => vec![sim.beta; days],
    };
    let indicators = indicator_for(sim.indicator.as_deref(), sim.start_date, days, &mut inputs)?;
    let scenario = config.scenario();
    let topology = build_topology(config)?;
    let mut state = scenario.initial_state(&topology)?;
    if sim.node_history {
        state.enable_history();
    }
    let mut counts = Vec::with_capacity(days);
    for d in 0..days {
        let c = state.simulate_day(&topology, &scenario.thresholds, betas[d], &indicators[d])?;
        log::info!(
            target: "seirah::progress",
            "day {d}: S {} E {} I {} A {} H {} R {} new H {}",
            c.s,
            c.e,
            c.i,
            c.a,
            c.h,
            c.r,
            c.new_h
        );
        counts.push(c);
    }
    let mut outputs = Vec::new();
    let path = dir.join("timeseries.csv");
    export_timeseries(&counts, &betas, sim.start_date, &path)?;
    outputs.push(path);
    if let Some(events) = state.take_history() {
        let path = dir.join("node_history.csv");
        export_node_history(&node_history_records(&events, &topology), &path)?;
        outputs.push(path);
    }
    write_manifest(&dir, "simulate", config, &inputs, &outputs)
}

/// Observed admissions and the aligned indicator for infer and sweep.
fn load_inputs(config: &RunConfig, inputs: &mut Vec<PathBuf>) -> Result<(ObservedSeries, Vec<Indicator>), CliError> {
    let path = config.infer.observed.as_ref().ok_or_else(|| {
        CliError::Validation("infer.observed: no observed series given (set it in the config or pass --observed)".into())
    })?;
    let fill = if config.infer.zero_fill {
        FillPolicy::Zero
    } else {
        FillPolicy::Error
    };
    let observed = load_observed(path, fill).map_err(|e| with_hint(e, "infer.observed / --observed"))?;
    inputs.push(path.clone());
    let indicators = match &config.infer.indicator {
        Some(path) => {
            let series = load_indicator(path).map_err(|e| with_hint(e, "infer.indicator / --indicator"))?;
            inputs.push(path.clone());
            align(&observed, &series)?
        }
        None => {
            log::info!("no indicator given; commuting held at the baseline");
            vec![Indicator::Uniform(1.0); observed.len()]
        }
    };
    Ok((observed, indicators))
}

fn with_hint(e: seirah_core::Error, setting: &str) -> CliError {
    let hint = format!("{e} (check {setting})");
    if e.is_validation() {
        CliError::Validation(hint)
    } else {
        CliError::Runtime(hint)
    }
}

#[derive(Debug, Serialize)]
struct DayDiagnostics {
    date: String,
    beta: f64,
    loss: f64,
    iterations: usize,
    converged: bool,
    evaluations: usize,
    predicted_window: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct InferSummary {
    days: usize,
    rmse: f64,
    mean_beta: f64,
    unconverged_days: usize,
    per_day: Vec<DayDiagnostics>,
}

/// Infers the daily beta series from the observed admissions.
pub fn cmd_infer(config: &RunConfig) -> Result<Manifest, CliError> {
    let dir = prepare(config)?;
    let mut inputs = Vec::new();
    let (observed, indicators) = load_inputs(config, &mut inputs)?;
    let scenario = config.scenario();
    let topology = build_topology(config)?;
    let series = scenario.infer(&topology, &observed.values, &indicators)?;

    let mut outputs = Vec::new();
    let path = dir.join("beta.csv");
    export_beta_series(&series, observed.start, &path)?;
    outputs.push(path);
    let path = dir.join("timeseries.csv");
    export_timeseries(&series.trajectory, &series.betas(), observed.start, &path)?;
    outputs.push(path);
    let summary = InferSummary {
        days: series.len(),
        rmse: series.rmse(&observed.values),
        mean_beta: series.mean_beta(0..series.len()),
        unconverged_days: series.days.iter().filter(|d| !d.converged).count(),
        per_day: series
            .days
            .iter()
            .enumerate()
            .map(|(i, d)| DayDiagnostics {
                date: observed.date(i).to_string(),
                beta: d.beta,
                loss: d.loss,
                iterations: d.iterations,
                converged: d.converged,
                evaluations: d.evaluations,
                predicted_window: d.predicted.clone(),
            })
            .collect(),
    };
    log::info!("rmse {:.3}, mean beta {:.4}", summary.rmse, summary.mean_beta);
    let path = dir.join("diagnostics.json");
    write_json(&path, &summary)?;
    outputs.push(path);
    write_manifest(&dir, "infer", config, &inputs, &outputs)
}

/// Runs the `(p_residence, p_work)` grid against the observed series.
pub fn cmd_sweep(config: &RunConfig) -> Result<Manifest, CliError> {
    let dir = prepare(config)?;
    let mut inputs = Vec::new();
    let (observed, indicators) = load_inputs(config, &mut inputs)?;
    let s = &config.sweep;
    let grid = SweepGrid::new(s.p_residence.clone(), s.p_work.clone(), s.seeds);
    log::info!("sweeping {} cells", grid.cells().len());
    let result = run_sweep(&grid, &config.scenario(), &observed.values, &indicators, s.rmse_threshold)?;

    let path = dir.join("sweep.csv");
    let write = |path: &Path| -> std::io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "p_r,p_w,rmse,mean_beta,appropriate,error")?;
        for c in &result.cells {
            match &c.outcome {
                Ok(score) => writeln!(
                    out,
                    "{},{},{},{},{},",
                    c.p_residence, c.p_work, score.rmse, score.mean_beta, score.appropriate
                )?,
                Err(e) => writeln!(out, "{},{},,,false,\"{}\"", c.p_residence, c.p_work, e.replace('"', "'"))?,
            }
        }
        out.flush()
    };
    write(&path).map_err(|e| io_error(&path, e))?;
    let mut outputs = vec![path];
    let path = dir.join("sweep.json");
    write_json(&path, &result)?;
    outputs.push(path);
    let failed = result.cells.iter().filter(|c| c.outcome.is_err()).count();
    if failed > 0 {
        log::warn!("{failed} of {} cells failed", result.cells.len());
    }
    write_manifest(&dir, "sweep", config, &inputs, &outputs)
}

/// Writes synthetic observations from a known beta profile: `observed.csv`,
/// `indicator.csv` and the full ground truth in `truth.csv`.
pub fn cmd_export_fixtures(config: &RunConfig) -> Result<Manifest, CliError> {
    let dir = prepare(config)?;
    let fx = &config.fixtures;
    let betas = fx.beta_series();
    let indicators = vec![Indicator::Uniform(fx.indicator); fx.days];
    let scenario = config.scenario();
    let topology = build_topology(config)?;
    let counts = scenario.simulate_with_seed(&topology, &betas, &indicators, derive_seed(config.seed, &[TAG_FIXTURE]))?;

    let mut outputs = Vec::new();
    let observed = ObservedSeries {
        start: fx.start_date,
        values: counts.iter().map(|c| c.new_h).collect(),
    };
    let path = dir.join("observed.csv");
    export_observed(&observed, &path)?;
    outputs.push(path);
    let path = dir.join("indicator.csv");
    export_indicator(&IndicatorSeries::constant(fx.start_date, fx.days, fx.indicator), &path)?;
    outputs.push(path);
    let path = dir.join("truth.csv");
    export_timeseries(&counts, &betas, fx.start_date, &path)?;
    outputs.push(path);
    write_manifest(&dir, "export-fixtures", config, &[], &outputs)
}
