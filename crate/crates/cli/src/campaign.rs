//! Seeded benchmark campaigns and their CSV reports.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context};
use rand::Rng;
use rbfbca::objectives::{self, coverage_objective, CoverageScene};
use rbfbca::rng::{mix, rng_from};
use rbfbca::{
    solve, DecomposedObjective, Decomposition, SolverConfig, SolverMode, SolverResult,
    SymmetryGroup,
};
use serde::Deserialize;

use crate::scenario::parse_scenario;

/// Embedded in the first line of every CSV this module writes.
pub const REPORT_VERSION: u32 = 1;

pub const RUN_COLUMNS: [&str; 11] = [
    "run_id",
    "mode",
    "seed",
    "n",
    "best_value",
    "deviation",
    "evals",
    "sequential_rounds",
    "delta_final",
    "wall_ms",
    "termination_reason",
];

pub const SUMMARY_COLUMNS: [&str; 7] = ["mode", "n", "metric", "runs", "min", "mean", "max"];

const START_TAG: u64 = 0x57A27;

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Pyramid,
    Bowl,
    Trap { block_width: usize },
    Coverage(CoverageScene),
}

/// Interval for initial points, either shared by every coordinate or given
/// per coordinate. Draws are uniform on `[lo, hi)`; `lo == hi` pins the
/// coordinate.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum StartBox {
    Uniform([f64; 2]),
    PerCoordinate(Vec<[f64; 2]>),
}

impl StartBox {
    fn intervals(&self, n: usize) -> anyhow::Result<Vec<[f64; 2]>> {
        match self {
            StartBox::Uniform(iv) => Ok(vec![*iv; n]),
            StartBox::PerCoordinate(v) if v.len() == n => Ok(v.clone()),
            StartBox::PerCoordinate(v) => {
                bail!("start_box has {} intervals, dimension is {n}", v.len())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub objective: ObjectiveSpec,
    /// Dimensions for pyramid and bowl, block counts for trap; ignored for
    /// coverage.
    pub dims: Vec<usize>,
    pub modes: Vec<SolverMode>,
    pub runs_per_group: usize,
    /// `None` draws from the whole domain.
    pub start_box: Option<StartBox>,
    /// Mode and seed are replaced per run.
    pub solver: SolverConfig,
    /// Insert symmetric images of every evaluated point.
    pub closure: bool,
    pub master_seed: u64,
    /// Concurrent runs.
    pub workers: usize,
}

impl CampaignConfig {
    pub fn new(objective: ObjectiveSpec, dims: Vec<usize>, modes: Vec<SolverMode>) -> Self {
        let solver = match objective {
            ObjectiveSpec::Coverage(_) => SolverConfig::realistic(),
            _ => SolverConfig::synthetic(),
        };
        Self {
            objective,
            dims,
            modes,
            runs_per_group: 20,
            start_box: None,
            solver,
            closure: false,
            master_seed: 0,
            workers: 1,
        }
    }

    fn groups(&self) -> Vec<usize> {
        match self.objective {
            ObjectiveSpec::Coverage(ref s) => vec![3 * s.cameras],
            _ => self.dims.clone(),
        }
    }

    /// Checks every invariant that can fail before any run starts.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.runs_per_group == 0 {
            bail!("runs_per_group must be at least 1");
        }
        if self.modes.is_empty() {
            bail!("no solver modes selected");
        }
        if self.workers == 0 {
            bail!("workers must be positive");
        }
        if !matches!(self.objective, ObjectiveSpec::Coverage(_)) && self.dims.is_empty() {
            bail!("no dimensions selected");
        }
        for group in self.groups() {
            let (domain, n) = match &self.objective {
                ObjectiveSpec::Pyramid | ObjectiveSpec::Bowl if group == 0 => {
                    bail!("dimension must be positive")
                }
                ObjectiveSpec::Trap { block_width } if group < 2 || *block_width == 0 => {
                    bail!("trap needs at least two blocks of positive width")
                }
                ObjectiveSpec::Pyramid => (objectives::pyramid_peak(group).domain().clone(), group),
                ObjectiveSpec::Bowl => (objectives::quantized_bowl(group).domain().clone(), group),
                ObjectiveSpec::Trap { block_width } => {
                    let f = objectives::subspace_trap(group, *block_width);
                    (f.domain().clone(), f.dim())
                }
                ObjectiveSpec::Coverage(scene) => (scene.domain(), group),
            };
            self.solver.validate(n)?;
            if let Some(b) = &self.start_box {
                for (i, [lo, hi]) in b.intervals(n)?.into_iter().enumerate() {
                    if !(lo <= hi && lo >= domain.lower()[i] && hi <= domain.upper()[i]) {
                        bail!(
                            "start_box interval {i} [{lo}, {hi}) is not inside [{}, {}]",
                            domain.lower()[i],
                            domain.upper()[i]
                        );
                    }
                }
            }
        }
        Ok(())
    }
}

/// Seed of run `index` of `mode`.
pub fn run_seed(master: u64, mode: SolverMode, index: usize) -> u64 {
    mix(&[master, mode.tag(), index as u64])
}

/// Initial point of run `index`; shared across modes so groups are paired.
pub fn start_point(
    config: &CampaignConfig,
    n: usize,
    lower: &[f64],
    upper: &[f64],
    index: usize,
) -> Vec<f64> {
    let intervals = match &config.start_box {
        Some(b) => b.intervals(n).expect("validated"),
        None => lower.iter().zip(upper).map(|(&l, &u)| [l, u]).collect(),
    };
    let mut rng = rng_from(mix(&[
        config.master_seed,
        START_TAG,
        n as u64,
        index as u64,
    ]));
    intervals
        .iter()
        .map(|[lo, hi]| lo + (hi - lo) * rng.random::<f64>())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub best_value: f64,
    pub deviation: Option<f64>,
    pub evals: usize,
    pub sequential_rounds: usize,
    pub delta_final: f64,
    pub termination: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub mode: SolverMode,
    pub seed: u64,
    pub n: usize,
    pub start: Vec<f64>,
    pub wall_ms: f64,
    pub outcome: Result<RunMetrics, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub runs: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        Some(Stats {
            runs: values.len(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub mode: SolverMode,
    pub n: usize,
    /// `(metric, stats)` over successful runs, in column order.
    pub metrics: Vec<(&'static str, Stats)>,
}

impl GroupSummary {
    pub fn metric(&self, name: &str) -> Option<Stats> {
        self.metrics
            .iter()
            .find(|(m, _)| *m == name)
            .map(|(_, s)| *s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub runs: Vec<RunRecord>,
    pub groups: Vec<GroupSummary>,
}

fn metric_values(runs: &[&RunRecord]) -> Vec<(&'static str, Vec<f64>)> {
    let ok: Vec<(&RunMetrics, f64)> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|m| (m, r.wall_ms)))
        .collect();
    vec![
        ("best_value", ok.iter().map(|(m, _)| m.best_value).collect()),
        (
            "deviation",
            ok.iter().filter_map(|(m, _)| m.deviation).collect(),
        ),
        ("evals", ok.iter().map(|(m, _)| m.evals as f64).collect()),
        (
            "sequential_rounds",
            ok.iter().map(|(m, _)| m.sequential_rounds as f64).collect(),
        ),
        (
            "delta_final",
            ok.iter().map(|(m, _)| m.delta_final).collect(),
        ),
        ("wall_ms", ok.iter().map(|(_, w)| *w).collect()),
    ]
}

impl CampaignReport {
    fn assemble(runs: Vec<RunRecord>, config: &CampaignConfig) -> Self {
        let mut groups = Vec::new();
        for n in config.groups() {
            for &mode in &config.modes {
                let members: Vec<&RunRecord> =
                    runs.iter().filter(|r| r.n == n && r.mode == mode).collect();
                let metrics = metric_values(&members)
                    .into_iter()
                    .filter_map(|(name, v)| Stats::of(&v).map(|s| (name, s)))
                    .collect();
                groups.push(GroupSummary { mode, n, metrics });
            }
        }
        Self { runs, groups }
    }

    pub fn group(&self, mode: SolverMode, n: usize) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.mode == mode && g.n == n)
    }

    pub fn runs_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RUN_COLUMNS)?;
        for r in &self.runs {
            let (best, dev, evals, rounds, delta, term) = match &r.outcome {
                Ok(m) => (
                    m.best_value.to_string(),
                    m.deviation.map(|d| d.to_string()).unwrap_or_default(),
                    m.evals.to_string(),
                    m.sequential_rounds.to_string(),
                    m.delta_final.to_string(),
                    m.termination.clone(),
                ),
                Err(e) => (
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error: {e}"),
                ),
            };
            w.write_record([
                r.run_id.to_string(),
                r.mode.name().to_string(),
                r.seed.to_string(),
                r.n.to_string(),
                best,
                dev,
                evals,
                rounds,
                delta,
                format!("{:.3}", r.wall_ms),
                term,
            ])?;
        }
        versioned(w)
    }

    pub fn summary_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SUMMARY_COLUMNS)?;
        for g in &self.groups {
            for (name, s) in &g.metrics {
                w.write_record([
                    g.mode.name().to_string(),
                    g.n.to_string(),
                    name.to_string(),
                    s.runs.to_string(),
                    s.min.to_string(),
                    s.mean.to_string(),
                    s.max.to_string(),
                ])?;
            }
        }
        versioned(w)
    }

    /// Writes `runs.csv` and `summary.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let runs = dir.join("runs.csv");
        let summary = dir.join("summary.csv");
        std::fs::write(&runs, self.runs_csv()?)?;
        std::fs::write(&summary, self.summary_csv()?)?;
        Ok((runs, summary))
    }
}

fn versioned(w: csv::Writer<Vec<u8>>) -> anyhow::Result<String> {
    let body = String::from_utf8(w.into_inner()?)?;
    Ok(format!("# report_version={REPORT_VERSION}\n{body}"))
}

/// Drops the `wall_ms` column of a runs CSV and the `wall_ms` rows of a
/// summary CSV, leaving the parts that must be reproducible.
pub fn without_timing(csv_text: &str) -> String {
    let mut out = String::new();
    let mut lines = csv_text.lines();
    let Some(version) = lines.next() else {
        return out;
    };
    out.push_str(version);
    out.push('\n');
    let Some(header) = lines.next() else {
        return out;
    };
    let cols: Vec<&str> = header.split(',').collect();
    let wall = cols.iter().position(|c| *c == "wall_ms");
    let metric = cols.iter().position(|c| *c == "metric");
    for line in std::iter::once(header).chain(lines) {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(line.as_bytes());
        let Some(Ok(rec)) = reader.records().next() else {
            continue;
        };
        if metric.is_some_and(|m| rec.get(m) == Some("wall_ms")) {
            continue;
        }
        let kept: Vec<&str> = rec
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != wall)
            .map(|(_, f)| f)
            .collect();
        out.push_str(&kept.join(","));
        out.push('\n');
    }
    out
}

fn run_with<D: Decomposition>(
    f: &DecomposedObjective<D>,
    config: &CampaignConfig,
    mode: SolverMode,
    seed: u64,
    start: &[f64],
) -> Result<(SolverResult, Option<f64>), String> {
    let group = if config.closure {
        f.symmetry().clone()
    } else {
        SymmetryGroup::identity(f.blocks().len())
    };
    let solver = SolverConfig {
        mode,
        seed,
        ..config.solver.clone()
    };
    let r = solve(f, &group, start, &solver).map_err(|e| e.to_string())?;
    let dev = f.known_max().map(|m| m - r.best_value);
    Ok((r, dev))
}

struct Job {
    n: usize,
    mode: SolverMode,
    index: usize,
}

fn execute(config: &CampaignConfig, job: &Job, run_id: usize) -> RunRecord {
    let seed = run_seed(config.master_seed, job.mode, job.index);
    let clock = Instant::now();
    let (start, outcome) = match &config.objective {
        ObjectiveSpec::Pyramid => one(&objectives::pyramid_peak(job.n), config, job, seed),
        ObjectiveSpec::Bowl => one(&objectives::quantized_bowl(job.n), config, job, seed),
        ObjectiveSpec::Trap { block_width } => one(
            &objectives::subspace_trap(job.n, *block_width),
            config,
            job,
            seed,
        ),
        ObjectiveSpec::Coverage(scene) => match coverage_objective(scene.clone()) {
            Ok(f) => one(&f, config, job, seed),
            Err(e) => (Vec::new(), Err(e.to_string())),
        },
    };
    RunRecord {
        run_id,
        mode: job.mode,
        seed,
        n: job.n,
        start,
        wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        outcome,
    }
}

fn one<D: Decomposition>(
    f: &DecomposedObjective<D>,
    config: &CampaignConfig,
    job: &Job,
    seed: u64,
) -> (Vec<f64>, Result<RunMetrics, String>) {
    let d = f.domain();
    let start = start_point(config, f.dim(), d.lower(), d.upper(), job.index);
    let outcome = run_with(f, config, job.mode, seed, &start).map(|(r, deviation)| RunMetrics {
        best_value: r.best_value,
        deviation,
        evals: r.evals(),
        sequential_rounds: r.sequential_rounds,
        delta_final: r.delta_final,
        termination: r.termination.name().to_string(),
    });
    (start, outcome)
}

/// Runs every (dimension, mode, run index) combination and summarizes each
/// (mode, dimension) group. Solver failures become error rows.
pub fn run_campaign(config: &CampaignConfig) -> anyhow::Result<CampaignReport> {
    config.validate()?;
    let mut jobs = Vec::new();
    for n in config.groups() {
        for &mode in &config.modes {
            for index in 0..config.runs_per_group {
                jobs.push(Job { n, mode, index });
            }
        }
    }
    let slots: Vec<Mutex<Option<RunRecord>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(job) = jobs.get(i) else { break };
        let record = execute(config, job, i);
        *slots[i].lock().expect("slot lock") = Some(record);
    };
    if config.workers == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..config.workers.min(jobs.len()) {
                s.spawn(work);
            }
        });
    }
    let runs = slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every job ran"))
        .collect();
    Ok(CampaignReport::assemble(runs, config))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverOverrides {
    beta_cycle: Option<Vec<f64>>,
    delta0: Option<f64>,
    max_evals: Option<usize>,
    parallel_sweep: Option<bool>,
    threads: Option<usize>,
    stationarity_tol: Option<f64>,
    max_inner_sweeps: Option<usize>,
    simplex_scale: Option<f64>,
    closure_cap: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CampaignFile {
    objective: String,
    #[serde(default)]
    dims: Vec<usize>,
    block_width: Option<usize>,
    scenario: Option<PathBuf>,
    modes: Vec<String>,
    runs_per_group: Option<usize>,
    start_box: Option<StartBox>,
    #[serde(default)]
    closure: bool,
    #[serde(default)]
    master_seed: u64,
    workers: Option<usize>,
    #[serde(default)]
    solver: SolverOverrides,
}

/// Parses a campaign file; relative scenario paths resolve against `base`.
pub fn parse_campaign(text: &str, base: &Path) -> anyhow::Result<CampaignConfig> {
    let file: CampaignFile = toml::from_str(text).context("malformed campaign file")?;
    let objective = match file.objective.as_str() {
        "pyramid" => ObjectiveSpec::Pyramid,
        "bowl" => ObjectiveSpec::Bowl,
        "trap" => ObjectiveSpec::Trap {
            block_width: file.block_width.unwrap_or(1),
        },
        "coverage" => {
            let Some(path) = file.scenario else {
                bail!("objective `coverage` needs `scenario`");
            };
            let path = if path.is_relative() {
                base.join(path)
            } else {
                path
            };
            ObjectiveSpec::Coverage(
                parse_scenario(&path).with_context(|| format!("scenario {}", path.display()))?,
            )
        }
        other => bail!("unknown objective `{other}` (pyramid, bowl, trap, coverage)"),
    };
    let modes = file
        .modes
        .iter()
        .map(|m| m.parse::<SolverMode>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut config = CampaignConfig::new(objective, file.dims, modes);
    if let Some(r) = file.runs_per_group {
        config.runs_per_group = r;
    }
    config.start_box = file.start_box;
    config.closure = file.closure;
    config.master_seed = file.master_seed;
    if let Some(w) = file.workers {
        config.workers = w;
    }
    let o = file.solver;
    let s = &mut config.solver;
    if let Some(v) = o.beta_cycle {
        s.beta_cycle = v;
    }
    if let Some(v) = o.delta0 {
        s.delta0 = v;
    }
    if let Some(v) = o.max_evals {
        s.max_evals = v;
    }
    if let Some(v) = o.parallel_sweep {
        s.parallel_sweep = v;
    }
    if let Some(v) = o.threads {
        s.threads = v;
    }
    if let Some(v) = o.stationarity_tol {
        s.stationarity_tol = v;
    }
    if o.max_inner_sweeps.is_some() {
        s.max_inner_sweeps = o.max_inner_sweeps;
    }
    if let Some(v) = o.simplex_scale {
        s.simplex_scale = v;
    }
    if let Some(v) = o.closure_cap {
        s.closure_cap = v;
    }
    config.validate()?;
    Ok(config)
}

pub fn load_campaign(path: &Path) -> anyhow::Result<CampaignConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_campaign(&text, path.parent().unwrap_or(Path::new(".")))
}
