//! Experiment orchestration and CSV artifacts.
//!
//! Configurations are flat `section.key = value` files with `#` comments:
//!
//! ```text
//! seed = 1
//! network.kind = scale-free
//! network.nodes = 10000
//! network.kave = 10
//! resources.p = 0.01
//! dynamics.mode = resources      # static | resources | nodes
//! dynamics.d = 0.3
//! walks.w = 5
//! walks.s = opt                  # a number, or `opt` for the model optimum
//! walks.s_range = 1:60
//! search.variant = choose-first
//! search.count = 100000
//! ```
//!
//! A run generates the network, then for every placement replicate places
//! the resource, precomputes the walks, draws one churn realization and runs
//! its share of the searches. Everything is derived from `seed`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::{place_resources, ActiveSet, ChurnSpec, Dynamics, Placement, Snapshot};
use crate::error::{Error, Result};
use crate::model::{self, Churn, CostParams, ModelParams};
use crate::netgen::{self, DegreeStats, Network, TopologyKind};
use crate::pwalks::{precompute_walks, Variant};
use crate::rng::{self, TAG_CHURN, TAG_REPLICATE};
use crate::search::{run_searches, CampaignOptions, CampaignResult, SearchRecord, SearchStats, DEFAULT_CUTOFF_FACTOR};

/// Default number of searches per campaign.
pub const DEFAULT_SEARCHES: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsMode {
    Static,
    Resources,
    Nodes,
}

impl FromStr for DynamicsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(DynamicsMode::Static),
            "resources" => Ok(DynamicsMode::Resources),
            "nodes" => Ok(DynamicsMode::Nodes),
            other => Err(Error::invalid(format!("unknown dynamics mode `{other}`"))),
        }
    }
}

impl DynamicsMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DynamicsMode::Static => "static",
            DynamicsMode::Resources => "resources",
            DynamicsMode::Nodes => "nodes",
        }
    }
}

/// Where the random-walk baseline searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// The same `t = T` snapshot as PW-RW.
    Snapshot,
    /// The `t = 0` network: initial placement, every node present.
    Initial,
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snapshot" => Ok(Baseline::Snapshot),
            "initial" => Ok(Baseline::Initial),
            other => Err(Error::invalid(format!("unknown baseline `{other}`"))),
        }
    }
}

/// Walk length selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkLength {
    Fixed(usize),
    /// The model's optimal walk length over `walks.s_range`.
    ModelOptimum,
}

/// Parses `a:b`, `a:b:step` or a comma-separated list into integer values.
pub fn parse_int_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::invalid(format!("bad range `{text}`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let values: Vec<usize> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(bad()),
        };
        if step == 0 || lo > hi {
            return Err(bad());
        }
        (lo..=hi).step_by(step).collect()
    } else {
        text.split(',').map(num).collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

/// Parses `a:b:step` or a comma-separated list into float values.
pub fn parse_float_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("bad range `{text}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(bad());
        };
        let (lo, hi, step) = (num(a)?, num(b)?, num(c)?);
        if step <= 0.0 || lo > hi {
            return Err(bad());
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| lo + i as f64 * step).collect()
    } else {
        text.split(',').map(num).collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostConfig {
    pub lambda: f64,
    pub mu: f64,
    /// Defaults to 2 under resource churn and 1 under node churn.
    pub alpha: Option<f64>,
    /// Static expected length; taken from the model when absent.
    pub l0: Option<f64>,
    /// Log-spaced grid of interval lengths: (min, max, points).
    pub grid: (f64, f64, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub kind: TopologyKind,
    pub nodes: usize,
    pub kave: usize,
    pub p: f64,
    pub mode: DynamicsMode,
    pub d: f64,
    pub l: f64,
    pub w: usize,
    pub s: WalkLength,
    pub s_range: Vec<usize>,
    pub variant: Variant,
    pub searches: u64,
    pub cutoff: Option<u64>,
    pub replicates: usize,
    pub network_replicates: usize,
    pub baseline: Baseline,
    pub keep_searches: bool,
    pub cost: Option<CostConfig>,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            kind: TopologyKind::ScaleFree,
            nodes: 10_000,
            kave: 10,
            p: 0.01,
            mode: DynamicsMode::Static,
            d: 0.0,
            l: 0.0,
            w: 5,
            s: WalkLength::ModelOptimum,
            s_range: (1..=60).collect(),
            variant: Variant::ChooseFirst,
            searches: DEFAULT_SEARCHES,
            cutoff: None,
            replicates: 1,
            network_replicates: 1,
            baseline: Baseline::Initial,
            keep_searches: true,
            cost: None,
            output: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let (mut lambda, mut mu, mut alpha, mut l0, mut grid) = (None, None, None, None, None);
        let mut mode_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |message: String| Error::Config { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let wrap = |e: Error| match e {
                Error::InvalidParameter(m) => fail(m),
                other => other,
            };
            macro_rules! num {
                () => {
                    value.parse().map_err(|_| fail(format!("bad value `{value}` for `{key}`")))?
                };
            }
            match key {
                "seed" => cfg.seed = num!(),
                "network.kind" => cfg.kind = value.parse().map_err(wrap)?,
                "network.nodes" => cfg.nodes = num!(),
                "network.kave" => cfg.kave = num!(),
                "network.replicates" => cfg.network_replicates = num!(),
                "resources.p" => cfg.p = num!(),
                "dynamics.mode" => {
                    if mode_seen {
                        return Err(fail("dynamics.mode given twice".into()));
                    }
                    mode_seen = true;
                    cfg.mode = value.parse().map_err(wrap)?;
                }
                "dynamics.d" => cfg.d = num!(),
                "dynamics.l" => cfg.l = num!(),
                "walks.w" => cfg.w = num!(),
                "walks.s" => {
                    cfg.s = if value == "opt" { WalkLength::ModelOptimum } else { WalkLength::Fixed(num!()) }
                }
                "walks.s_range" => cfg.s_range = parse_int_range(value).map_err(wrap)?,
                "search.variant" => cfg.variant = value.parse().map_err(wrap)?,
                "search.count" => cfg.searches = num!(),
                "search.cutoff" => cfg.cutoff = Some(num!()),
                "search.replicates" => cfg.replicates = num!(),
                "search.baseline" => cfg.baseline = value.parse().map_err(wrap)?,
                "search.keep_records" => cfg.keep_searches = num!(),
                "cost.lambda" => lambda = Some(num!()),
                "cost.mu" => mu = Some(num!()),
                "cost.alpha" => alpha = Some(num!()),
                "cost.l0" => l0 = Some(num!()),
                "cost.t_grid" => {
                    let parts: Vec<&str> = value.split(':').collect();
                    let [a, b, c] = parts.as_slice() else {
                        return Err(fail("cost.t_grid must be `min:max:points`".into()));
                    };
                    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| fail(format!("bad grid `{value}`")));
                    let points = c.trim().parse::<usize>().map_err(|_| fail(format!("bad grid `{value}`")))?;
                    grid = Some((parse(a)?, parse(b)?, points));
                }
                "output" => cfg.output = PathBuf::from(value),
                _ => return Err(fail(format!("unknown key `{key}`"))),
            }
        }
        if lambda.is_some() || mu.is_some() {
            let (Some(lambda), Some(mu)) = (lambda, mu) else {
                return Err(Error::Config { line: 0, message: "cost needs both lambda and mu".into() });
            };
            cfg.cost = Some(CostConfig {
                lambda,
                mu,
                alpha,
                l0,
                grid: grid.unwrap_or((1.0, 1.0e6, 121)),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.d) || !(0.0..=1.0).contains(&self.l) {
            return bad("probabilities must lie in [0, 1]".into());
        }
        if self.searches == 0 {
            return bad("search.count must be at least 1".into());
        }
        if self.s_range.is_empty() {
            return bad("walks.s_range is empty".into());
        }
        if self.w < 2 {
            return bad(format!("walks.w must be at least 2, got {}", self.w));
        }
        if self.replicates == 0 || self.network_replicates == 0 {
            return bad("replicate counts must be positive".into());
        }
        if self.mode != DynamicsMode::Resources && self.d != 0.0 {
            return bad("dynamics.d is set but dynamics.mode is not `resources`".into());
        }
        if self.mode != DynamicsMode::Nodes && self.l != 0.0 {
            return bad("dynamics.l is set but dynamics.mode is not `nodes`".into());
        }
        if let Some(cost) = &self.cost {
            let (lo, hi, points) = cost.grid;
            if lo <= 0.0 || hi <= lo || points < 2 {
                return bad("cost.t_grid needs 0 < min < max and at least 2 points".into());
            }
            if cost.lambda <= 0.0 || cost.mu < 0.0 {
                return bad("cost.lambda must be positive and cost.mu non-negative".into());
            }
        }
        Ok(())
    }

    pub fn dynamics(&self) -> Result<Dynamics> {
        Ok(match self.mode {
            DynamicsMode::Static => Dynamics::Static,
            DynamicsMode::Resources => Dynamics::Resources(ChurnSpec::balanced(self.p, self.d)?),
            DynamicsMode::Nodes => Dynamics::Nodes { l: self.l },
        })
    }

    pub fn churn(&self) -> Result<Churn> {
        Ok(match self.mode {
            DynamicsMode::Static => Churn::none(),
            DynamicsMode::Resources => Churn::balanced(self.p, self.d)?,
            DynamicsMode::Nodes => Churn::Nodes { l: self.l },
        })
    }

    pub fn level(&self) -> f64 {
        match self.mode {
            DynamicsMode::Static => 0.0,
            DynamicsMode::Resources => self.d,
            DynamicsMode::Nodes => self.l,
        }
    }

    pub fn model_params(&self, stats: DegreeStats, s: usize) -> Result<ModelParams> {
        Ok(ModelParams {
            nodes: stats.nodes,
            s,
            w: self.w,
            p: self.p,
            churn: self.churn()?,
            variant: self.variant,
            stats,
        })
    }

    fn network_seed(&self, index: usize) -> u64 {
        rng::derive_seed(self.seed, TAG_REPLICATE, index as u64)
    }

    fn replicate_seed(&self, network: usize, index: usize) -> u64 {
        rng::derive_seed(self.network_seed(network), TAG_REPLICATE, 1 + index as u64)
    }
}

/// A generated network with its degree statistics.
#[derive(Debug, Clone)]
pub struct Instance {
    pub network: Network,
    pub stats: DegreeStats,
    pub seed: u64,
}

/// Builds the configured networks (one per network replicate).
pub fn build_networks(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    (0..cfg.network_replicates)
        .map(|i| {
            let seed = cfg.network_seed(i);
            let network = netgen::generate(cfg.kind, cfg.nodes, cfg.kave, seed)?;
            let stats = netgen::degree_stats(&network)?;
            Ok(Instance { network, stats, seed })
        })
        .collect()
}

/// Mean model length over the networks at walk length `s`.
pub fn model_length(cfg: &ExperimentConfig, nets: &[Instance], s: usize) -> Result<f64> {
    let mut total = 0.0;
    for inst in nets {
        total += model::expected_search_length(&cfg.model_params(inst.stats, s)?)?.length;
    }
    Ok(total / nets.len() as f64)
}

/// Walk length minimizing the mean model length over `cfg.s_range`.
pub fn model_optimum(cfg: &ExperimentConfig, nets: &[Instance]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut last_err = None;
    for &s in &cfg.s_range {
        match model_length(cfg, nets, s) {
            Ok(l) if best.is_none_or(|(_, b)| l < b) => best = Some((s, l)),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::invalid("empty walk length range")))
}

pub fn resolve_walk_length(cfg: &ExperimentConfig, nets: &[Instance]) -> Result<usize> {
    match cfg.s {
        WalkLength::Fixed(s) => Ok(s),
        WalkLength::ModelOptimum => Ok(model_optimum(cfg, nets)?.0),
    }
}

fn split_searches(total: u64, parts: usize, index: usize) -> u64 {
    let parts = parts as u64;
    total / parts + u64::from((index as u64) < total % parts)
}

/// Simulated campaign at walk length `s`, merged over all replicates.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub s: usize,
    pub result: CampaignResult,
    /// Replicate index of every kept search record, aligned with `result.records`.
    pub record_replicates: Vec<usize>,
    /// Instances present at `t = 0` and searchable at `t = T`, summed over replicates.
    pub instances_initial: usize,
    pub instances_final: usize,
}

/// Runs the PW-RW campaign (and the RW baseline when `with_baseline`) at
/// walk length `s` over every network and placement replicate.
pub fn simulate(cfg: &ExperimentConfig, nets: &[Instance], s: usize, with_baseline: bool) -> Result<Simulation> {
    let dynamics = cfg.dynamics()?;
    let total_reps = nets.len() * cfg.replicates;
    let mut merged = CampaignResult::default();
    let mut record_replicates = Vec::new();
    let (mut initial, mut final_) = (0, 0);
    for (ni, inst) in nets.iter().enumerate() {
        let net = &inst.network;
        let cutoff = cfg.cutoff.unwrap_or(DEFAULT_CUTOFF_FACTOR * net.node_count() as u64);
        for ri in 0..cfg.replicates {
            let rep = ni * cfg.replicates + ri;
            let searches = split_searches(cfg.searches, total_reps, rep);
            if searches == 0 {
                continue;
            }
            let seed = cfg.replicate_seed(ni, ri);
            let p0 = place_resources(net.node_count(), cfg.p, seed)?;
            let table = precompute_walks(net, &p0, cfg.w, s, cfg.variant, seed)?;
            let truth = dynamics.realize(&p0, rng::derive_seed(seed, TAG_CHURN, 0))?;
            let initial_truth;
            let baseline = match (with_baseline, cfg.baseline) {
                (false, _) => None,
                (true, Baseline::Snapshot) => Some(&truth),
                (true, Baseline::Initial) => {
                    initial_truth = initial_snapshot(&p0);
                    Some(&initial_truth)
                }
            };
            let opts = CampaignOptions { searches, cutoff, keep_records: cfg.keep_searches };
            let res = run_searches(net, &table, &truth, baseline, &opts, seed)?;
            record_replicates.extend(std::iter::repeat_n(rep, res.records.len()));
            initial += p0.instance_count();
            final_ += truth.searchable_instances();
            merged.merge(res);
        }
    }
    Ok(Simulation { s, result: merged, record_replicates, instances_initial: initial, instances_final: final_ })
}

fn initial_snapshot(p0: &Placement) -> Snapshot {
    Snapshot::with_active(p0.clone(), ActiveSet::all(p0.node_count()))
}

/// Everything produced by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub s: usize,
    pub stats: Vec<DegreeStats>,
    pub simulation: Simulation,
    pub model_length: Option<f64>,
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn pwrw(&self) -> &SearchStats {
        &self.simulation.result.pwrw
    }

    pub fn rw(&self) -> Option<&SearchStats> {
        self.simulation.result.rw.as_ref()
    }

    pub fn reduction_percent(&self) -> Option<f64> {
        self.simulation.result.reduction_percent()
    }
}

/// Generation, precomputation, churn, campaigns and model evaluation for one
/// configuration. Writes `searches.csv`, `summary.csv`, `model_vs_sim.csv`
/// and `histogram.csv` into `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let nets = build_networks(cfg)?;
    let s = resolve_walk_length(cfg, &nets)?;
    let simulation = simulate(cfg, &nets, s, true)?;
    let model_len = model_length(cfg, &nets, s).ok();
    let stats: Vec<DegreeStats> = nets.iter().map(|n| n.stats).collect();

    fs::create_dir_all(&cfg.output)?;
    let mut files = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<()> {
        let path = cfg.output.join(name);
        fs::write(&path, body)?;
        files.push(path);
        Ok(())
    };
    emit("searches.csv", searches_csv(&simulation))?;
    emit("summary.csv", summary_csv(cfg, &stats, &simulation, model_len))?;
    emit("model_vs_sim.csv", model_vs_sim_csv(cfg, &[(s, model_len, &simulation.result.pwrw)]))?;
    emit("histogram.csv", histogram_csv(&simulation.result))?;
    Ok(ExperimentReport { s, stats, simulation, model_length: model_len, files })
}

fn opt_f64(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn searches_csv(sim: &Simulation) -> String {
    let mut out = String::from(
        "replicate,index,source,found,length,jumps,unnecessary_steps,final_steps,walks_traversed,fallback_hops,rw_found,rw_length\n",
    );
    for (rec, rep) in sim.result.records.iter().zip(&sim.record_replicates) {
        let SearchRecord { index, source, pwrw, rw } = rec;
        let (rw_found, rw_len) = rw.map_or((String::new(), String::new()), |o| (u8::from(o.found).to_string(), o.length.to_string()));
        let _ = writeln!(
            out,
            "{rep},{index},{source},{},{},{},{},{},{},{},{rw_found},{rw_len}",
            u8::from(pwrw.found),
            pwrw.length,
            pwrw.jumps,
            pwrw.unnecessary_steps,
            pwrw.final_steps,
            pwrw.walks_traversed,
            pwrw.fallback_hops,
        );
    }
    out
}

/// Column order of `summary.csv`.
pub const SUMMARY_HEADER: &str = "kind,nodes,kave,k_rw,p,mode,level,variant,w,s,searches,successes,failures,mean,std,rw_successes,rw_failures,rw_mean,rw_std,reduction_percent,model_length,instances_t0,instances_tT";

pub fn summary_csv(cfg: &ExperimentConfig, stats: &[DegreeStats], sim: &Simulation, model_len: Option<f64>) -> String {
    let n = stats.len() as f64;
    let nodes = stats.iter().map(|s| s.nodes as f64).sum::<f64>() / n;
    let kave = stats.iter().map(|s| s.kave).sum::<f64>() / n;
    let k_rw = stats.iter().map(|s| s.k_rw).sum::<f64>() / n;
    let pw = &sim.result.pwrw;
    let (rw_succ, rw_fail, rw_mean, rw_std) = match &sim.result.rw {
        Some(rw) => (rw.successes().to_string(), rw.failures.to_string(), rw.mean().to_string(), rw.std_dev().to_string()),
        None => Default::default(),
    };
    format!(
        "{SUMMARY_HEADER}\n{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        cfg.kind,
        nodes,
        kave,
        k_rw,
        cfg.p,
        cfg.mode.as_str(),
        cfg.level(),
        cfg.variant,
        cfg.w,
        sim.s,
        pw.searches,
        pw.successes(),
        pw.failures,
        pw.mean(),
        pw.std_dev(),
        rw_succ,
        rw_fail,
        rw_mean,
        rw_std,
        opt_f64(sim.result.reduction_percent()),
        opt_f64(model_len),
        sim.instances_initial,
        sim.instances_final,
    )
}

pub fn model_vs_sim_csv(cfg: &ExperimentConfig, rows: &[(usize, Option<f64>, &SearchStats)]) -> String {
    let mut out = String::from("variant,mode,level,w,s,model_length,sim_length,sim_std_error,relative_deviation\n");
    for &(s, model_len, sim) in rows {
        let dev = model_len.map(|m| (sim.mean() - m).abs() / sim.mean());
        let _ = writeln!(
            out,
            "{},{},{},{},{s},{},{},{},{}",
            cfg.variant,
            cfg.mode.as_str(),
            cfg.level(),
            cfg.w,
            opt_f64(model_len),
            sim.mean(),
            sim.std_error(),
            opt_f64(dev),
        );
    }
    out
}

pub fn histogram_csv(res: &CampaignResult) -> String {
    let mut out = String::from("algorithm,length,count\n");
    for (name, stats) in [("pwrw", Some(&res.pwrw)), ("rw", res.rw.as_ref())] {
        if let Some(stats) = stats {
            for (len, count) in &stats.histogram {
                let _ = writeln!(out, "{name},{len},{count}");
            }
        }
    }
    out
}

/// One walk length of a model-vs-simulation comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub s: usize,
    pub model: f64,
    pub simulated: f64,
    pub std_error: f64,
    /// `|sim − model| / sim`.
    pub relative: f64,
}

#[derive(Debug, Clone)]
pub struct DeviationReport {
    pub rows: Vec<Deviation>,
    /// Whether the deviation at the largest `s` exceeds the one at the smallest.
    pub grows_with_s: bool,
    pub file: PathBuf,
}

/// Simulates every walk length of `cfg.s_range` and compares the mean
/// search length with the model. Writes `model_vs_sim.csv`.
pub fn compare_model_vs_sim(cfg: &ExperimentConfig) -> Result<DeviationReport> {
    let nets = build_networks(cfg)?;
    let mut sims = Vec::with_capacity(cfg.s_range.len());
    let mut cfg_light = cfg.clone();
    cfg_light.keep_searches = false;
    for &s in &cfg.s_range {
        let sim = simulate(&cfg_light, &nets, s, false)?;
        let model_len = model_length(cfg, &nets, s)?;
        sims.push((s, model_len, sim));
    }
    let rows: Vec<Deviation> = sims
        .iter()
        .map(|(s, m, sim)| {
            let pw = &sim.result.pwrw;
            Deviation {
                s: *s,
                model: *m,
                simulated: pw.mean(),
                std_error: pw.std_error(),
                relative: (pw.mean() - m).abs() / pw.mean(),
            }
        })
        .collect();
    fs::create_dir_all(&cfg.output)?;
    let table: Vec<_> = sims.iter().map(|(s, m, sim)| (*s, Some(*m), &sim.result.pwrw)).collect();
    let file = cfg.output.join("model_vs_sim.csv");
    fs::write(&file, model_vs_sim_csv(cfg, &table))?;
    let grows_with_s = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if rows.len() > 1 => b.relative > a.relative,
        _ => false,
    };
    Ok(DeviationReport { rows, grows_with_s, file })
}

/// Cost curve samples and the closed-form optimum.
#[derive(Debug, Clone)]
pub struct CostReport {
    pub s: usize,
    pub params: CostParams,
    pub samples: Vec<(f64, f64)>,
    /// Closed-form optimum, absent when the churn rate is zero.
    pub t_opt: Option<f64>,
    pub grid_argmin: f64,
    /// Ratio between neighbouring grid points.
    pub grid_ratio: f64,
    pub note: Option<String>,
    pub file: PathBuf,
}

/// Log-spaced grid of `points` values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (ratio * i as f64).exp()).collect()
}

/// Evaluates the cost model over the configured interval grid. The static
/// expected length `L0` comes from the model at the configured walk length
/// with churn switched off, unless `cost.l0` is set. Writes `cost.csv`.
pub fn emit_cost_report(cfg: &ExperimentConfig) -> Result<CostReport> {
    let cost_cfg = cfg
        .cost
        .as_ref()
        .ok_or_else(|| Error::invalid("configuration has no cost section"))?;
    let nets = build_networks(cfg)?;
    let s = resolve_walk_length(cfg, &nets)?;
    let nodes = nets[0].network.node_count();
    let l0 = match cost_cfg.l0 {
        Some(l0) => l0,
        None => {
            let mut static_cfg = cfg.clone();
            static_cfg.mode = DynamicsMode::Static;
            static_cfg.d = 0.0;
            static_cfg.l = 0.0;
            model_length(&static_cfg, &nets, s)?
        }
    };
    let alpha = cost_cfg.alpha.unwrap_or(match cfg.mode {
        DynamicsMode::Nodes => model::ALPHA_NODES,
        _ => model::ALPHA_RESOURCES,
    });
    let params = CostParams { lambda: cost_cfg.lambda, mu: cost_cfg.mu, alpha, l0 };
    let (lo, hi, points) = cost_cfg.grid;
    let grid = log_grid(lo, hi, points);
    let samples = grid
        .iter()
        .map(|&t| Ok((t, model::cost_curve(&params, nodes, cfg.w, s, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let grid_argmin = samples
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(t, _)| t)
        .expect("grid has at least two points");
    let (t_opt, note) = match model::optimal_interval(&params, nodes, cfg.w, s) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(format!("no optimal interval: {e}"))),
    };

    let mut body = String::from("T,cost,kind\n");
    for (t, c) in &samples {
        let _ = writeln!(body, "{t},{c},curve");
    }
    match t_opt {
        Some(t) => {
            let c = model::cost_curve(&params, nodes, cfg.w, s, t)?;
            let _ = writeln!(body, "{t},{c},t_opt");
        }
        None => {
            let _ = writeln!(body, "# {}", note.as_deref().unwrap_or_default());
        }
    }
    fs::create_dir_all(&cfg.output)?;
    let file = cfg.output.join("cost.csv");
    fs::write(&file, body)?;
    Ok(CostReport {
        s,
        params,
        samples,
        t_opt,
        grid_argmin,
        grid_ratio: (hi / lo).powf(1.0 / (points - 1) as f64),
        note,
        file,
    })
}

/// Parameter swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Walk length; values are integers.
    WalkLength,
    /// Walks per node (model optimum per value).
    Walks,
    /// Churn level `d` or `l` at the configured walk length.
    Level,
    /// Placement perturbation factor `c`.
    Perturbation,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(SweepParam::WalkLength),
            "w" => Ok(SweepParam::Walks),
            "d" | "l" | "level" => Ok(SweepParam::Level),
            "c" => Ok(SweepParam::Perturbation),
            other => Err(Error::invalid(format!("cannot sweep `{other}` (expected s, w, d, l or c)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub header: String,
    pub rows: Vec<Vec<f64>>,
    /// Value of the swept parameter minimizing the model length, when meaningful.
    pub argmin: Option<(f64, f64)>,
    /// Least-squares slope of the relative increase, for level sweeps.
    pub slope: Option<f64>,
    pub file: PathBuf,
}

/// Evaluates the model (and, for walk-length sweeps with `simulate`, the
/// simulation) across a parameter range. Writes `sweep.csv`.
pub fn sweep(cfg: &ExperimentConfig, param: SweepParam, range: &str, simulate_too: bool) -> Result<SweepReport> {
    let nets = build_networks(cfg)?;
    let stats = nets[0].stats;
    let mut rows = Vec::new();
    let mut argmin = None;
    let mut slope = None;
    let header;
    match param {
        SweepParam::WalkLength => {
            header = if simulate_too { "s,model_length,sim_length,sim_std_error" } else { "s,model_length" };
            let mut light = cfg.clone();
            light.keep_searches = false;
            for s in parse_int_range(range)? {
                let m = model_length(cfg, &nets, s).unwrap_or(f64::NAN);
                if !m.is_nan() && argmin.is_none_or(|(_, b)| m < b) {
                    argmin = Some((s as f64, m));
                }
                let mut row = vec![s as f64, m];
                if simulate_too {
                    let sim = simulate(&light, &nets, s, false)?;
                    row.push(sim.result.pwrw.mean());
                    row.push(sim.result.pwrw.std_error());
                }
                rows.push(row);
            }
        }
        SweepParam::Walks => {
            header = "w,s_opt,model_length";
            for w in parse_int_range(range)? {
                let c = ExperimentConfig { w, ..cfg.clone() };
                let (s, l) = model_optimum(&c, &nets)?;
                if argmin.is_none_or(|(_, b)| l < b) {
                    argmin = Some((w as f64, l));
                }
                rows.push(vec![w as f64, s as f64, l]);
            }
        }
        SweepParam::Level => {
            if cfg.mode == DynamicsMode::Static {
                return Err(Error::invalid("level sweeps need dynamics.mode = resources or nodes"));
            }
            header = "level,relative_increase";
            let s = resolve_walk_length(cfg, &nets)?;
            let levels = parse_float_range(range)?;
            let params = cfg.model_params(stats, s)?;
            let inc = model::relative_increase(&params, &levels)?;
            rows = levels.iter().zip(&inc).map(|(&x, &y)| vec![x, y]).collect();
            slope = Some(model::fit_slope(&params, &levels)?);
        }
        SweepParam::Perturbation => {
            header = "c,p,s_opt,length_fixed_s,length_adaptive_s";
            let lo = *cfg.s_range.first().unwrap();
            let hi = *cfg.s_range.last().unwrap();
            let s_base = resolve_walk_length(cfg, &nets)?;
            let params = cfg.model_params(stats, s_base)?;
            let (_, table) = model::perturbation_sweep(&params, &parse_float_range(range)?, lo..=hi)?;
            rows = table
                .iter()
                .map(|r| vec![r.c, r.p, r.s_opt as f64, r.length_fixed, r.length_adaptive])
                .collect();
        }
    }
    let mut body = format!("{header}\n");
    for row in &rows {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(body, "{}", cells.join(","));
    }
    fs::create_dir_all(&cfg.output)?;
    let file = cfg.output.join("sweep.csv");
    fs::write(&file, body)?;
    Ok(SweepReport { header: header.to_string(), rows, argmin, slope, file })
}
