//! Resolved experiment parameters and the tables they produce.
//!
//! Every command is described by a serializable parameter struct. A
//! [`Manifest`] stores it next to the outputs, and running it again
//! reproduces the same bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use transcap_core::analysis::{
    log_time_grid, lower_bound_rate, upper_bound_rate, BoundCurve, BoundPoint, MacParams, RateFunction,
    ThresholdSetup,
};
use transcap_core::analysis::threshold::DEFAULT_CAP;
use transcap_core::contention::{line_network, random_network, ContentionGraph, Topology};
use transcap_core::mmtp::{aloha_success_probability, csma_model};
use transcap_core::sim::{
    capacity_search, empty_fraction, run, run_with, ArrivalModel, CapacitySearch, MacConfig, Sample, SimConfig,
    SimNetwork,
};
use transcap_core::Error;

use crate::format::{bound_curve_table, num, trace_table, ArrivalDoc, MacDoc, SimConfigDoc, Table, TopologyDoc, NONE, PARAM_ERROR};

/// Exit-code classes: usage problems (2) and runtime failures (1).
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(m) | RunError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Model(_) => RunError::Usage(e.to_string()),
            _ => RunError::Runtime(e.to_string()),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Runtime(_) => 1,
        }
    }
}

pub type RunResult<T> = Result<T, RunError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MacName {
    Aloha,
    Csma,
}

/// Parses `a,b,c` or the half-open range `a..b`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let bad = |_| format!("bad seed list '{s}' (use 1,2,3 or 0..10)");
    let seeds: Vec<u64> = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(bad)?..b.trim().parse().map_err(bad)?).collect(),
        None => s.split(',').map(|x| x.trim().parse().map_err(bad)).collect::<Result<_, _>>()?,
    };
    if seeds.is_empty() {
        return Err(format!("seed list '{s}' is empty"));
    }
    Ok(seeds)
}

// ---------------------------------------------------------------- networks

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NetworkSpec {
    /// Single flow along `n` nodes, links within `contention_range` conflict.
    Line { n: usize, contention_range: usize },
    /// Uniform nodes on the unit square, one random destination each.
    Random { n: usize, seed: u64 },
    Topology { topology: TopologyDoc },
}

impl NetworkSpec {
    pub fn build(&self) -> RunResult<(Topology, ContentionGraph)> {
        Ok(match self {
            NetworkSpec::Line { n, contention_range } => line_network(*n, *contention_range)?,
            NetworkSpec::Random { n, seed } => {
                let rn = random_network(*n, *seed)?;
                (rn.topology, rn.contention)
            }
            NetworkSpec::Topology { topology } => {
                let t = topology.to_topology()?;
                let g = t.protocol_contention(Default::default())?;
                (t, g)
            }
        })
    }

    pub fn sim_network(&self) -> RunResult<SimNetwork> {
        let (t, g) = self.build()?;
        Ok(SimNetwork::new(&t, &g)?)
    }
}

/// `1 / (largest number of nodes within range of any node)`, capped at 1/2.
pub fn inverse_max_degree(t: &Topology) -> f64 {
    let range = t.range().unwrap_or(0.0);
    let nodes = t.nodes();
    let max_degree = (0..nodes.len())
        .map(|i| (0..nodes.len()).filter(|&j| j != i && nodes[i].distance(&nodes[j]) <= range).count())
        .max()
        .unwrap_or(0);
    1.0 / max_degree.max(2) as f64
}

// ------------------------------------------------------------------ bounds

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsParams {
    pub mac: MacName,
    pub hops: usize,
    /// Contention range of the `hops + 1`-node line; `hops` puts every link
    /// in one collision domain.
    pub contention_range: usize,
    /// Aloha transmit probability.
    pub p: f64,
    pub nu: f64,
    pub mu: f64,
    pub eps: f64,
    pub c: f64,
    pub tmax: u64,
    pub per_decade: usize,
}

impl BoundsParams {
    pub fn new(mac: MacName, hops: usize) -> Self {
        BoundsParams {
            mac,
            hops,
            contention_range: hops.max(1),
            p: 1.0 / hops.max(1) as f64,
            nu: 0.1,
            mu: 0.1,
            eps: 1e-3,
            c: 1.0,
            tmax: 100_000,
            per_decade: 10,
        }
    }

    pub fn rate_function(&self) -> RunResult<RateFunction> {
        let k = self.hops;
        if k == 0 {
            return Err(RunError::Usage("--hops must be at least 1".into()));
        }
        let (_, g) = line_network(k + 1, self.contention_range)?;
        Ok(match self.mac {
            MacName::Aloha => {
                if !(self.p > 0.0 && self.p < 1.0) {
                    return Err(RunError::Usage(format!("--p must lie in (0,1), got {}", self.p)));
                }
                let q = (0..k).map(|l| aloha_success_probability(self.p, g.degree(l))).collect();
                RateFunction::aloha(q, self.c)?
            }
            MacName::Csma => RateFunction::csma(csma_model(&g, self.nu, self.mu, self.c)?, (0..k).collect())?,
        })
    }

    pub fn curve(&self) -> RunResult<BoundCurve> {
        let r = self.rate_function()?;
        curve_at(&r, &log_time_grid(self.tmax, self.per_decade), self.eps)
    }
}

/// Bound curve with the time points evaluated in parallel.
pub fn curve_at(r: &RateFunction, times: &[u64], eps: f64) -> RunResult<BoundCurve> {
    let points = times
        .par_iter()
        .map(|&t| {
            Ok(BoundPoint {
                t,
                lower: lower_bound_rate(r, t, eps)?,
                upper: upper_bound_rate(r, t, eps)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(BoundCurve {
        eps,
        hops: r.hops(),
        mac: r.mac(),
        points,
    })
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub network: NetworkSpec,
    /// `config.seed` is replaced by each entry of `seeds`.
    pub config: SimConfigDoc,
    pub seeds: Vec<u64>,
    /// Also emit the per-node trace of the first seed.
    pub trace: bool,
}

/// Mean with a two-sided 95% Student-t interval (`None` for one sample).
pub fn mean_ci(xs: &[f64]) -> (f64, Option<(f64, f64)>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = StudentsT::new(0.0, 1.0, n - 1.0).expect("positive degrees of freedom").inverse_cdf(0.975);
    let half = t * (var / n).sqrt();
    (mean, Some((mean - half, mean + half)))
}

fn ci_cells(ci: Option<(f64, f64)>) -> [String; 2] {
    match ci {
        Some((lo, hi)) => [num(lo), num(hi)],
        None => [NONE.into(), NONE.into()],
    }
}

impl SimulateParams {
    /// `runs.csv` (per seed and decade), `summary.csv` (per decade) and,
    /// on request, `trace.csv`.
    pub fn execute(&self) -> RunResult<Vec<(String, Table)>> {
        if self.seeds.is_empty() {
            return Err(RunError::Usage("at least one seed is required".into()));
        }
        let net = self.network.sim_network()?;
        let base = self.config.to_config()?;
        let flows = net.flows().len() as f64;
        let results = self
            .seeds
            .par_iter()
            .map(|&seed| {
                let cfg = SimConfig { seed, ..base.clone() };
                run(&net, &cfg)
            })
            .collect::<Result<Vec<_>, Error>>()?;

        let mut runs = Table::new(["seed", "T", "nonempty_fraction", "throughput", "empty_opportunities"]);
        let mut by_t: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for (seed, trace) in self.seeds.iter().zip(&results) {
            for (t, f) in empty_fraction(trace) {
                let i = trace.sample_index(t).expect("reported times are recorded");
                let thr = trace.delivered[i].iter().sum::<u64>() as f64 / flows / t as f64;
                runs.push(vec![
                    seed.to_string(),
                    t.to_string(),
                    num(f),
                    num(thr),
                    trace.empty_opportunities[i].to_string(),
                ]);
                let e = by_t.entry(t).or_default();
                e.0.push(f);
                e.1.push(thr);
            }
        }
        let mut summary = Table::new([
            "T",
            "seeds",
            "mean_nonempty",
            "ci_low",
            "ci_high",
            "mean_throughput",
            "throughput_ci_low",
            "throughput_ci_high",
        ]);
        for (t, (f, thr)) in &by_t {
            let (mf, cf) = mean_ci(f);
            let (mt, ct) = mean_ci(thr);
            let [fl, fh] = ci_cells(cf);
            let [tl, th] = ci_cells(ct);
            summary.push(vec![t.to_string(), f.len().to_string(), num(mf), fl, fh, num(mt), tl, th]);
        }
        let mut out = vec![("summary.csv".to_string(), summary), ("runs.csv".to_string(), runs)];
        if self.trace {
            out.push(("trace.csv".to_string(), trace_table(&results[0], &net)));
        }
        Ok(out)
    }
}

// --------------------------------------------------------------- threshold

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdParams {
    pub mac: MacName,
    pub ks: Vec<usize>,
    pub r_sh: Vec<f64>,
    pub r_mh: f64,
    pub eps: f64,
    /// Aloha transmit probability; `None` means `1/k`.
    pub p: Option<f64>,
    pub nu: f64,
    pub mu: f64,
    pub cap: u64,
}

impl ThresholdParams {
    pub fn new(mac: MacName) -> Self {
        ThresholdParams {
            mac,
            ks: vec![2, 3, 4],
            r_sh: vec![0.01, 0.02, 0.03, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5],
            r_mh: 1.0,
            eps: 1e-3,
            p: None,
            nu: 0.1,
            mu: 0.1,
            cap: DEFAULT_CAP,
        }
    }

    fn mac_params(&self, k: usize) -> MacParams {
        match self.mac {
            MacName::Aloha => MacParams::Aloha {
                p: self.p.unwrap_or(1.0 / k.max(1) as f64),
            },
            MacName::Csma => MacParams::Csma { nu: self.nu, mu: self.mu },
        }
    }

    /// Threshold time, `None` without a crossing below the cap.
    pub fn threshold(&self, k: usize, r_sh: f64) -> Result<Option<u64>, Error> {
        ThresholdSetup::new(k, self.mac_params(k), r_sh, self.r_mh, self.eps)?
            .with_cap(self.cap)
            .threshold()
    }

    /// Rows `k,r_sh,threshold` with `NONE` and `PARAM_ERROR` tokens.
    pub fn table(&self) -> RunResult<Table> {
        let cells: Vec<(usize, f64)> = self.ks.iter().flat_map(|&k| self.r_sh.iter().map(move |&r| (k, r))).collect();
        let results: Vec<Result<String, Error>> = cells
            .par_iter()
            .map(|&(k, r)| match self.threshold(k, r) {
                Ok(Some(t)) => Ok(t.to_string()),
                Ok(None) => Ok(NONE.to_string()),
                Err(Error::Parameter(_)) => Ok(PARAM_ERROR.to_string()),
                Err(e) => Err(e),
            })
            .collect();
        let mut t = Table::new(["k", "r_sh", "threshold"]);
        for ((k, r), v) in cells.into_iter().zip(results) {
            t.push(vec![k.to_string(), num(r), v?]);
        }
        Ok(t)
    }
}

// ---------------------------------------------------------------- capacity

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityParams {
    pub network: NetworkSpec,
    pub mac: MacDoc,
    pub horizon: u64,
    pub backlog_cap: u64,
    pub seed: u64,
    pub rate: f64,
    pub iterations: u32,
}

impl CapacityParams {
    /// `capacity.csv` (one row) and `probes.csv`.
    pub fn execute(&self) -> RunResult<Vec<(String, Table)>> {
        let net = self.network.sim_network()?;
        let mut search = CapacitySearch::new(self.mac.to_config()?, self.horizon, self.backlog_cap, self.seed);
        search.rate = self.rate;
        search.iterations = self.iterations;
        let est = capacity_search(&net, &search)?;
        let mut summary = Table::new(["lambda", "infeasible_above", "horizon", "backlog_cap", "seed"]);
        summary.push(vec![
            num(est.lambda),
            est.infeasible_above.map_or(NONE.into(), num),
            self.horizon.to_string(),
            self.backlog_cap.to_string(),
            self.seed.to_string(),
        ]);
        let mut probes = Table::new(["probe", "lambda", "feasible"]);
        for (i, (l, ok)) in est.probes.iter().enumerate() {
            probes.push(vec![i.to_string(), num(*l), ok.to_string()]);
        }
        Ok(vec![("capacity.csv".into(), summary), ("probes.csv".into(), probes)])
    }
}

// ----------------------------------------------------------------- figures

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum FigureId {
    #[serde(rename = "line-fnT")]
    #[value(name = "line-fnT")]
    LineFnT,
    #[serde(rename = "random-fnT")]
    #[value(name = "random-fnT")]
    RandomFnT,
    #[serde(rename = "bounds-vs-sim")]
    #[value(name = "bounds-vs-sim")]
    BoundsVsSim,
    #[serde(rename = "threshold-map")]
    #[value(name = "threshold-map")]
    ThresholdMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureParams {
    pub figure: FigureId,
    pub tmax: u64,
    pub seeds: Vec<u64>,
    /// Network sizes for the 1 − f(n,T) figures.
    pub nodes: Vec<usize>,
    /// Arrival rates per MAC; `None` takes the figure's default.
    pub aloha_lambda: Option<f64>,
    pub csma_lambda: Option<f64>,
}

impl FigureParams {
    /// Desk-scale defaults for each figure.
    pub fn defaults(figure: FigureId) -> Self {
        let (tmax, seeds) = match figure {
            FigureId::LineFnT | FigureId::RandomFnT => (100_000, (0..10).collect()),
            FigureId::BoundsVsSim => (10_000, (0..1000).collect()),
            FigureId::ThresholdMap => (0, Vec::new()),
        };
        FigureParams {
            figure,
            tmax,
            seeds,
            nodes: vec![10, 100],
            aloha_lambda: None,
            csma_lambda: None,
        }
    }

    pub fn execute(&self) -> RunResult<Vec<(String, Table)>> {
        match self.figure {
            FigureId::LineFnT => self.fnt(false),
            FigureId::RandomFnT => self.fnt(true),
            FigureId::BoundsVsSim => self.bounds_vs_sim(),
            FigureId::ThresholdMap => Ok(vec![
                ("threshold_aloha.csv".into(), ThresholdParams::new(MacName::Aloha).table()?),
                ("threshold_csma.csv".into(), ThresholdParams::new(MacName::Csma).table()?),
            ]),
        }
    }

    fn fnt(&self, random: bool) -> RunResult<Vec<(String, Table)>> {
        if self.seeds.is_empty() || self.tmax == 0 {
            return Err(RunError::Usage("figure needs seeds and a positive --tmax".into()));
        }
        let mut out = Vec::new();
        for mac in [MacName::Aloha, MacName::Csma] {
            let mut table = Table::new(["n", "T", "seeds", "mean_nonempty", "ci_low", "ci_high", "lambda"]);
            for &n in &self.nodes {
                let lambda = match (mac, random) {
                    (MacName::Aloha, false) => Some(self.aloha_lambda.unwrap_or(0.08)),
                    (MacName::Csma, false) => Some(self.csma_lambda.unwrap_or(0.17)),
                    (MacName::Aloha, true) => self.aloha_lambda.or(random_default_rate(mac, n)),
                    (MacName::Csma, true) => self.csma_lambda.or(random_default_rate(mac, n)),
                }
                .ok_or_else(|| RunError::Usage(format!("no default arrival rate for n = {n}; pass a rate")))?;
                let runs = self
                    .seeds
                    .par_iter()
                    .map(|&seed| fnt_run(mac, random, n, lambda, self.tmax, seed))
                    .collect::<RunResult<Vec<_>>>()?;
                let mut by_t: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
                for r in runs {
                    for (t, f) in r {
                        by_t.entry(t).or_default().push(f);
                    }
                }
                for (t, fs) in by_t {
                    let (m, ci) = mean_ci(&fs);
                    let [lo, hi] = ci_cells(ci);
                    table.push(vec![n.to_string(), t.to_string(), fs.len().to_string(), num(m), lo, hi, num(lambda)]);
                }
            }
            let name = if random { "random" } else { "line" };
            out.push((format!("{name}_{}.csv", mac_label(mac)), table));
        }
        Ok(out)
    }

    fn bounds_vs_sim(&self) -> RunResult<Vec<(String, Table)>> {
        if self.seeds.is_empty() || self.tmax == 0 {
            return Err(RunError::Usage("figure needs seeds and a positive --tmax".into()));
        }
        let eps = 1e-3;
        let times = log_time_grid(self.tmax, 4);
        let mut out = Vec::new();
        for mac in [MacName::Aloha, MacName::Csma] {
            for k in [2, 3] {
                let s = Sandwich::new(mac, k)?;
                let curve = curve_at(&s.rate_function, &times, eps)?;
                let samples = s.throughput_samples(&self.seeds, &times)?;
                out.push((format!("{}_k{k}.csv", mac_label(mac)), sandwich_table(&curve, &samples, eps)));
            }
        }
        Ok(out)
    }
}

/// Published λ(n) estimates for random networks at n = 10, 100, 1000.
fn random_default_rate(mac: MacName, n: usize) -> Option<f64> {
    match (mac, n) {
        (MacName::Aloha, 10) => Some(0.01),
        (MacName::Aloha, 100) => Some(0.002),
        (MacName::Aloha, 1000) => Some(0.0004),
        (MacName::Csma, 10) => Some(0.03),
        (MacName::Csma, 100) => Some(0.007),
        (MacName::Csma, 1000) => Some(0.0009),
        _ => None,
    }
}

fn mac_label(m: MacName) -> &'static str {
    match m {
        MacName::Aloha => "aloha",
        MacName::Csma => "csma",
    }
}

/// `(T, 1 − f)` per decade of one run; random networks use `seed` for the
/// topology as well.
pub fn fnt_run(mac: MacName, random: bool, n: usize, lambda: f64, tmax: u64, seed: u64) -> RunResult<Vec<(u64, f64)>> {
    let spec = if random {
        NetworkSpec::Random { n, seed }
    } else {
        NetworkSpec::Line { n, contention_range: 3 }
    };
    let (topo, g) = spec.build()?;
    let net = SimNetwork::new(&topo, &g)?;
    let mac = match mac {
        MacName::Aloha if random => MacConfig::Aloha {
            p: inverse_max_degree(&topo),
        },
        MacName::Aloha => MacConfig::Aloha { p: 0.2 },
        MacName::Csma => MacConfig::Csma { nu: 0.1, mu: 0.1 },
    };
    let cfg = SimConfig::new(mac, ArrivalModel::Deterministic { rate: lambda }, tmax, seed);
    Ok(empty_fraction(&run(&net, &cfg)?))
}

/// The `k`-hop line used for bound-versus-simulation checks: `k + 1` nodes,
/// every link in one collision domain, saturated source, unit link rate,
/// Aloha `p = 1/k` or CSMA `ν = μ = 0.1`.
pub struct Sandwich {
    pub net: SimNetwork,
    pub mac: MacConfig,
    pub rate_function: RateFunction,
}

impl Sandwich {
    pub fn new(mac: MacName, k: usize) -> RunResult<Self> {
        let params = BoundsParams::new(mac, k);
        let net = SimNetwork::line(k + 1, k)?;
        let mac = match mac {
            MacName::Aloha => MacConfig::Aloha { p: params.p },
            MacName::Csma => MacConfig::Csma {
                nu: params.nu,
                mu: params.mu,
            },
        };
        Ok(Sandwich {
            net,
            mac,
            rate_function: params.rate_function()?,
        })
    }

    /// `D(t)` at each of `times` (ascending), one row per seed.
    pub fn throughput_samples(&self, seeds: &[u64], times: &[u64]) -> RunResult<Vec<Vec<u64>>> {
        let horizon = *times.last().ok_or_else(|| RunError::Usage("no sample times".into()))?;
        seeds
            .par_iter()
            .map(|&seed| {
                let cfg = SimConfig::new(self.mac.clone(), ArrivalModel::Saturated, horizon, seed);
                let mut got = Vec::with_capacity(times.len());
                let mut next = 0;
                let mut obs = |s: &Sample<'_>| {
                    while next < times.len() && times[next] == s.t {
                        got.push(s.delivered[0]);
                        next += 1;
                    }
                    ControlFlow::Continue(())
                };
                run_with(&self.net, &cfg, &mut obs)?;
                Ok(got)
            })
            .collect()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[i]
}

/// Bounds next to simulated `D(t)/t`: mean, empirical ε and 1 − ε
/// quantiles, and the fraction of runs below `λ^L t` / above `λ^U t`.
pub fn sandwich_table(curve: &BoundCurve, samples: &[Vec<u64>], eps: f64) -> Table {
    let mut table = Table::new([
        "t",
        "lambda_L",
        "lambda_U",
        "sim_mean",
        "sim_q_eps",
        "sim_q_1meps",
        "frac_below_L",
        "frac_above_U",
        "runs",
    ]);
    for (i, p) in curve.points.iter().enumerate() {
        let t = p.t as f64;
        let mut rates: Vec<f64> = samples.iter().map(|s| s[i] as f64 / t).collect();
        rates.sort_by(f64::total_cmp);
        let n = rates.len() as f64;
        let below = samples.iter().filter(|s| (s[i] as f64) < p.lower.lambda * t).count() as f64 / n;
        let above = samples.iter().filter(|s| (s[i] as f64) > p.upper.lambda * t).count() as f64 / n;
        table.push(vec![
            p.t.to_string(),
            num(p.lower.lambda),
            num(p.upper.lambda),
            num(rates.iter().sum::<f64>() / n),
            num(quantile(&rates, eps)),
            num(quantile(&rates, 1.0 - eps)),
            num(below),
            num(above),
            rates.len().to_string(),
        ]);
    }
    table
}

// ---------------------------------------------------------------- manifest

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Command {
    Bounds(BoundsParams),
    Simulate(SimulateParams),
    Threshold(ThresholdParams),
    Capacity(CapacityParams),
    Figure(FigureParams),
}

impl Command {
    /// Named output tables; the first one is the primary result.
    pub fn execute(&self) -> RunResult<Vec<(String, Table)>> {
        match self {
            Command::Bounds(p) => Ok(vec![("bounds.csv".into(), bound_curve_table(&p.curve()?))]),
            Command::Simulate(p) => p.execute(),
            Command::Threshold(p) => Ok(vec![("threshold.csv".into(), p.table()?)]),
            Command::Capacity(p) => p.execute(),
            Command::Figure(p) => p.execute(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: Command, outputs: Vec<String>) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            outputs,
        }
    }
}

/// Sim config defaults shared by the `simulate` flags.
pub fn default_sim_config(mac: MacDoc, arrivals: ArrivalDoc, horizon: u64, seed: u64) -> SimConfigDoc {
    SimConfigDoc {
        mac,
        arrivals,
        horizon,
        seed,
        rate: 1.0,
        empty_policy: Default::default(),
        recording: Default::default(),
    }
}
