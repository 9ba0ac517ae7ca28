//! CSV tables and JSON documents.
//!
//! Floats are written with Rust's shortest round-trip formatting, so the
//! same values always produce the same bytes.

use std::io::Write;

use serde::{Deserialize, Serialize};
use transcap_core::analysis::BoundCurve;
use transcap_core::contention::{LinkSet, Point, Topology};
use transcap_core::linalg::Matrix;
use transcap_core::minplus::ImpulseResponse;
use transcap_core::schedule::Schedule;
use transcap_core::sim::{ArrivalModel, EmptyPolicy, MacConfig, Recording, SimConfig, SimNetwork, SimTrace};
use transcap_core::Error;

pub const NONE: &str = "NONE";
pub const PARAM_ERROR: &str = "PARAM_ERROR";

/// A CSV table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV fields are UTF-8")
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

/// `s,t,value` for every `0 ≤ s ≤ t ≤ horizon`.
pub fn impulse_table(s: &ImpulseResponse) -> Table {
    let mut t = Table::new(["s", "t", "value"]);
    for (a, b, v) in s.entries() {
        t.push(vec![a.to_string(), b.to_string(), num(v)]);
    }
    t
}

/// Dense row-major matrix, no header.
pub fn write_matrix<W: Write>(m: &Matrix, w: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for i in 0..m.rows() {
        out.write_record(m.row(i).iter().map(|&x| num(x)))?;
    }
    out.flush()?;
    Ok(())
}

/// `t,lambda_L,lambda_U,theta_L,theta_U,eps,k,mac`. An infeasible lower
/// bound is written as 0 with `theta_L = NONE`.
pub fn bound_curve_table(c: &BoundCurve) -> Table {
    let mut t = Table::new(["t", "lambda_L", "lambda_U", "theta_L", "theta_U", "eps", "k", "mac"]);
    for p in &c.points {
        t.push(vec![
            p.t.to_string(),
            num(p.lower.lambda),
            num(p.upper.lambda),
            if p.lower.feasible { num(p.lower.theta) } else { NONE.into() },
            num(p.upper.theta),
            num(c.eps),
            c.hops.to_string(),
            c.mac.name().into(),
        ]);
    }
    t
}

/// `t,node,backlog,delivered,nonempty_fraction` at every recorded time.
/// `delivered` counts packets of all flows ending at the node.
pub fn trace_table(trace: &SimTrace, net: &SimNetwork) -> Table {
    let mut t = Table::new(["t", "node", "backlog", "delivered", "nonempty_fraction"]);
    for (i, &time) in trace.times.iter().enumerate() {
        for node in 0..trace.num_nodes {
            let delivered: u64 = net
                .flows()
                .iter()
                .enumerate()
                .filter(|(_, f)| f.destination == node)
                .map(|(k, _)| trace.delivered[i][k])
                .sum();
            t.push(vec![
                time.to_string(),
                node.to_string(),
                trace.backlog[i][node].to_string(),
                delivered.to_string(),
                num(trace.nonempty_fraction[i]),
            ]);
        }
    }
    t
}

/// `{nodes: [[x,y],…], sd_pairs: [[s,d],…], range: r}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDoc {
    pub nodes: Vec<[f64; 2]>,
    pub sd_pairs: Vec<[usize; 2]>,
    pub range: f64,
}

impl TopologyDoc {
    pub fn from_topology(t: &Topology) -> Result<Self, Error> {
        let range = t
            .range()
            .ok_or_else(|| Error::Model("topology has no transmission range".into()))?;
        Ok(TopologyDoc {
            nodes: t.nodes().iter().map(|p| [p.x, p.y]).collect(),
            sd_pairs: t.sd_pairs().iter().map(|&(s, d)| [s, d]).collect(),
            range,
        })
    }

    /// Routes every pair by minimum hop count at `range`.
    pub fn to_topology(&self) -> Result<Topology, Error> {
        let nodes = self.nodes.iter().map(|&[x, y]| Point::new(x, y)).collect();
        let pairs = self.sd_pairs.iter().map(|&[s, d]| (s, d)).collect();
        Topology::from_geometry(nodes, pairs, self.range)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    #[serde(default)]
    pub prefix: Vec<Vec<usize>>,
    pub cycle: Vec<Vec<usize>>,
}

impl ScheduleDoc {
    pub fn from_schedule(s: &Schedule) -> Self {
        let sets = |v: &[LinkSet]| v.iter().map(|l| l.links().to_vec()).collect();
        ScheduleDoc {
            prefix: sets(s.prefix()),
            cycle: sets(s.cycle()),
        }
    }

    pub fn to_schedule(&self) -> Result<Schedule, Error> {
        let sets = |v: &[Vec<usize>]| v.iter().cloned().map(LinkSet::new).collect();
        Schedule::new(sets(&self.prefix), sets(&self.cycle))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MacDoc {
    Aloha { p: f64 },
    Csma { nu: f64, mu: f64 },
    Centralized { schedule: ScheduleDoc },
}

impl MacDoc {
    pub fn from_config(m: &MacConfig) -> Self {
        match m {
            MacConfig::Aloha { p } => MacDoc::Aloha { p: *p },
            MacConfig::Csma { nu, mu } => MacDoc::Csma { nu: *nu, mu: *mu },
            MacConfig::Centralized { schedule } => MacDoc::Centralized {
                schedule: ScheduleDoc::from_schedule(schedule),
            },
        }
    }

    pub fn to_config(&self) -> Result<MacConfig, Error> {
        Ok(match self {
            MacDoc::Aloha { p } => MacConfig::Aloha { p: *p },
            MacDoc::Csma { nu, mu } => MacConfig::Csma { nu: *nu, mu: *mu },
            MacDoc::Centralized { schedule } => MacConfig::Centralized {
                schedule: schedule.to_schedule()?,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArrivalDoc {
    Deterministic { rate: f64 },
    Bernoulli { rate: f64 },
    Saturated,
    Explicit { slots: Vec<u64> },
}

impl From<&ArrivalModel> for ArrivalDoc {
    fn from(a: &ArrivalModel) -> Self {
        match a {
            ArrivalModel::Deterministic { rate } => ArrivalDoc::Deterministic { rate: *rate },
            ArrivalModel::Bernoulli { rate } => ArrivalDoc::Bernoulli { rate: *rate },
            ArrivalModel::Saturated => ArrivalDoc::Saturated,
            ArrivalModel::Explicit { slots } => ArrivalDoc::Explicit { slots: slots.clone() },
        }
    }
}

impl From<&ArrivalDoc> for ArrivalModel {
    fn from(a: &ArrivalDoc) -> Self {
        match a {
            ArrivalDoc::Deterministic { rate } => ArrivalModel::Deterministic { rate: *rate },
            ArrivalDoc::Bernoulli { rate } => ArrivalModel::Bernoulli { rate: *rate },
            ArrivalDoc::Saturated => ArrivalModel::Saturated,
            ArrivalDoc::Explicit { slots } => ArrivalModel::Explicit { slots: slots.clone() },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyDoc {
    #[default]
    Hold,
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RecordingDoc {
    Full,
    #[default]
    Summary,
}

fn one() -> f64 {
    1.0
}

/// JSON form of a simulation config. Unknown keys are rejected.
///
/// ```json
/// {"mac": {"kind": "aloha", "p": 0.2},
///  "arrivals": {"kind": "deterministic", "rate": 0.08},
///  "horizon": 100000, "seed": 1,
///  "rate": 1.0, "empty_policy": "hold", "recording": "summary"}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfigDoc {
    pub mac: MacDoc,
    pub arrivals: ArrivalDoc,
    pub horizon: u64,
    pub seed: u64,
    #[serde(default = "one")]
    pub rate: f64,
    #[serde(default)]
    pub empty_policy: PolicyDoc,
    #[serde(default)]
    pub recording: RecordingDoc,
}

impl SimConfigDoc {
    pub fn from_config(c: &SimConfig) -> Self {
        SimConfigDoc {
            mac: MacDoc::from_config(&c.mac),
            arrivals: (&c.arrivals).into(),
            horizon: c.horizon,
            seed: c.seed,
            rate: c.rate,
            empty_policy: match c.empty_policy {
                EmptyPolicy::Hold => PolicyDoc::Hold,
                EmptyPolicy::Skip => PolicyDoc::Skip,
            },
            recording: match c.recording {
                Recording::Full => RecordingDoc::Full,
                Recording::Summary => RecordingDoc::Summary,
            },
        }
    }

    /// Converts and validates.
    pub fn to_config(&self) -> Result<SimConfig, Error> {
        let cfg = SimConfig {
            mac: self.mac.to_config()?,
            arrivals: (&self.arrivals).into(),
            horizon: self.horizon,
            seed: self.seed,
            rate: self.rate,
            empty_policy: match self.empty_policy {
                PolicyDoc::Hold => EmptyPolicy::Hold,
                PolicyDoc::Skip => EmptyPolicy::Skip,
            },
            recording: match self.recording {
                RecordingDoc::Full => Recording::Full,
                RecordingDoc::Summary => Recording::Summary,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
