//! Packet-level simulation of multi-hop flows under slotted Aloha,
//! centralized scheduling and idealized CSMA/CA.
//!
//! Nodes keep one FIFO buffer for locally generated and relayed packets.
//! Contention is resolved per transmitter node: two nodes conflict when any
//! of their outgoing links are adjacent in the link contention graph.
//!
//! Slotted MACs: exogenous arrivals of slot `u` can leave in slot `u`;
//! relayed packets join the next buffer at the end of the slot. CSMA runs
//! in continuous time and is sampled at integer times.

mod csma;
mod report;
mod slotted;

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contention::{line_network, ContentionGraph, Link, Topology};
use crate::error::{param, Error, Result};
use crate::schedule::Schedule;

pub use report::{capacity_search, empty_fraction, tightened_factor_report, tightened_factors, CalculusConstants, CapacityEstimate, CapacitySearch, TightenedReport};

#[derive(Clone, Debug, PartialEq)]
pub enum MacConfig {
    Aloha { p: f64 },
    /// Link indices refer to the topology's links.
    Centralized { schedule: Schedule },
    Csma { nu: f64, mu: f64 },
}

/// Exogenous traffic, applied to every flow's source.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrivalModel {
    /// Fluid arrivals at `rate` per slot, released as whole packets.
    Deterministic { rate: f64 },
    /// One packet per slot with probability `rate`.
    Bernoulli { rate: f64 },
    /// The source always has a packet of its own flow queued.
    Saturated,
    /// One packet in each listed slot (repeats allowed).
    Explicit { slots: Vec<u64> },
}

/// What a node does with a transmission opportunity while its buffer is
/// empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EmptyPolicy {
    /// Occupy the channel anyway.
    #[default]
    Hold,
    /// Stay silent.
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Recording {
    /// Every integer time, with per-slot arrivals/departures and CSMA state
    /// occupancy.
    Full,
    /// Time 0, powers of ten and the horizon.
    #[default]
    Summary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub mac: MacConfig,
    pub arrivals: ArrivalModel,
    pub horizon: u64,
    pub seed: u64,
    /// Packets per slot (or per time unit) while a link holds the channel.
    pub rate: f64,
    pub empty_policy: EmptyPolicy,
    pub recording: Recording,
}

impl SimConfig {
    pub fn new(mac: MacConfig, arrivals: ArrivalModel, horizon: u64, seed: u64) -> Self {
        SimConfig {
            mac,
            arrivals,
            horizon,
            seed,
            rate: 1.0,
            empty_policy: EmptyPolicy::Hold,
            recording: Recording::Summary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(param("horizon must be at least 1"));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(param(format!("transmission rate must be positive, got {}", self.rate)));
        }
        match &self.mac {
            MacConfig::Aloha { p } if !(*p > 0.0 && *p < 1.0) => {
                return Err(param(format!("transmit probability must lie in (0,1), got {p}")));
            }
            MacConfig::Csma { nu, mu } if !(*nu > 0.0 && *mu > 0.0 && nu.is_finite() && mu.is_finite()) => {
                return Err(param("backoff and service rates must be positive"));
            }
            _ => {}
        }
        match &self.arrivals {
            ArrivalModel::Deterministic { rate } if !(*rate >= 0.0 && rate.is_finite()) => {
                Err(param(format!("arrival rate must be nonnegative, got {rate}")))
            }
            ArrivalModel::Bernoulli { rate } if !(0.0..=1.0).contains(rate) => {
                Err(param(format!("Bernoulli arrival rate must lie in [0,1], got {rate}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flow {
    pub source: usize,
    pub destination: usize,
    /// Link indices, first hop first.
    pub route: Vec<usize>,
}

/// The simulator's view of a topology.
#[derive(Clone, Debug, PartialEq)]
pub struct SimNetwork {
    num_nodes: usize,
    links: Vec<Link>,
    flows: Vec<Flow>,
    transmitters: Vec<usize>,
    conflicts: Vec<Vec<usize>>,
}

impl SimNetwork {
    pub fn new(topology: &Topology, g: &ContentionGraph) -> Result<Self> {
        let links = topology.links().to_vec();
        if g.num_links() != links.len() {
            return Err(Error::Model(format!(
                "contention graph has {} links, topology has {}",
                g.num_links(),
                links.len()
            )));
        }
        let n = topology.num_nodes();
        let flows: Vec<Flow> = topology
            .sd_pairs()
            .iter()
            .zip(topology.routes())
            .map(|(&(source, destination), route)| Flow {
                source,
                destination,
                route: route.clone(),
            })
            .collect();
        let mut out_links = vec![Vec::new(); n];
        for (i, l) in links.iter().enumerate() {
            out_links[l.from].push(i);
        }
        let transmitters: Vec<usize> = (0..n).filter(|&v| !out_links[v].is_empty()).collect();
        let mut conflicts = vec![Vec::new(); n];
        for (ai, &a) in transmitters.iter().enumerate() {
            for &b in &transmitters[ai + 1..] {
                let clash = out_links[a]
                    .iter()
                    .any(|&la| out_links[b].iter().any(|&lb| g.are_adjacent(la, lb)));
                if clash {
                    conflicts[a].push(b);
                    conflicts[b].push(a);
                }
            }
        }
        Ok(SimNetwork {
            num_nodes: n,
            links,
            flows,
            transmitters,
            conflicts,
        })
    }

    /// Single flow along an `n`-node line with contention range `c_r`.
    pub fn line(n: usize, contention_range: usize) -> Result<Self> {
        let (topo, g) = line_network(n, contention_range)?;
        SimNetwork::new(&topo, &g)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    /// Nodes with at least one outgoing link.
    pub fn transmitters(&self) -> &[usize] {
        &self.transmitters
    }

    pub fn conflicts(&self, node: usize) -> &[usize] {
        &self.conflicts[node]
    }
}

/// State handed to an [`Observer`] at every integer time.
pub struct Sample<'a> {
    pub t: u64,
    pub backlog: &'a [u64],
    pub delivered: &'a [u64],
}

impl Sample<'_> {
    pub fn total_backlog(&self) -> u64 {
        self.backlog.iter().sum()
    }
}

/// Called at every integer time; `Break` ends the run there.
pub trait Observer {
    fn observe(&mut self, sample: &Sample<'_>) -> ControlFlow<()>;
}

impl<F: FnMut(&Sample<'_>) -> ControlFlow<()>> Observer for F {
    fn observe(&mut self, sample: &Sample<'_>) -> ControlFlow<()> {
        self(sample)
    }
}

pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: &Sample<'_>) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub horizon: u64,
    pub num_nodes: usize,
    pub transmitters: Vec<usize>,
    pub recording: Recording,
    /// Recorded integer times, starting at 0.
    pub times: Vec<u64>,
    /// `backlog[i][node]` at `times[i]`.
    pub backlog: Vec<Vec<u64>>,
    /// `delivered[i][flow]`: cumulative deliveries `D(t)`.
    pub delivered: Vec<Vec<u64>>,
    /// Full recording only: packets entering each buffer during `(t−1, t]`,
    /// exogenous and relayed.
    pub arrivals: Vec<Vec<u64>>,
    /// Full recording only: packets leaving each buffer during `(t−1, t]`.
    pub departures: Vec<Vec<u64>>,
    /// Cumulative transmission opportunities that found an empty buffer.
    pub empty_opportunities: Vec<u64>,
    /// Running `1 − f(n,t)`: fraction of (time, transmitter) samples in
    /// `[1, t]` with a nonempty buffer.
    pub nonempty_fraction: Vec<f64>,
    pub max_total_backlog: u64,
    /// Time at which an observer stopped the run.
    pub stopped_at: Option<u64>,
    /// CSMA, full recording: time spent with each set of transmitting nodes.
    pub state_occupancy: BTreeMap<Vec<usize>, f64>,
}

impl SimTrace {
    /// Last recorded time.
    pub fn end(&self) -> u64 {
        *self.times.last().unwrap_or(&0)
    }

    pub fn sample_index(&self, t: u64) -> Option<usize> {
        self.times.binary_search(&t).ok()
    }

    pub fn delivered_at(&self, flow: usize, t: u64) -> Option<u64> {
        self.sample_index(t).map(|i| self.delivered[i][flow])
    }

    pub fn final_nonempty_fraction(&self) -> f64 {
        *self.nonempty_fraction.last().unwrap_or(&0.0)
    }
}

pub fn run(net: &SimNetwork, cfg: &SimConfig) -> Result<SimTrace> {
    run_with(net, cfg, &mut NoObserver)
}

pub fn run_with<O: Observer + ?Sized>(net: &SimNetwork, cfg: &SimConfig, observer: &mut O) -> Result<SimTrace> {
    cfg.validate()?;
    if net.flows.is_empty() {
        return Err(Error::Model("network has no flows".into()));
    }
    match &cfg.mac {
        MacConfig::Csma { nu, mu } => csma::run(net, cfg, *nu, *mu, observer),
        MacConfig::Centralized { schedule } => {
            if let Some(&l) = schedule
                .positions()
                .flat_map(|s| s.links())
                .find(|&&l| l >= net.links.len())
            {
                return Err(Error::Model(format!("schedule uses unknown link {l}")));
            }
            slotted::run(net, cfg, observer)
        }
        MacConfig::Aloha { .. } => slotted::run(net, cfg, observer),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Packet {
    flow: usize,
    /// Index into the flow's route of the next link to cross.
    hop: usize,
}

/// Stream layout of the counter-based RNG: one stream per node, one per
/// flow's arrival process.
fn node_rng(seed: u64, node: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(node as u64);
    r
}

fn arrival_rng(seed: u64, flow: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream((1u64 << 32) | flow as u64);
    r
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -libm::log1p(-u) / rate
}

fn is_recorded(recording: Recording, t: u64, horizon: u64) -> bool {
    if recording == Recording::Full || t == 0 || t == horizon {
        return true;
    }
    let mut p = 1u64;
    while p < t {
        p = p.saturating_mul(10);
    }
    p == t
}

/// Per-flow exogenous arrival generator.
struct Arrivals {
    model: ArrivalModel,
    fluid: Vec<f64>,
    rngs: Vec<ChaCha8Rng>,
    explicit: BTreeMap<u64, u64>,
}

impl Arrivals {
    fn new(model: &ArrivalModel, flows: usize, seed: u64) -> Self {
        let mut explicit = BTreeMap::new();
        if let ArrivalModel::Explicit { slots } = model {
            for &s in slots {
                *explicit.entry(s).or_insert(0) += 1;
            }
        }
        Arrivals {
            model: model.clone(),
            fluid: vec![0.0; flows],
            rngs: (0..flows).map(|f| arrival_rng(seed, f)).collect(),
            explicit,
        }
    }

    /// Packets for `flow` in slot `u`.
    fn count(&mut self, flow: usize, u: u64) -> u64 {
        match &self.model {
            ArrivalModel::Deterministic { rate } => {
                self.fluid[flow] += rate;
                let k = libm::floor(self.fluid[flow]);
                self.fluid[flow] -= k;
                k as u64
            }
            ArrivalModel::Bernoulli { rate } => u64::from(self.rngs[flow].random_bool(*rate)),
            ArrivalModel::Saturated => 0,
            ArrivalModel::Explicit { .. } => self.explicit.get(&u).copied().unwrap_or(0),
        }
    }
}

/// Buffers, counters and the trace shared by both engines.
struct State<'n> {
    net: &'n SimNetwork,
    saturated: bool,
    queues: Vec<VecDeque<Packet>>,
    own_queued: Vec<u64>,
    delivered: Vec<u64>,
    arrivals_now: Vec<u64>,
    departures_now: Vec<u64>,
    backlog: Vec<u64>,
    nonempty_samples: u64,
    samples: u64,
    empty_opportunities: u64,
    trace: SimTrace,
}

impl<'n> State<'n> {
    fn new(net: &'n SimNetwork, cfg: &SimConfig) -> Self {
        let n = net.num_nodes;
        State {
            net,
            saturated: cfg.arrivals == ArrivalModel::Saturated,
            queues: vec![VecDeque::new(); n],
            own_queued: vec![0; net.flows.len()],
            delivered: vec![0; net.flows.len()],
            arrivals_now: vec![0; n],
            departures_now: vec![0; n],
            backlog: vec![0; n],
            nonempty_samples: 0,
            samples: 0,
            empty_opportunities: 0,
            trace: SimTrace {
                horizon: cfg.horizon,
                num_nodes: n,
                transmitters: net.transmitters.clone(),
                recording: cfg.recording,
                times: Vec::new(),
                backlog: Vec::new(),
                delivered: Vec::new(),
                arrivals: Vec::new(),
                departures: Vec::new(),
                empty_opportunities: Vec::new(),
                nonempty_fraction: Vec::new(),
                max_total_backlog: 0,
                stopped_at: None,
                state_occupancy: BTreeMap::new(),
            },
        }
    }

    fn inject(&mut self, flow: usize) {
        let src = self.net.flows[flow].source;
        self.queues[src].push_back(Packet { flow, hop: 0 });
        self.own_queued[flow] += 1;
        self.arrivals_now[src] += 1;
    }

    fn top_up(&mut self) {
        if self.saturated {
            for f in 0..self.net.flows.len() {
                if self.own_queued[f] == 0 {
                    self.inject(f);
                }
            }
        }
    }

    /// Pops the first packet at `node` whose next link is accepted by
    /// `eligible`; returns where it goes next (`None` if delivered).
    fn take(&mut self, node: usize, eligible: impl Fn(usize) -> bool) -> Option<Option<(usize, Packet)>> {
        let net = self.net;
        let pos = self.queues[node]
            .iter()
            .position(|p| eligible(net.flows[p.flow].route[p.hop]))?;
        let mut p = self.queues[node].remove(pos).expect("position is in range");
        self.departures_now[node] += 1;
        if p.hop == 0 {
            self.own_queued[p.flow] -= 1;
        }
        let link = net.links[net.flows[p.flow].route[p.hop]];
        p.hop += 1;
        if p.hop == net.flows[p.flow].route.len() {
            self.delivered[p.flow] += 1;
            Some(None)
        } else {
            Some(Some((link.to, p)))
        }
    }

    fn enqueue_relay(&mut self, node: usize, p: Packet) {
        self.queues[node].push_back(p);
        self.arrivals_now[node] += 1;
    }

    /// Closes integer time `t`: updates statistics, records, and asks the
    /// observer whether to continue.
    fn close<O: Observer + ?Sized>(&mut self, t: u64, observer: &mut O) -> ControlFlow<()> {
        for (b, q) in self.backlog.iter_mut().zip(&self.queues) {
            *b = q.len() as u64;
        }
        if t > 0 {
            for &v in &self.net.transmitters {
                self.samples += 1;
                if self.backlog[v] > 0 {
                    self.nonempty_samples += 1;
                }
            }
        }
        let total: u64 = self.backlog.iter().sum();
        self.trace.max_total_backlog = self.trace.max_total_backlog.max(total);
        let flow = observer.observe(&Sample {
            t,
            backlog: &self.backlog,
            delivered: &self.delivered,
        });
        let horizon = self.trace.horizon;
        if is_recorded(self.trace.recording, t, horizon) || flow.is_break() {
            self.record(t);
        }
        if flow.is_break() {
            self.trace.stopped_at = Some(t);
        }
        for x in self.arrivals_now.iter_mut().chain(self.departures_now.iter_mut()) {
            *x = 0;
        }
        flow
    }

    fn record(&mut self, t: u64) {
        let tr = &mut self.trace;
        tr.times.push(t);
        tr.backlog.push(self.backlog.clone());
        tr.delivered.push(self.delivered.clone());
        if tr.recording == Recording::Full {
            tr.arrivals.push(self.arrivals_now.clone());
            tr.departures.push(self.departures_now.clone());
        }
        tr.empty_opportunities.push(self.empty_opportunities);
        tr.nonempty_fraction.push(if self.samples == 0 {
            0.0
        } else {
            self.nonempty_samples as f64 / self.samples as f64
        });
    }
}
