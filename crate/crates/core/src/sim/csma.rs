//! Continuous-time engine for idealized CSMA/CA.
//!
//! Every transmitter runs an exponential(ν) backoff while no conflicting
//! node transmits and pauses it otherwise. On expiry it holds the channel for
//! an exponential(μ) period. While holding the channel a node accrues
//! service credit at rate `C`; each unit of credit sends one packet. Credit
//! left over at the end of a transmission carries to the next one.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand_chacha::ChaCha8Rng;

use super::{exponential, node_rng, Arrivals, EmptyPolicy, Observer, Recording, SimConfig, SimNetwork, SimTrace, State};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    BackoffExpires,
    ServiceTick,
    TransmissionEnds,
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    seq: u64,
    node: usize,
    generation: u64,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    /// `running_since` is `None` while a neighbor holds the channel.
    Backoff { remaining: f64, running_since: Option<f64> },
    Transmitting { end: f64, tick_origin: f64, next_tick: u64 },
}

struct Node {
    phase: Phase,
    generation: u64,
    blocked: usize,
    credit: f64,
    rng: ChaCha8Rng,
}

struct Engine {
    nodes: Vec<Node>,
    calendar: BinaryHeap<Reverse<Event>>,
    seq: u64,
    nu: f64,
    mu: f64,
    rate: f64,
    active: Vec<usize>,
    last_change: f64,
    track_occupancy: bool,
}

impl Engine {
    fn schedule(&mut self, time: f64, node: usize, kind: Kind) {
        self.seq += 1;
        self.calendar.push(Reverse(Event {
            time,
            seq: self.seq,
            node,
            generation: self.nodes[node].generation,
            kind,
        }));
    }

    fn start_backoff(&mut self, v: usize, now: f64) {
        let remaining = exponential(&mut self.nodes[v].rng, self.nu);
        let running = self.nodes[v].blocked == 0;
        self.nodes[v].generation += 1;
        self.nodes[v].phase = Phase::Backoff {
            remaining,
            running_since: running.then_some(now),
        };
        if running {
            self.schedule(now + remaining, v, Kind::BackoffExpires);
        }
    }

    fn occupancy_change(&mut self, now: f64, st: &mut State<'_>) {
        if self.track_occupancy {
            *st.trace.state_occupancy.entry(self.active.clone()).or_insert(0.0) += now - self.last_change;
        }
        self.last_change = now;
    }
}

pub(super) fn run<O: Observer + ?Sized>(
    net: &SimNetwork,
    cfg: &SimConfig,
    nu: f64,
    mu: f64,
    observer: &mut O,
) -> Result<SimTrace> {
    let mut st = State::new(net, cfg);
    let mut arrivals = Arrivals::new(&cfg.arrivals, net.flows.len(), cfg.seed);
    let mut eng = Engine {
        nodes: (0..net.num_nodes)
            .map(|v| Node {
                phase: Phase::Backoff {
                    remaining: 0.0,
                    running_since: None,
                },
                generation: 0,
                blocked: 0,
                credit: 0.0,
                rng: node_rng(cfg.seed, v),
            })
            .collect(),
        calendar: BinaryHeap::new(),
        seq: 0,
        nu,
        mu,
        rate: cfg.rate,
        active: Vec::new(),
        last_change: 0.0,
        track_occupancy: cfg.recording == Recording::Full,
    };
    for &v in &net.transmitters {
        eng.start_backoff(v, 0.0);
    }

    st.top_up();
    if st.close(0, observer).is_break() {
        return Ok(st.trace);
    }
    let mut end_time = cfg.horizon as f64;
    'units: for u in 1..=cfg.horizon {
        for f in 0..net.flows.len() {
            for _ in 0..arrivals.count(f, u) {
                st.inject(f);
            }
        }
        let until = u as f64;
        while let Some(&Reverse(ev)) = eng.calendar.peek() {
            if ev.time > until {
                break;
            }
            eng.calendar.pop();
            if ev.generation != eng.nodes[ev.node].generation {
                continue;
            }
            handle(&mut eng, &mut st, net, cfg.empty_policy, ev);
        }
        st.top_up();
        if st.close(u, observer).is_break() {
            end_time = until;
            break 'units;
        }
    }
    eng.occupancy_change(end_time, &mut st);
    Ok(st.trace)
}

fn handle(eng: &mut Engine, st: &mut State<'_>, net: &SimNetwork, policy: EmptyPolicy, ev: Event) {
    let (v, now) = (ev.node, ev.time);
    match ev.kind {
        Kind::BackoffExpires => {
            if policy == EmptyPolicy::Skip && st.queues[v].is_empty() {
                eng.start_backoff(v, now);
                return;
            }
            let end = now + exponential(&mut eng.nodes[v].rng, eng.mu);
            let tick_origin = now - eng.nodes[v].credit / eng.rate;
            eng.nodes[v].generation += 1;
            eng.nodes[v].phase = Phase::Transmitting {
                end,
                tick_origin,
                next_tick: 1,
            };
            eng.schedule(end, v, Kind::TransmissionEnds);
            let first = tick_origin + 1.0 / eng.rate;
            if first < end {
                eng.schedule(first, v, Kind::ServiceTick);
            }
            for &w in &net.conflicts[v] {
                let node = &mut eng.nodes[w];
                node.blocked += 1;
                if let Phase::Backoff {
                    remaining,
                    running_since: Some(since),
                } = node.phase
                {
                    node.phase = Phase::Backoff {
                        remaining: (remaining - (now - since)).max(0.0),
                        running_since: None,
                    };
                    node.generation += 1;
                }
            }
            eng.occupancy_change(now, st);
            let pos = eng.active.binary_search(&v).unwrap_err();
            eng.active.insert(pos, v);
        }
        Kind::ServiceTick => {
            let Phase::Transmitting {
                end,
                tick_origin,
                next_tick,
            } = eng.nodes[v].phase
            else {
                return;
            };
            match st.take(v, |_| true) {
                Some(Some((next, p))) => st.enqueue_relay(next, p),
                Some(None) => {}
                None => st.empty_opportunities += 1,
            }
            st.top_up();
            eng.nodes[v].phase = Phase::Transmitting {
                end,
                tick_origin,
                next_tick: next_tick + 1,
            };
            let t = tick_origin + (next_tick + 1) as f64 / eng.rate;
            if t < end {
                eng.schedule(t, v, Kind::ServiceTick);
            }
        }
        Kind::TransmissionEnds => {
            if let Phase::Transmitting {
                end,
                tick_origin,
                next_tick,
            } = eng.nodes[v].phase
            {
                let accrued = eng.rate * (end - tick_origin) - (next_tick - 1) as f64;
                eng.nodes[v].credit = accrued.clamp(0.0, 1.0 - f64::EPSILON);
            }
            eng.occupancy_change(now, st);
            if let Ok(pos) = eng.active.binary_search(&v) {
                eng.active.remove(pos);
            }
            for i in 0..net.conflicts[v].len() {
                let w = net.conflicts[v][i];
                eng.nodes[w].blocked -= 1;
                if eng.nodes[w].blocked == 0 {
                    if let Phase::Backoff {
                        remaining,
                        running_since: None,
                    } = eng.nodes[w].phase
                    {
                        eng.nodes[w].phase = Phase::Backoff {
                            remaining,
                            running_since: Some(now),
                        };
                        eng.nodes[w].generation += 1;
                        eng.schedule(now + remaining, w, Kind::BackoffExpires);
                    }
                }
            }
            eng.start_backoff(v, now);
        }
    }
}
