//! Slot-synchronous engine for slotted Aloha and centralized schedules.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{node_rng, Arrivals, EmptyPolicy, MacConfig, Observer, SimConfig, SimNetwork, SimTrace, State};
use crate::error::Result;

pub(super) fn run<O: Observer + ?Sized>(net: &SimNetwork, cfg: &SimConfig, observer: &mut O) -> Result<SimTrace> {
    let mut st = State::new(net, cfg);
    let mut arrivals = Arrivals::new(&cfg.arrivals, net.flows.len(), cfg.seed);
    let mut rngs: Vec<_> = (0..net.num_nodes).map(|v| node_rng(cfg.seed, v)).collect();
    let mut credit = vec![0.0; net.num_nodes];
    let mut attempting = vec![false; net.num_nodes];
    // (node, granted links; empty = any link)
    let mut granted: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut relays = Vec::new();

    st.top_up();
    if st.close(0, observer).is_break() {
        return Ok(st.trace);
    }
    for u in 1..=cfg.horizon {
        for f in 0..net.flows.len() {
            for _ in 0..arrivals.count(f, u) {
                st.inject(f);
            }
        }

        granted.clear();
        match &cfg.mac {
            MacConfig::Aloha { p } => {
                for &v in &net.transmitters {
                    let eligible = cfg.empty_policy == EmptyPolicy::Hold || !st.queues[v].is_empty();
                    attempting[v] = eligible && rngs[v].random_bool(*p);
                }
                for &v in &net.transmitters {
                    if attempting[v] && !net.conflicts[v].iter().any(|&w| attempting[w]) {
                        granted.push((v, Vec::new()));
                    }
                }
            }
            MacConfig::Centralized { schedule } => {
                for &l in schedule.links_in_slot(u).links() {
                    let v = net.links[l].from;
                    match granted.iter_mut().find(|(w, _)| *w == v) {
                        Some((_, ls)) => ls.push(l),
                        None => granted.push((v, vec![l])),
                    }
                }
                granted.sort_unstable_by_key(|(v, _)| *v);
            }
            MacConfig::Csma { .. } => unreachable!("CSMA runs on the event engine"),
        }

        for (v, links) in &granted {
            let v = *v;
            credit[v] += cfg.rate;
            let whole = libm::floor(credit[v]);
            credit[v] -= whole;
            let mut sent = 0u64;
            while sent < whole as u64 {
                match st.take(v, |l| links.is_empty() || links.contains(&l)) {
                    Some(Some(relay)) => relays.push(relay),
                    Some(None) => {}
                    None => break,
                }
                sent += 1;
            }
            if sent < whole as u64 {
                st.empty_opportunities += 1;
            }
        }
        for (node, p) in relays.drain(..) {
            st.enqueue_relay(node, p);
        }
        st.top_up();
        if st.close(u, observer).is_break() {
            break;
        }
    }
    Ok(st.trace)
}
