//! Markov modulated transmission processes.
//!
//! A modulating chain `X(t)` decides, per link, whether the link is in one
//! of its *favorable* states; there the link transmits at rate `C`,
//! elsewhere at rate 0. The three MACs differ only in the chain:
//!
//! * centralized scheduling: a deterministic walk over schedule positions;
//! * slotted Aloha: a per-link on/off chain with i.i.d. slots,
//!   `P(on) = p (1 − p)^deg`;
//! * idealized CSMA/CA: a continuous-time chain over the independent sets of
//!   the contention graph, links joining at rate `ν` and leaving at rate `μ`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::contention::{independent_sets, ContentionGraph, LinkSet, DEFAULT_MAX_STATES};
use crate::error::{param, Error, Result};
use crate::linalg::Matrix;
use crate::schedule::Schedule;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MacKind {
    Centralized,
    Aloha,
    Csma,
}

impl MacKind {
    pub fn name(self) -> &'static str {
        match self {
            MacKind::Centralized => "centralized",
            MacKind::Aloha => "aloha",
            MacKind::Csma => "csma",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateLabel {
    /// The set of links transmitting in this state.
    Links(LinkSet),
    On,
    Off,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dynamics {
    /// Deterministic successor per state.
    Cycle { successor: Vec<usize>, recurrent_from: usize },
    /// I.i.d. slots: `on` with the given probability (state 0), else `off`.
    Bernoulli { on: f64 },
    /// Continuous-time generator.
    Generator(Matrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MacModel {
    kind: MacKind,
    states: Vec<StateLabel>,
    dynamics: Dynamics,
    favorable: BTreeMap<usize, Vec<usize>>,
    rate: f64,
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(param(format!("transmission rate must be positive, got {rate}")))
    }
}

/// Two-state on/off model of `link` under slotted Aloha.
pub fn aloha_model(g: &ContentionGraph, link: usize, p: f64, rate: f64) -> Result<MacModel> {
    if !(p > 0.0 && p < 1.0) {
        return Err(param(format!("transmit probability must lie in (0,1), got {p}")));
    }
    check_rate(rate)?;
    if link >= g.num_links() {
        return Err(Error::Model(format!("link {link} not in contention graph")));
    }
    let on = aloha_success_probability(p, g.degree(link));
    Ok(MacModel {
        kind: MacKind::Aloha,
        states: vec![StateLabel::On, StateLabel::Off],
        dynamics: Dynamics::Bernoulli { on },
        favorable: BTreeMap::from([(link, vec![0])]),
        rate,
    })
}

/// `p (1 − p)^degree`.
pub fn aloha_success_probability(p: f64, degree: usize) -> f64 {
    p * (1.0 - p).powi(degree as i32)
}

/// CSMA chain over the independent sets of `g`.
pub fn csma_model(g: &ContentionGraph, backoff_rate: f64, service_rate: f64, rate: f64) -> Result<MacModel> {
    csma_model_capped(g, backoff_rate, service_rate, rate, DEFAULT_MAX_STATES)
}

pub fn csma_model_capped(
    g: &ContentionGraph,
    backoff_rate: f64,
    service_rate: f64,
    rate: f64,
    max_states: usize,
) -> Result<MacModel> {
    if !(backoff_rate > 0.0 && service_rate > 0.0) || !backoff_rate.is_finite() || !service_rate.is_finite() {
        return Err(param("backoff and service rates must be positive"));
    }
    check_rate(rate)?;
    let sets = independent_sets(g, max_states)?;
    let index: BTreeMap<&LinkSet, usize> = sets.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let n = sets.len();
    let mut q = Matrix::zeros(n, n);
    for (i, s) in sets.iter().enumerate() {
        for link in 0..g.num_links() {
            if s.contains(link) {
                q[(i, index[&s.without(link)])] += service_rate;
            } else if g.neighbors(link).iter().all(|&nb| !s.contains(nb)) {
                q[(i, index[&s.with(link)])] += backoff_rate;
            }
        }
        let out: f64 = q.row(i).iter().sum();
        q[(i, i)] = -out;
    }
    let favorable = (0..g.num_links())
        .map(|l| (l, (0..n).filter(|&i| sets[i].contains(l)).collect()))
        .collect();
    Ok(MacModel {
        kind: MacKind::Csma,
        states: sets.into_iter().map(StateLabel::Links).collect(),
        dynamics: Dynamics::Generator(q),
        favorable,
        rate,
    })
}

/// Deterministic chain over the positions of a centralized schedule.
pub fn centralized_model(schedule: &Schedule, rate: f64) -> Result<MacModel> {
    check_rate(rate)?;
    let states: Vec<StateLabel> = schedule.positions().cloned().map(StateLabel::Links).collect();
    let mut favorable: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, set) in schedule.positions().enumerate() {
        for &l in set.links() {
            favorable.entry(l).or_default().push(i);
        }
    }
    Ok(MacModel {
        kind: MacKind::Centralized,
        states,
        dynamics: Dynamics::Cycle {
            successor: schedule.successors(),
            recurrent_from: schedule.prefix().len(),
        },
        favorable,
        rate,
    })
}

impl MacModel {
    pub fn kind(&self) -> MacKind {
        self.kind
    }

    pub fn states(&self) -> &[StateLabel] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn generator(&self) -> Option<&Matrix> {
        match &self.dynamics {
            Dynamics::Generator(q) => Some(q),
            _ => None,
        }
    }

    /// Links with at least one favorable state.
    pub fn links(&self) -> impl Iterator<Item = usize> + '_ {
        self.favorable.keys().copied()
    }

    pub fn favorable_states(&self, link: usize) -> Result<&[usize]> {
        self.favorable
            .get(&link)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Model(format!("link {link} has no favorable state in this model")))
    }

    /// Diagonal of the indicator `I_j` as a boolean vector.
    pub fn favorable_mask(&self, link: usize) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.states.len()];
        for &i in self.favorable_states(link)? {
            mask[i] = true;
        }
        Ok(mask)
    }

    /// `C · π(favorable)`: the long-run service rate of `link`.
    pub fn mean_rate(&self, link: usize, pi: &StationaryDist) -> Result<f64> {
        let fav = self.favorable_states(link)?;
        Ok(self.rate * fav.iter().map(|&i| pi.probabilities[i]).sum::<f64>())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDist {
    pub probabilities: Vec<f64>,
}

/// Stationary law of the modulating chain.
///
/// CSMA solves `πQ = 0, Σπ = 1` directly; Aloha returns `(π_on, π_off)`;
/// centralized scheduling puts uniform mass on the recurrent cycle and none
/// on the transient prefix.
pub fn stationary(m: &MacModel) -> Result<StationaryDist> {
    let probabilities = match &m.dynamics {
        Dynamics::Bernoulli { on } => vec![*on, 1.0 - on],
        Dynamics::Cycle {
            successor,
            recurrent_from,
        } => {
            let n = successor.len();
            let w = 1.0 / (n - recurrent_from) as f64;
            (0..n).map(|i| if i < *recurrent_from { 0.0 } else { w }).collect()
        }
        Dynamics::Generator(q) => {
            let n = q.rows();
            // Replace the last balance equation with the normalization.
            let mut a = q.transpose();
            for j in 0..n {
                a[(n - 1, j)] = 1.0;
            }
            let mut b = vec![0.0; n];
            b[n - 1] = 1.0;
            let mut pi = a.solve(&b)?;
            for p in &mut pi {
                if *p < 0.0 && *p > -1e-14 {
                    *p = 0.0;
                }
            }
            if pi.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::Numeric("stationary solve produced negative mass".into()));
            }
            pi
        }
    };
    Ok(StationaryDist { probabilities })
}
