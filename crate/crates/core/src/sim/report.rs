//! Derived measurements: the empty-buffer fraction, tightened bound factors
//! and the empirical capacity search.

use alloc::format;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::{run_with, ArrivalModel, EmptyPolicy, MacConfig, Recording, Sample, SimConfig, SimNetwork, SimTrace};
use crate::error::{param, Result};

/// `(T, 1 − f(n,T))` at every power of ten up to the end of the trace, plus
/// the end itself.
pub fn empty_fraction(trace: &SimTrace) -> Vec<(u64, f64)> {
    let end = trace.end();
    trace
        .times
        .iter()
        .zip(&trace.nonempty_fraction)
        .filter(|(&t, _)| t > 0 && (t == end || is_power_of_ten(t)))
        .map(|(&t, &f)| (t, f))
        .collect()
}

fn is_power_of_ten(mut t: u64) -> bool {
    while t.is_multiple_of(10) && t > 1 {
        t /= 10;
    }
    t == 1
}

/// Constants of the asymptotic bounds calculus `nλh ≤ x` and `λl ≤ c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalculusConstants {
    pub h: f64,
    pub x: f64,
    pub l: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TightenedReport {
    /// Measured `1 − f(n,T)`.
    pub nonempty_fraction: f64,
    pub nodes: usize,
    /// `x / (n h)`.
    pub upper_untightened: f64,
    /// `(1 − f) x / (n h)`.
    pub upper_tightened: f64,
    /// `c / l`.
    pub lower_untightened: f64,
    /// `1 / (1 − f)`; `None` when every buffer was always empty.
    pub lower_factor: Option<f64>,
    /// `c / (l (1 − f))`; `None` when every buffer was always empty.
    pub lower_tightened: Option<f64>,
}

pub fn tightened_factors(nonempty_fraction: f64, nodes: usize, k: CalculusConstants) -> Result<TightenedReport> {
    if [k.h, k.x, k.l, k.c].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(param("calculus constants h, x, l, c must be positive"));
    }
    if nodes == 0 {
        return Err(param("node count must be positive"));
    }
    if !(0.0..=1.0).contains(&nonempty_fraction) {
        return Err(param(format!("1 − f must lie in [0,1], got {nonempty_fraction}")));
    }
    let upper_untightened = k.x / (nodes as f64 * k.h);
    let lower_untightened = k.c / k.l;
    let lower_factor = (nonempty_fraction > 0.0).then(|| 1.0 / nonempty_fraction);
    Ok(TightenedReport {
        nonempty_fraction,
        nodes,
        upper_untightened,
        upper_tightened: nonempty_fraction * upper_untightened,
        lower_untightened,
        lower_factor,
        lower_tightened: lower_factor.map(|f| f * lower_untightened),
    })
}

/// Report for a measured trace, with `n` the number of nodes.
pub fn tightened_factor_report(trace: &SimTrace, k: CalculusConstants) -> Result<TightenedReport> {
    tightened_factors(trace.final_nonempty_fraction(), trace.num_nodes, k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacitySearch {
    pub mac: MacConfig,
    pub horizon: u64,
    /// A rate is infeasible once the total backlog reaches this.
    pub backlog_cap: u64,
    pub seed: u64,
    pub rate: f64,
    pub empty_policy: EmptyPolicy,
    pub iterations: u32,
}

impl CapacitySearch {
    pub fn new(mac: MacConfig, horizon: u64, backlog_cap: u64, seed: u64) -> Self {
        CapacitySearch {
            mac,
            horizon,
            backlog_cap,
            seed,
            rate: 1.0,
            empty_policy: EmptyPolicy::Hold,
            iterations: 12,
        }
    }

    fn config(&self, lambda: f64) -> SimConfig {
        SimConfig {
            mac: self.mac.clone(),
            arrivals: ArrivalModel::Deterministic { rate: lambda },
            horizon: self.horizon,
            seed: self.seed,
            rate: self.rate,
            empty_policy: self.empty_policy,
            recording: Recording::Summary,
        }
    }

    /// Whether the total backlog stays below the cap over the horizon.
    pub fn feasible(&self, net: &SimNetwork, lambda: f64) -> Result<bool> {
        let cap = self.backlog_cap;
        let mut stop = |s: &Sample<'_>| {
            if s.total_backlog() >= cap {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        };
        let trace = run_with(net, &self.config(lambda), &mut stop)?;
        Ok(trace.stopped_at.is_none())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityEstimate {
    /// Largest rate found feasible.
    pub lambda: f64,
    /// Smallest rate found infeasible (`None` if the bracket top is feasible).
    pub infeasible_above: Option<f64>,
    /// Every probed rate with its verdict, in probing order.
    pub probes: Vec<(f64, bool)>,
}

/// Bisection on the arrival rate over `[0, C]`.
pub fn capacity_search(net: &SimNetwork, search: &CapacitySearch) -> Result<CapacityEstimate> {
    if search.horizon == 0 || search.backlog_cap == 0 {
        return Err(param("capacity search needs a positive horizon and backlog cap"));
    }
    let mut probes = Vec::new();
    let (mut lo, mut hi) = (0.0, search.rate);
    let top = search.feasible(net, hi)?;
    probes.push((hi, top));
    if top {
        return Ok(CapacityEstimate {
            lambda: hi,
            infeasible_above: None,
            probes,
        });
    }
    for _ in 0..search.iterations {
        let mid = 0.5 * (lo + hi);
        let ok = search.feasible(net, mid)?;
        probes.push((mid, ok));
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CapacityEstimate {
        lambda: lo,
        infeasible_above: Some(hi),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_ten() {
        assert!(is_power_of_ten(1) && is_power_of_ten(10) && is_power_of_ten(100_000));
        assert!(!is_power_of_ten(0) && !is_power_of_ten(20) && !is_power_of_ten(101));
    }

    #[test]
    fn tightened_arithmetic() {
        let k = CalculusConstants {
            h: 1.0,
            x: 4.0,
            l: 2.0,
            c: 1.0,
        };
        let r = tightened_factors(0.5, 4, k).unwrap();
        assert_eq!(r.upper_tightened, 0.5);
        assert_eq!(r.upper_untightened, 1.0);
        assert_eq!(r.lower_factor, Some(2.0));
        assert_eq!(r.lower_tightened, Some(1.0));

        let saturated = tightened_factors(1.0, 4, k).unwrap();
        assert_eq!(saturated.upper_tightened, saturated.upper_untightened);
        assert_eq!(saturated.lower_tightened, Some(saturated.lower_untightened));

        let all_empty = tightened_factors(0.0, 4, k).unwrap();
        assert_eq!(all_empty.lower_factor, None);
    }

    #[test]
    fn rejects_nonpositive_constants() {
        let k = CalculusConstants {
            h: 0.0,
            x: 4.0,
            l: 1.0,
            c: 1.0,
        };
        assert!(tightened_factors(0.5, 4, k).is_err());
    }
}
