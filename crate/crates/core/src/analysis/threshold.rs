//! Time scale at which multi-hop relaying provably beats a direct link.
//!
//! The threshold is the smallest `t` with `λ^L_mh(t) > λ^U_sh(t)`: beyond it
//! the guaranteed multi-hop rate exceeds anything the direct link can
//! deliver at the same violation probability.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::bounds::{lower_bound_rate, upper_bound_rate};
use super::rate::RateFunction;
use crate::contention::ContentionGraph;
use crate::error::{param, Result};
use crate::mmtp::{aloha_success_probability, csma_model};

pub const DEFAULT_CAP: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MacParams {
    /// Transmit probability per node.
    Aloha { p: f64 },
    Csma { nu: f64, mu: f64 },
}

#[derive(Clone, Debug)]
pub struct ThresholdSetup {
    pub single_hop: RateFunction,
    pub multi_hop: RateFunction,
    pub eps: f64,
    pub cap: u64,
}

impl ThresholdSetup {
    /// All `k + 1` nodes share one contention domain. The direct link and
    /// the relays see the same MAC; only the link rate differs.
    pub fn new(k: usize, mac: MacParams, r_sh: f64, r_mh: f64, eps: f64) -> Result<Self> {
        if k == 0 {
            return Err(param("multi-hop route needs k ≥ 1 hops"));
        }
        if !(r_sh > 0.0) || !(r_sh < r_mh) || !r_mh.is_finite() {
            return Err(param(format!(
                "need 0 < r_sh < r_mh, got r_sh = {r_sh}, r_mh = {r_mh}"
            )));
        }
        let (single_hop, multi_hop) = match mac {
            MacParams::Aloha { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(param(format!("transmit probability must lie in (0,1), got {p}")));
                }
                let q = aloha_success_probability(p, k - 1);
                (
                    RateFunction::aloha(vec![q], r_sh)?,
                    RateFunction::aloha(vec![q; k], r_mh)?,
                )
            }
            MacParams::Csma { nu, mu } => {
                let g = ContentionGraph::complete(k);
                (
                    RateFunction::csma(csma_model(&g, nu, mu, r_sh)?, vec![0])?,
                    RateFunction::csma(csma_model(&g, nu, mu, r_mh)?, (0..k).collect())?,
                )
            }
        };
        ThresholdSetup::custom(single_hop, multi_hop, eps)
    }

    pub fn custom(single_hop: RateFunction, multi_hop: RateFunction, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(param(format!("violation probability must lie in (0,1], got {eps}")));
        }
        Ok(ThresholdSetup {
            single_hop,
            multi_hop,
            eps,
            cap: DEFAULT_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap.max(1);
        self
    }

    /// `λ^L_mh(t) > λ^U_sh(t)`.
    pub fn crossed(&self, t: u64) -> Result<bool> {
        let lower = lower_bound_rate(&self.multi_hop, t, self.eps)?;
        let upper = upper_bound_rate(&self.single_hop, t, self.eps)?;
        Ok(lower.feasible && lower.lambda > upper.lambda)
    }

    /// Doubling horizon followed by binary search; `None` if there is no
    /// crossing up to the cap.
    pub fn threshold(&self) -> Result<Option<u64>> {
        let mut hi = 1u64;
        let mut lo = 0u64;
        loop {
            if self.crossed(hi)? {
                break;
            }
            if hi >= self.cap {
                return Ok(None);
            }
            lo = hi;
            hi = (hi * 2).min(self.cap);
        }
        // Invariant: not crossed at lo (or lo = 0), crossed at hi.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.crossed(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }
}

pub fn threshold_time(k: usize, mac: MacParams, r_sh: f64, r_mh: f64, eps: f64) -> Result<Option<u64>> {
    ThresholdSetup::new(k, mac, r_sh, r_mh, eps)?.threshold()
}

/// Thresholds over a grid of direct rates; rows that violate the parameter
/// constraints carry their error.
pub fn threshold_row(k: usize, mac: MacParams, r_sh: &[f64], r_mh: f64, eps: f64) -> Vec<Result<Option<u64>>> {
    r_sh.iter().map(|&r| threshold_time(k, mac, r, r_mh, eps)).collect()
}
