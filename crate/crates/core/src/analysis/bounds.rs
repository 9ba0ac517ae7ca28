//! Transient capacity bounds at finite horizon `t`.
//!
//! `λ_t^L = sup_θ { r(−θ) + (log ε − log C(t+k−1, k−1)) / (θ t) }`
//! `λ_t^U = inf_θ { r(θ) − log ε / (θ t) }`

use alloc::format;
use alloc::vec::Vec;

use super::optimize::{maximize, minimize, THETA_MAX, THETA_MIN};
use super::rate::RateFunction;
use crate::error::{param, Result};
use crate::mmtp::MacKind;

/// `log C(n, k)` via log-gamma.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k == 0 || k >= n {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValue {
    /// Rate in packets per slot; lower bounds are clamped at 0.
    pub lambda: f64,
    pub theta: f64,
    /// False when the analytic lower bound was negative before clamping.
    pub feasible: bool,
}

fn check(t: u64, eps: f64) -> Result<()> {
    if t == 0 {
        return Err(param("bounds need t ≥ 1"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(param(format!("violation probability must lie in (0,1], got {eps}")));
    }
    Ok(())
}

pub fn lower_bound_rate(r: &RateFunction, t: u64, eps: f64) -> Result<BoundValue> {
    check(t, eps)?;
    let k = r.hops() as u64;
    let penalty = libm::log(eps) - ln_binomial(t + k - 1, k - 1);
    let tf = t as f64;
    let o = maximize(|theta| Ok(r.lower(theta)? + penalty / (theta * tf)), THETA_MIN, THETA_MAX)?;
    Ok(if o.value > 0.0 {
        BoundValue {
            lambda: o.value,
            theta: o.theta,
            feasible: true,
        }
    } else {
        BoundValue {
            lambda: 0.0,
            theta: o.theta,
            feasible: false,
        }
    })
}

pub fn upper_bound_rate(r: &RateFunction, t: u64, eps: f64) -> Result<BoundValue> {
    check(t, eps)?;
    let penalty = -libm::log(eps);
    let tf = t as f64;
    let o = minimize(|theta| Ok(r.upper(theta)? + penalty / (theta * tf)), THETA_MIN, THETA_MAX)?;
    Ok(BoundValue {
        lambda: o.value,
        theta: o.theta,
        feasible: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPoint {
    pub t: u64,
    pub lower: BoundValue,
    pub upper: BoundValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    pub eps: f64,
    pub hops: usize,
    pub mac: MacKind,
    pub points: Vec<BoundPoint>,
}

pub fn bound_curve(r: &RateFunction, times: &[u64], eps: f64) -> Result<BoundCurve> {
    let points = times
        .iter()
        .map(|&t| {
            Ok(BoundPoint {
                t,
                lower: lower_bound_rate(r, t, eps)?,
                upper: upper_bound_rate(r, t, eps)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve {
        eps,
        hops: r.hops(),
        mac: r.mac(),
        points,
    })
}

/// Log-spaced integer times `1..=t_max`, `per_decade` points per decade,
/// deduplicated and always ending at `t_max`.
pub fn log_time_grid(t_max: u64, per_decade: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if t_max == 0 || per_decade == 0 {
        return out;
    }
    let decades = libm::log10(t_max as f64);
    let n = libm::ceil(decades * per_decade as f64) as usize;
    for i in 0..=n {
        let t = libm::round(libm::pow(10.0, i as f64 / per_decade as f64)) as u64;
        let t = t.clamp(1, t_max);
        if out.last() != Some(&t) {
            out.push(t);
        }
    }
    if out.last() != Some(&t_max) {
        out.push(t_max);
    }
    out
}
