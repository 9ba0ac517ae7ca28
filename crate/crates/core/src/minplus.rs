//! (min,+) algebra over cumulative arrival processes and bivariate impulse
//! responses.
//!
//! An impulse response `S(s, t)` is the amount of data a hop would serve in
//! `(s, t]` if its input were saturated. The output of a hop is the (min,+)
//! convolution of its input with `S`, and tandem hops collapse into one by
//! composing their responses.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::schedule::Schedule;

/// Cumulative packet count `A(t)`, `t = 0, 1, …`.
#[derive(Clone, Debug, PartialEq)]
pub enum CumulativeProcess {
    Finite(Vec<f64>),
    /// `A(0) = 0` and `A(t) = ∞` for `t ≥ 1`.
    Saturated,
}

impl CumulativeProcess {
    /// Checks `values[0] = 0`, finiteness and monotonicity.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        match values.first() {
            Some(&v) if v == 0.0 => {}
            _ => return Err(param("a cumulative process starts at A(0) = 0")),
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(param("cumulative values must be finite"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(param("cumulative process must be nondecreasing"));
        }
        Ok(CumulativeProcess::Finite(values))
    }

    /// Builds `A` from per-slot arrival counts (slot `u` adds `arrivals[u-1]`).
    pub fn from_arrivals(arrivals: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(arrivals.len() + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for &a in arrivals {
            acc += a;
            values.push(acc);
        }
        CumulativeProcess::new(values)
    }

    /// `None` means unbounded.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            CumulativeProcess::Finite(v) => Some(v.len() - 1),
            CumulativeProcess::Saturated => None,
        }
    }

    /// `None` stands for `+∞`.
    pub fn value(&self, t: usize) -> Option<f64> {
        match self {
            CumulativeProcess::Finite(v) => v.get(t).copied(),
            CumulativeProcess::Saturated => (t == 0).then_some(0.0),
        }
    }
}

/// Anything that answers `S(s, t)` for `0 ≤ s ≤ t ≤ horizon`.
pub trait BivariateService {
    fn horizon(&self) -> usize;

    /// Caller guarantees `s ≤ t ≤ horizon`.
    fn service(&self, s: usize, t: usize) -> f64;
}

/// Lower-triangular table of `S(s, t)` for `0 ≤ s ≤ t ≤ T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpulseResponse {
    horizon: usize,
    table: Vec<f64>,
}

#[inline]
fn tri(s: usize, t: usize) -> usize {
    t * (t + 1) / 2 + s
}

impl ImpulseResponse {
    pub fn zero(horizon: usize) -> Self {
        ImpulseResponse {
            horizon,
            table: vec![0.0; tri(0, horizon + 1)],
        }
    }

    /// Tabulates `f(s, t)`; rejects negative entries and nonzero diagonals.
    pub fn from_fn(horizon: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut table = Vec::with_capacity(tri(0, horizon + 1));
        for t in 0..=horizon {
            for s in 0..=t {
                let v = f(s, t);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(param("impulse response must be finite and nonnegative"));
                }
                if s == t && v != 0.0 {
                    return Err(param("impulse response must vanish on the diagonal"));
                }
                table.push(v);
            }
        }
        Ok(ImpulseResponse { horizon, table })
    }

    /// `S(s, t) = Σ_{u=s+1}^{t} increments[u-1]`, summed left to right.
    pub fn from_increments(increments: &[f64]) -> Result<Self> {
        if increments.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(param("increments must be finite and nonnegative"));
        }
        let horizon = increments.len();
        let mut table = vec![0.0; tri(0, horizon + 1)];
        for t in 1..=horizon {
            for s in 0..t {
                table[tri(s, t)] = table[tri(s, t - 1)] + increments[t - 1];
            }
        }
        Ok(ImpulseResponse { horizon, table })
    }

    pub fn value(&self, s: usize, t: usize) -> Option<f64> {
        (s <= t && t <= self.horizon).then(|| self.table[tri(s, t)])
    }

    /// `(s, t, S(s,t))` in row order of `t`, then `s`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.horizon).flat_map(move |t| (0..=t).map(move |s| (s, t, self.table[tri(s, t)])))
    }

    /// `(S1 ∗ S2)(s, t) = min_{s ≤ u ≤ t} { S1(s, u) + S2(u, t) }`.
    pub fn compose(&self, other: &ImpulseResponse) -> Result<ImpulseResponse> {
        if self.horizon != other.horizon {
            return Err(Error::Range {
                what: "compose",
                requested: other.horizon,
                available: self.horizon,
            });
        }
        let h = self.horizon;
        let mut table = vec![0.0; tri(0, h + 1)];
        for t in 0..=h {
            for s in 0..=t {
                table[tri(s, t)] = (s..=t)
                    .map(|u| self.table[tri(s, u)] + other.table[tri(u, t)])
                    .fold(f64::INFINITY, f64::min);
            }
        }
        Ok(ImpulseResponse { horizon: h, table })
    }

    /// Composition of a tandem of hops, left to right.
    pub fn compose_all(responses: &[ImpulseResponse]) -> Result<ImpulseResponse> {
        let (first, rest) = responses
            .split_first()
            .ok_or_else(|| param("nothing to compose"))?;
        rest.iter().try_fold(first.clone(), |acc, s| acc.compose(s))
    }
}

impl BivariateService for ImpulseResponse {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn service(&self, s: usize, t: usize) -> f64 {
        self.table[tri(s, t)]
    }
}

/// Linear-memory view of an increment-consistent response:
/// `S(s, t) = P(t) − P(s)` with `P` the running sum of slot increments.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementResponse {
    prefix: Vec<f64>,
}

impl IncrementResponse {
    pub fn new(increments: &[f64]) -> Result<Self> {
        if increments.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(param("increments must be finite and nonnegative"));
        }
        let mut prefix = Vec::with_capacity(increments.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &x in increments {
            acc += x;
            prefix.push(acc);
        }
        Ok(IncrementResponse { prefix })
    }
}

impl BivariateService for IncrementResponse {
    fn horizon(&self) -> usize {
        self.prefix.len() - 1
    }

    fn service(&self, s: usize, t: usize) -> f64 {
        self.prefix[t] - self.prefix[s]
    }
}

/// `(A ∗ S)(t) = min_{0 ≤ s ≤ t} { A(s) + S(s, t) }`.
pub fn convolve<S: BivariateService + ?Sized>(
    arrivals: &CumulativeProcess,
    service: &S,
    t: usize,
) -> Result<f64> {
    if t > service.horizon() {
        return Err(Error::Range {
            what: "convolve (impulse response)",
            requested: t,
            available: service.horizon(),
        });
    }
    match arrivals {
        CumulativeProcess::Saturated => Ok(service.service(0, t)),
        CumulativeProcess::Finite(a) => {
            if t >= a.len() {
                return Err(Error::Range {
                    what: "convolve (arrivals)",
                    requested: t,
                    available: a.len() - 1,
                });
            }
            Ok((0..=t)
                .map(|s| a[s] + service.service(s, t))
                .fold(f64::INFINITY, f64::min))
        }
    }
}

/// The whole output process `D(t) = (A ∗ S)(t)` for `t = 0..=horizon`.
pub fn convolve_process<S: BivariateService + ?Sized>(
    arrivals: &CumulativeProcess,
    service: &S,
) -> Result<Vec<f64>> {
    let h = match arrivals.horizon() {
        Some(a) => a.min(service.horizon()),
        None => service.horizon(),
    };
    (0..=h).map(|t| convolve(arrivals, service, t)).collect()
}

/// Deterministic impulse response of `link` under a centralized schedule.
///
/// `S(s, t) = C · |{u ∈ (max(s, s_min), t] : link scheduled in slot u}|`
/// where the causality offset `s_min` equals the zero-based link index:
/// links are numbered along the path, so hop `ℓ` cannot serve before
/// slot `ℓ + 1`.
pub fn centralized_impulse(
    schedule: &Schedule,
    link: usize,
    rate: f64,
    horizon: usize,
) -> Result<ImpulseResponse> {
    schedule.require_link(link)?;
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(param("rate must be finite and nonnegative"));
    }
    let offset = link;
    let mut served_by = vec![0.0; horizon + 1];
    for u in 1..=horizon {
        let hit = u > offset && schedule.links_in_slot(u as u64).contains(link);
        served_by[u] = served_by[u - 1] + if hit { rate } else { 0.0 };
    }
    ImpulseResponse::from_fn(horizon, |s, t| served_by[t] - served_by[s.max(offset).min(t)])
}
