//! Effective-rate functions `r(−θ)` (from Laplace transforms) and `r(θ)`
//! (from moment generating functions).

use alloc::format;
use alloc::vec::Vec;

use super::laplace::csma_max_eig;
use crate::error::{param, Error, Result};
use crate::mmtp::{stationary, MacKind, MacModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    /// `r(−θ)`, used by lower bounds.
    Minus,
    /// `r(θ)`, used by upper bounds.
    Plus,
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(param(format!("θ must be positive and finite, got {theta}")))
    }
}

/// Effective rate of an i.i.d. Bernoulli(q) slot process of rate `c`.
///
/// `r(−θ) = −log(q e^{−θC} + 1 − q)/θ`, `r(θ) = log(q e^{θC} + 1 − q)/θ`.
pub fn aloha_rate(q: f64, c: f64, theta: f64, sign: Sign) -> Result<f64> {
    check_theta(theta)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(param(format!("success probability must lie in [0,1], got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if q == 1.0 {
        return Ok(c);
    }
    let x = theta * c;
    let log_mgf = match sign {
        Sign::Minus => -libm::log1p(q * libm::expm1(-x)),
        Sign::Plus if x > 1.0 => x + libm::log(q + (1.0 - q) * libm::exp(-x)),
        Sign::Plus => libm::log1p(q * libm::expm1(x)),
    };
    Ok(log_mgf / theta)
}

#[derive(Clone, Debug)]
enum Hops {
    Aloha { q: Vec<f64>, rate: f64 },
    Csma { model: MacModel, links: Vec<usize>, means: Vec<f64> },
    /// Deterministic periodic service: the effective rate is the mean for
    /// every θ.
    Centralized { means: Vec<f64> },
}

/// Per-flow rate function over `k` hops.
#[derive(Clone, Debug)]
pub struct RateFunction {
    hops: Hops,
}

impl RateFunction {
    /// Independent Aloha hops with per-hop success probabilities.
    pub fn aloha(q_per_hop: Vec<f64>, rate: f64) -> Result<Self> {
        if q_per_hop.is_empty() {
            return Err(param("a flow needs at least one hop"));
        }
        if let Some(q) = q_per_hop.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(param(format!("success probability must lie in [0,1], got {q}")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(param(format!("transmission rate must be positive, got {rate}")));
        }
        Ok(RateFunction {
            hops: Hops::Aloha { q: q_per_hop, rate },
        })
    }

    /// CSMA hops sharing one modulating chain; Hölder with exponent `k`.
    pub fn csma(model: MacModel, hop_links: Vec<usize>) -> Result<Self> {
        if model.kind() != MacKind::Csma {
            return Err(Error::Model("CSMA rate function needs a CSMA model".into()));
        }
        if hop_links.is_empty() {
            return Err(param("a flow needs at least one hop"));
        }
        let pi = stationary(&model)?;
        let means = hop_links
            .iter()
            .map(|&l| model.mean_rate(l, &pi))
            .collect::<Result<Vec<_>>>()?;
        Ok(RateFunction {
            hops: Hops::Csma {
                model,
                links: hop_links,
                means,
            },
        })
    }

    pub fn centralized(model: &MacModel, hop_links: &[usize]) -> Result<Self> {
        if model.kind() != MacKind::Centralized {
            return Err(Error::Model("centralized rate function needs a schedule model".into()));
        }
        if hop_links.is_empty() {
            return Err(param("a flow needs at least one hop"));
        }
        let pi = stationary(model)?;
        let means = hop_links
            .iter()
            .map(|&l| model.mean_rate(l, &pi))
            .collect::<Result<Vec<_>>>()?;
        Ok(RateFunction {
            hops: Hops::Centralized { means },
        })
    }

    pub fn hops(&self) -> usize {
        match &self.hops {
            Hops::Aloha { q, .. } => q.len(),
            Hops::Csma { links, .. } => links.len(),
            Hops::Centralized { means } => means.len(),
        }
    }

    pub fn mac(&self) -> MacKind {
        match &self.hops {
            Hops::Aloha { .. } => MacKind::Aloha,
            Hops::Csma { .. } => MacKind::Csma,
            Hops::Centralized { .. } => MacKind::Centralized,
        }
    }

    pub fn hop_mean_rates(&self) -> Vec<f64> {
        match &self.hops {
            Hops::Aloha { q, rate } => q.iter().map(|q| q * rate).collect(),
            Hops::Csma { means, .. } | Hops::Centralized { means } => means.clone(),
        }
    }

    /// Bottleneck mean rate, the small-θ limit of [`RateFunction::lower`].
    pub fn mean_rate(&self) -> f64 {
        self.hop_mean_rates().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Per-hop `r_j(−θ)`; for CSMA evaluated at `kθ`.
    pub fn hop_lower(&self, theta: f64) -> Result<Vec<f64>> {
        self.per_hop(theta, Sign::Minus)
    }

    pub fn hop_upper(&self, theta: f64) -> Result<Vec<f64>> {
        self.per_hop(theta, Sign::Plus)
    }

    fn per_hop(&self, theta: f64, sign: Sign) -> Result<Vec<f64>> {
        check_theta(theta)?;
        match &self.hops {
            Hops::Aloha { q, rate } => q.iter().map(|&q| aloha_rate(q, *rate, theta, sign)).collect(),
            Hops::Csma { model, links, .. } => {
                let kt = links.len() as f64 * theta;
                links
                    .iter()
                    .map(|&l| match sign {
                        Sign::Minus => csma_max_eig(model, l, kt).map(|e| e / -kt),
                        Sign::Plus => csma_max_eig(model, l, -kt).map(|e| e / kt),
                    })
                    .collect()
            }
            Hops::Centralized { means } => Ok(means.clone()),
        }
    }

    /// `r(−θ) = min_j r_j(−θ)` (CSMA: `min_j r_j(−kθ)`).
    pub fn lower(&self, theta: f64) -> Result<f64> {
        Ok(self.hop_lower(theta)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// `r(θ) = max_j r_j(θ)` (CSMA: `max_j r_j(kθ)`).
    pub fn upper(&self, theta: f64) -> Result<f64> {
        Ok(self.hop_upper(theta)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }
}
