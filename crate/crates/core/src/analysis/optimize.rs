//! One-dimensional optimization over a log-scaled θ range.

use crate::error::Result;

pub const THETA_MIN: f64 = 1e-4;
pub const THETA_MAX: f64 = 1e2;
const GRID_POINTS: usize = 64;
const REL_TOL: f64 = 1e-6;
// 1/φ
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    pub theta: f64,
    pub value: f64,
}

/// Maximize `f` on `[lo, hi]`: a log grid locates the best cell, then golden
/// section on `log θ` refines it.
pub fn maximize<F>(mut f: F, lo: f64, hi: f64) -> Result<Optimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (a, b) = (libm::log(lo), libm::log(hi));
    let node = |i: usize| libm::exp(a + (b - a) * i as f64 / (GRID_POINTS - 1) as f64);
    let mut best = Optimum {
        theta: lo,
        value: f64::NEG_INFINITY,
    };
    let mut best_i = 0;
    for i in 0..GRID_POINTS {
        let theta = node(i);
        let v = f(theta)?;
        if v > best.value {
            best = Optimum { theta, value: v };
            best_i = i;
        }
    }

    let mut x0 = libm::log(node(best_i.saturating_sub(1)));
    let mut x3 = libm::log(node((best_i + 1).min(GRID_POINTS - 1)));
    let mut x1 = x3 - INV_PHI * (x3 - x0);
    let mut x2 = x0 + INV_PHI * (x3 - x0);
    let mut f1 = f(libm::exp(x1))?;
    let mut f2 = f(libm::exp(x2))?;
    while x3 - x0 > REL_TOL {
        if f1 >= f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - INV_PHI * (x3 - x0);
            f1 = f(libm::exp(x1))?;
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + INV_PHI * (x3 - x0);
            f2 = f(libm::exp(x2))?;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.value {
            best = Optimum {
                theta: libm::exp(x),
                value: v,
            };
        }
    }
    Ok(best)
}

pub fn minimize<F>(mut f: F, lo: f64, hi: f64) -> Result<Optimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let o = maximize(|x| f(x).map(|v| -v), lo, hi)?;
    Ok(Optimum {
        theta: o.theta,
        value: -o.value,
    })
}
