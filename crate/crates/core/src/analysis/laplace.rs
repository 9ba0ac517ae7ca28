//! Laplace transform of the CSMA impulse response.
//!
//! With the chain started in steady state, `L_t = E[exp(−θ S_j(t))]` is
//! `π · v(t)` where `v' = B v`, `v(0) = 1` and `B = Q − θ C I_j`. The
//! solution is a finite mixture of exponentials over the spectrum of `B`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::eigen::{eigen, max_real_eig};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mmtp::{stationary, MacKind, MacModel};
#[allow(unused_imports)]
use num_traits::Float;

/// `Q − θ_eff · C · I_j`. Negative `θ_eff` gives the MGF matrix.
pub fn csma_b_matrix(m: &MacModel, link: usize, theta_eff: f64) -> Result<Matrix> {
    let q = match (m.kind(), m.generator()) {
        (MacKind::Csma, Some(q)) => q,
        _ => return Err(Error::Model(format!("{} model has no generator", m.kind().name()))),
    };
    let mut b = q.clone();
    for &i in m.favorable_states(link)? {
        b[(i, i)] -= theta_eff * m.rate();
    }
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplaceMethod {
    Eigen,
    /// The eigenbasis was missing or ill-conditioned; RK4 was used instead.
    Ode,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceValue {
    pub value: f64,
    pub method: LaplaceMethod,
}

/// `L_t = Σ_i weights_i · exp(eigenvalues_i · t)`.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub eigenvalues: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    pub max_real: f64,
}

impl EigenSolution {
    pub fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| (w * (l * t).exp()).re)
            .sum()
    }

    pub fn weight_sum(&self) -> Complex64 {
        self.weights.iter().sum()
    }
}

// Above this the eigenvector basis is treated as numerically defective.
const MAX_WEIGHT: f64 = 1e6;
const MIN_PIVOT: f64 = 1e-10;

/// Spectral form of `L_t`, or `None` when `B` is (numerically) defective.
pub fn eigen_solution(b: &Matrix, pi: &[f64]) -> Result<Option<EigenSolution>> {
    let n = b.rows();
    if pi.len() != n {
        return Err(Error::Range {
            what: "stationary vector length",
            requested: pi.len(),
            available: n,
        });
    }
    let decomposition = match eigen(b) {
        Ok(d) => d,
        Err(_) => return Ok(None),
    };
    let mut x = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, v) in decomposition.vectors.iter().enumerate() {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Ok(None);
        }
        for r in 0..n {
            x[r][i] = v[r] / norm;
        }
    }
    let Some(c) = complex_solve(x.clone(), vec![Complex64::new(1.0, 0.0); n]) else {
        return Ok(None);
    };
    let weights: Vec<Complex64> = (0..n)
        .map(|i| c[i] * (0..n).map(|r| x[r][i] * pi[r]).sum::<Complex64>())
        .collect();
    let total: Complex64 = weights.iter().sum();
    if weights.iter().any(|w| !(w.norm() < MAX_WEIGHT)) || (total - 1.0).norm() > 1e-8 {
        return Ok(None);
    }
    let max_real = decomposition
        .values
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Some(EigenSolution {
        eigenvalues: decomposition.values,
        weights,
        max_real,
    }))
}

fn complex_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if best < MIN_PIVOT {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != Complex64::new(0.0, 0.0) {
                for c in col..n {
                    let upper = a[col][c];
                    a[r][c] -= f * upper;
                }
                let upper = b[col];
                b[r] -= f * upper;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// `π · v(t)` by classical fourth-order Runge–Kutta with `‖B‖∞ h ≤ 0.1`.
pub fn rk4_laplace(b: &Matrix, pi: &[f64], t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let norm = b.norm_inf();
    let h_max = if norm > 0.0 { (0.1 / norm).min(0.01) } else { 0.01 };
    let steps = (t / h_max).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let n = b.rows();
    let mut v = vec![1.0; n];
    let axpy = |v: &[f64], k: &[f64], s: f64| -> Vec<f64> { v.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..steps {
        let k1 = b.mul_vec(&v);
        let k2 = b.mul_vec(&axpy(&v, &k1, h / 2.0));
        let k3 = b.mul_vec(&axpy(&v, &k2, h / 2.0));
        let k4 = b.mul_vec(&axpy(&v, &k3, h));
        for i in 0..n {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    pi.iter().zip(&v).map(|(p, x)| p * x).sum()
}

/// `E[exp(−θ S_link(0,t))]` for a CSMA model started in steady state.
pub fn csma_laplace(m: &MacModel, link: usize, theta: f64, t: f64) -> Result<LaplaceValue> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("time must be finite and nonnegative, got {t}")));
    }
    let b = csma_b_matrix(m, link, theta)?;
    if t == 0.0 {
        return Ok(LaplaceValue {
            value: 1.0,
            method: LaplaceMethod::Eigen,
        });
    }
    let pi = stationary(m)?.probabilities;
    match eigen_solution(&b, &pi)? {
        Some(sol) => Ok(LaplaceValue {
            value: sol.value(t),
            method: LaplaceMethod::Eigen,
        }),
        None => Ok(LaplaceValue {
            value: rk4_laplace(&b, &pi, t),
            method: LaplaceMethod::Ode,
        }),
    }
}

/// Dominant eigenvalue of `B_link(θ_eff)`.
pub fn csma_max_eig(m: &MacModel, link: usize, theta_eff: f64) -> Result<f64> {
    max_real_eig(&csma_b_matrix(m, link, theta_eff)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contention::{line_network, ContentionGraph};
    use crate::mmtp::{aloha_model, csma_model};

    fn five_line(nu: f64, mu: f64) -> MacModel {
        csma_model(&line_network(5, 3).unwrap().1, nu, mu, 1.0).unwrap()
    }

    #[test]
    fn b_matrix_touches_only_favorable_diagonal() {
        let m = five_line(0.1, 0.1);
        let q = m.generator().unwrap().clone();
        let b = csma_b_matrix(&m, 1, 0.5).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if i == 2 && j == 2 { q[(i, j)] - 0.5 } else { q[(i, j)] };
                assert_eq!(b[(i, j)], expected);
            }
        }
        assert_eq!(csma_b_matrix(&m, 1, 0.0).unwrap(), q);
        let b4 = csma_b_matrix(&m, 3, 0.5).unwrap();
        let changed: Vec<usize> = (0..6).filter(|&i| b4[(i, i)] != q[(i, i)]).collect();
        assert_eq!(changed, vec![4, 5]);
    }

    #[test]
    fn b_matrix_requires_csma() {
        let g = ContentionGraph::without_edges(1);
        let m = aloha_model(&g, 0, 0.5, 1.0).unwrap();
        assert!(matches!(csma_b_matrix(&m, 0, 1.0), Err(Error::Model(_))));
    }

    #[test]
    fn laplace_at_zero_time_and_tilt() {
        let m = five_line(0.1, 0.1);
        assert_eq!(csma_laplace(&m, 1, 1.0, 0.0).unwrap().value, 1.0);
        let v = csma_laplace(&m, 1, 0.0, 7.0).unwrap();
        assert!((v.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weights_sum_to_one() {
        let m = five_line(0.1, 0.1);
        let pi = stationary(&m).unwrap().probabilities;
        let b = csma_b_matrix(&m, 1, 1.0).unwrap();
        let sol = eigen_solution(&b, &pi).unwrap().unwrap();
        assert!((sol.weight_sum() - 1.0).norm() < 1e-8);
    }

    #[test]
    fn eigen_and_rk4_agree_on_single_link() {
        let m = csma_model(&ContentionGraph::without_edges(1), 0.4, 0.6, 1.0).unwrap();
        let v = csma_laplace(&m, 0, 0.7, 5.0).unwrap();
        assert_eq!(v.method, LaplaceMethod::Eigen);
        let pi = stationary(&m).unwrap().probabilities;
        let b = csma_b_matrix(&m, 0, 0.7).unwrap();
        assert!((v.value - rk4_laplace(&b, &pi, 5.0)).abs() < 1e-9);
    }
}
