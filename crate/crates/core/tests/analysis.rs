use nalgebra::DMatrix;
use proptest::prelude::*;
use transcap_core::analysis::laplace::csma_max_eig;
use transcap_core::analysis::{
    aloha_rate, bound_curve, csma_b_matrix, csma_laplace, eigen_solution, ln_binomial, log_time_grid,
    lower_bound_rate, max_real_eig, perron_max_eig, upper_bound_rate, LaplaceMethod, MacParams, RateFunction,
    Sign, ThresholdSetup,
};
use transcap_core::contention::{line_network, ContentionGraph};
use transcap_core::linalg::Matrix;
use transcap_core::mmtp::{centralized_model, csma_model, stationary};
use transcap_core::schedule::Schedule;

fn five_line_csma(nu: f64, mu: f64) -> transcap_core::mmtp::MacModel {
    csma_model(&line_network(5, 3).unwrap().1, nu, mu, 1.0).unwrap()
}

/// `π · exp(Bt) · 1` by RK4 with a fixed small step.
fn rk4_oracle(b: &Matrix, pi: &[f64], t: f64, h: f64) -> f64 {
    let n = b.rows();
    let steps = (t / h).ceil() as usize;
    let h = t / steps as f64;
    let mv = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| b[(i, j)] * v[j]).sum()).collect() };
    let mut v = vec![1.0; n];
    for _ in 0..steps {
        let k1 = mv(&v);
        let k2 = mv(&v.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect::<Vec<_>>());
        let k3 = mv(&v.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect::<Vec<_>>());
        let k4 = mv(&v.iter().zip(&k3).map(|(a, k)| a + h * k).collect::<Vec<_>>());
        for i in 0..n {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    pi.iter().zip(&v).map(|(p, x)| p * x).sum()
}

#[test]
fn two_state_max_eig_matches_quadratic() {
    for (nu, mu, tc) in [(0.1, 0.1, 0.1), (1.0, 0.3, 2.0), (0.05, 5.0, 10.0), (2.0, 2.0, 1e-3)] {
        let g = ContentionGraph::without_edges(1);
        let m = csma_model(&g, nu, mu, 1.0).unwrap();
        let b = csma_b_matrix(&m, 0, tc).unwrap();
        // λ² + (ν + μ + θC) λ + ν θC = 0
        let s = nu + mu + tc;
        let root = (-s + (s * s - 4.0 * nu * tc).sqrt()) / 2.0;
        let got = max_real_eig(&b).unwrap();
        assert!((got - root).abs() < 1e-12 * (1.0 + root.abs()), "ν={nu} μ={mu}: {got} vs {root}");
    }
}

#[test]
fn six_state_max_eig_matches_dense_solver() {
    let m = five_line_csma(0.1, 0.1);
    for tc in [0.1, 1.0, 10.0] {
        let b = csma_b_matrix(&m, 1, tc).unwrap();
        let n = b.rows();
        let dense = DMatrix::from_fn(n, n, |i, j| b[(i, j)]);
        let oracle = dense
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((max_real_eig(&b).unwrap() - oracle).abs() < 1e-9, "θC = {tc}");
        assert!((perron_max_eig(&b).unwrap() - oracle).abs() < 1e-9, "θC = {tc}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_match_dense_solver(entries in prop::collection::vec(-3.0f64..3.0, 25)) {
        let rows: Vec<Vec<f64>> = entries.chunks(5).map(<[f64]>::to_vec).collect();
        let a = Matrix::from_rows(&rows).unwrap();
        let mut ours: Vec<(f64, f64)> = transcap_core::analysis::eigen::eigenvalues(&a)
            .unwrap()
            .into_iter()
            .map(|z| (z.re, z.im))
            .collect();
        let mut oracle: Vec<(f64, f64)> = DMatrix::from_row_slice(5, 5, &entries)
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect();
        let key = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
        ours.sort_by(key);
        oracle.sort_by(key);
        for (x, y) in ours.iter().zip(&oracle) {
            prop_assert!((x.0 - y.0).abs() < 1e-6 && (x.1.abs() - y.1.abs()).abs() < 1e-6,
                "{:?} vs {:?}", ours, oracle);
        }
    }
}

#[test]
fn laplace_eigen_agrees_with_ode() {
    let m = five_line_csma(0.1, 0.1);
    let pi = stationary(&m).unwrap().probabilities;
    for theta in [0.1, 1.0, 10.0] {
        let b = csma_b_matrix(&m, 1, theta).unwrap();
        let lmax = max_real_eig(&b).unwrap();
        for t in [1.0, 10.0, 100.0] {
            let v = csma_laplace(&m, 1, theta, t).unwrap();
            assert_eq!(v.method, LaplaceMethod::Eigen);
            let oracle = rk4_oracle(&b, &pi, t, 1e-3);
            assert!((v.value - oracle).abs() < 1e-8, "θ={theta} t={t}: {} vs {oracle}", v.value);
            assert!(v.value <= (lmax * t).exp() + 1e-8);
        }
    }
}

#[test]
fn laplace_edge_cases() {
    let m = five_line_csma(0.1, 0.1);
    assert_eq!(csma_laplace(&m, 1, 1.0, 0.0).unwrap().value, 1.0);
    assert!((csma_laplace(&m, 1, 1e-12, 50.0).unwrap().value - 1.0).abs() < 1e-9);
    let sol = eigen_solution(&csma_b_matrix(&m, 3, 1.0).unwrap(), &stationary(&m).unwrap().probabilities)
        .unwrap()
        .unwrap();
    assert!((sol.weight_sum().re - 1.0).abs() < 1e-8);
    assert!(sol.weight_sum().im.abs() < 1e-8);
}

#[test]
fn rate_functions_satisfy_jensen_ordering() {
    let csma = RateFunction::csma(five_line_csma(0.1, 0.1), vec![0, 1, 2, 3]).unwrap();
    let aloha = RateFunction::aloha(vec![0.2 * 0.8f64.powi(2), 0.2 * 0.8f64.powi(3)], 1.0).unwrap();
    let sched = centralized_model(&Schedule::five_node_line(), 1.0).unwrap();
    let central = RateFunction::centralized(&sched, &[0, 1, 2, 3]).unwrap();
    for r in [&csma, &aloha, &central] {
        let mean = r.mean_rate();
        let mut prev_lower = f64::INFINITY;
        let mut prev_upper = f64::NEG_INFINITY;
        for i in 0..=30 {
            let theta = 10f64.powf(-4.0 + i as f64 * 0.2);
            let lo = r.lower(theta).unwrap();
            let hi = r.upper(theta).unwrap();
            assert!(lo <= mean + 1e-10, "{:?} θ={theta}", r.mac());
            assert!(hi >= mean - 1e-10, "{:?} θ={theta}", r.mac());
            assert!(lo <= prev_lower + 1e-10 && hi >= prev_upper - 1e-10);
            prev_lower = lo;
            prev_upper = hi;
        }
    }
}

#[test]
fn aloha_rate_matches_closed_form() {
    for &q in &[0.01, 0.128, 0.5, 0.99] {
        for &theta in &[1e-3, 0.1, 1.0, 5.0, 30.0] {
            let lo = aloha_rate(q, 1.0, theta, Sign::Minus).unwrap();
            let hi = aloha_rate(q, 1.0, theta, Sign::Plus).unwrap();
            let lo_direct = -(q * (-theta).exp() + 1.0 - q).ln() / theta;
            let hi_direct = (q * theta.exp() + 1.0 - q).ln() / theta;
            assert!((lo - lo_direct).abs() < 1e-10);
            assert!((hi - hi_direct).abs() < 1e-10);
        }
    }
}

#[test]
fn effective_capacity_limit_is_mean_rate() {
    let m = five_line_csma(0.1, 0.1);
    let pi = stationary(&m).unwrap();
    for link in 0..4 {
        let theta = 1e-6;
        let limit = csma_max_eig(&m, link, theta).unwrap() / -theta;
        assert!((limit - m.mean_rate(link, &pi).unwrap()).abs() < 1e-4);
    }
}

#[test]
fn ln_binomial_matches_exact_values() {
    let exact = |n: u64, k: u64| -> f64 { (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum() };
    for (n, k) in [(5, 2), (20, 10), (1001, 1), (1002, 2), (60, 30)] {
        assert!((ln_binomial(n, k) - exact(n, k)).abs() < 1e-9, "C({n},{k})");
    }
    assert_eq!(ln_binomial(7, 0), 0.0);
    // k = 2 hops: C(t + 1, 1) = t + 1.
    assert!((ln_binomial(1_000_001, 1) - 1_000_001f64.ln()).abs() < 1e-8);
}

#[test]
fn lower_bound_with_eps_one_uses_only_the_binomial() {
    let r = RateFunction::aloha(vec![0.25, 0.25], 1.0).unwrap();
    let t = 100;
    let b = lower_bound_rate(&r, t, 1.0).unwrap();
    let objective = r.lower(b.theta).unwrap() - (t as f64 + 1.0).ln() / (b.theta * t as f64);
    assert!((b.lambda - objective).abs() < 1e-12);
}

#[test]
fn bounds_are_ordered_and_monotone_in_eps() {
    let aloha = RateFunction::aloha(vec![0.25; 2], 1.0).unwrap();
    let csma = RateFunction::csma(five_line_csma(0.1, 0.1), vec![0, 1]).unwrap();
    for r in [&aloha, &csma] {
        for &t in &log_time_grid(100_000, 2) {
            let mut prev: Option<(f64, f64)> = None;
            for eps in [0.5, 0.1, 1e-2, 1e-3, 1e-6] {
                let lo = lower_bound_rate(r, t, eps).unwrap();
                let hi = upper_bound_rate(r, t, eps).unwrap();
                assert!(lo.lambda >= 0.0);
                assert!(lo.lambda <= hi.lambda + 1e-12, "t={t} ε={eps}");
                if let Some((pl, pu)) = prev {
                    assert!(lo.lambda <= pl + 1e-9 && hi.lambda >= pu - 1e-9, "t={t} ε={eps}");
                }
                prev = Some((lo.lambda, hi.lambda));
            }
        }
    }
}

#[test]
fn single_hop_bounds_converge_to_the_mean() {
    let q = 0.128;
    let r = RateFunction::aloha(vec![q], 1.0).unwrap();
    let curve = bound_curve(&r, &[1_000_000], 0.1).unwrap();
    let p = curve.points[0];
    assert!((p.lower.lambda - q).abs() < 1e-3);
    assert!((p.upper.lambda - q).abs() < 1e-3);
    // Distance to the mean shrinks with t.
    let early = bound_curve(&r, &[1_000], 0.1).unwrap().points[0];
    assert!(early.lower.lambda < p.lower.lambda && early.upper.lambda > p.upper.lambda);
}

#[test]
fn infeasible_lower_bound_is_clamped() {
    let r = RateFunction::aloha(vec![0.05; 3], 1.0).unwrap();
    let b = lower_bound_rate(&r, 2, 1e-3).unwrap();
    assert_eq!(b.lambda, 0.0);
    assert!(!b.feasible);
    assert!(lower_bound_rate(&r, 0, 1e-3).is_err());
    assert!(lower_bound_rate(&r, 10, 0.0).is_err());
}

fn linear_scan(setup: &ThresholdSetup, limit: u64) -> Option<u64> {
    (1..=limit).find(|&t| setup.crossed(t).unwrap())
}

#[test]
fn threshold_matches_linear_scan() {
    for k in [2usize, 3] {
        for r_sh in [0.05, 0.2] {
            let setup = ThresholdSetup::new(k, MacParams::Aloha { p: 1.0 / k as f64 }, r_sh, 1.0, 1e-3).unwrap();
            let t = setup.threshold().unwrap().expect("crossing exists");
            assert_eq!(linear_scan(&setup, t + 10), Some(t), "k={k} r_sh={r_sh}");
        }
    }
}

#[test]
fn threshold_none_when_direct_mean_dominates() {
    // Direct link mean 0.45 against a two-hop bottleneck mean of 0.25.
    let single = RateFunction::aloha(vec![0.5], 0.9).unwrap();
    let multi = RateFunction::aloha(vec![0.25; 2], 1.0).unwrap();
    let setup = ThresholdSetup::custom(single, multi, 1e-3).unwrap().with_cap(1 << 20);
    assert_eq!(setup.threshold().unwrap(), None);
    // A crossing beyond the cap is also reported as none.
    let capped = ThresholdSetup::new(2, MacParams::Aloha { p: 0.5 }, 0.5, 1.0, 1e-3).unwrap();
    let t = capped.threshold().unwrap().unwrap();
    assert_eq!(capped.with_cap(t - 1).threshold().unwrap(), None);
    assert!(ThresholdSetup::new(2, MacParams::Aloha { p: 0.5 }, 1.0, 1.0, 1e-3).is_err());
}

#[test]
fn csma_threshold_is_finite_for_slow_direct_links() {
    let t = ThresholdSetup::new(2, MacParams::Csma { nu: 0.1, mu: 0.1 }, 0.05, 1.0, 1e-3)
        .unwrap()
        .with_cap(1 << 24)
        .threshold()
        .unwrap();
    assert!(t.is_some());
}
