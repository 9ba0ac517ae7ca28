use proptest::prelude::*;
use transcap_core::contention::{line_network, random_network, LinkSet, Point, Topology};
use transcap_core::minplus::{centralized_impulse, convolve_process, CumulativeProcess, ImpulseResponse};
use transcap_core::schedule::Schedule;
use transcap_core::sim::{
    capacity_search, empty_fraction, run, tightened_factor_report, ArrivalModel, CalculusConstants, CapacitySearch,
    EmptyPolicy, MacConfig, Recording, SimConfig, SimNetwork, SimTrace,
};

fn full(mac: MacConfig, arrivals: ArrivalModel, horizon: u64, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::new(mac, arrivals, horizon, seed);
    cfg.recording = Recording::Full;
    cfg
}

fn check_conservation(trace: &SimTrace) {
    for i in 1..trace.times.len() {
        assert_eq!(trace.times[i], trace.times[i - 1] + 1);
        for v in 0..trace.num_nodes {
            let change = trace.backlog[i][v] as i64 - trace.backlog[i - 1][v] as i64;
            assert_eq!(change, trace.arrivals[i][v] as i64 - trace.departures[i][v] as i64, "t={} node={v}", trace.times[i]);
        }
        for (now, before) in trace.delivered[i].iter().zip(&trace.delivered[i - 1]) {
            assert!(now >= before);
        }
    }
}

fn arb_mac() -> impl Strategy<Value = MacConfig> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|p| MacConfig::Aloha { p }),
        (0.05f64..2.0, 0.05f64..2.0).prop_map(|(nu, mu)| MacConfig::Csma { nu, mu }),
    ]
}

fn arb_arrivals() -> impl Strategy<Value = ArrivalModel> {
    prop_oneof![
        (0.0f64..1.5).prop_map(|rate| ArrivalModel::Deterministic { rate }),
        (0.0f64..1.0).prop_map(|rate| ArrivalModel::Bernoulli { rate }),
        Just(ArrivalModel::Saturated),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn packets_are_conserved_on_random_networks(
        n in 2usize..9,
        topo_seed in 0u64..1000,
        seed in any::<u64>(),
        mac in arb_mac(),
        arrivals in arb_arrivals(),
        skip in any::<bool>(),
        rate in prop_oneof![Just(1.0), 0.3f64..2.5],
    ) {
        let rn = random_network(n, topo_seed).unwrap();
        let net = SimNetwork::new(&rn.topology, &rn.contention).unwrap();
        let mut cfg = full(mac, arrivals, 300, seed);
        cfg.rate = rate;
        if skip {
            cfg.empty_policy = EmptyPolicy::Skip;
        }
        let trace = run(&net, &cfg).unwrap();
        check_conservation(&trace);
        prop_assert_eq!(&trace, &run(&net, &cfg).unwrap());
    }
}

#[test]
fn centralized_conservation_and_relay_timing() {
    let net = SimNetwork::line(5, 3).unwrap();
    let cfg = full(
        MacConfig::Centralized { schedule: Schedule::five_node_line() },
        ArrivalModel::Deterministic { rate: 0.3 },
        500,
        0,
    );
    check_conservation(&run(&net, &cfg).unwrap());
}

#[test]
fn single_packet_crosses_the_line_at_slot_four() {
    let net = SimNetwork::line(5, 3).unwrap();
    let schedule = Schedule::five_node_line();
    let cfg = full(
        MacConfig::Centralized { schedule: schedule.clone() },
        ArrivalModel::Explicit { slots: vec![1] },
        12,
        0,
    );
    let trace = run(&net, &cfg).unwrap();
    let d: Vec<u64> = (0..=12).map(|t| trace.delivered_at(0, t).unwrap()).collect();
    assert_eq!(d, vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1]);

    // Same departure time from the composed service curve.
    let hops: Vec<_> = (0..4).map(|l| centralized_impulse(&schedule, l, 1.0, 12).unwrap()).collect();
    let e2e = ImpulseResponse::compose_all(&hops).unwrap();
    let mut per_slot = vec![0.0; 12];
    per_slot[0] = 1.0;
    let a = CumulativeProcess::from_arrivals(&per_slot).unwrap();
    let out = convolve_process(&a, &e2e).unwrap();
    let first = out.iter().position(|&x| x >= 1.0).unwrap();
    assert_eq!(first, 4);
}

#[test]
fn runs_are_deterministic_and_seed_sensitive() {
    let rn = random_network(10, 7).unwrap();
    let net = SimNetwork::new(&rn.topology, &rn.contention).unwrap();
    for mac in [MacConfig::Aloha { p: 0.2 }, MacConfig::Csma { nu: 0.1, mu: 0.1 }] {
        let cfg = SimConfig::new(mac, ArrivalModel::Bernoulli { rate: 0.05 }, 10_000, 3);
        let a = run(&net, &cfg).unwrap();
        assert_eq!(a, run(&net, &cfg).unwrap());
        let other = SimConfig { seed: 4, ..cfg };
        assert_ne!(a, run(&net, &other).unwrap());
    }
}

fn single_link() -> SimNetwork {
    SimNetwork::line(2, 1).unwrap()
}

#[test]
fn saturated_single_link_aloha_delivers_at_rate_p() {
    let t = 100_000u64;
    let cfg = SimConfig::new(MacConfig::Aloha { p: 0.3 }, ArrivalModel::Saturated, t, 11);
    let trace = run(&single_link(), &cfg).unwrap();
    let rate = trace.delivered_at(0, t).unwrap() as f64 / t as f64;
    let se = (0.3f64 * 0.7 / t as f64).sqrt();
    assert!((rate - 0.3).abs() < 3.0 * se, "{rate}");
    assert_eq!(trace.final_nonempty_fraction(), 1.0);
}

#[test]
fn saturated_single_link_csma_is_busy_half_the_time() {
    let t = 100_000u64;
    let cfg = full(MacConfig::Csma { nu: 1.0, mu: 1.0 }, ArrivalModel::Saturated, t, 5);
    let trace = run(&single_link(), &cfg).unwrap();
    let busy = trace.state_occupancy.get(&vec![0]).copied().unwrap_or(0.0);
    let idle = trace.state_occupancy.get(&Vec::new()).copied().unwrap_or(0.0);
    assert!((busy + idle - t as f64).abs() < 1e-6);
    assert!((busy / t as f64 - 0.5).abs() < 0.01, "{}", busy / t as f64);
    let rate = trace.delivered_at(0, t).unwrap() as f64 / t as f64;
    assert!((rate - 0.5).abs() < 0.01, "{rate}");
}

#[test]
fn aloha_success_frequency_matches_degree_formula() {
    // Every node of the 5-node line is a saturated single-hop source, so the
    // tagged link always competes with all its neighbors.
    let (line, g) = line_network(5, 3).unwrap();
    let nodes: Vec<Point> = line.nodes().to_vec();
    let pairs = vec![(0, 1), (1, 2), (2, 3), (3, 4)];
    let routes: Vec<Vec<usize>> = pairs.iter().map(|&(s, d)| vec![s, d]).collect();
    let topo = Topology::from_node_routes(nodes, pairs, &routes, Some(1.0)).unwrap();
    let net = SimNetwork::new(&topo, &g).unwrap();
    let (p, t) = (0.2, 1_000_000u64);
    let trace = run(&net, &SimConfig::new(MacConfig::Aloha { p }, ArrivalModel::Saturated, t, 9)).unwrap();
    for link in 0..4 {
        let q = p * (1.0 - p).powi(g.degree(link) as i32);
        let freq = trace.delivered_at(link, t).unwrap() as f64 / t as f64;
        let se = (q * (1.0 - q) / t as f64).sqrt();
        assert!((freq - q).abs() < 3.0 * se, "link {link}: {freq} vs {q}");
    }
}

#[test]
fn nonempty_fraction_replays_from_the_trace() {
    let net = SimNetwork::line(5, 3).unwrap();
    let t = 100_000u64;
    let cfg = full(MacConfig::Aloha { p: 0.2 }, ArrivalModel::Deterministic { rate: 0.08 }, t, 2);
    let trace = run(&net, &cfg).unwrap();
    let tx = net.transmitters();
    let mut nonempty = 0u64;
    let mut samples = 0u64;
    let mut replay = Vec::new();
    for i in 1..trace.times.len() {
        for &v in tx {
            samples += 1;
            nonempty += u64::from(trace.backlog[i][v] > 0);
        }
        replay.push((trace.times[i], nonempty as f64 / samples as f64));
    }
    for (ti, f) in empty_fraction(&trace) {
        let (_, oracle) = replay[ti as usize - 1];
        assert!((f - oracle).abs() < 1e-15, "T={ti}");
    }
    assert_eq!(empty_fraction(&trace).last().unwrap().0, t);
}

#[test]
fn empty_fraction_extremes() {
    let net = SimNetwork::line(5, 3).unwrap();
    let idle = run(&net, &SimConfig::new(MacConfig::Aloha { p: 0.2 }, ArrivalModel::Deterministic { rate: 0.0 }, 1000, 1)).unwrap();
    assert!(empty_fraction(&idle).iter().all(|&(_, f)| f == 0.0));

    let rn = random_network(8, 3).unwrap();
    let pairs = rn.topology.sd_pairs().to_vec();
    let routes: Vec<Vec<usize>> = pairs.iter().map(|&(s, d)| vec![s, d]).collect();
    let direct = Topology::from_node_routes(rn.topology.nodes().to_vec(), pairs, &routes, Some(rn.range)).unwrap();
    let g = direct.protocol_contention(Default::default()).unwrap();
    let net = SimNetwork::new(&direct, &g).unwrap();
    for mac in [MacConfig::Aloha { p: 0.3 }, MacConfig::Csma { nu: 0.5, mu: 0.5 }] {
        let tr = run(&net, &SimConfig::new(mac, ArrivalModel::Saturated, 1000, 1)).unwrap();
        assert!(empty_fraction(&tr).iter().all(|&(_, f)| f == 1.0));
    }
}

#[test]
fn dedicated_link_capacity_is_the_link_rate() {
    let schedule = Schedule::periodic(vec![LinkSet::singleton(0)]).unwrap();
    let search = CapacitySearch::new(MacConfig::Centralized { schedule }, 10_000, 100, 0);
    let est = capacity_search(&single_link(), &search).unwrap();
    assert_eq!(est.lambda, 1.0);
    assert_eq!(est.infeasible_above, None);
}

#[test]
fn capacity_search_brackets_a_threshold() {
    let net = SimNetwork::line(3, 2).unwrap();
    let search = CapacitySearch::new(MacConfig::Aloha { p: 0.5 }, 20_000, 200, 1);
    let est = capacity_search(&net, &search).unwrap();
    let hi = est.infeasible_above.unwrap();
    assert!(est.lambda < hi && hi - est.lambda <= 1.0 / 4096.0 + 1e-12);
    assert!(search.feasible(&net, est.lambda).unwrap());
    assert!(!search.feasible(&net, hi).unwrap());
    // Two links in one collision domain: each succeeds w.p. 1/4.
    assert!(est.lambda > 0.2 && est.lambda < 0.27, "{}", est.lambda);
}

#[test]
fn tightened_report_from_a_trace() {
    let net = SimNetwork::line(5, 3).unwrap();
    let trace = run(&net, &SimConfig::new(MacConfig::Aloha { p: 0.2 }, ArrivalModel::Deterministic { rate: 0.05 }, 10_000, 1)).unwrap();
    let k = CalculusConstants { h: 1.0, x: 1.0, l: 1.0, c: 1.0 };
    let r = tightened_factor_report(&trace, k).unwrap();
    assert_eq!(r.nodes, 5);
    assert!(r.nonempty_fraction > 0.0 && r.nonempty_fraction < 1.0);
    assert!(r.upper_tightened < r.upper_untightened);
    assert!(r.lower_tightened.unwrap() > r.lower_untightened);
}

#[test]
fn rejects_unknown_schedule_links() {
    let schedule = Schedule::periodic(vec![LinkSet::singleton(3)]).unwrap();
    let cfg = SimConfig::new(MacConfig::Centralized { schedule }, ArrivalModel::Saturated, 10, 0);
    assert!(run(&single_link(), &cfg).is_err());
}
