//! Topologies, contention graphs and the state space of the idealized CSMA
//! chain.
//!
//! Links are directed node pairs. A [`ContentionGraph`] has one vertex per
//! link and an edge between two links whenever they cannot transmit
//! successfully at the same time.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Default cap on the number of independent sets enumerated.
pub const DEFAULT_MAX_STATES: usize = 20_000;

/// A sorted set of link indices.
///
/// Ordered by cardinality first and lexicographically second, which is the
/// state order of every Markov chain built from independent sets.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LinkSet(Vec<usize>);

impl LinkSet {
    pub fn empty() -> Self {
        LinkSet(Vec::new())
    }

    pub fn new(mut links: Vec<usize>) -> Self {
        links.sort_unstable();
        links.dedup();
        LinkSet(links)
    }

    pub fn singleton(link: usize) -> Self {
        LinkSet(vec![link])
    }

    pub fn contains(&self, link: usize) -> bool {
        self.0.binary_search(&link).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn links(&self) -> &[usize] {
        &self.0
    }

    pub fn with(&self, link: usize) -> LinkSet {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&link) {
            v.insert(pos, link);
        }
        LinkSet(v)
    }

    pub fn without(&self, link: usize) -> LinkSet {
        LinkSet(self.0.iter().copied().filter(|&l| l != link).collect())
    }
}

impl Ord for LinkSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for LinkSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for LinkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for LinkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Undirected conflict graph over links.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContentionGraph {
    adjacency: Vec<Vec<usize>>,
}

impl ContentionGraph {
    pub fn without_edges(links: usize) -> Self {
        ContentionGraph {
            adjacency: vec![Vec::new(); links],
        }
    }

    /// Every pair of distinct links conflicts.
    pub fn complete(links: usize) -> Self {
        ContentionGraph {
            adjacency: (0..links)
                .map(|i| (0..links).filter(|&j| j != i).collect())
                .collect(),
        }
    }

    pub fn from_edges(links: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = ContentionGraph::without_edges(links);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.adjacency.len();
        if a >= n || b >= n {
            return Err(Error::Model(format!("edge ({a},{b}) outside {n} links")));
        }
        if a == b {
            return Err(Error::Model(format!("self-loop on link {a}")));
        }
        for (x, y) in [(a, b), (b, a)] {
            if let Err(pos) = self.adjacency[x].binary_search(&y) {
                self.adjacency[x].insert(pos, y);
            }
        }
        Ok(())
    }

    pub fn num_links(&self) -> usize {
        self.adjacency.len()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|row| row.binary_search(&b).is_ok())
    }

    pub fn neighbors(&self, link: usize) -> &[usize] {
        &self.adjacency[link]
    }

    pub fn degree(&self, link: usize) -> usize {
        self.adjacency[link].len()
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_independent(&self, set: &LinkSet) -> bool {
        let l = set.links();
        l.iter()
            .enumerate()
            .all(|(i, &a)| l[i + 1..].iter().all(|&b| !self.are_adjacent(a, b)))
    }
}

/// All independent sets of `g` (the empty set included), ordered by size and
/// then lexicographically.
///
/// Fails with [`Error::Capacity`] as soon as more than `max_states` sets are
/// found.
pub fn independent_sets(g: &ContentionGraph, max_states: usize) -> Result<Vec<LinkSet>> {
    let n = g.num_links();
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut blocked = vec![0u32; n];
    extend_independent(g, 0, &mut current, &mut blocked, &mut out, max_states)?;
    out.sort();
    Ok(out)
}

fn extend_independent(
    g: &ContentionGraph,
    next: usize,
    current: &mut Vec<usize>,
    blocked: &mut [u32],
    out: &mut Vec<LinkSet>,
    max_states: usize,
) -> Result<()> {
    if out.len() >= max_states {
        return Err(Error::Capacity {
            limit: max_states,
            reached: out.len() + 1,
        });
    }
    out.push(LinkSet(current.clone()));
    for link in next..g.num_links() {
        if blocked[link] > 0 {
            continue;
        }
        current.push(link);
        for &nb in g.neighbors(link) {
            blocked[nb] += 1;
        }
        let r = extend_independent(g, link + 1, current, blocked, out, max_states);
        for &nb in g.neighbors(link) {
            blocked[nb] -= 1;
        }
        current.pop();
        r?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub from: usize,
    pub to: usize,
}

/// Nodes, directed links, source–destination pairs and one route per pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    nodes: Vec<Point>,
    links: Vec<Link>,
    sd_pairs: Vec<(usize, usize)>,
    /// Per pair, the ordered link indices of its route.
    routes: Vec<Vec<usize>>,
    range: Option<f64>,
}

impl Topology {
    /// Assembles a topology from explicit routes given as node sequences.
    ///
    /// Links are the distinct hops of all routes, sorted by `(from, to)`.
    pub fn from_node_routes(
        nodes: Vec<Point>,
        sd_pairs: Vec<(usize, usize)>,
        node_routes: &[Vec<usize>],
        range: Option<f64>,
    ) -> Result<Self> {
        if node_routes.len() != sd_pairs.len() {
            return Err(Error::Model("one route per source-destination pair".into()));
        }
        let n = nodes.len();
        for (&(s, d), path) in sd_pairs.iter().zip(node_routes) {
            if s == d {
                return Err(Error::Model(format!("pair ({s},{s}) has no hop")));
            }
            if path.first() != Some(&s) || path.last() != Some(&d) || path.len() < 2 {
                return Err(Error::Model(format!("route for ({s},{d}) has wrong endpoints")));
            }
            if path.iter().any(|&v| v >= n) {
                return Err(Error::Model(format!("route for ({s},{d}) leaves the node set")));
            }
        }
        let mut links: Vec<Link> = node_routes
            .iter()
            .flat_map(|p| p.windows(2).map(|w| Link { from: w[0], to: w[1] }))
            .collect();
        links.sort_unstable();
        links.dedup();
        let routes = node_routes
            .iter()
            .map(|p| {
                p.windows(2)
                    .map(|w| {
                        links
                            .binary_search(&Link { from: w[0], to: w[1] })
                            .expect("hop registered above")
                    })
                    .collect()
            })
            .collect();
        Ok(Topology {
            nodes,
            links,
            sd_pairs,
            routes,
            range,
        })
    }

    /// Routes every pair with [`shortest_routes`] at the given range.
    pub fn from_geometry(nodes: Vec<Point>, sd_pairs: Vec<(usize, usize)>, range: f64) -> Result<Self> {
        let routes = shortest_routes(&nodes, &sd_pairs, range)?;
        Topology::from_node_routes(nodes, sd_pairs, &routes, Some(range))
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn sd_pairs(&self) -> &[(usize, usize)] {
        &self.sd_pairs
    }

    pub fn routes(&self) -> &[Vec<usize>] {
        &self.routes
    }

    pub fn range(&self) -> Option<f64> {
        self.range
    }

    /// Node sequence of route `pair`.
    pub fn route_nodes(&self, pair: usize) -> Vec<usize> {
        let route = &self.routes[pair];
        let mut nodes = Vec::with_capacity(route.len() + 1);
        nodes.push(self.links[route[0]].from);
        nodes.extend(route.iter().map(|&l| self.links[l].to));
        nodes
    }

    /// Contention graph under the protocol-range rule: two links conflict
    /// when they share a node or when some endpoint of one lies within
    /// `factor · range` of some endpoint of the other.
    pub fn protocol_contention(&self, rule: InterferenceRule) -> Result<ContentionGraph> {
        let range = self
            .range
            .ok_or_else(|| Error::Model("topology has no transmission range".into()))?;
        let reach = rule.range_factor * range;
        let mut g = ContentionGraph::without_edges(self.links.len());
        for (a, la) in self.links.iter().enumerate() {
            for (b, lb) in self.links.iter().enumerate().skip(a + 1) {
                let ea = [la.from, la.to];
                let eb = [lb.from, lb.to];
                let shares = ea.iter().any(|x| eb.contains(x));
                let near = ea.iter().any(|&x| {
                    eb.iter()
                        .any(|&y| self.nodes[x].distance(&self.nodes[y]) <= reach)
                });
                if shares || near {
                    g.add_edge(a, b)?;
                }
            }
        }
        Ok(g)
    }
}

/// Interference predicate used for geometric topologies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferenceRule {
    /// Interference reach as a multiple of the transmission range.
    pub range_factor: f64,
}

impl Default for InterferenceRule {
    fn default() -> Self {
        InterferenceRule { range_factor: 1.0 }
    }
}

/// A single flow `A_1 → A_n` along a line; link `i` is `A_i → A_{i+1}` and
/// links `i`, `j` conflict iff `0 < |i − j| < c_r`.
pub fn line_network(n: usize, contention_range: usize) -> Result<(Topology, ContentionGraph)> {
    if n < 2 {
        return Err(Error::Model(format!("a line needs at least 2 nodes, got {n}")));
    }
    if contention_range < 1 {
        return Err(param("contention range must be at least 1"));
    }
    let nodes = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
    let path: Vec<usize> = (0..n).collect();
    let topo = Topology::from_node_routes(nodes, vec![(0, n - 1)], &[path], Some(1.0))?;
    let m = n - 1;
    let mut g = ContentionGraph::without_edges(m);
    for i in 0..m {
        for j in i + 1..m.min(i + contention_range) {
            g.add_edge(i, j)?;
        }
    }
    Ok((topo, g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomNetwork {
    pub topology: Topology,
    pub contention: ContentionGraph,
    /// Minimum transmission range connecting every pair.
    pub range: f64,
}

/// `n` uniform points on the unit square, one uniform destination per
/// source, routed at the minimum range that connects every pair.
pub fn random_network(n: usize, seed: u64) -> Result<RandomNetwork> {
    random_network_with(n, seed, InterferenceRule::default())
}

pub fn random_network_with(n: usize, seed: u64, rule: InterferenceRule) -> Result<RandomNetwork> {
    if n < 2 {
        return Err(Error::Model(format!("a random network needs at least 2 nodes, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let sd_pairs: Vec<(usize, usize)> = (0..n)
        .map(|s| {
            let d = rng.random_range(0..n - 1);
            (s, if d >= s { d + 1 } else { d })
        })
        .collect();
    let range = minimum_connecting_range(&nodes, &sd_pairs);
    let topology = Topology::from_geometry(nodes, sd_pairs, range)?;
    let contention = topology.protocol_contention(rule)?;
    Ok(RandomNetwork {
        topology,
        contention,
        range,
    })
}

/// Smallest pairwise distance at which every pair is connected in the unit
/// disk graph. Found by bisection over the sorted candidate distances.
pub fn minimum_connecting_range(nodes: &[Point], sd_pairs: &[(usize, usize)]) -> f64 {
    let mut candidates: Vec<f64> = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            candidates.push(a.distance(b));
        }
    }
    if candidates.is_empty() {
        return 0.0;
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pairs_connected(nodes, sd_pairs, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Whether every pair is connected when nodes within `range` are adjacent.
pub fn pairs_connected(nodes: &[Point], sd_pairs: &[(usize, usize)], range: f64) -> bool {
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if nodes[i].distance(&nodes[j]) <= range {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    sd_pairs
        .iter()
        .all(|&(s, d)| find(&mut parent, s) == find(&mut parent, d))
}

/// Minimum-hop route (as a node sequence) for every pair, with nodes within
/// `range` adjacent. Breadth-first search visits neighbors in increasing
/// index order, so ties go to the lowest-index neighbor.
pub fn shortest_routes(
    nodes: &[Point],
    sd_pairs: &[(usize, usize)],
    range: f64,
) -> Result<Vec<Vec<usize>>> {
    let n = nodes.len();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && nodes[i].distance(&nodes[j]) <= range)
                .collect()
        })
        .collect();
    sd_pairs
        .iter()
        .map(|&(s, d)| {
            if s >= n || d >= n || s == d {
                return Err(Error::Model(format!("invalid pair ({s},{d})")));
            }
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == d {
                    break;
                }
                for &v in &adjacency[u] {
                    if prev[v] == usize::MAX {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[d] == usize::MAX {
                return Err(Error::Connectivity {
                    source: s,
                    destination: d,
                });
            }
            let mut path = vec![d];
            while *path.last().unwrap() != s {
                path.push(prev[*path.last().unwrap()]);
            }
            path.reverse();
            Ok(path)
        })
        .collect()
}
