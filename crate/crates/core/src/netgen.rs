//! Random overlay construction.
//!
//! Networks are built in three steps: a preliminary graph of the requested
//! family is generated, its degree sequence is extracted, and the final graph
//! is obtained by feeding that sequence to the configuration model (random
//! stub pairing). Self-loops and multi-edges left by the pairing are repaired
//! with degree-preserving double-edge swaps.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{self, Rng, TAG_ASSEMBLE, TAG_DEGREES};

pub type NodeId = u32;

/// Fully random re-pairings tried before falling back to swap repair.
const PAIRING_RETRIES: usize = 8;
/// Swap attempts allowed per defective edge during repair.
const SWAP_ATTEMPTS_PER_EDGE: usize = 10_000;
/// Minimum fraction of nodes the giant component must hold.
const GIANT_COMPONENT_FRACTION: f64 = 0.99;
/// Allowed relative gap between requested and realized mean degree.
const MEAN_DEGREE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Regular,
    ErdosRenyi,
    ScaleFree,
}

impl TopologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Regular => "regular",
            TopologyKind::ErdosRenyi => "erdos-renyi",
            TopologyKind::ScaleFree => "scale-free",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regular" => Ok(TopologyKind::Regular),
            "erdos-renyi" | "er" | "random" => Ok(TopologyKind::ErdosRenyi),
            "scale-free" | "sf" | "scalefree" => Ok(TopologyKind::ScaleFree),
            other => Err(Error::invalid(format!("unknown topology kind `{other}`"))),
        }
    }
}

/// Degree sequence ready for the configuration model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<usize>,
    kind: TopologyKind,
}

impl DegreeSequence {
    /// Validates that every degree is positive and the endpoint count is even.
    pub fn new(degrees: Vec<usize>, kind: TopologyKind) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::invalid("empty degree sequence"));
        }
        if let Some(pos) = degrees.iter().position(|&k| k == 0) {
            return Err(Error::invalid(format!("node {pos} has degree 0")));
        }
        let total: usize = degrees.iter().sum();
        if !total.is_multiple_of(2) {
            return Err(Error::invalid(format!("degree sum {total} is odd")));
        }
        Ok(Self { degrees, kind })
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.degrees.iter().sum::<usize>() as f64 / self.degrees.len() as f64
    }
}

/// Immutable simple undirected graph in compressed adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    kind: TopologyKind,
}

impl Network {
    /// Builds a network from an undirected edge list, rejecting self-loops,
    /// duplicate edges and out-of-range ids.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)], kind: TopologyKind) -> Result<Self> {
        if n > NodeId::MAX as usize {
            return Err(Error::invalid(format!("{n} nodes exceed the id space")));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {u}")));
            }
            if !seen.insert(ordered(u, v)) {
                return Err(Error::invalid(format!("duplicate edge ({u}, {v})")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for k in &degree {
            offsets.push(offsets.last().unwrap() + k);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0; offsets[n]];
        for &(u, v) in edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok(Self { offsets, targets, kind })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count() as NodeId).map(|v| self.degree(v)).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }

    /// Sizes of the connected components, largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let labels = component_labels(self.node_count(), |v| self.neighbors(v));
        let mut sizes = vec![0usize; labels.iter().map(|&c| c + 1).max().unwrap_or(0)];
        for c in labels {
            sizes[c] += 1;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn is_connected(&self) -> bool {
        self.component_sizes().len() <= 1
    }

    /// Writes the network as an edge list with a `# N=.. kind=.. seed=..` header.
    pub fn write_edge_list<W: Write>(&self, mut out: W, seed: u64) -> Result<()> {
        writeln!(out, "# N={} kind={} seed={}", self.node_count(), self.kind, seed)?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads an edge list produced by [`Network::write_edge_list`]. Returns the
    /// network and the seed recorded in the header.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<(Self, u64)> {
        let mut lines = input.lines().enumerate();
        let (n, kind, seed) = match lines.next() {
            Some((_, line)) => parse_header(&line?)?,
            None => {
                return Err(Error::EdgeList { line: 1, message: "missing header".into() });
            }
        };
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::EdgeList { line: idx + 1, message };
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(format!("expected `u v`, got `{line}`")));
            };
            let u: NodeId = a.parse().map_err(|_| bad(format!("bad node id `{a}`")))?;
            let v: NodeId = b.parse().map_err(|_| bad(format!("bad node id `{b}`")))?;
            edges.push((u, v));
        }
        let net = Network::from_edges(n, &edges, kind)?;
        Ok((net, seed))
    }
}

fn parse_header(line: &str) -> Result<(usize, TopologyKind, u64)> {
    let bad = |message: &str| Error::EdgeList { line: 1, message: message.into() };
    let body = line.trim().strip_prefix('#').ok_or_else(|| bad("header must start with `#`"))?;
    let (mut n, mut kind, mut seed) = (None, None, None);
    for field in body.split_whitespace() {
        match field.split_once('=') {
            Some(("N", v)) => n = Some(v.parse().map_err(|_| bad("bad N"))?),
            Some(("kind", v)) => kind = Some(v.parse::<TopologyKind>()?),
            Some(("seed", v)) => seed = Some(v.parse().map_err(|_| bad("bad seed"))?),
            _ => return Err(bad("unknown header field")),
        }
    }
    match (n, kind, seed) {
        (Some(n), Some(kind), Some(seed)) => Ok((n, kind, seed)),
        _ => Err(bad("header needs N, kind and seed")),
    }
}

#[inline]
fn ordered(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn component_labels<'a, F>(n: usize, neighbors: F) -> Vec<usize>
where
    F: Fn(NodeId) -> &'a [NodeId],
{
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        queue.push_back(start as NodeId);
        while let Some(v) = queue.pop_front() {
            for &u in neighbors(v) {
                if label[u as usize] == usize::MAX {
                    label[u as usize] = next;
                    queue.push_back(u);
                }
            }
        }
        next += 1;
    }
    label
}

/// Degree statistics consumed by the analytical model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub nodes: usize,
    /// Mean degree `S / N`.
    pub kave: f64,
    /// Total endpoint count `S = Σ k·n_k`.
    pub endpoints: f64,
    /// Expected degree of a node reached by a random walk, `Σ k²·n_k / S`.
    pub k_rw: f64,
}

impl DegreeStats {
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::invalid("degree statistics of an empty network"));
        }
        let endpoints: f64 = degrees.iter().map(|&k| k as f64).sum();
        if endpoints == 0.0 {
            return Err(Error::invalid("network has no edges"));
        }
        let squares: f64 = degrees.iter().map(|&k| (k * k) as f64).sum();
        Ok(Self {
            nodes: degrees.len(),
            kave: endpoints / degrees.len() as f64,
            endpoints,
            k_rw: squares / endpoints,
        })
    }

    /// Stats of a `k`-regular network of `n` nodes.
    pub fn regular(n: usize, k: usize) -> Self {
        let endpoints = (n * k) as f64;
        Self { nodes: n, kave: k as f64, endpoints, k_rw: k as f64 }
    }
}

pub fn degree_stats(net: &Network) -> Result<DegreeStats> {
    DegreeStats::from_degrees(&net.degrees())
}

/// Extracts the degree sequence of a preliminary network of the given family.
pub fn build_degree_sequence(
    kind: TopologyKind,
    n: usize,
    kave: usize,
    seed: u64,
) -> Result<DegreeSequence> {
    if n < 10 {
        return Err(Error::invalid(format!("need at least 10 nodes, got {n}")));
    }
    if kave < 2 || kave >= n {
        return Err(Error::invalid(format!("mean degree {kave} outside [2, {n})")));
    }
    let mut rng = rng::substream(seed, TAG_DEGREES, 0);
    let mut degrees = match kind {
        TopologyKind::Regular => {
            if !(n * kave).is_multiple_of(2) {
                return Err(Error::invalid(format!(
                    "no {kave}-regular graph on {n} nodes: odd endpoint count"
                )));
            }
            vec![kave; n]
        }
        TopologyKind::ErdosRenyi => gnp_degrees(n, kave as f64 / (n - 1) as f64, &mut rng),
        TopologyKind::ScaleFree => {
            if !kave.is_multiple_of(2) {
                return Err(Error::invalid(format!(
                    "scale-free mean degree must be even (m = kave/2), got {kave}"
                )));
            }
            preferential_attachment_degrees(n, kave / 2, &mut rng)
        }
    };

    // Isolated nodes cannot take part in stub pairing.
    for k in degrees.iter_mut().filter(|k| **k == 0) {
        *k = 1;
    }
    if degrees.iter().sum::<usize>() % 2 != 0 {
        let v = rng.random_range(0..n);
        degrees[v] += 1;
    }

    let seq = DegreeSequence::new(degrees, kind)?;
    let realized = seq.mean();
    if (realized - kave as f64).abs() > MEAN_DEGREE_TOLERANCE * kave as f64 {
        return Err(Error::invalid(format!(
            "realized mean degree {realized:.3} too far from {kave}"
        )));
    }
    Ok(seq)
}

/// Degrees of a G(n, p) graph, generated by geometric edge skipping.
fn gnp_degrees(n: usize, p: f64, rng: &mut Rng) -> Vec<usize> {
    let mut degrees = vec![0usize; n];
    if p <= 0.0 {
        return degrees;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            degrees[v] += 1;
            degrees[w as usize] += 1;
        }
    }
    degrees
}

/// Degrees of a preferential-attachment graph where each new node attaches to
/// `m` distinct existing nodes with probability proportional to their degree.
/// Growth starts from a clique on `m + 1` nodes.
fn preferential_attachment_degrees(n: usize, m: usize, rng: &mut Rng) -> Vec<usize> {
    let mut degrees = vec![0usize; n];
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * m * n);
    let core = m + 1;
    for u in 0..core {
        for v in (u + 1)..core {
            endpoints.push(u);
            endpoints.push(v);
            degrees[u] += 1;
            degrees[v] += 1;
        }
    }
    let mut picked = Vec::with_capacity(m);
    for v in core..n {
        picked.clear();
        while picked.len() < m {
            let u = endpoints[rng.random_range(0..endpoints.len())];
            if !picked.contains(&u) {
                picked.push(u);
            }
        }
        for &u in &picked {
            endpoints.push(u);
            endpoints.push(v);
            degrees[u] += 1;
            degrees[v] += 1;
        }
    }
    degrees
}

/// Configuration-model assembly of a simple connected graph from `seq`.
///
/// Stubs are paired uniformly at random. Pairings with self-loops or
/// multi-edges are re-drawn a few times; if defects remain, they are removed
/// by double-edge swaps against random valid edges, which keeps every degree.
/// When the result is disconnected, the giant component is kept (and
/// relabelled densely) provided it holds at least 99% of the nodes.
pub fn assemble_network(seq: &DegreeSequence, seed: u64) -> Result<Network> {
    let n = seq.len();
    let mut rng = rng::substream(seed, TAG_ASSEMBLE, 0);
    let mut stubs: Vec<NodeId> = seq
        .degrees()
        .iter()
        .enumerate()
        .flat_map(|(v, &k)| std::iter::repeat_n(v as NodeId, k))
        .collect();

    let mut pairing = Vec::new();
    for _ in 0..PAIRING_RETRIES {
        stubs.shuffle(&mut rng);
        pairing = stubs.chunks_exact(2).map(|c| (c[0], c[1])).collect::<Vec<_>>();
        if is_simple(&pairing) {
            break;
        }
    }
    let edges = repair_pairing(pairing, &mut rng)?;

    let adjacency = Network::from_edges(n, &edges, seq.kind())?;
    let labels = component_labels(n, |v| adjacency.neighbors(v));
    let mut sizes = vec![0usize; labels.iter().map(|&c| c + 1).max().unwrap_or(0)];
    for &c in &labels {
        sizes[c] += 1;
    }
    if sizes.len() <= 1 {
        return Ok(adjacency);
    }
    let (giant_label, &giant) = sizes.iter().enumerate().max_by_key(|(_, &s)| s).unwrap();
    if (giant as f64) < GIANT_COMPONENT_FRACTION * n as f64 {
        return Err(Error::Disconnected { giant, total: n });
    }
    let mut relabel = vec![NodeId::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if labels[v] == giant_label {
            relabel[v] = next;
            next += 1;
        }
    }
    let kept: Vec<_> = edges
        .iter()
        .filter(|(u, _)| labels[*u as usize] == giant_label)
        .map(|&(u, v)| (relabel[u as usize], relabel[v as usize]))
        .collect();
    Network::from_edges(giant, &kept, seq.kind())
}

fn is_simple(pairing: &[(NodeId, NodeId)]) -> bool {
    let mut seen = HashSet::with_capacity(pairing.len());
    pairing.iter().all(|&(u, v)| u != v && seen.insert(ordered(u, v)))
}

fn repair_pairing(pairing: Vec<(NodeId, NodeId)>, rng: &mut Rng) -> Result<Vec<(NodeId, NodeId)>> {
    let mut present: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(pairing.len());
    let mut good: Vec<(NodeId, NodeId)> = Vec::with_capacity(pairing.len());
    let mut defects = Vec::new();
    for (u, v) in pairing {
        if u != v && present.insert(ordered(u, v)) {
            good.push(ordered(u, v));
        } else {
            defects.push((u, v));
        }
    }

    for (u, v) in defects {
        // An earlier swap may have removed the edge this one duplicated.
        if u != v && present.insert(ordered(u, v)) {
            good.push(ordered(u, v));
            continue;
        }
        let mut fixed = false;
        for _ in 0..SWAP_ATTEMPTS_PER_EDGE {
            if good.is_empty() {
                break;
            }
            let idx = rng.random_range(0..good.len());
            let (mut x, mut y) = good[idx];
            if rng.random_bool(0.5) {
                std::mem::swap(&mut x, &mut y);
            }
            // (u, v) + (x, y) -> (u, x) + (v, y)
            if u == x || v == y {
                continue;
            }
            let (e1, e2) = (ordered(u, x), ordered(v, y));
            if e1 == e2 || present.contains(&e1) || present.contains(&e2) {
                continue;
            }
            present.remove(&good[idx]);
            good.swap_remove(idx);
            present.insert(e1);
            present.insert(e2);
            good.push(e1);
            good.push(e2);
            fixed = true;
            break;
        }
        if !fixed {
            return Err(Error::Unrealizable(format!(
                "could not remove defective pair ({u}, {v}) by edge swaps"
            )));
        }
    }
    Ok(good)
}

/// Generates the degree sequence and assembles the network in one call.
pub fn generate(kind: TopologyKind, n: usize, kave: usize, seed: u64) -> Result<Network> {
    let seq = build_degree_sequence(kind, n, kave, seed)?;
    assemble_network(&seq, seed)
}
