//! Partial walk precomputation.
//!
//! At `t = 0` every node computes `w` simple random walks of `s` hops and
//! registers, per walk, the identifiers of the resources held inside the
//! walk's registered range. The registry does not say which node holds the
//! resource, so a traversal has to check the nodes one by one.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;

use crate::dynamics::{Placement, Snapshot};
use crate::error::{Error, Result};
use crate::netgen::{Network, NodeId};
use crate::rng::{self, TAG_WALKS};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResourceId(pub u32);

/// How a search picks the walk to follow at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Pick one walk uniformly, then query its registry. Registries cover
    /// positions `0..s` (origin included, terminus excluded).
    ChooseFirst,
    /// Query every registry, then pick uniformly among the positive ones.
    /// Registries cover positions `1..=s`.
    CheckFirst,
}

impl Variant {
    /// Walk positions whose resources enter the registry.
    pub fn registered_range(self, s: usize) -> Range<usize> {
        match self {
            Variant::ChooseFirst => 0..s,
            Variant::CheckFirst => 1..s + 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::ChooseFirst => "choose-first",
            Variant::CheckFirst => "check-first",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "choose-first" | "choose" => Ok(Variant::ChooseFirst),
            "check-first" | "check" => Ok(Variant::CheckFirst),
            other => Err(Error::invalid(format!("unknown variant `{other}`"))),
        }
    }
}

/// Set of resource identifiers seen along a walk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry(Vec<ResourceId>);

impl Registry {
    pub fn insert(&mut self, id: ResourceId) {
        if let Err(pos) = self.0.binary_search(&id) {
            self.0.insert(pos, id);
        }
    }

    #[inline]
    pub fn contains(&self, id: ResourceId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> &[ResourceId] {
        &self.0
    }
}

/// One precomputed walk: `s + 1` node ids (origin first) and its registry.
#[derive(Debug, Clone, Copy)]
pub struct WalkRecord<'a> {
    pub nodes: &'a [NodeId],
    pub registry: &'a Registry,
}

impl WalkRecord<'_> {
    pub fn origin(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn terminus(&self) -> NodeId {
        *self.nodes.last().expect("walk has at least one node")
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Query outcome of a registry at `t = T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryClass {
    TrueNegative,
    TruePositive,
    FalseNegative,
    FalsePositive,
}

impl QueryClass {
    pub fn is_positive(self) -> bool {
        matches!(self, QueryClass::TruePositive | QueryClass::FalsePositive)
    }
}

/// Classifies a registry against the `t = T` ground truth over the walk's
/// registered range. Under node churn only instances on active nodes count.
pub fn classify_query(rec: &WalkRecord<'_>, truth: &Snapshot, variant: Variant) -> QueryClass {
    let before = rec.registry.contains(truth.instances.resource());
    let after = rec.nodes[variant.registered_range(rec.hops())]
        .iter()
        .any(|&v| truth.holds(v));
    match (before, after) {
        (false, false) => QueryClass::TrueNegative,
        (true, true) => QueryClass::TruePositive,
        (false, true) => QueryClass::FalseNegative,
        (true, false) => QueryClass::FalsePositive,
    }
}

/// All walks of all nodes, stored contiguously.
#[derive(Debug, Clone)]
pub struct WalkTable {
    hops: usize,
    per_node: usize,
    variant: Variant,
    nodes: Vec<NodeId>,
    registries: Vec<Registry>,
}

impl WalkTable {
    /// Builds a table from explicit walks, `walks[v]` holding the walks of node
    /// `v`. Walks are checked for length and adjacency.
    pub fn from_walks(
        net: &Network,
        p0: &Placement,
        walks: &[Vec<Vec<NodeId>>],
        variant: Variant,
    ) -> Result<Self> {
        let per_node = walks.first().map_or(0, Vec::len);
        let hops = walks.first().and_then(|w| w.first()).map_or(0, |w| w.len().saturating_sub(1));
        if walks.len() != net.node_count() {
            return Err(Error::invalid("one walk list per node is required"));
        }
        if hops == 0 || per_node == 0 {
            return Err(Error::invalid("walks need at least one hop"));
        }
        let mut nodes = Vec::with_capacity(net.node_count() * per_node * (hops + 1));
        let mut registries = Vec::with_capacity(net.node_count() * per_node);
        for (v, list) in walks.iter().enumerate() {
            if list.len() != per_node {
                return Err(Error::invalid(format!("node {v} has {} walks", list.len())));
            }
            for walk in list {
                if walk.len() != hops + 1 || walk[0] as usize != v {
                    return Err(Error::invalid(format!("malformed walk at node {v}")));
                }
                if walk.windows(2).any(|e| !net.has_edge(e[0], e[1])) {
                    return Err(Error::invalid(format!("walk of node {v} leaves the graph")));
                }
                registries.push(registry_of(walk, p0, variant));
                nodes.extend_from_slice(walk);
            }
        }
        Ok(Self { hops, per_node, variant, nodes, registries })
    }

    /// Walk length in hops.
    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn walks_per_node(&self) -> usize {
        self.per_node
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn node_count(&self) -> usize {
        self.registries.len() / self.per_node
    }

    #[inline]
    pub fn record(&self, v: NodeId, k: usize) -> WalkRecord<'_> {
        let idx = v as usize * self.per_node + k;
        let stride = self.hops + 1;
        WalkRecord {
            nodes: &self.nodes[idx * stride..(idx + 1) * stride],
            registry: &self.registries[idx],
        }
    }

    pub fn records(&self, v: NodeId) -> impl Iterator<Item = WalkRecord<'_>> + '_ {
        (0..self.per_node).map(move |k| self.record(v, k))
    }
}

fn registry_of(walk: &[NodeId], p0: &Placement, variant: Variant) -> Registry {
    let mut registry = Registry::default();
    if walk[variant.registered_range(walk.len() - 1)].iter().any(|&v| p0.holds(v)) {
        registry.insert(p0.resource());
    }
    registry
}

/// Precomputes `w` simple random walks of `s` hops from every node, with
/// registries taken from the `t = 0` placement. Each node draws from its own
/// RNG stream, so the table does not depend on the thread count.
pub fn precompute_walks(
    net: &Network,
    p0: &Placement,
    w: usize,
    s: usize,
    variant: Variant,
    seed: u64,
) -> Result<WalkTable> {
    if s == 0 {
        return Err(Error::invalid("walk length must be at least one hop"));
    }
    if w < 2 {
        return Err(Error::invalid(format!("need at least two walks per node, got {w}")));
    }
    if p0.node_count() != net.node_count() {
        return Err(Error::invalid("placement and network sizes differ"));
    }
    if let Some(v) = (0..net.node_count() as NodeId).find(|&v| net.degree(v) == 0) {
        return Err(Error::IsolatedNode(v));
    }

    let stride = s + 1;
    let mut nodes = vec![0 as NodeId; net.node_count() * w * stride];
    nodes
        .par_chunks_mut(w * stride)
        .enumerate()
        .for_each(|(origin, block)| {
            let mut rng = rng::substream(seed, TAG_WALKS, origin as u64);
            for walk in block.chunks_mut(stride) {
                let mut at = origin as NodeId;
                walk[0] = at;
                for slot in walk.iter_mut().skip(1) {
                    let nb = net.neighbors(at);
                    at = nb[rng.random_range(0..nb.len())];
                    *slot = at;
                }
            }
        });
    let registries = nodes.chunks(stride).map(|walk| registry_of(walk, p0, variant)).collect();
    Ok(WalkTable { hops: s, per_node: w, variant, nodes, registries })
}
