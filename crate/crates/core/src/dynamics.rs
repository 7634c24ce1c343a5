//! Resource placement and churn over one recomputation interval `[0, T]`.
//!
//! Churn is a single Bernoulli draw per node at `t = T`. All operations
//! return new snapshots and leave their inputs untouched, so the `t = 0`
//! placement used to build registries stays available next to the `t = T`
//! ground truth used by searches.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::netgen::NodeId;
use crate::pwalks::ResourceId;
use crate::rng::{self, TAG_CHURN, TAG_PLACEMENT};

/// Which nodes hold an instance of one resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    resource: ResourceId,
    has_instance: Vec<bool>,
}

impl Placement {
    pub fn from_holders(resource: ResourceId, has_instance: Vec<bool>) -> Self {
        Self { resource, has_instance }
    }

    pub fn resource(&self) -> ResourceId {
        self.resource
    }

    #[inline]
    pub fn holds(&self, v: NodeId) -> bool {
        self.has_instance[v as usize]
    }

    pub fn node_count(&self) -> usize {
        self.has_instance.len()
    }

    pub fn instance_count(&self) -> usize {
        self.has_instance.iter().filter(|&&h| h).count()
    }

    pub fn holders(&self) -> &[bool] {
        &self.has_instance
    }
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {x} is not a probability")))
    }
}

/// Independent Bernoulli(`p`) placement on `n` nodes.
pub fn place_resources(n: usize, p: f64, seed: u64) -> Result<Placement> {
    check_probability("placement probability", p)?;
    let mut rng = rng::substream(seed, TAG_PLACEMENT, 0);
    let has_instance = (0..n).map(|_| rng.random_bool(p)).collect();
    Ok(Placement { resource: ResourceId::default(), has_instance })
}

/// Appearance probability that keeps the expected instance count constant:
/// the solution of `R(1 - d) + (N - R)a = R`, i.e. `a = p·d / (1 - p)`.
pub fn derive_appearance_prob(p: f64, d: f64) -> Result<f64> {
    check_probability("disappearance probability", d)?;
    check_probability("placement probability", p)?;
    if p >= 1.0 {
        return Err(Error::invalid("placement probability 1 leaves no empty node to refill"));
    }
    Ok(p * d / (1.0 - p))
}

/// Per-interval resource churn probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurnSpec {
    /// Probability that a held instance is gone at `t = T`.
    pub d: f64,
    /// Probability that an empty node holds an instance at `t = T`.
    pub a: f64,
}

impl ChurnSpec {
    pub fn new(d: f64, a: f64) -> Result<Self> {
        check_probability("d", d)?;
        check_probability("a", a)?;
        Ok(Self { d, a })
    }

    /// Churn with `a` chosen so that the expected instance count is conserved.
    pub fn balanced(p: f64, d: f64) -> Result<Self> {
        Self::new(d, derive_appearance_prob(p, d)?)
    }

    pub fn none() -> Self {
        Self { d: 0.0, a: 0.0 }
    }
}

/// The `t = T` placement after one round of resource churn.
pub fn churn_resources(p0: &Placement, spec: &ChurnSpec, seed: u64) -> Placement {
    let mut rng = rng::substream(seed, TAG_CHURN, 0);
    let has_instance = p0
        .has_instance
        .iter()
        .map(|&held| {
            if held {
                !rng.random_bool(spec.d)
            } else {
                rng.random_bool(spec.a)
            }
        })
        .collect();
    Placement { resource: p0.resource, has_instance }
}

/// Nodes still present at `t = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    active: Vec<bool>,
    l: f64,
}

impl ActiveSet {
    pub fn all(n: usize) -> Self {
        Self { active: vec![true; n], l: 0.0 }
    }

    pub fn from_flags(active: Vec<bool>, l: f64) -> Self {
        Self { active, l }
    }

    #[inline]
    pub fn is_active(&self, v: NodeId) -> bool {
        self.active[v as usize]
    }

    pub fn departure_prob(&self) -> f64 {
        self.l
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn active_nodes(&self) -> Vec<NodeId> {
        (0..self.active.len() as NodeId).filter(|&v| self.is_active(v)).collect()
    }
}

/// Each node independently leaves with probability `l`. Joining nodes are
/// not represented: they appear in no precomputed walk.
pub fn churn_nodes(n: usize, l: f64, seed: u64) -> Result<ActiveSet> {
    check_probability("departure probability", l)?;
    let mut rng = rng::substream(seed, TAG_CHURN, 1);
    let active = (0..n).map(|_| !rng.random_bool(l)).collect();
    Ok(ActiveSet { active, l })
}

/// Churn scenario applied between walk precomputation and the searches.
/// Resource churn and node churn are mutually exclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dynamics {
    Static,
    Resources(ChurnSpec),
    Nodes { l: f64 },
}

impl Dynamics {
    /// Draws the `t = T` ground truth from the `t = 0` placement.
    pub fn realize(&self, p0: &Placement, seed: u64) -> Result<Snapshot> {
        Ok(match *self {
            Dynamics::Static => Snapshot::unchanged(p0),
            Dynamics::Resources(spec) => Snapshot {
                instances: churn_resources(p0, &spec, seed),
                active: None,
            },
            Dynamics::Nodes { l } => Snapshot {
                instances: p0.clone(),
                active: Some(churn_nodes(p0.node_count(), l, seed)?),
            },
        })
    }

    /// The churn level as a single number (`d` or `l`), 0 when static.
    pub fn level(&self) -> f64 {
        match *self {
            Dynamics::Static => 0.0,
            Dynamics::Resources(spec) => spec.d,
            Dynamics::Nodes { l } => l,
        }
    }
}

/// Ground truth at `t = T`: instance placement plus, under node churn, the
/// set of nodes still present. An instance counts only on an active node.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub instances: Placement,
    pub active: Option<ActiveSet>,
}

impl Snapshot {
    pub fn unchanged(p0: &Placement) -> Self {
        Self { instances: p0.clone(), active: None }
    }

    pub fn with_active(instances: Placement, active: ActiveSet) -> Self {
        Self { instances, active: Some(active) }
    }

    pub fn node_count(&self) -> usize {
        self.instances.node_count()
    }

    #[inline]
    pub fn is_active(&self, v: NodeId) -> bool {
        self.active.as_ref().is_none_or(|a| a.is_active(v))
    }

    #[inline]
    pub fn holds(&self, v: NodeId) -> bool {
        self.instances.holds(v) && self.is_active(v)
    }

    pub fn searchable_instances(&self) -> usize {
        (0..self.node_count() as NodeId).filter(|&v| self.holds(v)).count()
    }

    pub fn has_node_churn(&self) -> bool {
        self.active.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn within_sigmas(count: usize, n: usize, p: f64, k: f64) -> bool {
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        (count as f64 - mean).abs() <= k * sigma
    }

    #[test]
    fn placement_extremes() {
        assert_eq!(place_resources(500, 0.0, 1).unwrap().instance_count(), 0);
        assert_eq!(place_resources(500, 1.0, 1).unwrap().instance_count(), 500);
        assert!(place_resources(5, 1.5, 1).is_err());
    }

    #[test]
    fn placement_count_near_expectation() {
        let p = place_resources(10_000, 0.01, 42).unwrap();
        assert!(within_sigmas(p.instance_count(), 10_000, 0.01, 4.0));
    }

    #[test]
    fn appearance_probability() {
        assert_eq!(derive_appearance_prob(0.01, 0.0).unwrap(), 0.0);
        assert!((derive_appearance_prob(0.01, 0.3).unwrap() - 0.003_030_303_030_303).abs() < 1e-12);
        assert_eq!(derive_appearance_prob(0.5, 1.0).unwrap(), 1.0);
        assert!(derive_appearance_prob(1.0, 0.3).is_err());
        assert!(derive_appearance_prob(0.1, -0.1).is_err());
    }

    #[test]
    fn appearance_solves_conservation() {
        let (n, p, d) = (10_000.0, 0.01, 0.3);
        let r = n * p;
        let a = derive_appearance_prob(p, d).unwrap();
        assert!((r * (1.0 - d) + (n - r) * a - r).abs() < 1e-9);
    }

    #[test]
    fn churn_extremes() {
        let p0 = place_resources(1_000, 0.1, 3).unwrap();
        assert_eq!(churn_resources(&p0, &ChurnSpec::none(), 9), p0);
        let wiped = churn_resources(&p0, &ChurnSpec::new(1.0, 0.0).unwrap(), 9);
        assert_eq!(wiped.instance_count(), 0);
    }

    #[test]
    fn churn_does_not_mutate_input() {
        let p0 = place_resources(1_000, 0.1, 3).unwrap();
        let copy = p0.clone();
        let _ = churn_resources(&p0, &ChurnSpec::balanced(0.1, 0.5).unwrap(), 1);
        assert_eq!(p0, copy);
    }

    #[test]
    fn balanced_churn_keeps_count_near_r() {
        let p0 = place_resources(10_000, 0.01, 5).unwrap();
        let spec = ChurnSpec::balanced(0.01, 0.3).unwrap();
        let pt = churn_resources(&p0, &spec, 6);
        // Given the t=0 count, the t=T count is a sum of two binomials.
        let r0 = p0.instance_count() as f64;
        let mean = r0 * (1.0 - spec.d) + (10_000.0 - r0) * spec.a;
        let var = r0 * spec.d * (1.0 - spec.d) + (10_000.0 - r0) * spec.a * (1.0 - spec.a);
        assert!((pt.instance_count() as f64 - mean).abs() <= 4.0 * var.sqrt());
    }

    #[test]
    fn node_churn_extremes_and_count() {
        assert_eq!(churn_nodes(100, 0.0, 1).unwrap().active_count(), 100);
        assert_eq!(churn_nodes(100, 1.0, 1).unwrap().active_count(), 0);
        let set = churn_nodes(10_000, 0.3, 2).unwrap();
        assert!(within_sigmas(set.active_count(), 10_000, 0.7, 4.0));
        assert!(churn_nodes(10, 2.0, 1).is_err());
    }

    #[test]
    fn snapshot_masks_inactive_holders() {
        let p0 = Placement::from_holders(ResourceId(0), vec![true, true, false]);
        let snap = Snapshot::with_active(p0, ActiveSet::from_flags(vec![true, false, true], 0.3));
        assert!(snap.holds(0));
        assert!(!snap.holds(1));
        assert!(!snap.holds(2));
        assert_eq!(snap.searchable_instances(), 1);
    }
}
