//! Resource location with precomputed partial random walks (PW-RW).
//!
//! Every node of an overlay network precomputes `w` short random walks of
//! `s` hops together with a registry of the resources seen along each walk.
//! A search then concatenates those walks: it jumps over walks whose registry
//! lacks the resource and traverses walks that claim it. Registries are built
//! at `t = 0` and consulted at `t = T`, so resource churn and node churn make
//! some of them stale.
//!
//! The crate is organised bottom-up:
//!
//! * [`netgen`] builds regular, Erdős–Rényi and scale-free overlays through
//!   the configuration model and exposes their degree statistics.
//! * [`dynamics`] places resource instances and applies resource or node churn.
//! * [`pwalks`] precomputes the walk tables for both search variants.
//! * [`search`] runs random-walk and PW-RW searches and aggregates campaigns.
//! * [`model`] evaluates the mean-field expected search length and the
//!   recomputation cost model.
//! * [`harness`] wires everything into reproducible experiments with CSV output.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod model;
pub mod netgen;
pub mod pwalks;
pub mod rng;
pub mod search;

pub use dynamics::{ActiveSet, ChurnSpec, Dynamics, Placement, Snapshot};
pub use error::{Error, Result};
pub use model::{
    Churn, CostParams, ModelParams, ModelResult, SelectionProbs,
};
pub use netgen::{DegreeSequence, DegreeStats, Network, NodeId, TopologyKind};
pub use pwalks::{QueryClass, Registry, ResourceId, Variant, WalkRecord, WalkTable};
pub use search::{CampaignResult, SearchOutcome, SearchStats};
