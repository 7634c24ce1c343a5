//! Search execution: simple random walk baseline and PW-RW in both variants.
//!
//! Every hop costs one unit. A PW-RW hop is either a *jump* over a walk whose
//! registry is negative, or a *step* along a traversed walk. Steps taken in a
//! traversal that ends without finding the resource are *unnecessary*; steps
//! in the successful traversal are *final*.
//!
//! Under node churn, departed nodes are skipped: a step lands on the next
//! active node of the walk, a jump lands on the last active node. When no
//! node of the walk past the current one is active, the search makes one hop
//! to a uniformly chosen active neighbor instead, or gives up if there is none.

use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;

use crate::dynamics::{Dynamics, Placement, Snapshot};
use crate::error::{Error, Result};
use crate::netgen::{Network, NodeId};
use crate::pwalks::{Variant, WalkTable};
use crate::rng::{self, Rng, TAG_CHURN, TAG_SEARCH, TAG_SOURCE};

/// Default hop budget per search, as a multiple of the node count.
pub const DEFAULT_CUTOFF_FACTOR: u64 = 100;

/// Hop accounting of one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchOutcome {
    pub found: bool,
    pub length: u64,
    pub jumps: u64,
    pub unnecessary_steps: u64,
    pub final_steps: u64,
    pub walks_traversed: u64,
    /// Jumps replaced by a random active-neighbor hop because the whole walk
    /// had departed. Included in `jumps`.
    pub fallback_hops: u64,
}

impl SearchOutcome {
    /// `length == jumps + unnecessary_steps + final_steps`.
    pub fn is_balanced(&self) -> bool {
        self.length == self.jumps + self.unnecessary_steps + self.final_steps
    }
}

fn check_source(snap: &Snapshot, net: &Network, source: NodeId) -> Result<()> {
    if source as usize >= net.node_count() {
        return Err(Error::invalid(format!("source {source} out of range")));
    }
    if !snap.is_active(source) {
        return Err(Error::invalid(format!("source {source} has left the network")));
    }
    Ok(())
}

/// Uniform choice among the active neighbors of `v`.
fn random_active_neighbor(net: &Network, snap: &Snapshot, v: NodeId, rng: &mut Rng) -> Option<NodeId> {
    let nb = net.neighbors(v);
    if !snap.has_node_churn() {
        return (!nb.is_empty()).then(|| nb[rng.random_range(0..nb.len())]);
    }
    let live = nb.iter().filter(|&&u| snap.is_active(u)).count();
    if live == 0 {
        return None;
    }
    let pick = rng.random_range(0..live);
    nb.iter().copied().filter(|&u| snap.is_active(u)).nth(pick)
}

/// Simple random walk search from `source`, checking every visited node.
pub fn rw_search(
    net: &Network,
    truth: &Snapshot,
    source: NodeId,
    cutoff: u64,
    rng: &mut Rng,
) -> Result<SearchOutcome> {
    check_source(truth, net, source)?;
    let mut out = SearchOutcome::default();
    if truth.holds(source) {
        out.found = true;
        return Ok(out);
    }
    let mut at = source;
    while out.length < cutoff {
        let Some(next) = random_active_neighbor(net, truth, at, rng) else {
            break;
        };
        at = next;
        out.length += 1;
        out.final_steps += 1;
        if truth.holds(at) {
            out.found = true;
            break;
        }
    }
    Ok(out)
}

/// PW-RW search from `source` against the `t = T` ground truth.
pub fn pwrw_search(
    net: &Network,
    table: &WalkTable,
    truth: &Snapshot,
    source: NodeId,
    cutoff: u64,
    rng: &mut Rng,
) -> Result<SearchOutcome> {
    check_source(truth, net, source)?;
    if table.node_count() != net.node_count() {
        return Err(Error::invalid("walk table does not match the network"));
    }
    let resource = truth.instances.resource();
    let w = table.walks_per_node();
    let mut out = SearchOutcome::default();
    if truth.holds(source) {
        out.found = true;
        return Ok(out);
    }

    let mut at = source;
    let mut positives: Vec<usize> = Vec::with_capacity(w);
    while out.length < cutoff {
        let (k, positive) = match table.variant() {
            Variant::ChooseFirst => {
                let k = rng.random_range(0..w);
                (k, table.record(at, k).registry.contains(resource))
            }
            Variant::CheckFirst => {
                positives.clear();
                positives.extend((0..w).filter(|&k| table.record(at, k).registry.contains(resource)));
                if positives.is_empty() {
                    (rng.random_range(0..w), false)
                } else {
                    (positives[rng.random_range(0..positives.len())], true)
                }
            }
        };
        let walk = table.record(at, k).nodes;

        if !positive {
            let landing = walk[1..].iter().rev().copied().find(|&v| truth.is_active(v));
            match landing {
                Some(v) => at = v,
                None => match random_active_neighbor(net, truth, at, rng) {
                    Some(v) => {
                        at = v;
                        out.fallback_hops += 1;
                    }
                    None => return Ok(out),
                },
            }
            out.jumps += 1;
            out.length += 1;
            continue;
        }

        out.walks_traversed += 1;
        if truth.holds(at) {
            out.found = true;
            return Ok(out);
        }
        let mut steps = 0;
        for &v in &walk[1..] {
            if !truth.is_active(v) {
                continue;
            }
            if out.length >= cutoff {
                out.final_steps += steps;
                return Ok(out);
            }
            at = v;
            steps += 1;
            out.length += 1;
            if truth.holds(v) {
                out.final_steps += steps;
                out.found = true;
                return Ok(out);
            }
        }
        out.unnecessary_steps += steps;
        if steps == 0 {
            if out.length >= cutoff {
                break;
            }
            match random_active_neighbor(net, truth, at, rng) {
                Some(v) => {
                    at = v;
                    out.fallback_hops += 1;
                    out.jumps += 1;
                    out.length += 1;
                }
                None => return Ok(out),
            }
        }
    }
    Ok(out)
}

/// Aggregate statistics over the successful searches of a campaign. Sums and
/// histogram counts only, so merging is order independent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub searches: u64,
    pub failures: u64,
    sum_length: u64,
    sum_sq_length: u128,
    pub jumps: u64,
    pub unnecessary_steps: u64,
    pub final_steps: u64,
    pub fallback_hops: u64,
    pub walks_traversed: u64,
    /// Search length -> number of successful searches with that length.
    pub histogram: BTreeMap<u64, u64>,
}

impl SearchStats {
    pub fn record(&mut self, o: &SearchOutcome) {
        self.searches += 1;
        if !o.found {
            self.failures += 1;
            return;
        }
        self.sum_length += o.length;
        self.sum_sq_length += (o.length as u128) * (o.length as u128);
        self.jumps += o.jumps;
        self.unnecessary_steps += o.unnecessary_steps;
        self.final_steps += o.final_steps;
        self.fallback_hops += o.fallback_hops;
        self.walks_traversed += o.walks_traversed;
        *self.histogram.entry(o.length).or_default() += 1;
    }

    pub fn merge(&mut self, other: &SearchStats) {
        self.searches += other.searches;
        self.failures += other.failures;
        self.sum_length += other.sum_length;
        self.sum_sq_length += other.sum_sq_length;
        self.jumps += other.jumps;
        self.unnecessary_steps += other.unnecessary_steps;
        self.final_steps += other.final_steps;
        self.fallback_hops += other.fallback_hops;
        self.walks_traversed += other.walks_traversed;
        for (&len, &count) in &other.histogram {
            *self.histogram.entry(len).or_default() += count;
        }
    }

    pub fn successes(&self) -> u64 {
        self.searches - self.failures
    }

    /// Mean length of successful searches; NaN when there are none.
    pub fn mean(&self) -> f64 {
        self.sum_length as f64 / self.successes() as f64
    }

    /// Sample standard deviation of successful search lengths.
    pub fn std_dev(&self) -> f64 {
        let n = self.successes();
        if n < 2 {
            return 0.0;
        }
        let n = n as f64;
        let mean = self.mean();
        let var = (self.sum_sq_length as f64 - n * mean * mean) / (n - 1.0);
        var.max(0.0).sqrt()
    }

    /// Standard error of the mean length.
    pub fn std_error(&self) -> f64 {
        self.std_dev() / (self.successes() as f64).sqrt()
    }

    /// Most frequent length (smallest on ties).
    pub fn mode(&self) -> Option<u64> {
        self.histogram
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&len, _)| len)
    }
}

impl<'a> FromIterator<&'a SearchOutcome> for SearchStats {
    fn from_iter<I: IntoIterator<Item = &'a SearchOutcome>>(iter: I) -> Self {
        let mut stats = SearchStats::default();
        for o in iter {
            stats.record(o);
        }
        stats
    }
}

/// One search of a campaign, with its random-walk counterpart when a
/// baseline was requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchRecord {
    pub index: u64,
    pub source: NodeId,
    pub pwrw: SearchOutcome,
    pub rw: Option<SearchOutcome>,
}

#[derive(Debug, Clone, Default)]
pub struct CampaignResult {
    pub pwrw: SearchStats,
    pub rw: Option<SearchStats>,
    pub records: Vec<SearchRecord>,
}

impl CampaignResult {
    pub fn merge(&mut self, other: CampaignResult) {
        self.pwrw.merge(&other.pwrw);
        match (&mut self.rw, other.rw) {
            (Some(mine), Some(theirs)) => mine.merge(&theirs),
            (slot @ None, Some(theirs)) => *slot = Some(theirs),
            _ => {}
        }
        let offset = self.records.len() as u64;
        self.records.extend(other.records.into_iter().map(|mut r| {
            r.index += offset;
            r
        }));
    }

    /// `100 · (1 − mean_pwrw / mean_rw)`.
    pub fn reduction_percent(&self) -> Option<f64> {
        self.rw.as_ref().map(|rw| 100.0 * (1.0 - self.pwrw.mean() / rw.mean()))
    }
}

/// Options of one campaign.
#[derive(Debug, Clone, Copy)]
pub struct CampaignOptions {
    pub searches: u64,
    pub cutoff: u64,
    pub keep_records: bool,
}

/// Runs `opts.searches` PW-RW searches on a fixed `t = T` snapshot, sources
/// uniform over the active nodes. When `baseline` is given, every search is
/// paired with a random-walk search from the same source on that snapshot.
pub fn run_searches(
    net: &Network,
    table: &WalkTable,
    truth: &Snapshot,
    baseline: Option<&Snapshot>,
    opts: &CampaignOptions,
    seed: u64,
) -> Result<CampaignResult> {
    if opts.searches == 0 {
        return Err(Error::invalid("a campaign needs at least one search"));
    }
    let sources: Vec<NodeId> = match &truth.active {
        Some(active) => active.active_nodes(),
        None => (0..net.node_count() as NodeId).collect(),
    };
    if sources.is_empty() {
        return Err(Error::invalid("no active node can start a search"));
    }

    let records: Vec<SearchRecord> = (0..opts.searches)
        .into_par_iter()
        .map(|i| -> Result<SearchRecord> {
            let mut pick = rng::substream(seed, TAG_SOURCE, i);
            let source = sources[pick.random_range(0..sources.len())];
            let mut walk_rng = rng::substream(seed, TAG_SEARCH, 2 * i);
            let pwrw = pwrw_search(net, table, truth, source, opts.cutoff, &mut walk_rng)?;
            let rw = match baseline {
                Some(base) if base.is_active(source) => {
                    let mut rw_rng = rng::substream(seed, TAG_SEARCH, 2 * i + 1);
                    Some(rw_search(net, base, source, opts.cutoff, &mut rw_rng)?)
                }
                _ => None,
            };
            Ok(SearchRecord { index: i, source, pwrw, rw })
        })
        .collect::<Result<_>>()?;

    let pwrw = records.iter().map(|r| &r.pwrw).collect();
    let rw = baseline.map(|_| records.iter().filter_map(|r| r.rw.as_ref()).collect());
    Ok(CampaignResult {
        pwrw,
        rw,
        records: if opts.keep_records { records } else { Vec::new() },
    })
}

/// Draws one `t = T` realization of `dynamics` and runs a campaign on it.
/// The random-walk baseline, when requested, searches the same snapshot.
pub fn run_campaign(
    net: &Network,
    table: &WalkTable,
    p0: &Placement,
    dynamics: &Dynamics,
    opts: &CampaignOptions,
    with_baseline: bool,
    seed: u64,
) -> Result<CampaignResult> {
    let truth = dynamics.realize(p0, rng::derive_seed(seed, TAG_CHURN, 0))?;
    run_searches(net, table, &truth, with_baseline.then_some(&truth), opts, seed)
}
