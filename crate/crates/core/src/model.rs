//! Mean-field model of the expected PW-RW search length.
//!
//! A search at some node follows one of its walks. With probability `Pn` the
//! registry is negative and the search jumps (1 hop), with probability `Pf`
//! it is a false positive and the whole walk is traversed in vain (`s` hops,
//! `s(1 - l)` under node churn), and with probability `Ps` it is a true
//! positive and the search ends after `E[T]` final steps. Solving the
//! resulting recursion gives
//!
//! ```text
//! L(s) = (Pn + s·Pf) / Ps + E[T]
//! ```
//!
//! Walk contents are modelled as independent draws: each walk position
//! holds an instance with probability `p_rw`, estimated from the network's
//! degree statistics.
//!
//! The second half of the module is the recomputation cost model: the
//! average cost per search `C_t(T)` of an interval of length `T` and the
//! interval `T_opt` minimizing it.

use crate::error::{Error, Result};
use crate::netgen::DegreeStats;
use crate::pwalks::Variant;

/// Churn scenario seen by the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Churn {
    /// Instances vanish with probability `d` and appear on empty nodes with
    /// probability `a` over the interval.
    Resources { d: f64, a: f64 },
    /// Nodes leave with probability `l` over the interval.
    Nodes { l: f64 },
}

impl Churn {
    pub fn none() -> Self {
        Churn::Resources { d: 0.0, a: 0.0 }
    }

    /// Resource churn with `a = p·d / (1 − p)`, conserving the expected
    /// number of instances.
    pub fn balanced(p: f64, d: f64) -> Result<Self> {
        let a = crate::dynamics::derive_appearance_prob(p, d)?;
        Ok(Churn::Resources { d, a })
    }

    pub fn level(&self) -> f64 {
        match *self {
            Churn::Resources { d, .. } => d,
            Churn::Nodes { l } => l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Network size `N`.
    pub nodes: usize,
    /// Walk length in hops.
    pub s: usize,
    /// Walks per node.
    pub w: usize,
    /// Per-node placement probability.
    pub p: f64,
    pub churn: Churn,
    pub variant: Variant,
    pub stats: DegreeStats,
}

impl ModelParams {
    /// Expected number of instances `R = N·p`.
    pub fn instances(&self) -> f64 {
        self.nodes as f64 * self.p
    }

    /// `R` rounded to the nearest count; the upper summation limit is
    /// `min(s, R)`.
    pub fn instance_bound(&self) -> usize {
        self.instances().round() as usize
    }

    pub fn with_s(&self, s: usize) -> Self {
        Self { s, ..*self }
    }

    fn validate(&self) -> Result<()> {
        let prob = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {x} is not a probability")))
            }
        };
        prob("p", self.p)?;
        match self.churn {
            Churn::Resources { d, a } => {
                prob("d", d)?;
                prob("a", a)?;
            }
            Churn::Nodes { l } => prob("l", l)?,
        }
        if self.s == 0 {
            return Err(Error::invalid("walk length must be at least one hop"));
        }
        if self.w == 0 {
            return Err(Error::invalid("need at least one walk per node"));
        }
        Ok(())
    }
}

/// Selection probabilities of the walk followed at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionProbs {
    /// A true positive is followed.
    pub ps: f64,
    /// A false positive is followed.
    pub pf: f64,
    /// A negative (true or false) is jumped over.
    pub pn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelResult {
    pub selection: SelectionProbs,
    pub p_rw: f64,
    pub p_tp: f64,
    pub p_fp: f64,
    /// Expected number of final steps.
    pub final_steps: f64,
    /// Expected search length in hops.
    pub length: f64,
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn ln_factorials(m: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    table.push(acc);
    for i in 1..=m {
        acc += (i as f64).ln();
        table.push(acc);
    }
    table
}

/// Binomial probability mass function `B(m, q, ·)` over `0..=m`, evaluated
/// in log space so that large `m` neither overflows nor underflows early.
pub fn binomial_pmf(m: usize, q: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; m + 1];
    if q <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if q >= 1.0 {
        pmf[m] = 1.0;
        return pmf;
    }
    let lf = ln_factorials(m);
    let (ln_q, ln_1mq) = (q.ln(), (-q).ln_1p());
    let logs: Vec<f64> = (0..=m)
        .map(|n| lf[m] - lf[n] - lf[m - n] + n as f64 * ln_q + (m - n) as f64 * ln_1mq)
        .collect();
    // Shifting by the largest term and renormalizing removes the rounding
    // accumulated in the log-factorial table.
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (slot, l) in pmf.iter_mut().zip(&logs) {
        *slot = (l - peak).exp();
    }
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|x| *x /= total);
    pmf
}

/// Probability that the next hop of a walk reaches an instance holder:
/// the share of positive endpoints among all endpoints except those of the
/// current node, times the chance of not stepping straight back.
pub fn visit_prob(stats: &DegreeStats, instances: f64) -> Result<f64> {
    if stats.k_rw <= 1.0 {
        return Err(Error::degenerate(format!(
            "expected walk degree {} leaves no forward move",
            stats.k_rw
        )));
    }
    if stats.endpoints <= stats.k_rw {
        return Err(Error::degenerate("fewer endpoints than the walk degree"));
    }
    if instances < 0.0 {
        return Err(Error::invalid("negative instance count"));
    }
    let positive_share = instances * stats.kave / (stats.endpoints - stats.k_rw);
    let forward = (stats.k_rw - 1.0) / stats.k_rw;
    Ok(clamp_unit(positive_share * forward))
}

/// Distribution of the number of instances in a walk's registered range.
pub fn pw_instance_dist(s: usize, p_rw: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p_rw) {
        return Err(Error::invalid(format!("p_rw = {p_rw} is not a probability")));
    }
    Ok(binomial_pmf(s, p_rw))
}

/// Probability that a walk's query is a true positive under resource churn.
/// A walk that held `r` instances stays positive unless all `r` vanished and
/// none of the other `s − r` nodes gained one.
pub fn true_positive_prob(s: usize, instance_bound: usize, d: f64, a: f64, pw: &[f64]) -> f64 {
    (1..=s.min(instance_bound))
        .map(|r| {
            let all_gone = d.powi(r as i32);
            let refill = 1.0 - (1.0 - a).powi((s - r) as i32);
            pw[r] * ((1.0 - all_gone) + all_gone * refill)
        })
        .sum()
}

/// Probability that a walk's query is a true positive under node churn:
/// at least one of its `r` holders is still present.
pub fn true_positive_prob_nodes(s: usize, instance_bound: usize, l: f64, pw: &[f64]) -> f64 {
    (1..=s.min(instance_bound)).map(|r| pw[r] * (1.0 - l.powi(r as i32))).sum()
}

/// Probability of a false positive conditioned on not being a true positive.
pub fn false_positive_prob(p_tp: f64, pw0: f64) -> Result<f64> {
    if p_tp >= 1.0 {
        return Err(Error::degenerate("p_tp = 1 leaves nothing to condition on"));
    }
    Ok(clamp_unit((1.0 - pw0 - p_tp) / (1.0 - p_tp)))
}

/// Selection probabilities over the joint distribution of `i` true
/// positives and `j` false positives among the `w` walks of a node.
pub fn selection_probs(w: usize, p_tp: f64, p_fp: f64, variant: Variant) -> SelectionProbs {
    let tp = binomial_pmf(w, p_tp);
    let (mut ps, mut pf, mut pn) = (0.0, 0.0, 0.0);
    for (i, &tp_i) in tp.iter().enumerate() {
        let fp = binomial_pmf(w - i, p_fp);
        for (j, &fp_j) in fp.iter().enumerate() {
            let joint = tp_i * fp_j;
            match variant {
                Variant::ChooseFirst => {
                    let w = w as f64;
                    ps += joint * i as f64 / w;
                    pf += joint * j as f64 / w;
                    pn += joint * (w - (i + j) as f64) / w;
                }
                Variant::CheckFirst => {
                    if i + j == 0 {
                        pn += joint;
                    } else {
                        let pos = (i + j) as f64;
                        ps += joint * i as f64 / pos;
                        pf += joint * j as f64 / pos;
                    }
                }
            }
        }
    }
    SelectionProbs { ps, pf, pn }
}

/// Expected 0-based position of the first instance when `r` instances sit at
/// distinct uniformly random positions among `len` slots (choose-first
/// registered range `0..len`).
pub fn first_instance_offset(len: usize, r: usize) -> f64 {
    if r == 0 || r > len {
        return 0.0;
    }
    let (len_f, r_f) = (len as f64, r as f64);
    let mut none_before = 1.0;
    let mut expected = 0.0;
    for i in 0..=(len - r) {
        let here = r_f / (len_f - i as f64);
        expected += i as f64 * none_before * here;
        none_before *= 1.0 - here;
    }
    expected
}

/// Same quantity for the check-first range `1..=len`, written with its own
/// index limits.
pub fn first_instance_offset_shifted(len: usize, r: usize) -> f64 {
    if r == 0 || r > len {
        return 0.0;
    }
    let (len_f, r_f) = (len as f64, r as f64);
    let mut none_before = 1.0;
    let mut expected = 0.0;
    for i in 1..=(len - r + 1) {
        let here = r_f / (len_f - i as f64 + 1.0);
        expected += i as f64 * none_before * here;
        none_before *= 1.0 - here;
    }
    expected
}

/// Expected final steps in a walk of `s` hops holding `r` instances.
pub fn final_steps_given(s: usize, r: usize, variant: Variant) -> f64 {
    match variant {
        Variant::ChooseFirst => first_instance_offset(s, r),
        Variant::CheckFirst => first_instance_offset_shifted(s, r),
    }
}

/// Expected final steps of the successful traversal under resource churn,
/// conditioned on the walk holding at least one instance.
pub fn expected_final_steps(s: usize, instance_bound: usize, pw: &[f64], variant: Variant) -> Result<f64> {
    let top = s.min(instance_bound);
    if top < 1 {
        return Err(Error::degenerate("no instance can fall inside a walk"));
    }
    if pw[0] >= 1.0 {
        return Err(Error::degenerate("walks never hold an instance"));
    }
    let sum: f64 = (1..=top).map(|r| final_steps_given(s, r, variant) * pw[r]).sum();
    Ok(sum / (1.0 - pw[0]))
}

/// Probability that a node reached by a walk is still active.
pub fn active_visit_prob(stats: &DegreeStats, nodes: usize, l: f64) -> Result<f64> {
    if stats.endpoints <= stats.k_rw {
        return Err(Error::degenerate("fewer endpoints than the walk degree"));
    }
    Ok(clamp_unit(nodes as f64 * (1.0 - l) * stats.kave / (stats.endpoints - stats.k_rw)))
}

/// Expected final steps under node churn. The number `u` of active nodes in
/// the final walk is binomial over the walk's `s` positions; given `u`, the
/// instance count is binomial over those `u` nodes.
///
/// For check-first, the per-`(u, r)` term uses the registered range shifted
/// by one position, as in the resource-churn case.
pub fn expected_final_steps_nodes(
    s: usize,
    instance_bound: usize,
    stats: &DegreeStats,
    nodes: usize,
    l: f64,
    p_rw: f64,
    variant: Variant,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::invalid(format!("l = {l} is not a probability")));
    }
    let active = binomial_pmf(s, active_visit_prob(stats, nodes, l)?);
    if active[0] >= 1.0 {
        return Err(Error::degenerate("no walk keeps an active node"));
    }
    let mut expected = 0.0;
    let mut usable = false;
    for (u, &pw_u) in active.iter().enumerate().skip(1) {
        if pw_u == 0.0 {
            continue;
        }
        let given_u = binomial_pmf(u, p_rw);
        if given_u[0] >= 1.0 {
            continue;
        }
        let top = u.min(instance_bound);
        if top < 1 {
            continue;
        }
        usable = true;
        let sum: f64 = (1..=top).map(|r| final_steps_given(u, r, variant) * given_u[r]).sum();
        expected += pw_u * sum / (1.0 - given_u[0]);
    }
    if !usable {
        return Err(Error::degenerate("active walks never hold an instance"));
    }
    Ok(expected)
}

/// Expected search length for the given parameters.
pub fn expected_search_length(params: &ModelParams) -> Result<ModelResult> {
    params.validate()?;
    let s = params.s;
    let bound = params.instance_bound();
    let p_rw = visit_prob(&params.stats, params.instances())?;
    let pw = pw_instance_dist(s, p_rw)?;
    let p_tp = match params.churn {
        Churn::Resources { d, a } => true_positive_prob(s, bound, d, a, &pw),
        Churn::Nodes { l } => true_positive_prob_nodes(s, bound, l, &pw),
    };
    let p_fp = false_positive_prob(p_tp, pw[0])?;
    let selection = selection_probs(params.w, p_tp, p_fp, params.variant);
    if selection.ps <= 0.0 {
        return Err(Error::degenerate("true positives are never selected"));
    }
    let (final_steps, traversed) = match params.churn {
        Churn::Resources { .. } => (expected_final_steps(s, bound, &pw, params.variant)?, s as f64),
        Churn::Nodes { l } => (
            expected_final_steps_nodes(s, bound, &params.stats, params.nodes, l, p_rw, params.variant)?,
            s as f64 * (1.0 - l),
        ),
    };
    let length = search_length(&selection, traversed, final_steps);
    Ok(ModelResult { selection, p_rw, p_tp, p_fp, final_steps, length })
}

/// `(Pn + traversed·Pf) / Ps + E[T]`, where `traversed` is the expected
/// length of a fruitless traversal.
pub fn search_length(sel: &SelectionProbs, traversed: f64, final_steps: f64) -> f64 {
    (sel.pn + traversed * sel.pf) / sel.ps + final_steps
}

/// Exhaustive scan for the walk length minimizing the expected search
/// length. Lengths the model rejects are skipped; ties go to the smaller `s`.
pub fn optimal_walk_length<I>(params: &ModelParams, s_range: I) -> Result<(usize, f64)>
where
    I: IntoIterator<Item = usize>,
{
    let mut best: Option<(usize, f64)> = None;
    let mut last_err = None;
    for s in s_range {
        match expected_search_length(&params.with_s(s)) {
            Ok(res) => {
                if best.is_none_or(|(_, l)| res.length < l) {
                    best = Some((s, res.length));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::invalid("empty walk length range")))
}

/// One row of a placement-probability perturbation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationRow {
    pub c: f64,
    pub p: f64,
    /// Optimal walk length for the perturbed `p`.
    pub s_opt: usize,
    /// Expected length with `s` fixed at the unperturbed optimum.
    pub length_fixed: f64,
    /// Expected length at the perturbed optimum.
    pub length_adaptive: f64,
}

/// Scales the placement probability by each `c` in `c_values` and reports
/// the expected length at the baseline optimum and at the re-optimized
/// walk length. Resource churn is re-balanced for every perturbed `p`.
pub fn perturbation_sweep(
    base: &ModelParams,
    c_values: &[f64],
    s_range: std::ops::RangeInclusive<usize>,
) -> Result<(usize, Vec<PerturbationRow>)> {
    let (s_base, _) = optimal_walk_length(base, s_range.clone())?;
    let mut rows = Vec::with_capacity(c_values.len());
    for &c in c_values {
        if !(0.1..=2.0).contains(&c) {
            return Err(Error::invalid(format!("perturbation factor {c} outside [0.1, 2]")));
        }
        let p = base.p * c;
        let churn = match base.churn {
            Churn::Resources { d, .. } => Churn::balanced(p, d)?,
            nodes => nodes,
        };
        let params = ModelParams { p, churn, ..*base };
        let (s_opt, length_adaptive) = optimal_walk_length(&params, s_range.clone())?;
        let length_fixed = expected_search_length(&params.with_s(s_base))?.length;
        rows.push(PerturbationRow { c, p, s_opt, length_fixed, length_adaptive });
    }
    Ok((s_base, rows))
}

/// Relative increase `(L(x) − L(0)) / L(0)` of the expected length at fixed
/// walk length for each churn level `x` (of the same kind as `params.churn`).
pub fn relative_increase(params: &ModelParams, levels: &[f64]) -> Result<Vec<f64>> {
    let at = |x: f64| -> Result<f64> {
        let churn = match params.churn {
            Churn::Resources { .. } => Churn::balanced(params.p, x)?,
            Churn::Nodes { .. } => Churn::Nodes { l: x },
        };
        Ok(expected_search_length(&ModelParams { churn, ..*params })?.length)
    };
    let base = at(0.0)?;
    levels.iter().map(|&x| Ok((at(x)? - base) / base)).collect()
}

/// Slope of the least-squares line through the origin fitted to the relative
/// length increase against the churn level.
pub fn fit_slope(params: &ModelParams, levels: &[f64]) -> Result<f64> {
    let inc = relative_increase(params, levels)?;
    let sxx: f64 = levels.iter().map(|x| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs a non-zero churn level"));
    }
    let sxy: f64 = levels.iter().zip(&inc).map(|(x, y)| x * y).sum();
    Ok(sxy / sxx)
}

/// Inputs of the recomputation cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// Searches per node per time unit.
    pub lambda: f64,
    /// Departures (instances or nodes) per time unit.
    pub mu: f64,
    /// Slope of the relative length increase against the churn fraction.
    pub alpha: f64,
    /// Expected search length without churn.
    pub l0: f64,
}

/// Default `alpha` under resource churn.
pub const ALPHA_RESOURCES: f64 = 2.0;
/// Default `alpha` under node churn.
pub const ALPHA_NODES: f64 = 1.0;

/// Average total cost per search (messages) for an interval of length `t`:
/// the search itself plus its notification, with the search length growing
/// linearly as the churn fraction `μt/N` accumulates, plus the walk
/// recomputation cost `w(s + 1)` shared among the `λt` searches per node.
pub fn cost_curve(cost: &CostParams, nodes: usize, w: usize, s: usize, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::invalid(format!("interval length {t} must be positive")));
    }
    if cost.lambda <= 0.0 {
        return Err(Error::invalid("search rate must be positive"));
    }
    let growth = cost.l0 * cost.alpha * cost.mu / (2.0 * nodes as f64);
    let refresh = (w * (s + 1)) as f64 / cost.lambda;
    Ok((cost.l0 + 1.0) + growth * t + refresh / t)
}

/// Interval length minimizing [`cost_curve`].
pub fn optimal_interval(cost: &CostParams, nodes: usize, w: usize, s: usize) -> Result<f64> {
    for (name, x) in [("lambda", cost.lambda), ("mu", cost.mu), ("alpha", cost.alpha), ("l0", cost.l0)] {
        if x <= 0.0 {
            return Err(Error::invalid(format!("{name} must be positive for an optimal interval")));
        }
    }
    Ok((2.0 * nodes as f64 * (w * (s + 1)) as f64 / (cost.l0 * cost.alpha * cost.mu * cost.lambda)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf_stats() -> DegreeStats {
        // Degree statistics of a 10⁴-node preferential-attachment network.
        DegreeStats { nodes: 10_000, kave: 10.0, endpoints: 100_000.0, k_rw: 26.0 }
    }

    fn params(variant: Variant, s: usize, w: usize, churn: Churn) -> ModelParams {
        ModelParams { nodes: 10_000, s, w, p: 0.01, churn, variant, stats: sf_stats() }
    }

    #[test]
    fn visit_prob_cases() {
        let regular = DegreeStats::regular(10_000, 10);
        assert_eq!(visit_prob(&regular, 0.0).unwrap(), 0.0);
        let p = visit_prob(&regular, 100.0).unwrap();
        assert!((p - 1000.0 / 99_990.0 * 0.9).abs() < 1e-15);
        assert!((p - 0.009_000_9).abs() < 1e-7);
        let dense = DegreeStats::regular(1_000, 999);
        assert_eq!(visit_prob(&dense, 5_000.0).unwrap(), 1.0);
        let line = DegreeStats { nodes: 2, kave: 1.0, endpoints: 2.0, k_rw: 1.0 };
        assert!(visit_prob(&line, 1.0).is_err());
    }

    #[test]
    fn pw_distribution_cases() {
        assert_eq!(pw_instance_dist(7, 0.0).unwrap()[0], 1.0);
        let fair = pw_instance_dist(2, 0.5).unwrap();
        for (got, want) in fair.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
        let pw0 = pw_instance_dist(10, 0.009).unwrap()[0];
        assert!((pw0 - 0.991f64.powi(10)).abs() < 1e-14);
        assert!((pw0 - 0.9136).abs() < 5e-5);
        assert!(pw_instance_dist(3, 1.2).is_err());
    }

    #[test]
    fn binomial_handles_large_m() {
        let pmf = binomial_pmf(1_000, 0.3);
        assert!(pmf.iter().all(|x| x.is_finite()));
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn true_positive_limits() {
        let pw = pw_instance_dist(10, 0.009).unwrap();
        let static_tp = true_positive_prob(10, 100, 0.0, 0.0, &pw);
        assert!((static_tp - (1.0 - pw[0])).abs() < 1e-15);
        assert_eq!(true_positive_prob(10, 100, 1.0, 0.0, &pw), 0.0);
        assert!((true_positive_prob_nodes(10, 100, 0.0, &pw) - (1.0 - pw[0])).abs() < 1e-15);
        assert_eq!(true_positive_prob_nodes(10, 100, 1.0, &pw), 0.0);
    }

    #[test]
    fn false_positive_cases() {
        let pw0 = 0.9;
        assert_eq!(false_positive_prob(1.0 - pw0, pw0).unwrap(), 0.0);
        assert!((false_positive_prob(0.05, 0.9).unwrap() - 0.05 / 0.95).abs() < 1e-15);
        assert!((false_positive_prob(0.0, 0.9).unwrap() - 0.1).abs() < 1e-15);
        assert!(false_positive_prob(1.0, 0.0).is_err());
    }

    #[test]
    fn selection_single_walk_matches_expansion() {
        let (tp, fp) = (0.2, 0.1);
        for variant in [Variant::ChooseFirst, Variant::CheckFirst] {
            let sel = selection_probs(1, tp, fp, variant);
            assert!((sel.ps - tp).abs() < 1e-15);
            assert!((sel.pf - (1.0 - tp) * fp).abs() < 1e-15);
            assert!((sel.pn - (1.0 - sel.ps - sel.pf)).abs() < 1e-15);
        }
    }

    #[test]
    fn choose_first_ps_is_w_invariant() {
        for w in 1..=10 {
            let sel = selection_probs(w, 0.2, 0.1, Variant::ChooseFirst);
            assert!((sel.ps - 0.2).abs() < 1e-14, "w={w}: {}", sel.ps);
        }
    }

    #[test]
    fn check_first_two_walks_enumerated() {
        let sel = selection_probs(2, 0.2, 0.1, Variant::CheckFirst);
        assert!((sel.ps - 0.344).abs() < 1e-14);
        assert!((sel.pf - 0.1376).abs() < 1e-14);
        assert!((sel.pn - 0.5184).abs() < 1e-14);
    }

    #[test]
    fn final_step_positions() {
        for s in 1..=20 {
            assert_eq!(final_steps_given(s, s, Variant::ChooseFirst), 0.0);
        }
        assert!((final_steps_given(2, 1, Variant::ChooseFirst) - 0.5).abs() < 1e-15);
        assert!((final_steps_given(2, 1, Variant::CheckFirst) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn shifted_range_adds_one_step() {
        for s in 1..=50 {
            for r in 1..=s {
                let diff = final_steps_given(s, r, Variant::CheckFirst)
                    - final_steps_given(s, r, Variant::ChooseFirst);
                assert!((diff - 1.0).abs() < 1e-12, "s={s} r={r}");
            }
        }
    }

    #[test]
    fn first_offset_matches_hypergeometric_mean() {
        // The first of r distinct uniform positions among len sits at (len−r)/(r+1) on average.
        for len in 1..=40 {
            for r in 1..=len {
                let want = (len - r) as f64 / (r + 1) as f64;
                assert!((first_instance_offset(len, r) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn expected_final_steps_rejections() {
        let pw = pw_instance_dist(5, 0.0).unwrap();
        assert!(expected_final_steps(5, 100, &pw, Variant::ChooseFirst).is_err());
        let pw = pw_instance_dist(5, 0.1).unwrap();
        assert!(expected_final_steps(5, 0, &pw, Variant::ChooseFirst).is_err());
    }

    #[test]
    fn static_length_has_no_false_positives() {
        let res = expected_search_length(&params(Variant::ChooseFirst, 14, 5, Churn::none())).unwrap();
        assert!(res.selection.pf.abs() < 1e-15);
        let want = res.selection.pn / res.selection.ps + res.final_steps;
        assert!((res.length - want).abs() < 1e-12);
    }

    #[test]
    fn node_churn_at_zero_reduces_to_resource_form() {
        for variant in [Variant::ChooseFirst, Variant::CheckFirst] {
            let r = expected_search_length(&params(variant, 12, 5, Churn::none())).unwrap();
            let n = expected_search_length(&params(variant, 12, 5, Churn::Nodes { l: 0.0 })).unwrap();
            assert_eq!(r.selection, n.selection);
            assert_eq!(r.final_steps, n.final_steps);
            assert_eq!(r.length, n.length);
        }
    }

    #[test]
    fn node_churn_rejects_total_departure() {
        let stats = sf_stats();
        let p_rw = visit_prob(&stats, 100.0).unwrap();
        assert!(expected_final_steps_nodes(10, 100, &stats, 10_000, 1.0, p_rw, Variant::ChooseFirst).is_err());
        assert!(expected_search_length(&params(Variant::ChooseFirst, 10, 5, Churn::Nodes { l: 1.0 })).is_err());
    }

    #[test]
    fn nothing_to_find_is_rejected() {
        let mut p = params(Variant::ChooseFirst, 10, 5, Churn::none());
        p.p = 0.0;
        assert!(expected_search_length(&p).is_err());
    }

    #[test]
    fn optimal_length_prefers_smaller_on_ties_and_scans_range() {
        let p = params(Variant::ChooseFirst, 1, 5, Churn::balanced(0.01, 0.3).unwrap());
        let (s_opt, l_opt) = optimal_walk_length(&p, 1..=60).unwrap();
        for s in 1..=60 {
            assert!(expected_search_length(&p.with_s(s)).unwrap().length >= l_opt);
        }
        assert!(expected_search_length(&p.with_s(s_opt)).unwrap().length == l_opt);
        assert!(optimal_walk_length(&p, std::iter::empty()).is_err());
    }

    #[test]
    fn monotone_toy_curve_picks_range_end() {
        // With a high instance density every longer walk helps within a short range.
        let p = params(Variant::ChooseFirst, 1, 5, Churn::none());
        let (s_opt, _) = optimal_walk_length(&p, 1..=5).unwrap();
        assert_eq!(s_opt, 5);
    }

    #[test]
    fn cost_examples() {
        let cost = CostParams { lambda: 0.1, mu: 1.0, alpha: 2.0, l0: 10.0 };
        let t_opt = optimal_interval(&cost, 10_000, 5, 6).unwrap();
        assert!((t_opt - 350_000f64.sqrt()).abs() < 1e-9);
        let c = cost_curve(&cost, 10_000, 5, 6, t_opt).unwrap();
        assert!((c - (11.0 + 2.0 * 350_000f64.sqrt() / 1000.0)).abs() < 1e-9);
        assert!((c - 12.18).abs() < 0.01);

        let faster = CostParams { lambda: 0.4, ..cost };
        assert!((optimal_interval(&faster, 10_000, 5, 6).unwrap() - t_opt / 2.0).abs() < 1e-9);

        let frozen = CostParams { mu: 0.0, ..cost };
        assert!(optimal_interval(&frozen, 10_000, 5, 6).is_err());
        let mut prev = f64::INFINITY;
        for t in [1.0, 10.0, 100.0, 1e4] {
            let c = cost_curve(&frozen, 10_000, 5, 6, t).unwrap();
            assert!((c - (11.0 + 35.0 / (0.1 * t))).abs() < 1e-9);
            assert!(c < prev);
            prev = c;
        }
        assert!(cost_curve(&cost, 10_000, 5, 6, 0.0).is_err());
    }

    #[test]
    fn cost_slope_at_large_t() {
        let cost = CostParams { lambda: 0.1, mu: 1.0, alpha: 2.0, l0: 10.0 };
        let (t1, t2) = (1e9, 2e9);
        let slope = (cost_curve(&cost, 10_000, 5, 6, t2).unwrap()
            - cost_curve(&cost, 10_000, 5, 6, t1).unwrap())
            / (t2 - t1);
        assert!((slope - 10.0 * 2.0 / 20_000.0).abs() < 1e-12);
    }

    #[test]
    fn perturbation_identity_at_baseline() {
        let base = params(Variant::CheckFirst, 1, 5, Churn::balanced(0.01, 0.3).unwrap());
        let (_, rows) = perturbation_sweep(&base, &[1.0], 1..=60).unwrap();
        assert_eq!(rows[0].length_fixed, rows[0].length_adaptive);
        assert!(perturbation_sweep(&base, &[3.0], 1..=60).is_err());
    }
}
