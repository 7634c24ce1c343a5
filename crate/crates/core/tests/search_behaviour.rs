//! Search executions: hand-traced instances, hop accounting and campaign
//! level properties.

use proptest::prelude::*;
use pwrw_core::dynamics::{churn_nodes, place_resources, ActiveSet, ChurnSpec, Dynamics};
use pwrw_core::netgen::generate;
use pwrw_core::pwalks::precompute_walks;
use pwrw_core::rng;
use pwrw_core::search::{pwrw_search, run_campaign, run_searches, rw_search, CampaignOptions};
use pwrw_core::{Network, NodeId, Placement, ResourceId, Snapshot, TopologyKind, Variant, WalkTable};

fn cycle(n: usize) -> Network {
    let edges: Vec<(NodeId, NodeId)> = (0..n as NodeId).map(|v| (v, (v + 1) % n as NodeId)).collect();
    Network::from_edges(n, &edges, TopologyKind::Regular).unwrap()
}

fn placement(holders: &[NodeId], n: usize) -> Placement {
    let mut flags = vec![false; n];
    for &v in holders {
        flags[v as usize] = true;
    }
    Placement::from_holders(ResourceId(0), flags)
}

/// Every node of the 5-cycle owns two copies of the walk `v, v+1, v+2`.
fn forward_table(net: &Network, p0: &Placement, variant: Variant) -> WalkTable {
    let walks: Vec<Vec<Vec<NodeId>>> = (0..5)
        .map(|v| {
            let walk = vec![v, (v + 1) % 5, (v + 2) % 5];
            vec![walk.clone(), walk]
        })
        .collect();
    WalkTable::from_walks(net, p0, &walks, variant).unwrap()
}

#[test]
fn five_cycle_trace_with_one_stale_walk() {
    // At t = 0 nodes 1 and 3 hold the resource; at t = T only node 3 does.
    // The walk 0-1-2 still advertises the instance on node 1.
    //
    // From node 0: positive registry -> check 0, step to 1, step to 2 with no
    // instance (2 unnecessary steps). From node 2 the walk 2-3-4 is positive:
    // check 2, step to 3 and stop (1 final step).
    let net = cycle(5);
    let p0 = placement(&[1, 3], 5);
    let truth = Snapshot::unchanged(&placement(&[3], 5));
    for variant in [Variant::ChooseFirst, Variant::CheckFirst] {
        let table = forward_table(&net, &p0, variant);
        for seed in 0..8 {
            let out = pwrw_search(&net, &table, &truth, 0, 1_000, &mut rng::seeded(seed)).unwrap();
            assert!(out.found);
            assert_eq!(out.length, 3, "{variant:?}");
            assert_eq!(out.jumps, 0);
            assert_eq!(out.unnecessary_steps, 2);
            assert_eq!(out.final_steps, 1);
            assert_eq!(out.walks_traversed, 2);
            assert_eq!(out.fallback_hops, 0);
        }
    }
}

#[test]
fn five_cycle_trace_with_a_jump() {
    // From node 4, choose-first registers {4, 0}: negative, jump to node 1.
    // The walk 1-2-3 registers {1, 2}, still positive from node 1's stale
    // instance: check 1, step to 2, step to 3 and stop.
    let net = cycle(5);
    let p0 = placement(&[1, 3], 5);
    let truth = Snapshot::unchanged(&placement(&[3], 5));
    let table = forward_table(&net, &p0, Variant::ChooseFirst);
    let out = pwrw_search(&net, &table, &truth, 4, 1_000, &mut rng::seeded(5)).unwrap();
    assert_eq!((out.found, out.length, out.jumps, out.unnecessary_steps, out.final_steps), (true, 3, 1, 0, 2));

    // Check-first registers {0, 1} from node 4: positive but stale, so the
    // search walks 4-0-1 fruitlessly, then 1-2-3 as above.
    let table = forward_table(&net, &p0, Variant::CheckFirst);
    let out = pwrw_search(&net, &table, &truth, 4, 1_000, &mut rng::seeded(5)).unwrap();
    assert_eq!((out.found, out.length, out.jumps, out.unnecessary_steps, out.final_steps), (true, 4, 0, 2, 2));
}

#[test]
fn static_walk_with_instance_at_position_two() {
    let edges = [(0, 1), (1, 2), (2, 3)];
    let net = Network::from_edges(4, &edges, TopologyKind::Regular).unwrap();
    let p0 = placement(&[2], 4);
    // Walks of three hops, so position 2 lies inside the registered range.
    let walks = vec![
        vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3]],
        vec![vec![1, 2, 3, 2], vec![1, 2, 3, 2]],
        vec![vec![2, 3, 2, 1], vec![2, 3, 2, 1]],
        vec![vec![3, 2, 1, 0], vec![3, 2, 1, 0]],
    ];
    let table = WalkTable::from_walks(&net, &p0, &walks, Variant::ChooseFirst).unwrap();
    let truth = Snapshot::unchanged(&p0);
    let out = pwrw_search(&net, &table, &truth, 0, 100, &mut rng::seeded(1)).unwrap();
    assert_eq!((out.found, out.final_steps, out.unnecessary_steps, out.length), (true, 2, 0, 2));
}

#[test]
fn random_walk_on_a_path() {
    let net = Network::from_edges(2, &[(0, 1)], TopologyKind::Regular).unwrap();
    let truth = Snapshot::unchanged(&placement(&[1], 2));
    let out = rw_search(&net, &truth, 0, 10, &mut rng::seeded(3)).unwrap();
    assert_eq!((out.found, out.length), (true, 1));
    let out = rw_search(&net, &truth, 1, 10, &mut rng::seeded(3)).unwrap();
    assert_eq!((out.found, out.length), (true, 0));
}

#[test]
fn departed_walk_falls_back_to_a_neighbour() {
    // Node 0's walks run through departed nodes only, so the jump becomes a
    // single hop to the one active neighbour (node 4), which holds the
    // resource but is only checked once a traversal starts there.
    let net = cycle(5);
    let p0 = placement(&[4], 5);
    let table = forward_table(&net, &p0, Variant::ChooseFirst);
    let truth = Snapshot::with_active(p0.clone(), ActiveSet::from_flags(vec![true, false, false, true, true], 0.4));
    let out = pwrw_search(&net, &table, &truth, 0, 100, &mut rng::seeded(2)).unwrap();
    assert!(out.found);
    assert_eq!(out.fallback_hops, 1);
    assert_eq!(out.jumps, 1);
    assert_eq!(out.length, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hop_accounting_holds_for_every_search(
        seed in 0u64..1_000,
        s in 1usize..25,
        w in 2usize..6,
        level in 0.0f64..0.8,
        node_churn in any::<bool>(),
        check_first in any::<bool>(),
    ) {
        let net = generate(TopologyKind::ScaleFree, 400, 6, seed).unwrap();
        let p0 = place_resources(400, 0.02, seed).unwrap();
        let variant = if check_first { Variant::CheckFirst } else { Variant::ChooseFirst };
        let table = precompute_walks(&net, &p0, w, s, variant, seed).unwrap();
        let dynamics = if node_churn {
            Dynamics::Nodes { l: level }
        } else {
            Dynamics::Resources(ChurnSpec::balanced(0.02, level).unwrap())
        };
        let opts = CampaignOptions { searches: 200, cutoff: 5_000, keep_records: true };
        let res = run_campaign(&net, &table, &p0, &dynamics, &opts, true, seed).unwrap();
        for rec in &res.records {
            prop_assert!(rec.pwrw.is_balanced());
            prop_assert!(rec.pwrw.fallback_hops <= rec.pwrw.jumps);
            if let Some(rw) = rec.rw {
                prop_assert!(rw.is_balanced());
            }
        }
    }
}

#[test]
fn static_choose_first_never_wastes_steps() {
    let net = generate(TopologyKind::ScaleFree, 2_000, 10, 4).unwrap();
    let p0 = place_resources(2_000, 0.01, 4).unwrap();
    let table = precompute_walks(&net, &p0, 5, 12, Variant::ChooseFirst, 4).unwrap();
    let opts = CampaignOptions { searches: 2_000, cutoff: 200_000, keep_records: true };
    let res = run_campaign(&net, &table, &p0, &Dynamics::Static, &opts, false, 4).unwrap();
    assert!(res.records.iter().all(|r| r.pwrw.unnecessary_steps == 0));
    assert_eq!(res.pwrw.failures, 0);

    let active = churn_nodes(2_000, 0.0, 9).unwrap();
    let truth = Snapshot::with_active(p0.clone(), active);
    let res = run_searches(&net, &table, &truth, None, &opts, 5).unwrap();
    assert!(res.records.iter().all(|r| r.pwrw.unnecessary_steps == 0));
}

/// Mean lengths of `campaigns` independent placements at walk length `s`.
fn campaign_means(w: usize, variant: Variant, campaigns: u64) -> Vec<f64> {
    let net = generate(TopologyKind::ScaleFree, 3_000, 10, 77).unwrap();
    (0..campaigns)
        .map(|c| {
            let p0 = place_resources(3_000, 0.01, 1_000 + c).unwrap();
            let table = precompute_walks(&net, &p0, w, 10, variant, 2_000 + c).unwrap();
            let dynamics = Dynamics::Resources(ChurnSpec::balanced(0.01, 0.3).unwrap());
            let opts = CampaignOptions { searches: 4_000, cutoff: 300_000, keep_records: false };
            run_campaign(&net, &table, &p0, &dynamics, &opts, false, 3_000 + c).unwrap().pwrw.mean()
        })
        .collect()
}

fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn choose_first_is_insensitive_to_the_number_of_walks() {
    let (m2, e2) = mean_and_error(&campaign_means(2, Variant::ChooseFirst, 10));
    let (m8, e8) = mean_and_error(&campaign_means(8, Variant::ChooseFirst, 10));
    let sigma = (e2 * e2 + e8 * e8).sqrt();
    assert!((m2 - m8).abs() <= 2.0 * sigma, "w=2: {m2} ± {e2}, w=8: {m8} ± {e8}");
}

#[test]
fn check_first_is_not_slower_than_choose_first() {
    let (choose, e1) = mean_and_error(&campaign_means(5, Variant::ChooseFirst, 10));
    let (check, e2) = mean_and_error(&campaign_means(5, Variant::CheckFirst, 10));
    assert!(check <= choose + 2.0 * (e1 * e1 + e2 * e2).sqrt(), "check-first {check}, choose-first {choose}");
}

#[test]
fn campaigns_are_reproducible_and_thread_independent() {
    let net = generate(TopologyKind::ErdosRenyi, 1_000, 8, 3).unwrap();
    let p0 = place_resources(1_000, 0.01, 3).unwrap();
    let table = precompute_walks(&net, &p0, 4, 9, Variant::CheckFirst, 3).unwrap();
    let dynamics = Dynamics::Nodes { l: 0.3 };
    let opts = CampaignOptions { searches: 1_000, cutoff: 100_000, keep_records: true };
    let a = run_campaign(&net, &table, &p0, &dynamics, &opts, true, 8).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| run_campaign(&net, &table, &p0, &dynamics, &opts, true, 8).unwrap());
    assert_eq!(a.records, b.records);
    assert_eq!(a.pwrw, b.pwrw);
}
