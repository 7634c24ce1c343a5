//! Overlay generation end to end: degree statistics, simplicity,
//! connectivity and the edge-list round trip.

use std::collections::HashSet;
use std::io::BufReader;

use pwrw_core::netgen::{degree_stats, generate};
use pwrw_core::{Network, TopologyKind};

fn assert_simple(net: &Network) {
    let mut seen = HashSet::new();
    for (u, v) in net.edges() {
        assert_ne!(u, v, "self-loop at {u}");
        assert!(seen.insert((u.min(v), u.max(v))), "multi-edge {u}-{v}");
    }
}

#[test]
fn overlays_have_the_requested_shape() {
    for kind in [TopologyKind::Regular, TopologyKind::ErdosRenyi, TopologyKind::ScaleFree] {
        let net = generate(kind, 10_000, 10, 1).unwrap();
        assert_simple(&net);
        assert!(net.is_connected(), "{kind}");
        assert!(net.node_count() >= 9_900, "{kind}: {} nodes", net.node_count());
        let stats = degree_stats(&net).unwrap();
        assert!((9.5..=10.5).contains(&stats.kave), "{kind}: kave {}", stats.kave);
        // The walk degree is the mean degree of the node at the end of an edge.
        let sum_sq: f64 = net.degrees().iter().map(|&k| (k * k) as f64).sum();
        assert!((stats.k_rw - sum_sq / stats.endpoints).abs() < 1e-9);
    }
}

#[test]
fn scale_free_overlay_is_heavy_tailed() {
    let net = generate(TopologyKind::ScaleFree, 10_000, 10, 1).unwrap();
    let stats = degree_stats(&net).unwrap();
    let max = *net.degrees().iter().max().unwrap() as f64;
    assert!(max / stats.kave > 5.0);
    assert!(stats.k_rw > 2.0 * stats.kave);
}

#[test]
fn erdos_renyi_degrees_are_poisson_like() {
    let net = generate(TopologyKind::ErdosRenyi, 10_000, 10, 1).unwrap();
    let d: Vec<f64> = net.degrees().iter().map(|&k| k as f64).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
    assert!((var - mean).abs() <= 0.2 * mean, "mean {mean} variance {var}");
}

#[test]
fn generation_is_reproducible() {
    let a = generate(TopologyKind::ScaleFree, 3_000, 10, 9).unwrap();
    let b = generate(TopologyKind::ScaleFree, 3_000, 10, 9).unwrap();
    let c = generate(TopologyKind::ScaleFree, 3_000, 10, 10).unwrap();
    assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
    assert_ne!(a.edges().collect::<Vec<_>>(), c.edges().collect::<Vec<_>>());
}

#[test]
fn edge_list_round_trip_through_a_file() {
    let net = generate(TopologyKind::ErdosRenyi, 2_000, 8, 5).unwrap();
    let file = tempfile::NamedTempFile::new().unwrap();
    net.write_edge_list(file.as_file(), 5).unwrap();
    let (back, seed) = Network::read_edge_list(BufReader::new(file.reopen().unwrap())).unwrap();
    assert_eq!(seed, 5);
    assert_eq!(back.node_count(), net.node_count());
    assert_eq!(back.kind(), net.kind());
    assert_eq!(back.edges().collect::<Vec<_>>(), net.edges().collect::<Vec<_>>());
}
