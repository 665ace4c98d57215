mod common;

use proptest::prelude::*;
use rplsim::forwarding::DropReason;
use rplsim::simulator::run;

fn hops_of(
    mop: u8,
    edges: &common::Edges,
    src: u32,
    dst: u32,
    seed: u64,
) -> (usize, std::collections::BTreeMap<u32, u32>) {
    let doc = common::with_flows(
        common::scenario_doc(mop, edges, 120.0, seed),
        &[(src, dst, 100.0, 1)],
    );
    let r = run(&common::scenario(&doc));
    let f = r.metrics.flow(0).unwrap();
    assert_eq!(f.delivered, 1, "mop {mop} {src}->{dst}: {f:?}");
    assert_eq!(f.dropped.get(&DropReason::HopLimitExceeded), None);
    (
        *f.hops.keys().next().unwrap() as usize,
        common::parent_tree(&r.nodes),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn p2p_hops_match_tree_oracle(seed in any::<u64>(), n in 3u32..30, a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let edges = common::random_tree(n, &mut common::rng(seed));
        let src = a.index(n as usize - 1) as u32 + 2;
        let dst = b.index(n as usize - 1) as u32 + 2;
        prop_assume!(src != dst);
        let (h1, tree) = hops_of(1, &edges, src, dst, seed);
        let (h2, _) = hops_of(2, &edges, src, dst, seed);
        let nca = common::nca(&tree, src, dst);
        let (ds, dd, dn) = (common::depth(&tree, src), common::depth(&tree, dst), common::depth(&tree, nca));
        prop_assert_eq!(h2, ds + dd - 2 * dn);
        if nca == dst {
            // An ancestor on the upward path takes delivery before the root.
            prop_assert_eq!(h1, ds - dd);
            prop_assert_eq!(h1, h2);
        } else {
            prop_assert_eq!(h1, ds + dd);
            prop_assert!(h2 <= h1);
            prop_assert_eq!(h1 == h2, nca == 1);
        }
    }

    #[test]
    fn mp2p_takes_depth_hops(seed in any::<u64>(), n in 2u32..30, mop in 0u8..=2) {
        let edges = common::random_connected(n, 0.1, &mut common::rng(seed));
        let (h, tree) = hops_of(mop, &edges, n, 1, seed);
        prop_assert_eq!(h, common::depth(&tree, n));
        prop_assert_eq!(h as u32, common::bfs_depth(&edges, 1)[&n]);
    }
}

#[test]
fn mop0_cannot_reach_down() {
    let doc = common::with_flows(
        common::scenario_doc(0, &common::reference_edges(), 60.0, 1),
        &[(4, 5, 30.0, 2), (1, 7, 30.0, 2)],
    );
    let r = run(&common::scenario(&doc));
    for flow in [0, 1] {
        let f = r.metrics.flow(flow).unwrap();
        assert_eq!(
            (f.delivered, f.dropped.get(&DropReason::NoRoute).copied()),
            (0, Some(2))
        );
    }
    // Node 4 hands the packet up; the root has nowhere to send it.
    let trace = rplsim::trace::render(&r.trace);
    assert_eq!(common::data_tx_nodes(&trace, 0), [4, 2, 4, 2]);
}

#[test]
fn mop1_p2p_turns_at_root() {
    let doc = common::with_flows(
        common::scenario_doc(1, &common::reference_edges(), 60.0, 1),
        &[(4, 5, 30.0, 1)],
    );
    let r = run(&common::scenario(&doc));
    let trace = rplsim::trace::render(&r.trace);
    assert_eq!(common::data_tx_nodes(&trace, 0), [4, 2, 1, 2]);
    assert_eq!(r.metrics.flow(0).unwrap().delivered, 1);
}

#[test]
fn loss_is_accounted_per_flow() {
    let mut doc = common::with_flows(
        common::scenario_doc(2, &common::reference_edges(), 200.0, 4),
        &[(7, 5, 60.0, 100)],
    );
    for link in doc["links"].as_array_mut().unwrap() {
        link["loss"] = 0.2.into();
    }
    let r = run(&common::scenario(&doc));
    let f = r.metrics.flow(0).unwrap();
    assert_eq!(f.sent, 100);
    assert!(f.dropped.get(&DropReason::LinkLoss).copied().unwrap_or(0) > 0);
    assert_eq!(f.sent, f.delivered + f.dropped_total() + f.in_flight);
    assert!(r.metrics.counters(rplsim::messages::MessageKind::Data).lost > 0);
}
