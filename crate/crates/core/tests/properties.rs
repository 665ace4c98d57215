mod common;

use proptest::prelude::*;
use rplsim::addressing::{derive_global, derive_link_local, global_to_link_local, Address, NodeId};
use rplsim::messages::{
    DaoMessage, DataPacket, DioMessage, DisMessage, Message, MessageKind, Mop, Rank, RouteStep,
    SourceRouteHeader,
};
use rplsim::simulator::run;
use rplsim::trace::TraceRecord;

fn node_id() -> impl Strategy<Value = NodeId> {
    (1u32..=0xffff).prop_map(|n| NodeId::new(n).unwrap())
}

fn ll() -> impl Strategy<Value = Address> {
    node_id().prop_map(derive_link_local)
}

fn global() -> impl Strategy<Value = Address> {
    ll().prop_map(|a| derive_global(a).unwrap())
}

fn mop() -> impl Strategy<Value = Mop> {
    (0u8..=2).prop_map(|m| Mop::try_from(m).unwrap())
}

fn message() -> impl Strategy<Value = Message> {
    prop_oneof![
        (global(), any::<u8>(), any::<u16>(), mop(), ll()).prop_map(
            |(dodag_id, version, rank, mop, sender_ll)| {
                Message::Dio(DioMessage {
                    dodag_id,
                    version,
                    rank: Rank::new(rank),
                    mop,
                    sender_ll,
                })
            }
        ),
        ll().prop_map(|sender_ll| Message::Dis(DisMessage { sender_ll })),
        (
            global(),
            proptest::option::of(global()),
            ll(),
            prop_oneof![ll(), global()]
        )
            .prop_map(|(advertised_dest, dao_parent, sender_ll, final_dest)| {
                Message::Dao(DaoMessage {
                    advertised_dest,
                    dao_parent,
                    sender_ll,
                    final_dest,
                })
            }),
        (
            any::<u32>(),
            global(),
            global(),
            any::<u8>(),
            proptest::collection::vec(global(), 0..6),
            any::<prop::sample::Index>()
        )
            .prop_map(|(flow, src, dst, hl, hops, cursor)| {
                let mut p = DataPacket::new(flow, src, dst);
                p.hop_limit = hl;
                if !hops.is_empty() {
                    let mut h = SourceRouteHeader::new(hops.clone()).unwrap();
                    for hop in &hops[..cursor.index(hops.len() + 1)] {
                        h.advance(*hop).unwrap();
                    }
                    p.route = Some(h);
                }
                Message::Data(p)
            }),
    ]
}

proptest! {
    #[test]
    fn messages_round_trip(msg in message()) {
        let text = msg.to_string();
        prop_assert_eq!(Message::parse(msg.kind(), &text).unwrap(), msg);
    }

    #[test]
    fn address_plan_round_trips(id in node_id()) {
        let l = derive_link_local(id);
        let g = derive_global(l).unwrap();
        prop_assert_eq!(global_to_link_local(g).unwrap(), l);
        prop_assert_eq!(l.node_id(), Some(id));
        prop_assert_eq!(g.node_id(), Some(id));
        prop_assert_eq!(l.suffix(), g.suffix());
        prop_assert_eq!(l.to_string(), common::ll(id.get()));
        prop_assert_eq!(g.to_string(), common::global(id.get()));
        prop_assert_eq!(l.to_string().parse::<Address>().unwrap(), l);
    }

    #[test]
    fn derivation_rejects_wrong_role(id in node_id()) {
        let g = derive_global(derive_link_local(id)).unwrap();
        prop_assert!(derive_global(g).is_err());
        prop_assert!(global_to_link_local(derive_link_local(id)).is_err());
    }

    #[test]
    fn source_route_visits_each_hop_once(hops in proptest::collection::vec(global(), 1..10)) {
        let mut h = SourceRouteHeader::new(hops.clone()).unwrap();
        for i in 0..hops.len() {
            let step = h.advance(hops[i]).unwrap();
            if i + 1 < hops.len() {
                prop_assert_eq!(step, RouteStep::Next(hops[i + 1]));
            } else {
                prop_assert_eq!(step, RouteStep::Done);
            }
        }
        prop_assert_eq!(h.cursor(), hops.len());
    }

    #[test]
    fn off_route_node_is_refused(hops in proptest::collection::vec(global(), 1..6), stranger in global()) {
        prop_assume!(hops[0] != stranger);
        let mut h = SourceRouteHeader::new(hops).unwrap();
        prop_assert!(h.advance(stranger).is_err());
        prop_assert_eq!(h.cursor(), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lossy_runs_keep_invariants(seed in any::<u64>(), n in 2u32..25, mop in 0u8..=2, loss in 0.0f64..0.3) {
        let mut r = common::rng(seed);
        let edges = common::random_connected(n, 0.1, &mut r);
        let mut doc = common::scenario_doc(mop, &edges, 60.0, seed);
        for link in doc["links"].as_array_mut().unwrap() {
            link["loss"] = loss.into();
        }
        let doc = common::with_flows(doc, &[(n, 1, 20.0, 5), (1, n, 21.0, 5), (n, n / 2 + 1, 22.0, 5)]);
        let result = run(&common::scenario(&doc));
        for (id, f) in &result.metrics.flows {
            prop_assert_eq!(f.sent, f.delivered + f.dropped_total() + f.in_flight, "flow {}", id);
            prop_assert_eq!(f.sent, 5);
        }
        for n in &result.nodes {
            if let Some(p) = n.preferred_parent() {
                let parent = &result.nodes[p.node_id().unwrap().get() as usize - 1];
                prop_assert!(parent.rank() < n.rank());
            }
        }
        prop_assert!(result.trace.windows(2).all(|w| w[0].time <= w[1].time));
        for kind in MessageKind::ALL {
            let c = result.metrics.counters(kind);
            prop_assert!(c.tx >= c.rx + c.lost);
        }
        if mop == 0 {
            prop_assert_eq!(result.metrics.counters(MessageKind::Dao).tx, 0);
        }
    }

    #[test]
    fn trace_lines_reparse(seed in any::<u64>(), mop in 0u8..=2) {
        let edges = common::reference_edges();
        let doc = common::with_flows(common::scenario_doc(mop, &edges, 30.0, seed), &[(7, 4, 10.0, 3), (1, 5, 11.0, 2)]);
        let result = run(&common::scenario(&doc));
        for rec in &result.trace {
            let line = rec.to_string();
            prop_assert_eq!(&line.parse::<TraceRecord>().unwrap(), rec, "{}", line);
        }
    }

    #[test]
    fn equal_seeds_replay_identically(seed in any::<u64>(), n in 2u32..20, mop in 0u8..=2) {
        let edges = common::random_connected(n, 0.15, &mut common::rng(seed));
        let doc = common::with_flows(common::scenario_doc(mop, &edges, 40.0, seed), &[(n, 1, 15.0, 3)]);
        let a = run(&common::scenario(&doc));
        let b = run(&common::scenario(&doc));
        prop_assert_eq!(rplsim::trace::render(&a.trace), rplsim::trace::render(&b.trace));
        prop_assert_eq!(a.metrics.to_csv(), b.metrics.to_csv());
    }

    #[test]
    fn ranks_follow_shortest_paths(seed in any::<u64>(), n in 2u32..30) {
        let edges = common::random_connected(n, 0.1, &mut common::rng(seed));
        let result = run(&common::scenario(&common::scenario_doc(0, &edges, 120.0, seed)));
        let depth = common::bfs_depth(&edges, 1);
        for node in &result.nodes {
            prop_assert_eq!(u32::from(node.rank().get()), depth[&node.id().get()] + 1);
        }
    }
}
