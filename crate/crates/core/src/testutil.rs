use crate::addressing::{derive_link_local, global_of, Address, NodeId};
use crate::engine::NodeState;
use crate::scenario::Scenario;
use crate::simulator;

pub fn id(n: u32) -> NodeId {
    NodeId::new(n).unwrap()
}

pub fn g(n: u32) -> Address {
    global_of(id(n))
}

pub fn ll(n: u32) -> Address {
    derive_link_local(id(n))
}

pub fn reference_json(mop: u8, flows: &str) -> String {
    format!(
        r#"{{"mop": {mop}, "duration_s": 60, "seed": 3,
        "nodes": [{{"id": 1, "root": true}}, {{"id": 2}}, {{"id": 3}}, {{"id": 4}}, {{"id": 5}}, {{"id": 6}}, {{"id": 7}}],
        "links": [{{"a": 1, "b": 2, "delay_s": 0.01}}, {{"a": 1, "b": 3, "delay_s": 0.01}},
                  {{"a": 2, "b": 4, "delay_s": 0.01}}, {{"a": 2, "b": 5, "delay_s": 0.01}},
                  {{"a": 3, "b": 6, "delay_s": 0.01}}, {{"a": 6, "b": 7, "delay_s": 0.01}}],
        "flows": [{flows}]}}"#
    )
}

pub fn reference(mop: u8) -> Scenario {
    Scenario::from_json(&reference_json(mop, "")).unwrap()
}

/// Converged reference-topology node states, indexed by `id - 1`.
pub fn reference_converged(mop: u8) -> Vec<NodeState> {
    simulator::run(&reference(mop)).nodes
}
