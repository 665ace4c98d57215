use std::collections::BTreeMap;

use crate::addressing::Address;
use crate::engine::NodeState;

/// Every non-root node has a parent.
pub fn upward_satisfied(nodes: &[NodeState]) -> bool {
    nodes
        .iter()
        .all(|n| n.is_root() || n.preferred_parent().is_some())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClosureReport {
    /// Descendants with no entry, or an entry via the wrong child.
    pub missing: usize,
    /// Host entries for addresses outside the holder's current subtree.
    pub stale: usize,
}

fn parent_index(nodes: &[NodeState]) -> Vec<Option<usize>> {
    let by_ll: BTreeMap<Address, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.link_local(), i))
        .collect();
    nodes
        .iter()
        .map(|n| n.preferred_parent().and_then(|p| by_ll.get(&p).copied()))
        .collect()
}

/// Compare storing-mode host routes against the current parent tree.
pub fn storing_closure_mismatches(nodes: &[NodeState], root: usize) -> ClosureReport {
    let parents = parent_index(nodes);
    let mut report = ClosureReport::default();
    let mut expected: Vec<BTreeMap<Address, Address>> = vec![BTreeMap::new(); nodes.len()];
    for (d, node) in nodes.iter().enumerate() {
        if d == root {
            continue;
        }
        let mut child = d;
        let mut steps = 0;
        while let Some(a) = parents[child] {
            expected[a].insert(node.global(), nodes[child].link_local());
            child = a;
            steps += 1;
            if steps > nodes.len() {
                break;
            }
        }
    }
    for (i, node) in nodes.iter().enumerate() {
        for (dest, via) in &expected[i] {
            if node.routing_table().lookup(*dest) != Some(*via) {
                report.missing += 1;
            }
        }
        report.stale += node
            .routing_table()
            .host_routes()
            .filter(|(dest, _)| !expected[i].contains_key(dest))
            .count();
    }
    report
}

/// Downward routes reach every node along the current parent tree.
pub fn downward_satisfied(nodes: &[NodeState], root: usize) -> bool {
    if !upward_satisfied(nodes) {
        return false;
    }
    let root_state = &nodes[root];
    match root_state.source_routing_table() {
        Some(srt) => {
            let parents = parent_index(nodes);
            srt.len() == nodes.len()
                && nodes.iter().enumerate().all(|(i, n)| {
                    let want = parents[i].map(|p| nodes[p].global());
                    srt.get(&n.global()) == Some(want)
                })
        }
        None => storing_closure_mismatches(nodes, root).missing == 0,
    }
}
