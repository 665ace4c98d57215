use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::addressing::NodeId;
use crate::time::SimDuration;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub delay: SimDuration,
    /// Independent per-copy loss probability in `[0, 1)`.
    pub loss: f64,
}

/// Nodes and bidirectional links. Structural checks live in scenario
/// validation; this type only stores what it is given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    nodes: BTreeMap<NodeId, bool>,
    links: Vec<Link>,
}

impl Topology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, is_root: bool) {
        self.nodes.insert(id, is_root);
    }

    pub fn add_link(&mut self, a: NodeId, b: NodeId, delay: SimDuration, loss: f64) {
        self.links.push(Link { a, b, delay, loss });
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn is_root(&self, id: NodeId) -> bool {
        self.nodes.get(&id).copied().unwrap_or(false)
    }

    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|(_, r)| **r).map(|(id, _)| *id)
    }

    pub fn root(&self) -> Option<NodeId> {
        self.roots().next()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Neighbor lists sorted by node id.
    pub fn adjacency(&self) -> BTreeMap<NodeId, Vec<(NodeId, Link)>> {
        let mut adj: BTreeMap<NodeId, Vec<(NodeId, Link)>> =
            self.nodes.keys().map(|id| (*id, Vec::new())).collect();
        for link in &self.links {
            adj.entry(link.a).or_default().push((link.b, *link));
            adj.entry(link.b).or_default().push((link.a, *link));
        }
        for list in adj.values_mut() {
            list.sort_by_key(|(n, _)| *n);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.nodes.keys().next().copied() else {
            return true;
        };
        let adj = self.adjacency();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for (m, _) in &adj[&n] {
                if seen.insert(*m) {
                    queue.push_back(*m);
                }
            }
        }
        seen.len() == self.nodes.len()
    }
}
