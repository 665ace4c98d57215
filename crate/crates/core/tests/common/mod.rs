//! Independent oracles and topology generators shared by integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rplsim::engine::NodeState;
use rplsim::scenario::Scenario;
use serde_json::{json, Value};

pub type Edges = Vec<(u32, u32)>;

pub fn ll(id: u32) -> String {
    format!("fe80::8aa:ff:fe00:{id:x}")
}

pub fn global(id: u32) -> String {
    format!("fd00::8aa:ff:fe00:{id:x}")
}

pub const REFERENCE_EDGES: [(u32, u32); 6] = [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (6, 7)];

pub fn reference_edges() -> Edges {
    REFERENCE_EDGES.to_vec()
}

/// Node `i` attaches to a uniformly chosen earlier node.
pub fn random_tree(n: u32, rng: &mut ChaCha8Rng) -> Edges {
    (2..=n).map(|i| (rng.random_range(1..i), i)).collect()
}

/// A random tree plus each remaining pair with probability `extra`.
pub fn random_connected(n: u32, extra: f64, rng: &mut ChaCha8Rng) -> Edges {
    let mut edges = random_tree(n, rng);
    let present: BTreeSet<(u32, u32)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    for a in 1..=n {
        for b in a + 1..=n {
            if !present.contains(&(a, b)) && rng.random_bool(extra) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn node_count(edges: &Edges) -> u32 {
    edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(1)
}

/// Scenario document with node 1 as root and uniform 10 ms links.
pub fn scenario_doc(mop: u8, edges: &Edges, duration_s: f64, seed: u64) -> Value {
    let n = node_count(edges);
    let nodes: Vec<Value> = (1..=n)
        .map(|i| {
            if i == 1 {
                json!({"id": 1, "root": true})
            } else {
                json!({"id": i})
            }
        })
        .collect();
    let links: Vec<Value> = edges
        .iter()
        .map(|&(a, b)| json!({"a": a, "b": b, "delay_s": 0.01}))
        .collect();
    json!({
        "mop": mop,
        "duration_s": duration_s,
        "seed": seed,
        "nodes": nodes,
        "links": links,
    })
}

pub fn with_flows(mut doc: Value, flows: &[(u32, u32, f64, u32)]) -> Value {
    doc["flows"] = flows
        .iter()
        .map(|&(src, dst, start, count)| {
            json!({"src": src, "dst": dst, "start_s": start, "count": count, "interval_s": 1.0})
        })
        .collect();
    doc
}

pub fn scenario(doc: &Value) -> Scenario {
    Scenario::from_json(&doc.to_string()).expect("generated scenario is valid")
}

pub fn adjacency(edges: &Edges) -> BTreeMap<u32, Vec<u32>> {
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    adj
}

/// Hop distance from `root` by breadth-first search.
pub fn bfs_depth(edges: &Edges, root: u32) -> BTreeMap<u32, u32> {
    let adj = adjacency(edges);
    let mut depth = BTreeMap::from([(root, 0)]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if !depth.contains_key(&w) {
                depth.insert(w, depth[&v] + 1);
                queue.push_back(w);
            }
        }
    }
    depth
}

/// Child id → parent id, read from the final preferred parents.
pub fn parent_tree(nodes: &[NodeState]) -> BTreeMap<u32, u32> {
    nodes
        .iter()
        .filter_map(|n| {
            let p = n.preferred_parent()?;
            Some((n.id().get(), p.node_id().expect("node address").get()))
        })
        .collect()
}

/// Ancestors of `v`, nearest first, ending at the root.
pub fn ancestors(tree: &BTreeMap<u32, u32>, v: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut cur = v;
    while let Some(&p) = tree.get(&cur) {
        out.push(p);
        cur = p;
        assert!(out.len() <= tree.len(), "parent cycle at {v}");
    }
    out
}

pub fn depth(tree: &BTreeMap<u32, u32>, v: u32) -> usize {
    ancestors(tree, v).len()
}

pub fn descendants(tree: &BTreeMap<u32, u32>, v: u32) -> BTreeSet<u32> {
    tree.keys()
        .copied()
        .filter(|&d| ancestors(tree, d).contains(&v))
        .collect()
}

pub fn nca(tree: &BTreeMap<u32, u32>, a: u32, b: u32) -> u32 {
    let mut pa = vec![a];
    pa.extend(ancestors(tree, a));
    let mut pb = vec![b];
    pb.extend(ancestors(tree, b));
    *pa.iter().find(|x| pb.contains(x)).expect("same tree")
}

/// Nodes strictly below the root down to `v`, root side first.
pub fn tree_path(tree: &BTreeMap<u32, u32>, v: u32) -> Vec<u32> {
    let mut path = vec![v];
    path.extend(ancestors(tree, v));
    path.pop();
    path.reverse();
    path
}

/// Child of `v` on the way down to descendant `d`.
fn child_toward(tree: &BTreeMap<u32, u32>, v: u32, d: u32) -> u32 {
    let mut cur = d;
    while tree[&cur] != v {
        cur = tree[&cur];
    }
    cur
}

/// The dump every node should produce in storing mode for `tree`.
pub fn expected_storing_dump(tree: &BTreeMap<u32, u32>, n: u32) -> String {
    let mut out = String::new();
    for v in 1..=n {
        if let Some(p) = tree.get(&v) {
            out += &format!("node={v} table=routing dest=DEFAULT via={}\n", ll(*p));
        }
        for d in descendants(tree, v) {
            out += &format!(
                "node={v} table=routing dest={} via={}\n",
                global(d),
                ll(child_toward(tree, v, d))
            );
        }
    }
    out
}

/// The dump every node should produce in non-storing mode for `tree`.
pub fn expected_non_storing_dump(tree: &BTreeMap<u32, u32>, n: u32) -> String {
    let mut out = format!("node=1 table=srt dest={} via=NULL\n", global(1));
    for v in 2..=n {
        out += &format!(
            "node=1 table=srt dest={} via={}\n",
            global(v),
            global(tree[&v])
        );
    }
    for v in 2..=n {
        out += &format!("node={v} table=routing dest=DEFAULT via={}\n", ll(tree[&v]));
    }
    out
}

/// Node ids visited by the packets of `flow`, read from DATA_TX trace lines.
pub fn data_tx_nodes(trace: &str, flow: u32) -> Vec<u32> {
    let needle = format!(" flow={flow} ");
    trace
        .lines()
        .filter(|l| l.contains("ev=DATA_TX") && l.contains(&needle))
        .map(|l| {
            let node = l.split_whitespace().nth(1).expect("node field");
            node.trim_start_matches("node=").parse().expect("node id")
        })
        .collect()
}
