//! Line-oriented table dumps, byte-stable for golden comparison.
//!
//! ```text
//! node=<id> table=<routing|srt|parent> dest=<addr|DEFAULT> via=<addr|NULL>
//! ```
//!
//! Lines sort by node id, then table name, then destination (`DEFAULT`
//! first, addresses numerically).

use std::fmt::Write;

use crate::engine::NodeState;
use crate::trace::RouteDest;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DumpOptions {
    /// Also list parent-table rows as `dest=<neighbor ll> via=<neighbor global>`.
    pub parents: bool,
}

fn line(
    out: &mut String,
    node: &NodeState,
    table: &str,
    dest: impl std::fmt::Display,
    via: impl std::fmt::Display,
) {
    writeln!(
        out,
        "node={} table={table} dest={dest} via={via}",
        node.id()
    )
    .expect("String write");
}

/// Dump one node's tables.
pub fn dump_node(out: &mut String, node: &NodeState, opts: DumpOptions) {
    if opts.parents {
        for p in node.parent_table().iter() {
            line(out, node, "parent", p.neighbor_ll, p.neighbor_global);
        }
    }
    for (dest, via) in node.routing_table().iter() {
        line(out, node, "routing", dest, via);
    }
    if let Some(srt) = node.source_routing_table() {
        for (child, parent) in srt.iter() {
            match parent {
                Some(p) => line(out, node, "srt", child, p),
                None => line(out, node, "srt", child, "NULL"),
            }
        }
    }
}

/// Dump every node, in ascending id order.
pub fn dump_tables<'a>(
    nodes: impl IntoIterator<Item = &'a NodeState>,
    opts: DumpOptions,
) -> String {
    let mut sorted: Vec<&NodeState> = nodes.into_iter().collect();
    sorted.sort_by_key(|n| n.id());
    let mut out = String::new();
    for n in sorted {
        dump_node(&mut out, n, opts);
    }
    out
}

/// Number of non-`DEFAULT` routing entries across `nodes`.
pub fn non_default_entries<'a>(nodes: impl IntoIterator<Item = &'a NodeState>) -> usize {
    nodes
        .into_iter()
        .map(|n| {
            n.routing_table()
                .iter()
                .filter(|(d, _)| *d != RouteDest::Default)
                .count()
        })
        .sum()
}
