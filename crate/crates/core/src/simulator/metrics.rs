use std::collections::BTreeMap;
use std::fmt::Write;

use crate::addressing::NodeId;
use crate::forwarding::DropReason;
use crate::messages::MessageKind;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MessageCounters {
    /// Copies handed to links (one per neighbor for link-wide sends).
    pub tx: u64,
    pub rx: u64,
    pub lost: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TableSizes {
    pub routing: usize,
    pub srt: usize,
    pub parent: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSample {
    pub time: SimTime,
    pub node: NodeId,
    pub sizes: TableSizes,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: BTreeMap<DropReason, u64>,
    /// Hop count of delivered packets.
    pub hops: BTreeMap<u8, u64>,
    pub in_flight: u64,
}

impl FlowStats {
    pub fn dropped_total(&self) -> u64 {
        self.dropped.values().sum()
    }

    pub fn delivery_ratio(&self) -> f64 {
        if self.sent == 0 {
            0.0
        } else {
            self.delivered as f64 / self.sent as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub messages: BTreeMap<MessageKind, MessageCounters>,
    pub tables: BTreeMap<NodeId, TableSizes>,
    pub table_samples: Vec<TableSample>,
    pub upward_convergence: Option<SimTime>,
    pub downward_convergence: Option<SimTime>,
    pub flows: BTreeMap<u32, FlowStats>,
    pub invalid_dio: u64,
    pub stale_version_dio: u64,
    pub dao_in_mop0: u64,
    pub dao_queued: u64,
    pub stale_timers: u64,
    /// Control unicasts addressed to a non-neighbor.
    pub unicast_no_link: u64,
    /// Storing-mode host routes outside the final subtree closure.
    pub stale_entries: u64,
    pub events: u64,
}

impl Metrics {
    pub fn counters(&self, kind: MessageKind) -> MessageCounters {
        self.messages.get(&kind).copied().unwrap_or_default()
    }

    pub(crate) fn counters_mut(&mut self, kind: MessageKind) -> &mut MessageCounters {
        self.messages.entry(kind).or_default()
    }

    pub fn flow(&self, id: u32) -> Option<&FlowStats> {
        self.flows.get(&id)
    }

    /// Long-format CSV: `metric,node,flow,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,node,flow,value\n");
        let mut row = |metric: &str, node: Option<NodeId>, flow: Option<u32>, value: String| {
            let node = node.map(|n| n.to_string()).unwrap_or_default();
            let flow = flow.map(|f| f.to_string()).unwrap_or_default();
            writeln!(out, "{metric},{node},{flow},{value}").expect("String write");
        };
        for kind in MessageKind::ALL {
            let c = self.counters(kind);
            let k = kind.as_str().to_ascii_lowercase();
            row(&format!("{k}_tx"), None, None, c.tx.to_string());
            row(&format!("{k}_rx"), None, None, c.rx.to_string());
            row(&format!("{k}_lost"), None, None, c.lost.to_string());
        }
        let time = |t: Option<SimTime>| t.map(|t| t.to_string()).unwrap_or_else(|| "NA".to_owned());
        row(
            "upward_convergence_s",
            None,
            None,
            time(self.upward_convergence),
        );
        row(
            "downward_convergence_s",
            None,
            None,
            time(self.downward_convergence),
        );
        for (name, v) in [
            ("invalid_dio", self.invalid_dio),
            ("stale_version_dio", self.stale_version_dio),
            ("dao_in_mop0", self.dao_in_mop0),
            ("dao_queued", self.dao_queued),
            ("stale_timers", self.stale_timers),
            ("unicast_no_link", self.unicast_no_link),
            ("stale_entries", self.stale_entries),
            ("events", self.events),
        ] {
            row(name, None, None, v.to_string());
        }
        for (node, t) in &self.tables {
            row("routing_entries", Some(*node), None, t.routing.to_string());
            row("srt_entries", Some(*node), None, t.srt.to_string());
            row("parent_entries", Some(*node), None, t.parent.to_string());
        }
        for (id, f) in &self.flows {
            row("flow_sent", None, Some(*id), f.sent.to_string());
            row("flow_delivered", None, Some(*id), f.delivered.to_string());
            for (reason, n) in &f.dropped {
                row(
                    &format!("flow_dropped_{reason}"),
                    None,
                    Some(*id),
                    n.to_string(),
                );
            }
            row("flow_in_flight", None, Some(*id), f.in_flight.to_string());
            for (h, n) in &f.hops {
                row(&format!("flow_hops_{h}"), None, Some(*id), n.to_string());
            }
        }
        out
    }
}
