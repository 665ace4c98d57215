//! Discrete-event driver hosting one [`NodeState`] per node.
//!
//! Events are processed in `(time, seq)` order, `seq` being assigned when an
//! event is scheduled. A single seeded ChaCha8 generator serves every random
//! draw (trickle offsets, then link losses) in event-processing order, so a
//! scenario and seed fully determine the run.

mod convergence;
mod metrics;
mod topology;

pub use convergence::{
    downward_satisfied, storing_closure_mismatches, upward_satisfied, ClosureReport,
};
pub use metrics::{FlowStats, MessageCounters, Metrics, TableSample, TableSizes};
pub use topology::{Link, Topology};

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::addressing::{global_of, Address, NodeId};
use crate::engine::{EngineError, EngineOutput, NodeState, SendTarget, TimerKind};
use crate::forwarding::{forward, Action, DropReason};
use crate::messages::{DataPacket, Message, Mop};
use crate::scenario::{Flow, Scenario};
use crate::time::{SimDuration, SimTime};
use crate::trace::{RouteDest, TraceEvent, TraceRecord};

#[derive(Debug, Clone)]
enum EventKind {
    Deliver {
        to: usize,
        message: Message,
    },
    Timer {
        node: usize,
        kind: TimerKind,
        generation: u64,
    },
    Inject {
        flow: u32,
    },
}

#[derive(Debug, Clone)]
struct Event {
    time: SimTime,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

#[derive(Debug, Clone)]
struct Neighbor {
    index: usize,
    delay: SimDuration,
    loss: f64,
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub metrics: Metrics,
    pub trace: Vec<TraceRecord>,
    pub nodes: Vec<NodeState>,
    pub connected: bool,
}

pub struct Simulation {
    mop: Mop,
    now: SimTime,
    end: SimTime,
    seq: u64,
    queue: BinaryHeap<Reverse<Event>>,
    rng: ChaCha8Rng,
    nodes: Vec<NodeState>,
    index: BTreeMap<NodeId, usize>,
    neighbors: Vec<Vec<Neighbor>>,
    root: usize,
    flows: Vec<Flow>,
    metrics: Metrics,
    trace: Option<Vec<TraceRecord>>,
    connected: bool,
}

impl Simulation {
    /// Build from a validated scenario. Nodes are initialised at t=0 in
    /// ascending id order and every flow packet is scheduled up front.
    pub fn new(scenario: &Scenario, record_trace: bool) -> Simulation {
        let topo = &scenario.topology;
        let index: BTreeMap<NodeId, usize> =
            topo.node_ids().enumerate().map(|(i, id)| (id, i)).collect();
        let adjacency = topo.adjacency();
        let neighbors = topo
            .node_ids()
            .map(|id| {
                adjacency[&id]
                    .iter()
                    .map(|(n, link)| Neighbor {
                        index: index[n],
                        delay: link.delay,
                        loss: link.loss,
                    })
                    .collect()
            })
            .collect();
        let root_id = topo.root().expect("validated scenario has a root");
        let mut sim = Simulation {
            mop: scenario.mop,
            now: SimTime::ZERO,
            end: SimTime::ZERO + scenario.duration,
            seq: 0,
            queue: BinaryHeap::new(),
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            nodes: Vec::with_capacity(index.len()),
            index,
            neighbors,
            root: 0,
            flows: Vec::new(),
            metrics: Metrics::default(),
            trace: record_trace.then(Vec::new),
            connected: topo.is_connected(),
        };
        sim.root = sim.index[&root_id];
        for id in topo.node_ids() {
            let (state, out) = NodeState::init(
                id,
                id == root_id,
                scenario.mop,
                scenario.engine,
                SimTime::ZERO,
                &mut sim.rng,
            );
            sim.nodes.push(state);
            let i = sim.nodes.len() - 1;
            sim.apply(i, out);
        }
        for flow in &scenario.flows {
            sim.add_flow(*flow);
        }
        sim.refresh_tables();
        sim
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn end(&self) -> SimTime {
        self.end
    }

    pub fn mop(&self) -> Mop {
        self.mop
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeState> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn root(&self) -> &NodeState {
        &self.nodes[self.root]
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    /// Schedule a flow and return its id. Packets dated before the current
    /// time are sent immediately.
    pub fn add_flow(&mut self, flow: Flow) -> u32 {
        let id = self.flows.len() as u32;
        self.flows.push(flow);
        self.metrics.flows.insert(id, FlowStats::default());
        for k in 0..u64::from(flow.count) {
            let at = SimTime::ZERO + flow.start + flow.interval.saturating_mul(k);
            self.schedule(at.max(self.now), EventKind::Inject { flow: id });
        }
        id
    }

    fn schedule(&mut self, time: SimTime, kind: EventKind) {
        self.seq += 1;
        self.queue.push(Reverse(Event {
            time,
            seq: self.seq,
            kind,
        }));
    }

    fn emit(&mut self, node: usize, event: TraceEvent) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRecord {
                time: self.now,
                node: self.nodes[node].id(),
                event,
            });
        }
    }

    /// Process one event. Returns `false` once nothing is left before the
    /// end of the run.
    pub fn step(&mut self) -> bool {
        self.step_until(self.end)
    }

    fn step_until(&mut self, limit: SimTime) -> bool {
        match self.queue.peek() {
            Some(Reverse(ev)) if ev.time <= limit => {}
            _ => return false,
        }
        let Reverse(ev) = self.queue.pop().expect("peeked");
        assert!(ev.time >= self.now, "event scheduled in the past");
        self.now = ev.time;
        self.metrics.events += 1;
        match ev.kind {
            EventKind::Deliver { to, message } => self.deliver(to, message),
            EventKind::Timer {
                node,
                kind,
                generation,
            } => {
                let now = self.now;
                match self.nodes[node].fire_timer(kind, generation, now, &mut self.rng) {
                    Ok(out) => self.apply(node, out),
                    Err(EngineError::StaleTimer { .. }) => {}
                    Err(e) => unreachable!("timer error {e}"),
                }
            }
            EventKind::Inject { flow } => self.inject(flow),
        }
        true
    }

    /// Advance to `t` (clamped to the end of the run), processing every
    /// event dated at or before it.
    pub fn run_until(&mut self, t: SimTime) {
        let limit = t.min(self.end);
        while self.step_until(limit) {}
        self.now = self.now.max(limit);
    }

    pub fn run(&mut self) {
        self.run_until(self.end);
    }

    pub fn finish(mut self) -> RunResult {
        self.refresh_tables();
        self.metrics.stale_entries = if self.mop == Mop::Mop2 {
            storing_closure_mismatches(&self.nodes, self.root).stale as u64
        } else {
            0
        };
        for node in &self.nodes {
            let c = node.counters();
            self.metrics.invalid_dio += c.invalid_dio;
            self.metrics.stale_version_dio += c.stale_version_dio;
            self.metrics.dao_in_mop0 += c.dao_in_mop0;
            self.metrics.dao_queued += c.dao_queued;
            self.metrics.stale_timers += c.stale_timers;
        }
        for Reverse(ev) in self.queue.iter() {
            let flow = match &ev.kind {
                EventKind::Inject { flow } if ev.time <= self.end => continue,
                EventKind::Deliver {
                    message: Message::Data(p),
                    ..
                } => p.flow_id,
                _ => continue,
            };
            if let Some(stats) = self.metrics.flows.get_mut(&flow) {
                stats.in_flight += 1;
            }
        }
        RunResult {
            metrics: self.metrics,
            trace: self.trace.unwrap_or_default(),
            nodes: self.nodes,
            connected: self.connected,
        }
    }

    fn refresh_tables(&mut self) {
        for n in &self.nodes {
            self.metrics.tables.insert(n.id(), sizes_of(n));
        }
    }

    fn deliver(&mut self, to: usize, message: Message) {
        let kind = message.kind();
        self.metrics.counters_mut(kind).rx += 1;
        let now = self.now;
        let out = match message {
            Message::Dio(dio) => {
                self.emit(to, TraceEvent::DioRx(dio.clone()));
                self.nodes[to].handle_dio(&dio, now, &mut self.rng)
            }
            Message::Dis(dis) => {
                self.emit(to, TraceEvent::DisRx(dis.clone()));
                self.nodes[to].handle_dis(&dis, now, &mut self.rng)
            }
            Message::Dao(dao) => {
                self.emit(to, TraceEvent::DaoRx(dao.clone()));
                self.nodes[to].handle_dao(&dao, now).unwrap_or_default()
            }
            Message::Data(packet) => {
                self.emit(to, TraceEvent::DataRx(packet.clone()));
                self.route_packet(to, packet);
                return;
            }
        };
        self.apply(to, out);
    }

    fn inject(&mut self, flow_id: u32) {
        let flow = self.flows[flow_id as usize];
        let src = self.index[&flow.src];
        let packet = DataPacket::new(flow_id, global_of(flow.src), global_of(flow.dst));
        self.metrics
            .flows
            .get_mut(&flow_id)
            .expect("registered")
            .sent += 1;
        self.route_packet(src, packet);
    }

    fn route_packet(&mut self, at: usize, packet: DataPacket) {
        match forward(&self.nodes[at], packet) {
            Action::Deliver(packet) => {
                let stats = self
                    .metrics
                    .flows
                    .get_mut(&packet.flow_id)
                    .expect("registered");
                stats.delivered += 1;
                *stats.hops.entry(packet.hops_taken()).or_default() += 1;
            }
            Action::Drop { reason, packet } => self.drop_packet(at, packet, reason),
            Action::Send { next_hop, packet } => {
                self.emit(
                    at,
                    TraceEvent::DataTx {
                        packet: packet.clone(),
                        next_hop,
                    },
                );
                if let Err(packet) = self.unicast(at, next_hop, Message::Data(packet)) {
                    let Message::Data(packet) = packet else {
                        unreachable!()
                    };
                    self.drop_packet(at, packet, DropReason::NoLink);
                }
            }
        }
    }

    fn drop_packet(&mut self, at: usize, packet: DataPacket, reason: DropReason) {
        let stats = self
            .metrics
            .flows
            .get_mut(&packet.flow_id)
            .expect("registered");
        *stats.dropped.entry(reason).or_default() += 1;
        self.emit(at, TraceEvent::DataDrop { packet, reason });
    }

    /// Put one copy on the link from `from` to neighbor `to`.
    fn transmit(&mut self, from: usize, nb: usize, message: Message) {
        let Neighbor { index, delay, loss } = self.neighbors[from][nb].clone();
        let kind = message.kind();
        self.metrics.counters_mut(kind).tx += 1;
        if loss > 0.0 && self.rng.random::<f64>() < loss {
            self.metrics.counters_mut(kind).lost += 1;
            if let Message::Data(packet) = message {
                self.drop_packet(from, packet, DropReason::LinkLoss);
            }
            return;
        }
        self.schedule(self.now + delay, EventKind::Deliver { to: index, message });
    }

    fn unicast(&mut self, from: usize, next_hop: Address, message: Message) -> Result<(), Message> {
        let target = next_hop
            .node_id()
            .and_then(|id| self.index.get(&id).copied());
        let nb = target.and_then(|t| self.neighbors[from].iter().position(|n| n.index == t));
        match nb {
            Some(nb) => {
                self.transmit(from, nb, message);
                Ok(())
            }
            None => Err(message),
        }
    }

    fn apply(&mut self, node: usize, out: EngineOutput) {
        let table_changed = out.trace.iter().any(|r| r.event.is_table_change());
        let mut upward_changed = false;
        let mut downward_changed = false;
        for rec in out.trace {
            match &rec.event {
                TraceEvent::ParentSet { .. }
                | TraceEvent::RouteAdd {
                    dest: RouteDest::Default,
                    ..
                } => {
                    upward_changed = true;
                    if self.mop == Mop::Mop2 {
                        downward_changed = true;
                    }
                }
                TraceEvent::RouteAdd { .. } | TraceEvent::SrtAdd { .. } => downward_changed = true,
                _ => {}
            }
            if let Some(trace) = self.trace.as_mut() {
                trace.push(rec);
            }
        }
        for send in out.sends {
            match send.target {
                SendTarget::LinkWide => {
                    self.emit_tx(node, &send.message, None);
                    for nb in 0..self.neighbors[node].len() {
                        self.transmit(node, nb, send.message.clone());
                    }
                }
                SendTarget::Unicast(ll) => {
                    self.emit_tx(node, &send.message, Some(ll));
                    if self.unicast(node, ll, send.message).is_err() {
                        self.metrics.unicast_no_link += 1;
                    }
                }
            }
        }
        for t in out.timers {
            self.schedule(
                t.at,
                EventKind::Timer {
                    node,
                    kind: t.kind,
                    generation: t.generation,
                },
            );
        }
        if table_changed {
            let sizes = sizes_of(&self.nodes[node]);
            self.metrics.table_samples.push(TableSample {
                time: self.now,
                node: self.nodes[node].id(),
                sizes,
            });
            self.metrics.tables.insert(self.nodes[node].id(), sizes);
            self.update_convergence(upward_changed, downward_changed);
        }
    }

    fn emit_tx(&mut self, node: usize, message: &Message, to: Option<Address>) {
        if self.trace.is_none() {
            return;
        }
        let event = match (message, to) {
            (Message::Dio(m), _) => TraceEvent::DioTx(m.clone()),
            (Message::Dis(m), _) => TraceEvent::DisTx(m.clone()),
            (Message::Dao(m), Some(to)) => TraceEvent::DaoTx { dao: m.clone(), to },
            (Message::Dao(m), None) => TraceEvent::DaoTx {
                dao: m.clone(),
                to: m.final_dest,
            },
            (Message::Data(_), _) => return,
        };
        self.emit(node, event);
    }

    fn update_convergence(&mut self, upward_changed: bool, downward_changed: bool) {
        let now = self.now;
        if upward_satisfied(&self.nodes) {
            if upward_changed || self.metrics.upward_convergence.is_none() {
                self.metrics.upward_convergence = Some(now);
            }
        } else {
            self.metrics.upward_convergence = None;
        }
        if !self.mop.has_downward_routes() {
            return;
        }
        if downward_satisfied(&self.nodes, self.root) {
            if downward_changed || self.metrics.downward_convergence.is_none() {
                self.metrics.downward_convergence = Some(now);
            }
        } else {
            self.metrics.downward_convergence = None;
        }
    }
}

fn sizes_of(n: &NodeState) -> TableSizes {
    TableSizes {
        routing: n.routing_table().len(),
        srt: n.source_routing_table().map_or(0, |s| s.len()),
        parent: n.parent_table().len(),
    }
}

/// Run a scenario to its end with tracing enabled.
pub fn run(scenario: &Scenario) -> RunResult {
    let mut sim = Simulation::new(scenario, true);
    sim.run();
    sim.finish()
}
