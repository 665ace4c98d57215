//! Per-node RPL state machine.
//!
//! The engine performs no I/O. Each handler consumes one input (a delivered
//! control message or a timer firing) and returns an [`EngineOutput`] listing
//! messages to send, timers to arm and table changes to trace. Randomness is
//! drawn only from the generator passed in by the caller.

mod tables;
mod trickle;

pub use tables::{select_parent, ParentEntry, ParentTable, RoutingTable, SourceRoutingTable};
pub use trickle::{Redundancy, TrickleConfig, TrickleState};

use rand::Rng;
use thiserror::Error;

use crate::addressing::{derive_global, derive_link_local, global_of, Address, NodeId};
use crate::messages::{DaoMessage, DioMessage, DisMessage, Message, Mop, Rank};
use crate::time::{SimDuration, SimTime};
use crate::trace::{RouteDest, TraceEvent, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub trickle: TrickleConfig,
    pub dis_timeout: SimDuration,
    pub dao_delay: SimDuration,
    /// DODAG version advertised by the root.
    pub version: u8,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            trickle: TrickleConfig::default(),
            dis_timeout: SimDuration::from_secs(5),
            dao_delay: SimDuration::from_millis(500),
            version: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimerKind {
    Trickle,
    Dis,
    Dao,
}

impl TimerKind {
    fn slot(self) -> usize {
        match self {
            TimerKind::Trickle => 0,
            TimerKind::Dis => 1,
            TimerKind::Dao => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimerRequest {
    pub kind: TimerKind,
    pub at: SimTime,
    pub generation: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendTarget {
    /// Every neighbor on the link.
    LinkWide,
    /// One neighbor, by link-local address.
    Unicast(Address),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub message: Message,
    pub target: SendTarget,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EngineOutput {
    pub sends: Vec<Outgoing>,
    pub timers: Vec<TimerRequest>,
    pub trace: Vec<TraceRecord>,
}

impl EngineOutput {
    pub fn is_empty(&self) -> bool {
        self.sends.is_empty() && self.timers.is_empty() && self.trace.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("DAO received in MOP 0")]
    DaoInMop0,
    #[error("{kind:?} timer generation {generation} superseded")]
    StaleTimer { kind: TimerKind, generation: u64 },
}

/// Rejections and anomalies, summed into run metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeCounters {
    pub invalid_dio: u64,
    pub stale_version_dio: u64,
    pub dao_in_mop0: u64,
    /// DAOs held back because no parent was available to forward them.
    pub dao_queued: u64,
    pub stale_timers: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    id: NodeId,
    ll: Address,
    global: Address,
    is_root: bool,
    mop: Mop,
    config: EngineConfig,
    rank: Rank,
    version_seen: u8,
    dodag_id: Option<Address>,
    preferred_parent: Option<Address>,
    parent_table: ParentTable,
    routing_table: RoutingTable,
    srt: Option<SourceRoutingTable>,
    trickle: TrickleState,
    dis_deadline: Option<SimTime>,
    dao_deadline: Option<SimTime>,
    dao_pending: bool,
    queued_daos: Vec<DaoMessage>,
    generations: [u64; 3],
    counters: NodeCounters,
}

impl NodeState {
    /// Create a node at `now`. The root arms its DIO timer; other nodes
    /// arm the DIS timer.
    pub fn init<R: Rng + ?Sized>(
        id: NodeId,
        is_root: bool,
        mop: Mop,
        config: EngineConfig,
        now: SimTime,
        rng: &mut R,
    ) -> (NodeState, EngineOutput) {
        let ll = derive_link_local(id);
        let global = global_of(id);
        let mut state = NodeState {
            id,
            ll,
            global,
            is_root,
            mop,
            config,
            rank: if is_root { Rank::ROOT } else { Rank::INFINITE },
            version_seen: if is_root { config.version } else { 0 },
            dodag_id: is_root.then_some(global),
            preferred_parent: None,
            parent_table: ParentTable::new(),
            routing_table: RoutingTable::new(),
            srt: None,
            trickle: TrickleState::new(config.trickle),
            dis_deadline: None,
            dao_deadline: None,
            dao_pending: false,
            queued_daos: Vec::new(),
            generations: [0; 3],
            counters: NodeCounters::default(),
        };
        let mut out = EngineOutput::default();
        if is_root {
            if mop == Mop::Mop1 {
                state.srt = Some(SourceRoutingTable::with_root(global));
                state.record(
                    &mut out,
                    now,
                    TraceEvent::SrtAdd {
                        child: global,
                        parent: None,
                    },
                );
            }
            if let Some(at) = state.trickle.reset(now, rng) {
                state.arm(&mut out, TimerKind::Trickle, at);
            }
        } else {
            let at = now + config.dis_timeout;
            state.dis_deadline = Some(at);
            state.arm(&mut out, TimerKind::Dis, at);
        }
        (state, out)
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn link_local(&self) -> Address {
        self.ll
    }

    pub fn global(&self) -> Address {
        self.global
    }

    pub fn is_root(&self) -> bool {
        self.is_root
    }

    pub fn mop(&self) -> Mop {
        self.mop
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn is_joined(&self) -> bool {
        !self.rank.is_infinite()
    }

    pub fn version_seen(&self) -> u8 {
        self.version_seen
    }

    pub fn dodag_id(&self) -> Option<Address> {
        self.dodag_id
    }

    pub fn preferred_parent(&self) -> Option<Address> {
        self.preferred_parent
    }

    pub fn parent_table(&self) -> &ParentTable {
        &self.parent_table
    }

    pub fn routing_table(&self) -> &RoutingTable {
        &self.routing_table
    }

    pub fn source_routing_table(&self) -> Option<&SourceRoutingTable> {
        self.srt.as_ref()
    }

    pub fn trickle(&self) -> &TrickleState {
        &self.trickle
    }

    pub fn dis_deadline(&self) -> Option<SimTime> {
        self.dis_deadline
    }

    pub fn dao_deadline(&self) -> Option<SimTime> {
        self.dao_deadline
    }

    pub fn dao_pending(&self) -> bool {
        self.dao_pending
    }

    pub fn queued_dao_count(&self) -> usize {
        self.queued_daos.len()
    }

    pub fn counters(&self) -> &NodeCounters {
        &self.counters
    }

    /// Current generation of a timer; requests carrying an older one are
    /// stale.
    pub fn timer_generation(&self, kind: TimerKind) -> u64 {
        self.generations[kind.slot()]
    }

    fn record(&self, out: &mut EngineOutput, now: SimTime, event: TraceEvent) {
        out.trace.push(TraceRecord {
            time: now,
            node: self.id,
            event,
        });
    }

    fn arm(&mut self, out: &mut EngineOutput, kind: TimerKind, at: SimTime) {
        let slot = kind.slot();
        self.generations[slot] += 1;
        out.timers.push(TimerRequest {
            kind,
            at,
            generation: self.generations[slot],
        });
    }

    fn disarm(&mut self, kind: TimerKind) {
        self.generations[kind.slot()] += 1;
    }

    fn dio(&self) -> DioMessage {
        DioMessage {
            dodag_id: self.dodag_id.expect("DIO only sent once joined"),
            version: self.version_seen,
            rank: self.rank,
            mop: self.mop,
            sender_ll: self.ll,
        }
    }

    fn dio_is_well_formed(&self, dio: &DioMessage) -> bool {
        dio.mop == self.mop
            && dio.rank >= Rank::ROOT
            && !dio.rank.is_infinite()
            && dio.sender_ll.is_link_local()
            && dio.dodag_id.is_global()
            && dio.sender_ll != self.ll
            && self.dodag_id.is_none_or(|d| d == dio.dodag_id)
    }

    pub fn handle_dio<R: Rng + ?Sized>(
        &mut self,
        dio: &DioMessage,
        now: SimTime,
        rng: &mut R,
    ) -> EngineOutput {
        let mut out = EngineOutput::default();
        if dio.version < self.version_seen {
            self.counters.stale_version_dio += 1;
            return out;
        }
        if !self.dio_is_well_formed(dio) {
            self.counters.invalid_dio += 1;
            return out;
        }
        if self.is_root {
            self.trickle.hear_consistent();
            return out;
        }
        let from_parent = self.preferred_parent == Some(dio.sender_ll);
        if from_parent && dio.rank >= self.rank {
            // A parent falling behind us would need local repair.
            self.counters.invalid_dio += 1;
            return out;
        }
        self.version_seen = dio.version;

        if dio.rank < self.rank {
            self.parent_table.upsert(ParentEntry {
                neighbor_ll: dio.sender_ll,
                neighbor_global: derive_global(dio.sender_ll).expect("checked link-local"),
                rank: dio.rank,
                last_dio_time: now,
            });
        } else {
            self.parent_table.remove(&dio.sender_ll);
        }

        match select_parent(&self.parent_table, self.rank).cloned() {
            Some(best) => self.adopt(best, dio.dodag_id, now, rng, &mut out),
            None => self.trickle.hear_consistent(),
        }
        out
    }

    fn adopt<R: Rng + ?Sized>(
        &mut self,
        parent: ParentEntry,
        dodag_id: Address,
        now: SimTime,
        rng: &mut R,
        out: &mut EngineOutput,
    ) {
        self.rank = parent.rank.child_rank();
        self.preferred_parent = Some(parent.neighbor_ll);
        self.dodag_id.get_or_insert(dodag_id);
        self.parent_table.retain_below(self.rank);
        self.record(
            out,
            now,
            TraceEvent::ParentSet {
                parent: parent.neighbor_ll,
                rank: self.rank,
            },
        );
        if self
            .routing_table
            .insert(RouteDest::Default, parent.neighbor_ll)
        {
            self.record(
                out,
                now,
                TraceEvent::RouteAdd {
                    dest: RouteDest::Default,
                    via: parent.neighbor_ll,
                },
            );
        }
        if self.dis_deadline.take().is_some() {
            self.disarm(TimerKind::Dis);
        }
        if let Some(at) = self.trickle.reset(now, rng) {
            self.arm(out, TimerKind::Trickle, at);
        }
        if self.mop.has_downward_routes() {
            self.dao_pending = true;
            let at = now + self.config.dao_delay;
            self.dao_deadline = Some(at);
            self.arm(out, TimerKind::Dao, at);
            for dao in std::mem::take(&mut self.queued_daos) {
                self.relay_dao(dao, out);
            }
        }
    }

    pub fn handle_dis<R: Rng + ?Sized>(
        &mut self,
        _dis: &DisMessage,
        now: SimTime,
        rng: &mut R,
    ) -> EngineOutput {
        let mut out = EngineOutput::default();
        if self.is_joined() {
            if let Some(at) = self.trickle.reset(now, rng) {
                self.arm(&mut out, TimerKind::Trickle, at);
            }
        }
        out
    }

    pub fn handle_dao(
        &mut self,
        dao: &DaoMessage,
        now: SimTime,
    ) -> Result<EngineOutput, EngineError> {
        let mut out = EngineOutput::default();
        match self.mop {
            Mop::Mop0 => {
                self.counters.dao_in_mop0 += 1;
                return Err(EngineError::DaoInMop0);
            }
            Mop::Mop1 => {
                if let Some(srt) = self.srt.as_mut() {
                    if srt.insert(dao.advertised_dest, dao.dao_parent) {
                        self.record(
                            &mut out,
                            now,
                            TraceEvent::SrtAdd {
                                child: dao.advertised_dest,
                                parent: dao.dao_parent,
                            },
                        );
                    }
                } else {
                    self.relay_dao(dao.clone(), &mut out);
                }
            }
            Mop::Mop2 => {
                if dao.advertised_dest != self.global
                    && self
                        .routing_table
                        .insert(RouteDest::Host(dao.advertised_dest), dao.sender_ll)
                {
                    self.record(
                        &mut out,
                        now,
                        TraceEvent::RouteAdd {
                            dest: RouteDest::Host(dao.advertised_dest),
                            via: dao.sender_ll,
                        },
                    );
                }
                if !self.is_root {
                    self.relay_dao(dao.clone(), &mut out);
                }
            }
        }
        Ok(out)
    }

    /// Pass a DAO one hop up. Storing mode rewrites the sender, non-storing
    /// mode forwards it untouched.
    fn relay_dao(&mut self, mut dao: DaoMessage, out: &mut EngineOutput) {
        let Some(parent) = self.preferred_parent else {
            self.counters.dao_queued += 1;
            self.queued_daos.push(dao);
            return;
        };
        if self.mop == Mop::Mop2 {
            dao.sender_ll = self.ll;
            dao.final_dest = parent;
        }
        out.sends.push(Outgoing {
            message: Message::Dao(dao),
            target: SendTarget::Unicast(parent),
        });
    }

    pub fn fire_timer<R: Rng + ?Sized>(
        &mut self,
        kind: TimerKind,
        generation: u64,
        now: SimTime,
        rng: &mut R,
    ) -> Result<EngineOutput, EngineError> {
        if generation != self.timer_generation(kind) {
            self.counters.stale_timers += 1;
            return Err(EngineError::StaleTimer { kind, generation });
        }
        let mut out = EngineOutput::default();
        match kind {
            TimerKind::Trickle => {
                let (transmit, next) = self.trickle.fire(now, rng);
                if transmit && self.dodag_id.is_some() {
                    out.sends.push(Outgoing {
                        message: Message::Dio(self.dio()),
                        target: SendTarget::LinkWide,
                    });
                }
                self.arm(&mut out, TimerKind::Trickle, next);
            }
            TimerKind::Dis => {
                if self.is_joined() {
                    self.dis_deadline = None;
                    self.disarm(TimerKind::Dis);
                } else {
                    out.sends.push(Outgoing {
                        message: Message::Dis(DisMessage { sender_ll: self.ll }),
                        target: SendTarget::LinkWide,
                    });
                    let at = now + self.config.dis_timeout;
                    self.dis_deadline = Some(at);
                    self.arm(&mut out, TimerKind::Dis, at);
                }
            }
            TimerKind::Dao => {
                self.dao_deadline = None;
                self.dao_pending = false;
                if let Some(parent) = self.preferred_parent {
                    let dao = match self.mop {
                        Mop::Mop0 => unreachable!("DAO timer never armed in MOP 0"),
                        Mop::Mop1 => DaoMessage {
                            advertised_dest: self.global,
                            dao_parent: Some(derive_global(parent).expect("parent is link-local")),
                            sender_ll: self.ll,
                            final_dest: self.dodag_id.expect("joined"),
                        },
                        Mop::Mop2 => DaoMessage {
                            advertised_dest: self.global,
                            dao_parent: None,
                            sender_ll: self.ll,
                            final_dest: parent,
                        },
                    };
                    out.sends.push(Outgoing {
                        message: Message::Dao(dao),
                        target: SendTarget::Unicast(parent),
                    });
                }
            }
        }
        Ok(out)
    }
}
