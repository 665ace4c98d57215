//! Data-plane decisions for each mode of operation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::addressing::{global_to_link_local, Address};
use crate::engine::{NodeState, SourceRoutingTable};
use crate::messages::{DataPacket, Mop, RouteError, RouteStep, SourceRouteHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DropReason {
    NoRoute,
    HopLimitExceeded,
    NotOnRoute,
    /// Lost on the link (simulator only).
    LinkLoss,
    /// Unicast next hop is not a neighbor (simulator only).
    NoLink,
}

impl DropReason {
    pub const ALL: [DropReason; 5] = [
        DropReason::NoRoute,
        DropReason::HopLimitExceeded,
        DropReason::NotOnRoute,
        DropReason::LinkLoss,
        DropReason::NoLink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::NoRoute => "NoRoute",
            DropReason::HopLimitExceeded => "HopLimitExceeded",
            DropReason::NotOnRoute => "NotOnRoute",
            DropReason::LinkLoss => "LinkLoss",
            DropReason::NoLink => "NoLink",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DropReason {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        DropReason::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Deliver(DataPacket),
    Send {
        next_hop: Address,
        packet: DataPacket,
    },
    Drop {
        reason: DropReason,
        packet: DataPacket,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceRouteError {
    #[error("no source routing entry for {0}")]
    NoRoute(Address),
    #[error("DAO-parent chain from {0} does not terminate at the root")]
    CycleDetected(Address),
}

/// Hops from the root (exclusive) to `dest` (inclusive), built by walking
/// DAO parents back to the `NULL` root entry.
pub fn build_source_route(
    srt: &SourceRoutingTable,
    dest: Address,
) -> Result<Vec<Address>, SourceRouteError> {
    let mut hops = Vec::new();
    let mut cursor = dest;
    loop {
        match srt.get(&cursor) {
            None => return Err(SourceRouteError::NoRoute(cursor)),
            Some(None) => break,
            Some(Some(parent)) => {
                if hops.len() >= srt.len() {
                    return Err(SourceRouteError::CycleDetected(dest));
                }
                hops.push(cursor);
                cursor = parent;
            }
        }
    }
    hops.reverse();
    Ok(hops)
}

fn send(next_hop_global: Address, mut packet: DataPacket) -> Action {
    packet.hop_limit -= 1;
    match global_to_link_local(next_hop_global) {
        Ok(next_hop) => Action::Send { next_hop, packet },
        Err(_) => Action::Drop {
            reason: DropReason::NotOnRoute,
            packet,
        },
    }
}

fn send_ll(next_hop: Address, mut packet: DataPacket) -> Action {
    packet.hop_limit -= 1;
    Action::Send { next_hop, packet }
}

fn drop(reason: DropReason, packet: DataPacket) -> Action {
    Action::Drop { reason, packet }
}

fn upward(state: &NodeState, packet: DataPacket) -> Action {
    match state.routing_table().default_route() {
        Some(parent) => send_ll(parent, packet),
        None => drop(DropReason::NoRoute, packet),
    }
}

/// Decide what `state` does with `packet`, which it just received or
/// originated.
pub fn forward(state: &NodeState, mut packet: DataPacket) -> Action {
    if packet.dst == state.global() {
        return Action::Deliver(packet);
    }
    if packet.hop_limit == 0 {
        return drop(DropReason::HopLimitExceeded, packet);
    }
    if let Some(header) = packet.route.as_mut() {
        return match header.advance(state.global()) {
            Ok(RouteStep::Next(hop)) => send(hop, packet),
            Ok(RouteStep::Done) | Err(RouteError::NotOnRoute) | Err(RouteError::Empty) => {
                drop(DropReason::NotOnRoute, packet)
            }
        };
    }
    match state.mop() {
        Mop::Mop1 if state.is_root() => {
            let srt = state
                .source_routing_table()
                .expect("non-storing root owns the source routing table");
            match build_source_route(srt, packet.dst) {
                Ok(hops) => {
                    // The first hop consumes its own slot on arrival.
                    let first = hops[0];
                    packet.route =
                        Some(SourceRouteHeader::new(hops).expect("dst differs from root"));
                    send(first, packet)
                }
                Err(_) => drop(DropReason::NoRoute, packet),
            }
        }
        Mop::Mop2 => match state.routing_table().lookup(packet.dst) {
            Some(next_hop) => send_ll(next_hop, packet),
            None => upward(state, packet),
        },
        Mop::Mop0 | Mop::Mop1 => upward(state, packet),
    }
}
