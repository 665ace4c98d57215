//! Trace records and their line format:
//!
//! ```text
//! t=<secs.nanos> node=<id> ev=<EVENT> <key=value ...>
//! ```

use std::fmt;
use std::str::FromStr;

use crate::addressing::{Address, NodeId, Role};
use crate::forwarding::DropReason;
use crate::messages::{DaoMessage, DataPacket, DioMessage, DisMessage, Fields, ParseError, Rank};
use crate::time::SimTime;

/// Destination column of a routing table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RouteDest {
    Default,
    Host(Address),
}

impl fmt::Display for RouteDest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RouteDest::Default => f.write_str("DEFAULT"),
            RouteDest::Host(a) => a.fmt(f),
        }
    }
}

impl FromStr for RouteDest {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        if s == "DEFAULT" {
            Ok(RouteDest::Default)
        } else {
            Ok(RouteDest::Host(s.parse()?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    DioTx(DioMessage),
    DioRx(DioMessage),
    DisTx(DisMessage),
    DisRx(DisMessage),
    DaoTx {
        dao: DaoMessage,
        to: Address,
    },
    DaoRx(DaoMessage),
    ParentSet {
        parent: Address,
        rank: Rank,
    },
    RouteAdd {
        dest: RouteDest,
        via: Address,
    },
    SrtAdd {
        child: Address,
        parent: Option<Address>,
    },
    DataTx {
        packet: DataPacket,
        next_hop: Address,
    },
    DataRx(DataPacket),
    DataDrop {
        packet: DataPacket,
        reason: DropReason,
    },
}

impl TraceEvent {
    pub fn name(&self) -> &'static str {
        match self {
            TraceEvent::DioTx(_) => "DIO_TX",
            TraceEvent::DioRx(_) => "DIO_RX",
            TraceEvent::DisTx(_) => "DIS_TX",
            TraceEvent::DisRx(_) => "DIS_RX",
            TraceEvent::DaoTx { .. } => "DAO_TX",
            TraceEvent::DaoRx(_) => "DAO_RX",
            TraceEvent::ParentSet { .. } => "PARENT_SET",
            TraceEvent::RouteAdd { .. } => "ROUTE_ADD",
            TraceEvent::SrtAdd { .. } => "SRT_ADD",
            TraceEvent::DataTx { .. } => "DATA_TX",
            TraceEvent::DataRx(_) => "DATA_RX",
            TraceEvent::DataDrop { .. } => "DATA_DROP",
        }
    }

    /// PARENT_SET, ROUTE_ADD and SRT_ADD.
    pub fn is_table_change(&self) -> bool {
        matches!(
            self,
            TraceEvent::ParentSet { .. } | TraceEvent::RouteAdd { .. } | TraceEvent::SrtAdd { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: SimTime,
    pub node: NodeId,
    pub event: TraceEvent,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} node={} ev={} ",
            self.time,
            self.node,
            self.event.name()
        )?;
        match &self.event {
            TraceEvent::DioTx(m) | TraceEvent::DioRx(m) => write!(f, "{m}"),
            TraceEvent::DisTx(m) | TraceEvent::DisRx(m) => write!(f, "{m}"),
            TraceEvent::DaoTx { dao, to } => write!(f, "{dao} to={to}"),
            TraceEvent::DaoRx(m) => write!(f, "{m}"),
            TraceEvent::ParentSet { parent, rank } => write!(f, "parent={parent} rank={rank}"),
            TraceEvent::RouteAdd { dest, via } => write!(f, "dest={dest} via={via}"),
            TraceEvent::SrtAdd { child, parent } => match parent {
                Some(p) => write!(f, "child={child} parent={p}"),
                None => write!(f, "child={child} parent=NULL"),
            },
            TraceEvent::DataTx { packet, next_hop } => write!(f, "{packet} next={next_hop}"),
            TraceEvent::DataRx(p) => write!(f, "{p}"),
            TraceEvent::DataDrop { packet, reason } => write!(f, "{packet} reason={reason}"),
        }
    }
}

impl FromStr for TraceRecord {
    type Err = ParseError;

    fn from_str(line: &str) -> Result<Self, ParseError> {
        let mut f = Fields::parse(line)?;
        let time: SimTime = f.take_parsed("t")?;
        let node_raw: u32 = f.take_parsed("node")?;
        let node = NodeId::new(node_raw).map_err(|_| ParseError::Value {
            key: "node",
            value: node_raw.to_string(),
        })?;
        let ev = f.take("ev")?;
        let event = match ev {
            "DIO_TX" => TraceEvent::DioTx(DioMessage::from_fields(&mut f)?),
            "DIO_RX" => TraceEvent::DioRx(DioMessage::from_fields(&mut f)?),
            "DIS_TX" => TraceEvent::DisTx(DisMessage::from_fields(&mut f)?),
            "DIS_RX" => TraceEvent::DisRx(DisMessage::from_fields(&mut f)?),
            "DAO_TX" => {
                let dao = DaoMessage::from_fields(&mut f)?;
                let to = f.take_addr("to", Role::LinkLocal)?;
                TraceEvent::DaoTx { dao, to }
            }
            "DAO_RX" => TraceEvent::DaoRx(DaoMessage::from_fields(&mut f)?),
            "PARENT_SET" => TraceEvent::ParentSet {
                parent: f.take_addr("parent", Role::LinkLocal)?,
                rank: f.take_parsed("rank")?,
            },
            "ROUTE_ADD" => TraceEvent::RouteAdd {
                dest: f.take_parsed("dest")?,
                via: f.take_addr("via", Role::LinkLocal)?,
            },
            "SRT_ADD" => {
                let child = f.take_addr("child", Role::Global)?;
                let parent = match f.take("parent")? {
                    "NULL" => None,
                    s => Some(s.parse()?),
                };
                TraceEvent::SrtAdd { child, parent }
            }
            "DATA_TX" => {
                let packet = DataPacket::from_fields(&mut f)?;
                let next_hop = f.take_addr("next", Role::LinkLocal)?;
                TraceEvent::DataTx { packet, next_hop }
            }
            "DATA_RX" => TraceEvent::DataRx(DataPacket::from_fields(&mut f)?),
            "DATA_DROP" => {
                let packet = DataPacket::from_fields(&mut f)?;
                let reason = f.take_parsed("reason")?;
                TraceEvent::DataDrop { packet, reason }
            }
            other => return Err(ParseError::Kind(other.to_owned())),
        };
        f.finish()?;
        Ok(TraceRecord { time, node, event })
    }
}

/// Render records one per line, newline-terminated.
pub fn render(records: &[TraceRecord]) -> String {
    use fmt::Write;
    let mut out = String::new();
    for r in records {
        writeln!(out, "{r}").expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addressing::{derive_link_local, global_of};

    #[test]
    fn route_add_line() {
        let n = |i| NodeId::new(i).unwrap();
        let rec = TraceRecord {
            time: SimTime::from_nanos(1_250_000_000),
            node: n(2),
            event: TraceEvent::RouteAdd {
                dest: RouteDest::Default,
                via: derive_link_local(n(1)),
            },
        };
        let line = rec.to_string();
        assert_eq!(
            line,
            "t=1.250000000 node=2 ev=ROUTE_ADD dest=DEFAULT via=fe80::8aa:ff:fe00:1"
        );
        assert_eq!(line.parse::<TraceRecord>().unwrap(), rec);

        let srt = TraceRecord {
            time: SimTime::ZERO,
            node: n(1),
            event: TraceEvent::SrtAdd {
                child: global_of(n(1)),
                parent: None,
            },
        };
        assert_eq!(
            srt.to_string(),
            "t=0.000000000 node=1 ev=SRT_ADD child=fd00::8aa:ff:fe00:1 parent=NULL"
        );
        assert_eq!(srt.to_string().parse::<TraceRecord>().unwrap(), srt);
    }

    #[test]
    fn unknown_event_rejected() {
        assert!(matches!(
            "t=0.000000000 node=1 ev=NOPE".parse::<TraceRecord>(),
            Err(ParseError::Kind(_))
        ));
    }
}
