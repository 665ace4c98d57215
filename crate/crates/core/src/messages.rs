//! Control-plane and data-plane message values.
//!
//! Links carry typed values, so no wire encoding exists. Each message has a
//! `key=value` rendering used by the trace stream, and parses back from it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::addressing::{Address, AddressError, Role};

/// Default IPv6 hop limit for data packets.
pub const DEFAULT_HOP_LIMIT: u8 = 255;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("malformed token `{0}`, expected key=value")]
    Token(String),
    #[error("duplicate field `{0}`")]
    Duplicate(String),
    #[error("unexpected field `{0}`")]
    Unexpected(String),
    #[error("invalid value `{value}` for `{key}`")]
    Value { key: &'static str, value: String },
    #[error(transparent)]
    Address(#[from] AddressError),
    #[error("unknown message kind `{0}`")]
    Kind(String),
}

/// Mode of operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mop {
    /// Upward routes only.
    Mop0,
    /// Non-storing: the root keeps a source routing table.
    Mop1,
    /// Storing without multicast: every node keeps its subtree.
    Mop2,
}

impl Mop {
    pub fn value(self) -> u8 {
        match self {
            Mop::Mop0 => 0,
            Mop::Mop1 => 1,
            Mop::Mop2 => 2,
        }
    }

    pub fn has_downward_routes(self) -> bool {
        self != Mop::Mop0
    }
}

impl TryFrom<u8> for Mop {
    type Error = u8;

    fn try_from(v: u8) -> Result<Self, u8> {
        match v {
            0 => Ok(Mop::Mop0),
            1 => Ok(Mop::Mop1),
            2 => Ok(Mop::Mop2),
            other => Err(other),
        }
    }
}

impl fmt::Display for Mop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Hop-count rank. The root advertises 1, each child one more than its
/// parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(u16);

impl Rank {
    pub const ROOT: Rank = Rank(1);
    pub const INFINITE: Rank = Rank(0xffff);

    pub const fn new(v: u16) -> Self {
        Rank(v)
    }

    pub fn get(self) -> u16 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self == Rank::INFINITE
    }

    /// Rank a node obtains by choosing a parent advertising `self`.
    pub fn child_rank(self) -> Rank {
        Rank(self.0.saturating_add(1))
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("INF")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Rank {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        if s == "INF" {
            Ok(Rank::INFINITE)
        } else {
            s.parse().map(Rank).map_err(|_| ())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DioMessage {
    pub dodag_id: Address,
    pub version: u8,
    pub rank: Rank,
    pub mop: Mop,
    pub sender_ll: Address,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisMessage {
    pub sender_ll: Address,
}

/// Destination advertisement. `dao_parent` is only filled in non-storing
/// mode; `final_dest` is the root's global address there and the next
/// parent's link-local address in storing mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaoMessage {
    pub advertised_dest: Address,
    pub dao_parent: Option<Address>,
    pub sender_ll: Address,
    pub final_dest: Address,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("node is not on the source route at the cursor position")]
    NotOnRoute,
    #[error("source route must contain at least one hop")]
    Empty,
}

/// Outcome of consuming one slot of a source route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteStep {
    Next(Address),
    Done,
}

/// Source route carried by root-originated packets in non-storing mode.
/// `hops` lists the global addresses after the root; `cursor` indexes the
/// hop expected to process the packet next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRouteHeader {
    hops: Vec<Address>,
    cursor: usize,
}

impl SourceRouteHeader {
    pub fn new(hops: Vec<Address>) -> Result<Self, RouteError> {
        if hops.is_empty() {
            return Err(RouteError::Empty);
        }
        Ok(SourceRouteHeader { hops, cursor: 0 })
    }

    pub fn hops(&self) -> &[Address] {
        &self.hops
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn last_hop(&self) -> Address {
        *self.hops.last().expect("non-empty by construction")
    }

    /// Consume the slot held by `self_global` and return the hop after it.
    pub fn advance(&mut self, self_global: Address) -> Result<RouteStep, RouteError> {
        match self.hops.get(self.cursor) {
            Some(&hop) if hop == self_global => {
                self.cursor += 1;
                Ok(match self.hops.get(self.cursor) {
                    Some(&next) => RouteStep::Next(next),
                    None => RouteStep::Done,
                })
            }
            _ => Err(RouteError::NotOnRoute),
        }
    }
}

/// Free-function form of [`SourceRouteHeader::advance`].
pub fn advance_source_route(
    header: &mut SourceRouteHeader,
    self_global: Address,
) -> Result<RouteStep, RouteError> {
    header.advance(self_global)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPacket {
    pub flow_id: u32,
    pub src: Address,
    pub dst: Address,
    pub hop_limit: u8,
    pub route: Option<SourceRouteHeader>,
}

impl DataPacket {
    pub fn new(flow_id: u32, src: Address, dst: Address) -> Self {
        DataPacket {
            flow_id,
            src,
            dst,
            hop_limit: DEFAULT_HOP_LIMIT,
            route: None,
        }
    }

    /// Links traversed so far.
    pub fn hops_taken(&self) -> u8 {
        DEFAULT_HOP_LIMIT - self.hop_limit
    }
}

/// Anything a link can carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Dio(DioMessage),
    Dis(DisMessage),
    Dao(DaoMessage),
    Data(DataPacket),
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Dio(_) => MessageKind::Dio,
            Message::Dis(_) => MessageKind::Dis,
            Message::Dao(_) => MessageKind::Dao,
            Message::Data(_) => MessageKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    Dio,
    Dis,
    Dao,
    Data,
}

impl MessageKind {
    pub const ALL: [MessageKind; 4] = [
        MessageKind::Dio,
        MessageKind::Dis,
        MessageKind::Dao,
        MessageKind::Data,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::Dio => "DIO",
            MessageKind::Dis => "DIS",
            MessageKind::Dao => "DAO",
            MessageKind::Data => "DATA",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---- key=value rendering ----

impl fmt::Display for DioMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dodag={} version={} rank={} mop={} sender={}",
            self.dodag_id, self.version, self.rank, self.mop, self.sender_ll
        )
    }
}

impl fmt::Display for DisMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sender={}", self.sender_ll)
    }
}

impl fmt::Display for DaoMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "adv={} dao_parent=", self.advertised_dest)?;
        match self.dao_parent {
            Some(p) => write!(f, "{p}")?,
            None => f.write_str("NULL")?,
        }
        write!(f, " sender={} final={}", self.sender_ll, self.final_dest)
    }
}

impl fmt::Display for DataPacket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "flow={} src={} dst={} hl={} route=",
            self.flow_id, self.src, self.dst, self.hop_limit
        )?;
        match &self.route {
            None => f.write_str("-"),
            Some(h) => {
                for (i, hop) in h.hops.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{hop}")?;
                }
                write!(f, " cursor={}", h.cursor)
            }
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Dio(m) => m.fmt(f),
            Message::Dis(m) => m.fmt(f),
            Message::Dao(m) => m.fmt(f),
            Message::Data(m) => m.fmt(f),
        }
    }
}

/// Parsed `key=value` tokens, consumed field by field.
pub(crate) struct Fields<'a> {
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    pub(crate) fn parse(s: &'a str) -> Result<Self, ParseError> {
        let mut map = BTreeMap::new();
        for tok in s.split_ascii_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| ParseError::Token(tok.to_owned()))?;
            if map.insert(k, v).is_some() {
                return Err(ParseError::Duplicate(k.to_owned()));
            }
        }
        Ok(Fields { map })
    }

    pub(crate) fn take(&mut self, key: &'static str) -> Result<&'a str, ParseError> {
        self.map.remove(key).ok_or(ParseError::Missing(key))
    }

    pub(crate) fn take_parsed<T: FromStr>(&mut self, key: &'static str) -> Result<T, ParseError> {
        let v = self.take(key)?;
        v.parse().map_err(|_| ParseError::Value {
            key,
            value: v.to_owned(),
        })
    }

    pub(crate) fn take_addr(
        &mut self,
        key: &'static str,
        role: Role,
    ) -> Result<Address, ParseError> {
        let v = self.take(key)?;
        let a: Address = v.parse()?;
        if a.role() != role {
            return Err(AddressError::WrongRole {
                expected: role,
                found: a,
            }
            .into());
        }
        Ok(a)
    }

    pub(crate) fn take_any_addr(&mut self, key: &'static str) -> Result<Address, ParseError> {
        Ok(self.take(key)?.parse()?)
    }

    pub(crate) fn finish(self) -> Result<(), ParseError> {
        match self.map.into_keys().next() {
            Some(k) => Err(ParseError::Unexpected(k.to_owned())),
            None => Ok(()),
        }
    }
}

fn parse_mop(s: &str) -> Result<Mop, ParseError> {
    s.parse::<u8>()
        .ok()
        .and_then(|v| Mop::try_from(v).ok())
        .ok_or_else(|| ParseError::Value {
            key: "mop",
            value: s.to_owned(),
        })
}

impl DioMessage {
    pub(crate) fn from_fields(f: &mut Fields<'_>) -> Result<Self, ParseError> {
        Ok(DioMessage {
            dodag_id: f.take_addr("dodag", Role::Global)?,
            version: f.take_parsed("version")?,
            rank: f.take_parsed("rank")?,
            mop: parse_mop(f.take("mop")?)?,
            sender_ll: f.take_addr("sender", Role::LinkLocal)?,
        })
    }
}

impl DisMessage {
    pub(crate) fn from_fields(f: &mut Fields<'_>) -> Result<Self, ParseError> {
        Ok(DisMessage {
            sender_ll: f.take_addr("sender", Role::LinkLocal)?,
        })
    }
}

impl DaoMessage {
    pub(crate) fn from_fields(f: &mut Fields<'_>) -> Result<Self, ParseError> {
        let advertised_dest = f.take_addr("adv", Role::Global)?;
        let dao_parent = match f.take("dao_parent")? {
            "NULL" => None,
            s => Some(s.parse()?),
        };
        Ok(DaoMessage {
            advertised_dest,
            dao_parent,
            sender_ll: f.take_addr("sender", Role::LinkLocal)?,
            final_dest: f.take_any_addr("final")?,
        })
    }
}

impl DataPacket {
    pub(crate) fn from_fields(f: &mut Fields<'_>) -> Result<Self, ParseError> {
        let flow_id = f.take_parsed("flow")?;
        let src = f.take_addr("src", Role::Global)?;
        let dst = f.take_addr("dst", Role::Global)?;
        let hop_limit = f.take_parsed("hl")?;
        let route = match f.take("route")? {
            "-" => None,
            list => {
                let hops = list
                    .split(',')
                    .map(|h| h.parse::<Address>())
                    .collect::<Result<Vec<_>, _>>()?;
                let cursor: usize = f.take_parsed("cursor")?;
                if cursor > hops.len() || hops.is_empty() {
                    return Err(ParseError::Value {
                        key: "cursor",
                        value: cursor.to_string(),
                    });
                }
                Some(SourceRouteHeader { hops, cursor })
            }
        };
        Ok(DataPacket {
            flow_id,
            src,
            dst,
            hop_limit,
            route,
        })
    }
}

impl Message {
    pub fn parse(kind: MessageKind, s: &str) -> Result<Self, ParseError> {
        let mut f = Fields::parse(s)?;
        let msg = Self::from_fields(kind, &mut f)?;
        f.finish()?;
        Ok(msg)
    }

    pub(crate) fn from_fields(kind: MessageKind, f: &mut Fields<'_>) -> Result<Self, ParseError> {
        Ok(match kind {
            MessageKind::Dio => Message::Dio(DioMessage::from_fields(f)?),
            MessageKind::Dis => Message::Dis(DisMessage::from_fields(f)?),
            MessageKind::Dao => Message::Dao(DaoMessage::from_fields(f)?),
            MessageKind::Data => Message::Data(DataPacket::from_fields(f)?),
        })
    }
}

macro_rules! from_str_via_fields {
    ($ty:ty) => {
        impl FromStr for $ty {
            type Err = ParseError;

            fn from_str(s: &str) -> Result<Self, ParseError> {
                let mut f = Fields::parse(s)?;
                let v = <$ty>::from_fields(&mut f)?;
                f.finish()?;
                Ok(v)
            }
        }
    };
}

from_str_via_fields!(DioMessage);
from_str_via_fields!(DisMessage);
from_str_via_fields!(DaoMessage);
from_str_via_fields!(DataPacket);
