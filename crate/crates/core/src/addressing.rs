//! Static IPv6 address plan.
//!
//! Every node owns a link-local address in `fe80::/64` and a global address
//! in `fd00::/64`. Both share the same interface identifier, which encodes
//! the node id as `8aa:ff:fe00:<id>`.

use std::fmt;
use std::net::Ipv6Addr;
use std::str::FromStr;

use thiserror::Error;

const SUFFIX_MASK: u128 = 0xffff_ffff_ffff_ffff;
const LINK_LOCAL_PREFIX: u128 = 0xfe80_0000_0000_0000 << 64;
const GLOBAL_PREFIX: u128 = 0xfd00_0000_0000_0000 << 64;
const IID_BASE: u64 = 0x08aa_00ff_fe00_0000;

/// Largest node id accepted by scenario validation. Larger ids would spill
/// into the `fe00` group and break the textual form of the address plan.
pub const MAX_SCENARIO_NODE_ID: u32 = 0xffff;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddressError {
    #[error("expected a {expected} address, got {found}")]
    WrongRole { expected: Role, found: Address },
    #[error("address {0} is outside fe80::/64 and fd00::/64")]
    UnsupportedPrefix(Ipv6Addr),
    #[error("invalid IPv6 address `{0}`")]
    Parse(String),
    #[error("node id must be at least 1")]
    ZeroNodeId,
}

/// 1-based node identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(id: u32) -> Result<Self, AddressError> {
        if id == 0 {
            Err(AddressError::ZeroNodeId)
        } else {
            Ok(NodeId(id))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    LinkLocal,
    Global,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::LinkLocal => f.write_str("link-local"),
            Role::Global => f.write_str("global"),
        }
    }
}

/// A node address in one of the two supported /64 prefixes.
///
/// Ordering is by the numeric 128-bit value, which keeps table dumps sorted
/// by node id within a prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(u128);

impl Address {
    pub fn from_bits(bits: u128) -> Result<Self, AddressError> {
        match bits & !SUFFIX_MASK {
            LINK_LOCAL_PREFIX | GLOBAL_PREFIX => Ok(Address(bits)),
            _ => Err(AddressError::UnsupportedPrefix(Ipv6Addr::from(bits))),
        }
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn role(self) -> Role {
        if self.0 & !SUFFIX_MASK == LINK_LOCAL_PREFIX {
            Role::LinkLocal
        } else {
            Role::Global
        }
    }

    /// Low 64 bits (interface identifier).
    pub fn suffix(self) -> u64 {
        (self.0 & SUFFIX_MASK) as u64
    }

    pub fn is_link_local(self) -> bool {
        self.role() == Role::LinkLocal
    }

    pub fn is_global(self) -> bool {
        self.role() == Role::Global
    }

    /// Node id encoded in the interface identifier, if it follows the plan.
    pub fn node_id(self) -> Option<NodeId> {
        let iid = self.suffix();
        let id = iid.checked_sub(IID_BASE)?;
        u32::try_from(id).ok().and_then(|id| NodeId::new(id).ok())
    }

    fn expect_role(self, expected: Role) -> Result<Self, AddressError> {
        if self.role() == expected {
            Ok(self)
        } else {
            Err(AddressError::WrongRole {
                expected,
                found: self,
            })
        }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Ipv6Addr::from(self.0), f)
    }
}

impl FromStr for Address {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ip: Ipv6Addr = s.parse().map_err(|_| AddressError::Parse(s.to_owned()))?;
        Address::from_bits(u128::from(ip))
    }
}

/// `fe80::8aa:ff:fe00:<id>`.
pub fn derive_link_local(id: NodeId) -> Address {
    let iid = IID_BASE + u64::from(id.get());
    Address(LINK_LOCAL_PREFIX | u128::from(iid))
}

/// Swap the `fe80::/64` prefix for `fd00::/64`, keeping the suffix.
pub fn derive_global(ll: Address) -> Result<Address, AddressError> {
    let ll = ll.expect_role(Role::LinkLocal)?;
    Ok(Address(GLOBAL_PREFIX | (ll.0 & SUFFIX_MASK)))
}

/// Inverse of [`derive_global`].
pub fn global_to_link_local(global: Address) -> Result<Address, AddressError> {
    let global = global.expect_role(Role::Global)?;
    Ok(Address(LINK_LOCAL_PREFIX | (global.0 & SUFFIX_MASK)))
}

/// Global address of a node, straight from its id.
pub fn global_of(id: NodeId) -> Address {
    Address(GLOBAL_PREFIX | u128::from(IID_BASE + u64::from(id.get())))
}
