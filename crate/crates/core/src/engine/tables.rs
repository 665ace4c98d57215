use std::collections::BTreeMap;

use crate::addressing::Address;
use crate::messages::Rank;
use crate::time::SimTime;
use crate::trace::RouteDest;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentEntry {
    pub neighbor_ll: Address,
    pub neighbor_global: Address,
    pub rank: Rank,
    pub last_dio_time: SimTime,
}

/// Candidate parents keyed by link-local address.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParentTable {
    entries: BTreeMap<Address, ParentEntry>,
}

impl ParentTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn upsert(&mut self, entry: ParentEntry) {
        self.entries.insert(entry.neighbor_ll, entry);
    }

    pub fn remove(&mut self, neighbor_ll: &Address) -> Option<ParentEntry> {
        self.entries.remove(neighbor_ll)
    }

    pub fn get(&self, neighbor_ll: &Address) -> Option<&ParentEntry> {
        self.entries.get(neighbor_ll)
    }

    /// Drop entries that could no longer serve as parent at `own_rank`.
    pub(crate) fn retain_below(&mut self, own_rank: Rank) {
        self.entries.retain(|_, e| e.rank < own_rank);
    }

    pub fn iter(&self) -> impl Iterator<Item = &ParentEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Best candidate by `(rank, link-local address)`, provided it strictly
/// improves on `own_rank`.
pub fn select_parent(table: &ParentTable, own_rank: Rank) -> Option<&ParentEntry> {
    let best = table
        .iter()
        .filter(|e| !e.rank.is_infinite())
        .min_by_key(|e| (e.rank, e.neighbor_ll))?;
    (best.rank.child_rank() < own_rank).then_some(best)
}

/// Next-hop table: at most one `DEFAULT` entry and one entry per host.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoutingTable {
    entries: BTreeMap<RouteDest, Address>,
}

impl RoutingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert or replace. Returns `true` if the table changed.
    pub fn insert(&mut self, dest: RouteDest, next_hop: Address) -> bool {
        self.entries.insert(dest, next_hop) != Some(next_hop)
    }

    pub fn default_route(&self) -> Option<Address> {
        self.entries.get(&RouteDest::Default).copied()
    }

    pub fn lookup(&self, dest: Address) -> Option<Address> {
        self.entries.get(&RouteDest::Host(dest)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RouteDest, Address)> + '_ {
        self.entries.iter().map(|(d, n)| (*d, *n))
    }

    /// Host entries only.
    pub fn host_routes(&self) -> impl Iterator<Item = (Address, Address)> + '_ {
        self.entries.iter().filter_map(|(d, n)| match d {
            RouteDest::Host(a) => Some((*a, *n)),
            RouteDest::Default => None,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn host_route_count(&self) -> usize {
        self.len() - usize::from(self.default_route().is_some())
    }
}

/// Root-only DAO-parent map of non-storing mode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceRoutingTable {
    entries: BTreeMap<Address, Option<Address>>,
}

impl SourceRoutingTable {
    /// Seeded with the root's own entry, whose parent is `NULL`.
    pub fn with_root(root_global: Address) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(root_global, None);
        SourceRoutingTable { entries }
    }

    /// Insert or replace. Returns `true` if the table changed.
    pub fn insert(&mut self, child: Address, dao_parent: Option<Address>) -> bool {
        self.entries.insert(child, dao_parent) != Some(dao_parent)
    }

    /// Outer `None` means unknown child; inner `None` is the root entry.
    pub fn get(&self, child: &Address) -> Option<Option<Address>> {
        self.entries.get(child).copied()
    }

    pub fn contains(&self, child: &Address) -> bool {
        self.entries.contains_key(child)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Address, Option<Address>)> + '_ {
        self.entries.iter().map(|(c, p)| (*c, *p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
