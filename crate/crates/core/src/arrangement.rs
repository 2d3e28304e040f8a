//! Arrangements of guest graphs on host leaves and their objective value.

use std::fmt;
use std::sync::Arc;

use crate::error::{DaptError, Result};
use crate::guest::GuestGraph;
use crate::regular_tree::{HostTree, LeafIndex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotInjective { leaf: u64, vertices: Vec<usize> },
    Unmapped { vertex: usize },
    OutOfRange { vertex: usize, leaf: u64 },
    UnknownVertex { vertex: usize },
    DuplicateVertex { vertex: usize },
    HostTooSmall { vertices: usize, leaves: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotInjective { leaf, vertices } => {
                let list: Vec<String> = vertices.iter().map(ToString::to_string).collect();
                write!(f, "not injective: leaf {leaf} holds vertices {}", list.join(","))
            }
            Violation::Unmapped { vertex } => write!(f, "unmapped: vertex {vertex} has no leaf"),
            Violation::OutOfRange { vertex, leaf } => write!(f, "out of range: vertex {vertex} mapped to leaf {leaf}"),
            Violation::UnknownVertex { vertex } => write!(f, "unknown vertex: {vertex} is not a guest vertex"),
            Violation::DuplicateVertex { vertex } => write!(f, "duplicate entry for vertex {vertex}"),
            Violation::HostTooSmall { vertices, leaves } => {
                write!(f, "host too small: {vertices} vertices but only {leaves} leaves")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let lines: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", lines.join("; "))
    }
}

/// Checks a raw list of `(vertex, leaf)` entries against a guest and host.
pub fn validate(guest: &GuestGraph, host: &HostTree, entries: &[(usize, u64)]) -> ViolationReport {
    let n = guest.vertex_count();
    let mut violations = Vec::new();
    if (n as u64) > host.leaf_count() {
        violations.push(Violation::HostTooSmall { vertices: n, leaves: host.leaf_count() });
    }
    let mut leaf_of: Vec<Option<u64>> = vec![None; n + 1];
    for &(vertex, leaf) in entries {
        if vertex == 0 || vertex > n {
            violations.push(Violation::UnknownVertex { vertex });
            continue;
        }
        if leaf_of[vertex].is_some() {
            violations.push(Violation::DuplicateVertex { vertex });
            continue;
        }
        if leaf == 0 || leaf > host.leaf_count() {
            violations.push(Violation::OutOfRange { vertex, leaf });
        }
        leaf_of[vertex] = Some(leaf);
    }
    for (vertex, leaf) in leaf_of.iter().enumerate().skip(1) {
        if leaf.is_none() {
            violations.push(Violation::Unmapped { vertex });
        }
    }
    let mut by_leaf: Vec<(u64, usize)> = leaf_of
        .iter()
        .enumerate()
        .filter_map(|(v, l)| l.map(|l| (l, v)))
        .collect();
    by_leaf.sort_unstable();
    for group in by_leaf.chunk_by(|a, b| a.0 == b.0) {
        if group.len() > 1 {
            violations.push(Violation::NotInjective {
                leaf: group[0].0,
                vertices: group.iter().map(|&(_, v)| v).collect(),
            });
        }
    }
    ViolationReport { violations }
}

/// Edge counts by half-distance, `a[i-1] = a_i`, with tail sums `s_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceProfile {
    a: Vec<u64>,
    s: Vec<u64>,
}

impl DistanceProfile {
    pub fn from_counts(a: Vec<u64>) -> Self {
        let mut s = a.clone();
        for i in (0..s.len().saturating_sub(1)).rev() {
            s[i] += s[i + 1];
        }
        Self { a, s }
    }

    pub fn height(&self) -> usize {
        self.a.len()
    }

    /// `a_i` for `1 <= i <= h`.
    pub fn a(&self, i: usize) -> u64 {
        self.a[i - 1]
    }

    /// `s_i` for `1 <= i <= h`.
    pub fn s(&self, i: usize) -> u64 {
        self.s[i - 1]
    }

    pub fn counts(&self) -> &[u64] {
        &self.a
    }

    pub fn tails(&self) -> &[u64] {
        &self.s
    }

    /// `2 * sum(s_i)`, which equals the objective value.
    pub fn objective(&self) -> u64 {
        2 * self.s.iter().sum::<u64>()
    }

    /// `2 * sum(i * a_i)`; always equal to [`DistanceProfile::objective`].
    pub fn weighted_objective(&self) -> u64 {
        2 * self.a.iter().enumerate().map(|(i, &a)| (i as u64 + 1) * a).sum::<u64>()
    }
}

/// A total injective map from guest vertices to host leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    guest: Arc<GuestGraph>,
    host: HostTree,
    leaf_of: Vec<u64>,
}

impl Arrangement {
    /// `leaves[v-1]` is the leaf of vertex `v`.
    pub fn new(guest: Arc<GuestGraph>, host: HostTree, leaves: Vec<u64>) -> Result<Self> {
        let entries: Vec<(usize, u64)> = leaves.iter().enumerate().map(|(i, &l)| (i + 1, l)).collect();
        let mut report = validate(&guest, &host, &entries);
        if leaves.len() < guest.vertex_count() {
            report.violations.extend(
                (leaves.len() + 1..=guest.vertex_count()).map(|vertex| Violation::Unmapped { vertex }),
            );
        }
        if !report.is_ok() {
            return Err(DaptError::InvalidArrangement(report));
        }
        Ok(Self { guest, host, leaf_of: leaves })
    }

    /// Builds from a per-leaf occupant list (`occupants[i-1]` sits on leaf `i`).
    pub fn from_occupants(guest: Arc<GuestGraph>, host: HostTree, occupants: &[Option<usize>]) -> Result<Self> {
        let entries: Vec<(usize, u64)> = occupants
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (v, i as u64 + 1)))
            .collect();
        let report = validate(&guest, &host, &entries);
        if !report.is_ok() {
            return Err(DaptError::InvalidArrangement(report));
        }
        let mut leaves = vec![0; guest.vertex_count()];
        for (v, l) in entries {
            leaves[v - 1] = l;
        }
        Ok(Self { guest, host, leaf_of: leaves })
    }

    pub fn guest(&self) -> &Arc<GuestGraph> {
        &self.guest
    }

    pub fn host(&self) -> &HostTree {
        &self.host
    }

    pub fn leaf_of(&self, vertex: usize) -> LeafIndex {
        self.host.leaf(self.leaf_of[vertex - 1]).expect("arrangement invariant")
    }

    /// Leaves indexed by vertex, `slice[v-1]`.
    pub fn leaves(&self) -> &[u64] {
        &self.leaf_of
    }

    /// Occupant of every leaf in canonical order.
    pub fn occupants(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.host.leaf_count() as usize];
        for (i, &l) in self.leaf_of.iter().enumerate() {
            out[l as usize - 1] = Some(i + 1);
        }
        out
    }

    pub fn objective_value(&self) -> u64 {
        self.guest
            .edges()
            .iter()
            .map(|&(u, v)| self.host.distance_unchecked(self.leaf_of[u - 1], self.leaf_of[v - 1]))
            .sum()
    }

    pub fn distance_profile(&self) -> DistanceProfile {
        let mut a = vec![0u64; self.host.height() as usize];
        for &(u, v) in self.guest.edges() {
            let l = self.host.meet_height(self.leaf_of[u - 1], self.leaf_of[v - 1]);
            a[l as usize - 1] += 1;
        }
        DistanceProfile::from_counts(a)
    }

    /// A copy with the contents of leaves `i` and `j` exchanged (either may be free).
    pub fn swap_leaves(&self, i: u64, j: u64) -> Result<Self> {
        self.host.leaf(i)?;
        self.host.leaf(j)?;
        let mut leaf_of = self.leaf_of.clone();
        for l in leaf_of.iter_mut() {
            if *l == i {
                *l = j;
            } else if *l == j {
                *l = i;
            }
        }
        Ok(Self { guest: Arc::clone(&self.guest), host: self.host, leaf_of })
    }
}
