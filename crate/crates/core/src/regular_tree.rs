//! Complete d-regular host trees, addressed purely by index arithmetic.
//!
//! Leaves are numbered `1..=d^h` left to right. A vertex is addressed by its
//! level (root at 0) and its 1-based rank within that level.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{DaptError, Result};

/// `base^exp`, failing if the result exceeds `i64::MAX`.
pub fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp)
        .filter(|&v| v <= i64::MAX as u64)
        .ok_or_else(|| DaptError::Overflow(format!("{base}^{exp}")))
}

/// Smallest `h` with `d^h >= n` (0 for `n <= 1`).
pub fn ceil_log(n: u64, d: u64) -> u32 {
    let mut h = 0;
    let mut cap: u64 = 1;
    while cap < n {
        cap = cap.saturating_mul(d);
        h += 1;
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeafIndex(u64);

impl LeafIndex {
    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexAddress {
    pub level: u32,
    pub rank: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HostTree {
    degree: u64,
    height: u32,
    leaves: u64,
}

impl HostTree {
    pub fn new(degree: u64, height: u32) -> Result<Self> {
        if degree < 2 {
            return Err(DaptError::InvalidParameter(format!("degree must be at least 2, got {degree}")));
        }
        // d^{h+1} bounds the vertex count, so this also guarantees it fits.
        checked_pow(degree, height + 1)?;
        let leaves = checked_pow(degree, height)?;
        Ok(Self { degree, height, leaves })
    }

    /// Smallest host that can hold `n` guest vertices; height is at least 1.
    pub fn for_guest_size(n: u64, degree: u64) -> Result<Self> {
        Self::new(degree, ceil_log(n, degree).max(1))
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn leaf_count(&self) -> u64 {
        self.leaves
    }

    pub fn vertex_count(&self) -> u64 {
        (self.leaves * self.degree - 1) / (self.degree - 1)
    }

    pub fn leaf(&self, index: u64) -> Result<LeafIndex> {
        if index == 0 || index > self.leaves {
            return Err(DaptError::LeafOutOfRange { index, leaves: self.leaves });
        }
        Ok(LeafIndex(index))
    }

    /// The `l` of the distance formula: how many levels up the two leaves meet.
    /// Zero for identical leaves. Indices are not range-checked.
    pub(crate) fn meet_height(&self, i: u64, j: u64) -> u32 {
        let (mut a, mut b) = (i - 1, j - 1);
        if self.degree == 2 {
            return 64 - (a ^ b).leading_zeros();
        }
        let mut l = 0;
        while a != b {
            a /= self.degree;
            b /= self.degree;
            l += 1;
        }
        l
    }

    /// Distance between two in-range leaves, without validation.
    pub(crate) fn distance_unchecked(&self, i: u64, j: u64) -> u64 {
        2 * self.meet_height(i, j) as u64
    }

    pub fn leaf_distance(&self, i: u64, j: u64) -> Result<u64> {
        self.leaf(i)?;
        self.leaf(j)?;
        Ok(self.distance_unchecked(i, j))
    }

    pub fn most_recent_common_ancestor_level(&self, i: u64, j: u64) -> Result<u32> {
        self.leaf(i)?;
        self.leaf(j)?;
        if i == j {
            return Err(DaptError::InvalidParameter("common ancestor level needs two distinct leaves".into()));
        }
        Ok(self.height - self.meet_height(i, j))
    }

    pub fn root(&self) -> VertexAddress {
        VertexAddress { level: 0, rank: 1 }
    }

    pub fn leaf_address(&self, leaf: LeafIndex) -> VertexAddress {
        VertexAddress { level: self.height, rank: leaf.0 }
    }

    pub fn contains(&self, v: VertexAddress) -> bool {
        v.level <= self.height && v.rank >= 1 && v.rank <= self.degree.pow(v.level)
    }

    pub fn parent(&self, v: VertexAddress) -> Option<VertexAddress> {
        (v.level > 0).then(|| VertexAddress { level: v.level - 1, rank: (v.rank - 1) / self.degree + 1 })
    }

    pub fn children(&self, v: VertexAddress) -> Vec<VertexAddress> {
        if v.level >= self.height {
            return Vec::new();
        }
        let first = self.degree * (v.rank - 1) + 1;
        (first..first + self.degree)
            .map(|rank| VertexAddress { level: v.level + 1, rank })
            .collect()
    }

    /// The ancestor of `v` at `level`; `v` itself when the levels agree.
    pub fn ancestor(&self, v: VertexAddress, level: u32) -> Option<VertexAddress> {
        if level > v.level {
            return None;
        }
        let span = self.degree.pow(v.level - level);
        Some(VertexAddress { level, rank: (v.rank - 1) / span + 1 })
    }

    /// Leaf indices in the subtree rooted at `v`, in canonical order.
    pub fn leaves_under(&self, v: VertexAddress) -> RangeInclusive<u64> {
        let span = self.degree.pow(self.height - v.level);
        (v.rank - 1) * span + 1..=v.rank * span
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedSizes {
    pub vertices: u64,
    pub host_height: u32,
    pub leaves: u64,
}

/// Guest and host sizes for a complete binary guest of height `h_g`.
pub fn derived_sizes(h_g: u32) -> Result<DerivedSizes> {
    let leaves = checked_pow(2, h_g.checked_add(1).ok_or_else(|| DaptError::Overflow("height".into()))?)?;
    Ok(DerivedSizes { vertices: leaves - 1, host_height: h_g + 1, leaves })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let t = HostTree::new(2, 2).unwrap();
        assert_eq!(t.leaf_distance(1, 1).unwrap(), 0);
        assert_eq!(t.leaf_distance(1, 2).unwrap(), 2);
        assert_eq!(HostTree::new(2, 4).unwrap().leaf_distance(1, 16).unwrap(), 8);
        assert_eq!(HostTree::new(3, 2).unwrap().leaf_distance(1, 4).unwrap(), 4);
    }

    #[test]
    fn distance_rejects_out_of_range() {
        let t = HostTree::new(2, 2).unwrap();
        assert!(matches!(t.leaf_distance(0, 1), Err(DaptError::LeafOutOfRange { .. })));
        assert!(matches!(t.leaf_distance(1, 5), Err(DaptError::LeafOutOfRange { index: 5, leaves: 4 })));
    }

    #[test]
    fn common_ancestor_examples() {
        let t = HostTree::new(2, 3).unwrap();
        assert_eq!(t.most_recent_common_ancestor_level(1, 2).unwrap(), 2);
        assert_eq!(t.most_recent_common_ancestor_level(1, 8).unwrap(), 0);
        assert_eq!(t.most_recent_common_ancestor_level(3, 5).unwrap(), 0);
        assert!(t.most_recent_common_ancestor_level(4, 4).is_err());
    }

    #[test]
    fn derived_size_examples() {
        let s = |h| {
            let d = derived_sizes(h).unwrap();
            (d.vertices, d.host_height, d.leaves)
        };
        assert_eq!(s(0), (1, 1, 2));
        assert_eq!(s(3), (15, 4, 16));
        assert_eq!(s(6), (127, 7, 128));
        assert!(derived_sizes(63).is_err());
    }

    #[test]
    fn constructor_guards() {
        assert!(HostTree::new(1, 3).is_err());
        assert!(HostTree::new(2, 61).is_ok());
        assert!(matches!(HostTree::new(2, 62), Err(DaptError::Overflow(_))));
        assert!(HostTree::new(10, 17).is_ok());
        assert!(HostTree::new(10, 18).is_err());
        assert_eq!(HostTree::new(3, 2).unwrap().vertex_count(), 13);
    }

    #[test]
    fn address_navigation() {
        let t = HostTree::new(3, 3).unwrap();
        let v = VertexAddress { level: 1, rank: 2 };
        let kids = t.children(v);
        assert_eq!(kids.first().unwrap().rank, 4);
        assert_eq!(kids.last().unwrap().rank, 6);
        assert!(kids.iter().all(|&c| t.parent(c) == Some(v)));
        assert_eq!(t.leaves_under(v), 10..=18);
        let leaf = t.leaf_address(t.leaf(14).unwrap());
        assert_eq!(t.ancestor(leaf, 1), Some(v));
        assert_eq!(t.ancestor(leaf, 0), Some(t.root()));
        assert!(t.children(leaf).is_empty());
    }

    #[test]
    fn ceil_log_values() {
        assert_eq!(ceil_log(1, 2), 0);
        assert_eq!(ceil_log(2, 2), 1);
        assert_eq!(ceil_log(5, 2), 3);
        assert_eq!(ceil_log(9, 3), 2);
        assert_eq!(ceil_log(10, 3), 3);
    }
}
