//! Balanced partitions of complete binary trees into `k = 2^k'` blocks.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{DaptError, Result};
use crate::guest::GuestGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedPartition {
    guest: Arc<GuestGraph>,
    k: usize,
    block_of: Vec<usize>,
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl BalancedPartition {
    /// `block_of[v-1]` is the block id (1..=k) of vertex `v`.
    pub fn new(guest: Arc<GuestGraph>, k: usize, block_of: Vec<usize>) -> Result<Self> {
        let n = guest.vertex_count();
        if k < 2 {
            return Err(DaptError::InvalidPartition(format!("need at least 2 blocks, got k = {k}")));
        }
        if k > n {
            return Err(DaptError::InvalidPartition(format!("{k} non-empty blocks cannot fit {n} vertices")));
        }
        if block_of.len() != n {
            return Err(DaptError::InvalidPartition(format!(
                "{} block assignments for {n} vertices",
                block_of.len()
            )));
        }
        let cap = n.div_ceil(k);
        let mut sizes = vec![0usize; k + 1];
        for (i, &b) in block_of.iter().enumerate() {
            if b == 0 || b > k {
                return Err(DaptError::InvalidPartition(format!("vertex {} has block id {b} outside 1..={k}", i + 1)));
            }
            sizes[b] += 1;
        }
        for (b, &size) in sizes.iter().enumerate().skip(1) {
            if size == 0 {
                return Err(DaptError::InvalidPartition(format!("block {b} is empty")));
            }
            if size > cap {
                return Err(DaptError::InvalidPartition(format!("block {b} has {size} vertices, cap is {cap}")));
            }
        }
        Ok(Self { guest, k, block_of })
    }

    pub fn guest(&self) -> &Arc<GuestGraph> {
        &self.guest
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_of(&self, vertex: usize) -> usize {
        self.block_of[vertex - 1]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.block_of
    }

    /// Sizes indexed by block id minus one.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &b in &self.block_of {
            sizes[b - 1] += 1;
        }
        sizes
    }

    pub fn cut_count(&self) -> usize {
        self.guest
            .edges()
            .iter()
            .filter(|&&(u, v)| self.block_of[u - 1] != self.block_of[v - 1])
            .count()
    }

    /// Components induced by each block, indexed by block id minus one.
    pub fn components_per_block(&self) -> Vec<usize> {
        let n = self.guest.vertex_count();
        let mut sets = DisjointSets::new(n);
        for &(u, v) in self.guest.edges() {
            if self.block_of[u - 1] == self.block_of[v - 1] {
                sets.union(u - 1, v - 1);
            }
        }
        let mut counts = vec![0; self.k];
        for v in 0..n {
            if sets.find(v) == v {
                counts[self.block_of[v] - 1] += 1;
            }
        }
        counts
    }

    /// `i -> n_i`: how many blocks induce exactly `i` components (zero counts omitted).
    pub fn component_count_profile(&self) -> BTreeMap<usize, usize> {
        let mut profile = BTreeMap::new();
        for c in self.components_per_block() {
            *profile.entry(c).or_insert(0) += 1;
        }
        profile
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstructionParams {
    pub t: u32,
    pub e: u32,
    pub p: u64,
    pub q: u64,
}

#[derive(Debug, Clone)]
pub struct ConstructedPartition {
    pub partition: BalancedPartition,
    pub params: ConstructionParams,
}

/// Largest tree height for which the partition is materialized.
pub const MAX_CONSTRUCT_HEIGHT: u32 = 24;

fn check_params(h: u32, k_prime: u32) -> Result<()> {
    if h == 0 || h > 61 {
        return Err(DaptError::InvalidParameter(format!("height must be in 1..=61, got {h}")));
    }
    if k_prime == 0 || k_prime > h {
        return Err(DaptError::InvalidParameter(format!("k' must be in 1..={h}, got {k_prime}")));
    }
    Ok(())
}

fn band_shape(h: u32, k_prime: u32) -> (u32, u32) {
    let t = h - k_prime + 2;
    (t, (h + 1) / t - 1)
}

/// Vertices of the subtree at `v`, truncated below level `bottom`, in level order.
fn subtree(v: usize, bottom: u32) -> Vec<usize> {
    let top = level(v);
    let mut out = Vec::new();
    for depth in 0..=bottom.saturating_sub(top) {
        let first = v << depth;
        out.extend(first..first + (1 << depth));
    }
    out
}

fn level(v: usize) -> u32 {
    usize::BITS - 1 - v.leading_zeros()
}

pub fn construct_optimal(h: u32, k_prime: u32) -> Result<ConstructedPartition> {
    check_params(h, k_prime)?;
    if h > MAX_CONSTRUCT_HEIGHT {
        return Err(DaptError::Overflow(format!("height {h} exceeds {MAX_CONSTRUCT_HEIGHT}")));
    }
    let (t, e) = band_shape(h, k_prime);
    let n_b = 1usize << (t - 1);
    let k = 1usize << k_prime;
    let guest = Arc::new(GuestGraph::complete_binary(h)?);
    let mut block_of = vec![0usize; guest.vertex_count()];
    let mut next_id = 1;
    let mut assign = |vertices: &[usize], block_of: &mut Vec<usize>| {
        for &v in vertices {
            block_of[v - 1] = next_id;
        }
        next_id += 1;
    };

    // Band trees, bottom band first, each band left to right.
    let mut band_trees: Vec<(usize, u32)> = Vec::new();
    for i in 1..=e {
        let root_level = h - i * t + 1;
        let bottom = h - (i - 1) * t;
        band_trees.extend(((1usize << root_level)..(1usize << (root_level + 1))).map(|r| (r, bottom)));
    }
    let p = band_trees.len();
    if !(p * (n_b - 1)).is_multiple_of(n_b) {
        return Err(DaptError::Internal(format!("q is not integral for h = {h}, k' = {k_prime}")));
    }
    let q = p * (n_b - 1) / n_b;

    for &(r, bottom) in &band_trees {
        let mut block = vec![r];
        block.extend(subtree(2 * r, bottom));
        assign(&block, &mut block_of);
    }

    let mut canonical: Vec<(usize, u32)> = band_trees.iter().map(|&(r, b)| (2 * r + 1, b)).collect();
    canonical.sort_unstable();
    let (intact, shattered) = canonical.split_at(q);
    let mut isolated: Vec<usize> = shattered.iter().flat_map(|&(v, b)| subtree(v, b)).collect();
    isolated.sort_unstable();
    if isolated.len() != q {
        return Err(DaptError::Internal(format!("{} isolated vertices for {q} intact subtrees", isolated.len())));
    }
    let mut pairs: Vec<(usize, u32, usize)> =
        intact.iter().zip(&isolated).map(|(&(v, b), &x)| (v, b, x)).collect();
    // creation order: bottom band first, left to right
    pairs.sort_by_key(|&(v, _, _)| (std::cmp::Reverse(level(v)), v));
    for (v, bottom, x) in pairs {
        let mut block = subtree(v, bottom);
        block.push(x);
        assign(&block, &mut block_of);
    }

    let top_level = h + 1 - (e + 1) * t;
    let top_bottom = h - e * t;
    let tops: Vec<usize> = ((1usize << top_level)..(1usize << (top_level + 1))).collect();
    for &u in &tops {
        let mut block = vec![u];
        block.extend(subtree(2 * u, top_bottom));
        assign(&block, &mut block_of);
    }
    let spare: Vec<usize> = (1..(1usize << top_level)).collect();
    if tops.len() != spare.len() + 1 {
        return Err(DaptError::Internal("leftover right subtrees do not exceed spare vertices by one".into()));
    }
    for (&u, &x) in tops.iter().zip(&spare) {
        let mut block = subtree(2 * u + 1, top_bottom);
        block.push(x);
        assign(&block, &mut block_of);
    }
    let last = *tops.last().expect("at least one top vertex");
    assign(&subtree(2 * last + 1, top_bottom), &mut block_of);

    if next_id - 1 != k {
        return Err(DaptError::Internal(format!("construction produced {} blocks, expected {k}", next_id - 1)));
    }
    let partition = BalancedPartition::new(guest, k, block_of)?;
    let params = ConstructionParams { t, e, p: p as u64, q: q as u64 };
    Ok(ConstructedPartition { partition, params })
}

/// Closed-form number of one-component blocks in the construction.
pub fn n1_of_construction(h: u32, k_prime: u32) -> Result<u64> {
    check_params(h, k_prime)?;
    let (t, e) = band_shape(h, k_prime);
    Ok(1 + (1..=e + 1).map(|i| 1u64 << (h + 1 - i * t)).sum::<u64>())
}

/// Optimal cut count of a `2^k'`-balanced partition of the complete binary tree of height `h`.
pub fn optimal_value(h: u32, k_prime: u32) -> Result<u64> {
    let n1 = n1_of_construction(h, k_prime)?;
    Ok(2 * (1u64 << k_prime) - n1 - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRegime {
    /// `k' <= h - 1`: a lower bound only.
    BelowHeight,
    /// `k' = h`: exact.
    FullHeight,
    /// `k' <= floor(h/2) + 1`: exact.
    Shallow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtLeast,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundCase {
    pub regime: BoundRegime,
    pub relation: Relation,
    pub value: Ratio<i64>,
}

impl BoundCase {
    pub fn holds(&self, cut: u64) -> bool {
        let cut = Ratio::from_integer(cut as i64);
        match self.relation {
            Relation::AtLeast => cut >= self.value,
            Relation::Equal => cut == self.value,
        }
    }
}

/// Every applicable closed-form statement about the optimal cut count.
pub fn lower_bound_cases(h: u32, k_prime: u32) -> Result<Vec<BoundCase>> {
    check_params(h, k_prime)?;
    let k = Ratio::from_integer(1i64 << k_prime);
    let r = |a: i64, b: i64| Ratio::new(a, b);
    let mut cases = Vec::new();
    if k_prime < h {
        cases.push(BoundCase {
            regime: BoundRegime::BelowHeight,
            relation: Relation::AtLeast,
            value: r(10, 7) * k - r(2, 1),
        });
    }
    if k_prime == h {
        let sign = if k_prime.is_multiple_of(2) { 1 } else { -1 };
        cases.push(BoundCase {
            regime: BoundRegime::FullHeight,
            relation: Relation::Equal,
            value: r(4, 3) * k - r(3, 2) + r(sign, 6),
        });
    }
    if k_prime <= h / 2 + 1 {
        cases.push(BoundCase { regime: BoundRegime::Shallow, relation: Relation::Equal, value: r(3, 2) * k - r(2, 1) });
    }
    Ok(cases)
}
