//! Star optima and the reduction from numerical matching with target sums
//! (NMTS) to tree-guest arrangement instances.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arrangement::Arrangement;
use crate::error::{DaptError, Result};
use crate::guest::GuestGraph;
use crate::regular_tree::{ceil_log, checked_pow, HostTree};

/// Reductions whose guest would exceed this many vertices are refused.
pub const MAX_REDUCTION_VERTICES: u64 = 1 << 24;

fn check_degree(d: u64) -> Result<()> {
    if d < 2 {
        return Err(DaptError::InvalidParameter(format!("degree must be at least 2, got {d}")));
    }
    Ok(())
}

/// Optimal contribution of an `n`-vertex star placed inside a `d`-ary host.
fn star_term(n: u64, d: u64) -> Result<u64> {
    let h = ceil_log(n, d);
    let inner = (checked_pow(d, h)? - 1) / (d - 1);
    let hn = (h as u64).checked_mul(n).ok_or_else(|| DaptError::Overflow("star term".into()))?;
    Ok(2 * (hn - inner))
}

/// Optimal objective for a star on `n` vertices in the smallest host holding it.
pub fn star_optimum(n: u64, d: u64) -> Result<u64> {
    check_degree(d)?;
    if n == 0 {
        return Err(DaptError::InvalidParameter("a star needs at least one vertex".into()));
    }
    star_term(n, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreeStarOptimum {
    pub terms: [u64; 3],
    pub total: u64,
}

fn three_star_violations(sizes: [u64; 3], d: u64) -> Vec<String> {
    let [n1, n2, n3] = sizes;
    let mut v = Vec::new();
    if d < 2 {
        v.push(format!("degree must be at least 2, got {d}"));
    }
    if sizes.contains(&0) {
        v.push("every star needs at least one vertex".to_string());
    }
    if !(n1 >= n2 && n2 >= n3) {
        v.push(format!("sizes must be non-increasing, got ({n1}, {n2}, {n3})"));
    }
    let n = n1 + n2 + n3;
    if d >= 2 {
        let h = ceil_log(n, d);
        if d.checked_pow(h) != Some(n) {
            v.push(format!("total {n} is not a power of {d}"));
        }
        if n1.checked_mul(d).is_some_and(|x| x < n) {
            v.push(format!("largest star {n1} is smaller than {n}/{d}"));
        }
    }
    v
}

/// Optimum for the disjoint union of three stars filling a `d`-ary host exactly.
pub fn three_star_optimum(n1: u64, n2: u64, n3: u64, d: u64) -> Result<ThreeStarOptimum> {
    let violations = three_star_violations([n1, n2, n3], d);
    if !violations.is_empty() {
        return Err(DaptError::Preconditions(violations));
    }
    let terms = [star_term(n1, d)?, star_term(n2, d)?, star_term(n3, d)?];
    Ok(ThreeStarOptimum { terms, total: terms.iter().sum() })
}

/// A star occupying vertex ids `center..center + size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarSpan {
    pub center: usize,
    pub size: u64,
}

impl StarSpan {
    fn vertices(self) -> impl Iterator<Item = usize> {
        self.center..self.center + self.size as usize
    }
}

fn push_star(edges: &mut Vec<(usize, usize)>, next: &mut usize, size: u64) -> StarSpan {
    let span = StarSpan { center: *next, size };
    edges.extend((1..size as usize).map(|i| (span.center, span.center + i)));
    *next += size as usize;
    span
}

/// Three stars laid out per the optimal three-star scheme in the block of `d^h`
/// leaves starting after leaf `offset`. `stars` must be sorted by size, largest first.
fn place_three(slots: &mut [usize], offset: usize, d: u64, h: u32, stars: [StarSpan; 3]) -> Result<()> {
    let total = d.pow(h) as usize;
    let first_sub = d.pow(h.saturating_sub(1)) as usize;
    let [s1, s2, s3] = stars;
    let block = &mut slots[offset..offset + total];
    if block.iter().any(|&v| v != 0) {
        return Err(DaptError::Internal("three-star block already occupied".into()));
    }
    let mut big = s1.vertices();
    for slot in block.iter_mut().take(first_sub) {
        *slot = big.next().ok_or_else(|| DaptError::Internal("largest star below d^(h-1)".into()))?;
    }
    // second star on the last leaves, center at the start of the last aligned sub-block
    let n2 = s2.size as usize;
    let h2 = ceil_log(s2.size, d);
    let center2 = total - if h2 == 0 { 1 } else { d.pow(h2 - 1) as usize };
    block[center2] = s2.center;
    let mut rest2 = s2.vertices().skip(1);
    for idx in (total - n2..total).filter(|&i| i != center2) {
        block[idx] = rest2.next().expect("size matches range");
    }
    for (idx, v) in (first_sub..first_sub + s3.size as usize).zip(s3.vertices()) {
        if block[idx] != 0 {
            return Err(DaptError::Internal("third star overlaps".into()));
        }
        block[idx] = v;
    }
    for slot in block.iter_mut().filter(|s| **s == 0) {
        *slot = big.next().ok_or_else(|| DaptError::Internal("three stars do not fill the block".into()))?;
    }
    if big.next().is_some() {
        return Err(DaptError::Internal("largest star overflows the block".into()));
    }
    Ok(())
}

/// Forest of three stars (vertex ids in the given order, center first) and its optimal arrangement.
pub fn three_star_arrangement(n1: u64, n2: u64, n3: u64, d: u64) -> Result<Arrangement> {
    let violations = three_star_violations([n1, n2, n3], d);
    if !violations.is_empty() {
        return Err(DaptError::Preconditions(violations));
    }
    let mut edges = Vec::new();
    let mut next = 1;
    let stars = [n1, n2, n3].map(|s| push_star(&mut edges, &mut next, s));
    let n = (n1 + n2 + n3) as usize;
    let guest = Arc::new(GuestGraph::new(n, edges)?);
    let h = ceil_log(n as u64, d);
    let host = HostTree::new(d, h.max(1))?;
    let mut slots = vec![0usize; host.leaf_count() as usize];
    place_three(&mut slots, 0, d, h, stars)?;
    occupants_to_arrangement(guest, host, &slots)
}

fn occupants_to_arrangement(guest: Arc<GuestGraph>, host: HostTree, slots: &[usize]) -> Result<Arrangement> {
    let occ: Vec<Option<usize>> = slots.iter().map(|&v| (v != 0).then_some(v)).collect();
    Arrangement::from_occupants(guest, host, &occ)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmtsInstance {
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub z: Vec<u64>,
}

impl NmtsInstance {
    pub fn new(x: Vec<u64>, y: Vec<u64>, z: Vec<u64>) -> Result<Self> {
        let inst = Self { x, y, z };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if n == 0 {
            return Err(DaptError::InvalidNmts("lists are empty".into()));
        }
        if self.y.len() != n || self.z.len() != n {
            return Err(DaptError::InvalidNmts(format!(
                "list lengths differ: {}, {}, {}",
                n,
                self.y.len(),
                self.z.len()
            )));
        }
        if self.x.iter().chain(&self.y).chain(&self.z).any(|&v| v == 0) {
            return Err(DaptError::InvalidNmts("values must be positive".into()));
        }
        let sum = |v: &[u64]| v.iter().try_fold(0u64, |a, &b| a.checked_add(b));
        let (sx, sy, sz) = (sum(&self.x), sum(&self.y), sum(&self.z));
        match (sx, sy, sz) {
            (Some(sx), Some(sy), Some(sz)) if sx.checked_add(sy) == Some(sz) => Ok(()),
            (Some(_), Some(_), Some(_)) => Err(DaptError::InvalidNmts("sum of z differs from sum of x plus sum of y".into())),
            _ => Err(DaptError::Overflow("NMTS sums".into())),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionParams {
    pub l_x: u32,
    pub l_y: u32,
    pub l_z: u32,
    pub l: u32,
    #[serde(rename = "L")]
    pub big_l: u32,
    pub u_hat: u64,
    pub n_prime: u64,
    /// Vertices of the star formed by the hub and all its neighbours.
    pub hub_star_vertices: u64,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub instance: NmtsInstance,
    pub degree: u64,
    pub params: ReductionParams,
    pub guest: Arc<GuestGraph>,
    pub x_stars: Vec<StarSpan>,
    pub y_stars: Vec<StarSpan>,
    pub z_stars: Vec<StarSpan>,
    pub fillers: Vec<StarSpan>,
    pub target: u64,
}

impl Reduction {
    pub fn hub(&self) -> usize {
        1
    }

    /// Vertex ids of the hub's plain (leaf) neighbours.
    pub fn plain_vertices(&self) -> std::ops::RangeInclusive<usize> {
        2..=1 + self.params.u_hat as usize
    }

    pub fn host(&self) -> Result<HostTree> {
        HostTree::new(self.degree, self.params.big_l)
    }

    pub fn filler_size(&self) -> u64 {
        self.degree.pow(self.params.l)
    }
}

fn smallest_exponent(mut ok: impl FnMut(u32) -> Result<bool>) -> Result<u32> {
    for l in 4..64 {
        if ok(l)? {
            return Ok(l);
        }
    }
    Err(DaptError::Overflow("no exponent below 64 satisfies the size constraints".into()))
}

pub fn build_reduction(instance: &NmtsInstance, d: u64) -> Result<Reduction> {
    instance.validate()?;
    check_degree(d)?;
    let n = instance.len() as u64;
    let pw = |e: u32| checked_pow(d, e);
    let x_max = *instance.x.iter().max().expect("non-empty");
    let y_max = *instance.y.iter().max().expect("non-empty");
    let l_y = smallest_exponent(|l| Ok(y_max <= pw(l - 4)?))?;
    let y_pad = (d - 1) * pw(l_y - 4)?;
    let l_x = smallest_exponent(|l| Ok(x_max + y_max + y_pad < pw(l - 2)?))?;
    let z_max = *instance.z.iter().max().expect("non-empty");
    let l_z = smallest_exponent(|l| {
        let room = pw(l)? as i128 - ((d - 1) * pw(l - 4)?) as i128 - ((d - 1) * pw(l - 2)?) as i128;
        Ok(z_max as i128 <= room)
    })?;
    let l = l_x.max(l_y).max(l_z);
    let dl = pw(l)?;
    let need = n.checked_mul(dl).ok_or_else(|| DaptError::Overflow("n * d^l".into()))?;
    let mut big_l = 1;
    while pw(big_l - 1)? < need {
        big_l += 1;
    }
    let total = pw(big_l)?;
    if total > MAX_REDUCTION_VERTICES {
        return Err(DaptError::Overflow(format!("reduction guest would have {total} vertices")));
    }
    let u_hat = pw(big_l - 1)? - 1;
    let blocks = (d - 1) * pw(big_l - 1 - l)?;
    let n_prime = blocks
        .checked_sub(n)
        .ok_or_else(|| DaptError::Internal("negative number of filler stars".into()))?;

    let (x_pad, y_pad) = ((d - 1) * pw(l - 2)?, (d - 1) * pw(l - 4)?);
    let x_sizes: Vec<u64> = instance.x.iter().map(|&x| x_pad + x).collect();
    let y_sizes: Vec<u64> = instance.y.iter().map(|&y| y_pad + y).collect();
    let z_base = dl - x_pad - y_pad;
    let z_sizes: Vec<u64> = instance.z.iter().map(|&z| z_base - z).collect();

    let mut edges = Vec::with_capacity(total as usize - 1);
    let mut next = 2 + u_hat as usize;
    edges.extend((2..next).map(|u| (1, u)));
    let mut family = |sizes: &[u64], edges: &mut Vec<(usize, usize)>| -> Vec<StarSpan> {
        sizes
            .iter()
            .map(|&s| {
                let span = push_star(edges, &mut next, s);
                edges.push((1, span.center));
                span
            })
            .collect()
    };
    let fillers = family(&vec![dl; n_prime as usize], &mut edges);
    let x_stars = family(&x_sizes, &mut edges);
    let y_stars = family(&y_sizes, &mut edges);
    let z_stars = family(&z_sizes, &mut edges);
    let guest = GuestGraph::tree(total as usize, edges)?.with_root(1)?;
    if guest.vertex_count() as u64 != total {
        return Err(DaptError::Internal("vertex total differs from d^L".into()));
    }

    let hub_star_vertices = 1 + u_hat + n_prime + 3 * n;
    let mut target = star_term(hub_star_vertices, d)?;
    for &s in x_sizes.iter().chain(&y_sizes).chain(&z_sizes) {
        target += star_term(s, d)?;
    }
    target += n_prime * star_term(dl, d)?;

    Ok(Reduction {
        instance: instance.clone(),
        degree: d,
        params: ReductionParams { l_x, l_y, l_z, l, big_l, u_hat, n_prime, hub_star_vertices },
        guest: Arc::new(guest),
        x_stars,
        y_stars,
        z_stars,
        fillers,
        target,
    })
}

fn check_permutation(perm: &[usize], n: usize, name: &str) -> Result<()> {
    let mut seen = vec![false; n + 1];
    if perm.len() != n {
        return Err(DaptError::InvalidParameter(format!("{name} has {} entries, expected {n}", perm.len())));
    }
    for &p in perm {
        if p == 0 || p > n || seen[p] {
            return Err(DaptError::InvalidParameter(format!("{name} is not a permutation of 1..={n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Arrangement realising the target when `z_i = x_{perm_j[i]} + y_{perm_k[i]}` for all `i`.
pub fn witness_arrangement(red: &Reduction, perm_j: &[usize], perm_k: &[usize]) -> Result<Arrangement> {
    let n = red.instance.len();
    check_permutation(perm_j, n, "perm_j")?;
    check_permutation(perm_k, n, "perm_k")?;
    let d = red.degree;
    let l = red.params.l;
    let dl = d.pow(l);
    for i in 0..n {
        let size = red.x_stars[perm_j[i] - 1].size + red.y_stars[perm_k[i] - 1].size + red.z_stars[i].size;
        if size != dl {
            return Err(DaptError::CapacityMismatch { block: i + 1, size, capacity: dl });
        }
    }
    let host = red.host()?;
    let mut slots = vec![0usize; host.leaf_count() as usize];
    let left = d.pow(red.params.big_l - 1) as usize;
    slots[0] = red.hub();
    for (slot, u) in slots[1..left].iter_mut().zip(red.plain_vertices()) {
        *slot = u;
    }
    let block_count = (host.leaf_count() as usize - left) / dl as usize;
    let block_start = |b: usize| left + b * dl as usize;
    for (b, filler) in red.fillers.iter().enumerate() {
        for (slot, v) in slots[block_start(b)..].iter_mut().zip(filler.vertices()) {
            *slot = v;
        }
    }
    for i in 0..n {
        let mut triple = [red.z_stars[i], red.x_stars[perm_j[i] - 1], red.y_stars[perm_k[i] - 1]];
        triple.sort_by_key(|s| std::cmp::Reverse(s.size));
        place_three(&mut slots, block_start(block_count - 1 - i), d, l, triple)?;
    }
    occupants_to_arrangement(Arc::clone(&red.guest), host, &slots)
}
