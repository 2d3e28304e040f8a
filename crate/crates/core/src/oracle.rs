//! Exhaustive branch-and-bound solvers for tiny instances.
//!
//! Both searches fix a variable order (vertex ids ascending) and try choices in
//! increasing order, so the first optimum found is the lexicographically
//! smallest one. Parallel runs split the tree into fixed prefixes whose results
//! are merged in prefix order; node counts and witnesses do not depend on the
//! number of threads.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::arrangement::Arrangement;
use crate::error::{DaptError, Result};
use crate::guest::GuestGraph;
use crate::partition::BalancedPartition;
use crate::regular_tree::HostTree;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Maximum number of search-node visits.
    pub budget: u64,
    pub threads: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, threads: 1 }
    }
}

trait Problem: Clone + Send + Sync {
    fn steps(&self) -> usize;
    fn depth(&self) -> usize;
    /// Choices for the next step, in increasing order.
    fn choices(&self, out: &mut Vec<u64>);
    fn push(&mut self, choice: u64);
    fn pop(&mut self);
    /// Whether the current partial solution can still be completed.
    fn feasible(&self) -> bool {
        true
    }
    /// Lower bound on every completion; the exact value once all steps are taken.
    fn bound(&self) -> u64;
    fn decisions(&self) -> Vec<u64>;
}

struct Budget<'a> {
    shared: &'a AtomicU64,
    limit: u64,
    pending: u64,
    total: u64,
}

impl<'a> Budget<'a> {
    const FLUSH: u64 = 1 << 12;

    fn new(shared: &'a AtomicU64, limit: u64) -> Self {
        Self { shared, limit, pending: 0, total: 0 }
    }

    fn tick(&mut self) -> Result<()> {
        self.total += 1;
        self.pending += 1;
        if self.pending == Self::FLUSH {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        let seen = self.shared.fetch_add(self.pending, Ordering::Relaxed) + self.pending;
        self.pending = 0;
        if seen > self.limit {
            return Err(DaptError::BudgetExceeded { budget: self.limit });
        }
        Ok(())
    }
}

struct Incumbent {
    value: u64,
    witness: Option<Vec<u64>>,
}

impl Incumbent {
    // Ties with a bound from outside the search survive; ties with a found
    // solution do not, since anything explored later is lexicographically larger.
    fn prunes(&self, bound: u64) -> bool {
        bound > self.value || (self.witness.is_some() && bound >= self.value)
    }

    fn offer(&mut self, value: u64, decisions: Vec<u64>) {
        if value < self.value || (self.witness.is_none() && value == self.value) {
            self.value = value;
            self.witness = Some(decisions);
        }
    }
}

fn dfs<P: Problem>(p: &mut P, best: &mut Incumbent, budget: &mut Budget) -> Result<()> {
    if p.depth() == p.steps() {
        best.offer(p.bound(), p.decisions());
        return Ok(());
    }
    let mut choices = Vec::new();
    p.choices(&mut choices);
    for c in choices {
        budget.tick()?;
        p.push(c);
        if p.feasible() && !best.prunes(p.bound()) {
            dfs(p, best, budget)?;
        }
        p.pop();
    }
    Ok(())
}

fn collect_prefixes<P: Problem>(
    p: &mut P,
    split: usize,
    limit: u64,
    out: &mut Vec<Vec<u64>>,
    budget: &mut Budget,
) -> Result<()> {
    if p.depth() == split || p.depth() == p.steps() {
        out.push(p.decisions());
        return Ok(());
    }
    let mut choices = Vec::new();
    p.choices(&mut choices);
    for c in choices {
        budget.tick()?;
        p.push(c);
        if p.feasible() && p.bound() <= limit {
            collect_prefixes(p, split, limit, out, budget)?;
        }
        p.pop();
    }
    Ok(())
}

struct Outcome {
    value: u64,
    decisions: Vec<u64>,
    visits: u64,
}

fn solve<P: Problem>(root: P, initial: u64, split: usize, config: &OracleConfig) -> Result<Outcome> {
    if config.threads == 0 {
        return Err(DaptError::InvalidParameter("thread count must be at least 1".into()));
    }
    let shared = AtomicU64::new(0);
    let mut prefixes = Vec::new();
    let mut budget = Budget::new(&shared, config.budget);
    collect_prefixes(&mut root.clone(), split, initial, &mut prefixes, &mut budget)?;
    budget.flush()?;
    let prefix_visits = budget.total;

    let run = |prefix: &Vec<u64>| -> Result<(Incumbent, u64)> {
        let mut p = root.clone();
        for &c in prefix {
            p.push(c);
        }
        let mut best = Incumbent { value: initial, witness: None };
        let mut budget = Budget::new(&shared, config.budget);
        dfs(&mut p, &mut best, &mut budget)?;
        budget.flush()?;
        Ok((best, budget.total))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| DaptError::Internal(format!("thread pool: {e}")))?;
    let results: Vec<Result<(Incumbent, u64)>> = pool.install(|| prefixes.par_iter().map(run).collect());

    let mut visits = prefix_visits;
    let mut best: Option<(u64, Vec<u64>)> = None;
    for r in results {
        let (inc, n) = r?;
        visits += n;
        if let Some(w) = inc.witness {
            if best.as_ref().is_none_or(|(v, _)| inc.value < *v) {
                best = Some((inc.value, w));
            }
        }
    }
    if visits > config.budget {
        return Err(DaptError::BudgetExceeded { budget: config.budget });
    }
    let (value, decisions) =
        best.ok_or_else(|| DaptError::Internal("search found no solution within the initial bound".into()))?;
    Ok(Outcome { value, decisions, visits })
}

#[derive(Clone)]
struct DaptProblem {
    host: HostTree,
    n: usize,
    edges: usize,
    /// `earlier[v]`: neighbours of `v` with a smaller id.
    earlier: Arc<Vec<Vec<usize>>>,
    /// `occupancy[level][rank-1]` for levels `1..=h` (index 0 unused).
    occupancy: Vec<Vec<u32>>,
    spans: Vec<u64>,
    leaf_of: Vec<u64>,
    cost: u64,
    placed_edges: usize,
    trail: Vec<u64>,
}

impl DaptProblem {
    fn new(guest: &GuestGraph, host: HostTree) -> Self {
        let n = guest.vertex_count();
        let mut earlier = vec![Vec::new(); n + 1];
        for &(u, v) in guest.edges() {
            earlier[u.max(v)].push(u.min(v));
        }
        let h = host.height();
        let d = host.degree();
        let occupancy = (0..=h).map(|l| vec![0u32; d.pow(l) as usize]).collect();
        let spans = (0..=h).map(|l| d.pow(h - l)).collect();
        Self {
            host,
            n,
            edges: guest.edge_count(),
            earlier: Arc::new(earlier),
            occupancy,
            spans,
            leaf_of: vec![0; n + 1],
            cost: 0,
            placed_edges: 0,
            trail: Vec::with_capacity(n),
        }
    }

    /// A free leaf is admissible if, at the highest level where it enters an
    /// empty subtree, that subtree is the leftmost empty one among its siblings
    /// and the leaf is its first leaf.
    fn admissible(&self, leaf: u64) -> bool {
        let d = self.host.degree() as usize;
        for level in 1..=self.host.height() as usize {
            let span = self.spans[level];
            let rank = ((leaf - 1) / span) as usize;
            if self.occupancy[level][rank] == 0 {
                if !(leaf - 1).is_multiple_of(span) {
                    return false;
                }
                let first = rank - rank % d;
                return self.occupancy[level][first..rank].iter().all(|&c| c > 0);
            }
        }
        false
    }

    fn mark(&mut self, leaf: u64, delta: i32) {
        for level in 1..=self.host.height() as usize {
            let rank = ((leaf - 1) / self.spans[level]) as usize;
            self.occupancy[level][rank] = self.occupancy[level][rank].wrapping_add_signed(delta);
        }
    }
}

impl Problem for DaptProblem {
    fn steps(&self) -> usize {
        self.n
    }

    fn depth(&self) -> usize {
        self.trail.len()
    }

    fn choices(&self, out: &mut Vec<u64>) {
        out.extend((1..=self.host.leaf_count()).filter(|&l| self.admissible(l)));
    }

    fn push(&mut self, leaf: u64) {
        let v = self.trail.len() + 1;
        self.leaf_of[v] = leaf;
        for &u in self.earlier[v].iter() {
            self.cost += self.host.distance_unchecked(self.leaf_of[u], leaf);
        }
        self.placed_edges += self.earlier[v].len();
        self.mark(leaf, 1);
        self.trail.push(leaf);
    }

    fn pop(&mut self) {
        let v = self.trail.len();
        let leaf = self.trail.pop().expect("pop on empty trail");
        for &u in self.earlier[v].iter() {
            self.cost -= self.host.distance_unchecked(self.leaf_of[u], leaf);
        }
        self.placed_edges -= self.earlier[v].len();
        self.mark(leaf, -1);
        self.leaf_of[v] = 0;
    }

    fn bound(&self) -> u64 {
        self.cost + 2 * (self.edges - self.placed_edges) as u64
    }

    fn decisions(&self) -> Vec<u64> {
        self.trail.clone()
    }
}

#[derive(Debug, Clone)]
pub struct ExactDapt {
    pub value: u64,
    pub witness: Arrangement,
    pub visits: u64,
}

/// Minimum objective over all arrangements of `guest` on the smallest `degree`-ary host holding it.
pub fn exact_dapt(guest: Arc<GuestGraph>, degree: u64, config: &OracleConfig) -> Result<ExactDapt> {
    let host = HostTree::for_guest_size(guest.vertex_count() as u64, degree)?;
    exact_dapt_on(guest, host, config)
}

pub fn exact_dapt_on(guest: Arc<GuestGraph>, host: HostTree, config: &OracleConfig) -> Result<ExactDapt> {
    let identity = Arrangement::new(Arc::clone(&guest), host, (1..=guest.vertex_count() as u64).collect())?;
    let problem = DaptProblem::new(&guest, host);
    let out = solve(problem, identity.objective_value(), 3, config)?;
    let witness = Arrangement::new(guest, host, out.decisions)?;
    Ok(ExactDapt { value: out.value, witness, visits: out.visits })
}

#[derive(Clone)]
struct KbppProblem {
    n: usize,
    k: usize,
    cap: usize,
    earlier: Arc<Vec<Vec<usize>>>,
    edges: Arc<Vec<(usize, usize)>>,
    /// Adjacency lists, kept only for forest guests.
    forest: Option<Arc<Vec<Vec<usize>>>>,
    block_of: Vec<usize>,
    sizes: Vec<usize>,
    used: usize,
    cut: u64,
    trail: Vec<u64>,
}

impl KbppProblem {
    fn new(guest: &GuestGraph, k: usize) -> Self {
        let n = guest.vertex_count();
        let mut earlier = vec![Vec::new(); n + 1];
        for &(u, v) in guest.edges() {
            earlier[u.max(v)].push(u.min(v));
        }
        Self {
            n,
            k,
            cap: n.div_ceil(k),
            earlier: Arc::new(earlier),
            edges: Arc::new(guest.edges().to_vec()),
            forest: guest
                .is_forest()
                .then(|| Arc::new((0..=n).map(|v| if v == 0 { Vec::new() } else { guest.neighbors(v).to_vec() }).collect())),
            block_of: vec![0; n + 1],
            sizes: vec![0; k + 1],
            used: 0,
            cut: 0,
            trail: Vec::with_capacity(n),
        }
    }
}

impl KbppProblem {
    /// Fewest connected pieces of size at most `cap` covering the unassigned
    /// part of a forest guest: bottom-up, detaching the heaviest child subtree
    /// while a vertex's subtree is too large.
    fn min_pieces(&self, adj: &[Vec<usize>]) -> usize {
        let mut parent = vec![usize::MAX; self.n + 1];
        let mut child_weights: Vec<Vec<usize>> = vec![Vec::new(); self.n + 1];
        let mut order = Vec::new();
        let mut pieces = 0;
        for root in 1..=self.n {
            if self.block_of[root] != 0 || parent[root] != usize::MAX {
                continue;
            }
            parent[root] = 0;
            order.clear();
            order.push(root);
            let mut i = 0;
            while i < order.len() {
                let v = order[i];
                for &w in &adj[v] {
                    if self.block_of[w] == 0 && parent[w] == usize::MAX {
                        parent[w] = v;
                        order.push(w);
                    }
                }
                i += 1;
            }
            for &v in order.iter().rev() {
                let mut ws = std::mem::take(&mut child_weights[v]);
                ws.sort_unstable();
                let mut w = 1 + ws.iter().sum::<usize>();
                while w > self.cap {
                    w -= ws.pop().expect("an oversized subtree has a child");
                    pieces += 1;
                }
                if v != root {
                    child_weights[parent[v]].push(w);
                }
            }
            pieces += 1;
        }
        pieces
    }
}

impl Problem for KbppProblem {
    fn steps(&self) -> usize {
        self.n
    }

    fn depth(&self) -> usize {
        self.trail.len()
    }

    fn choices(&self, out: &mut Vec<u64>) {
        out.extend((1..=self.used).filter(|&b| self.sizes[b] < self.cap).map(|b| b as u64));
        if self.used < self.k {
            out.push(self.used as u64 + 1);
        }
    }

    fn push(&mut self, block: u64) {
        let b = block as usize;
        let v = self.trail.len() + 1;
        self.block_of[v] = b;
        self.cut += self.earlier[v].iter().filter(|&&u| self.block_of[u] != b).count() as u64;
        self.sizes[b] += 1;
        self.used = self.used.max(b);
        self.trail.push(block);
    }

    fn pop(&mut self) {
        let v = self.trail.len();
        let b = self.trail.pop().expect("pop on empty trail") as usize;
        self.cut -= self.earlier[v].iter().filter(|&&u| self.block_of[u] != b).count() as u64;
        self.sizes[b] -= 1;
        if self.sizes[b] == 0 {
            self.used -= 1;
        }
        self.block_of[v] = 0;
    }

    fn feasible(&self) -> bool {
        self.k - self.used <= self.n - self.trail.len()
    }

    fn bound(&self) -> u64 {
        let mut cross = vec![0usize; self.k + 1];
        let mut inner = 0usize;
        for &(u, v) in self.edges.iter() {
            match (self.block_of[u], self.block_of[v]) {
                (0, 0) => inner += 1,
                (0, b) | (b, 0) => cross[b] += 1,
                _ => {}
            }
        }
        let total_cross: usize = cross.iter().sum();
        let kept_cross: usize = (1..=self.used).map(|b| cross[b].min(self.cap - self.sizes[b])).sum();
        let mut bound = self.cut + (total_cross - kept_cross) as u64;
        if let Some(adj) = &self.forest {
            let free = self.n - self.trail.len();
            let pieces = self.min_pieces(adj).max(self.k - self.used);
            bound += inner.saturating_sub(free - pieces.min(free)) as u64;
        }
        bound
    }

    fn decisions(&self) -> Vec<u64> {
        self.trail.clone()
    }
}

#[derive(Debug, Clone)]
pub struct ExactKbpp {
    pub value: u64,
    pub witness: BalancedPartition,
    pub visits: u64,
}

fn check_k(guest: &GuestGraph, k: usize) -> Result<()> {
    if k < 2 || k > guest.vertex_count() {
        return Err(DaptError::InvalidParameter(format!(
            "k must be in 2..={}, got {k}",
            guest.vertex_count()
        )));
    }
    Ok(())
}

/// Contiguous blocks of near-equal size; always a valid balanced partition.
fn chunked(n: usize, k: usize) -> Vec<usize> {
    let (base, extra) = (n / k, n % k);
    let mut out = Vec::with_capacity(n);
    for b in 1..=k {
        let size = base + usize::from(b <= extra);
        out.extend(std::iter::repeat_n(b, size));
    }
    out
}

/// Minimum cut over all `k`-balanced partitions of `guest`.
pub fn exact_kbpp(guest: Arc<GuestGraph>, k: usize, config: &OracleConfig) -> Result<ExactKbpp> {
    check_k(&guest, k)?;
    let start = BalancedPartition::new(Arc::clone(&guest), k, chunked(guest.vertex_count(), k))?;
    let problem = KbppProblem::new(&guest, k);
    let out = solve(problem, start.cut_count() as u64, 6, config)?;
    let block_of = out.decisions.iter().map(|&b| b as usize).collect();
    let witness = BalancedPartition::new(guest, k, block_of)?;
    Ok(ExactKbpp { value: out.value, witness, visits: out.visits })
}

/// Calls `visit` on every `k`-balanced partition, each labelled so block ids
/// appear in order of their smallest vertex. Returns the number visited.
pub fn for_each_balanced_partition(
    guest: &GuestGraph,
    k: usize,
    budget: u64,
    mut visit: impl FnMut(&[usize]),
) -> Result<u64> {
    check_k(guest, k)?;
    fn walk(p: &mut KbppProblem, buf: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]), ticks: &mut u64, budget: u64, count: &mut u64) -> Result<()> {
        if p.depth() == p.steps() {
            buf.clear();
            buf.extend(p.block_of[1..].iter().copied());
            visit(buf);
            *count += 1;
            return Ok(());
        }
        let mut choices = Vec::new();
        p.choices(&mut choices);
        for c in choices {
            *ticks += 1;
            if *ticks > budget {
                return Err(DaptError::BudgetExceeded { budget });
            }
            p.push(c);
            if p.feasible() {
                walk(p, buf, visit, ticks, budget, count)?;
            }
            p.pop();
        }
        Ok(())
    }
    let mut p = KbppProblem::new(guest, k);
    let (mut ticks, mut count) = (0, 0);
    walk(&mut p, &mut Vec::new(), &mut visit, &mut ticks, budget, &mut count)?;
    Ok(count)
}
