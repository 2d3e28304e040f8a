//! Recursive approximation algorithm for complete binary guests on binary hosts,
//! together with the closed forms that predict its output.

use std::collections::HashMap;
use std::sync::Arc;

use crate::arrangement::{Arrangement, DistanceProfile};
use crate::error::{DaptError, Result};
use crate::guest::GuestGraph;
use crate::regular_tree::HostTree;

/// Hooks into the recursion. Sequences list the local vertex on each leaf, 0 for free.
pub trait ApproxObserver {
    fn root_placed(&mut self, _h_g: u32, _middle_was_free: bool) {}
    fn pair_exchange(&mut self, _h_g: u32, _before: &[usize], _after: &[usize]) {}
}

struct NoObserver;

impl ApproxObserver for NoObserver {}

/// Largest guest height accepted; keeps every leaf sequence addressable.
pub const MAX_APPROX_HEIGHT: u32 = 24;

/// Label in the parent tree of vertex `j` of the left (`side = 0`) or right child subtree.
fn lift(j: usize, side: usize) -> usize {
    let lvl = usize::BITS - 1 - j.leading_zeros();
    (1 << (lvl + 1)) + side * (1 << lvl) + (j - (1 << lvl))
}

fn solve(h: u32, obs: &mut dyn ApproxObserver) -> Vec<usize> {
    if h == 0 {
        return vec![1, 0];
    }
    let left = solve(h - 1, obs);
    let right = solve(h - 1, obs);
    let b = 1usize << (h + 1);
    let mut seq = vec![0; b];
    for (i, &j) in left.iter().enumerate().filter(|(_, &j)| j != 0) {
        seq[i] = lift(j, 0);
    }
    for (i, &j) in right.iter().enumerate().filter(|(_, &j)| j != 0) {
        seq[b / 2 + i] = lift(j, 1);
    }
    obs.root_placed(h, seq[b / 2 - 1] == 0);
    seq[b / 2 - 1] = 1;
    if h % 2 == 1 && h >= 3 {
        let before = seq.clone();
        seq.swap(b / 4 - 2, b / 2 - 1);
        obs.pair_exchange(h, &before, &seq);
    }
    seq
}

fn check_height(h_g: u32) -> Result<()> {
    if h_g > MAX_APPROX_HEIGHT {
        return Err(DaptError::Overflow(format!("guest height {h_g} exceeds {MAX_APPROX_HEIGHT}")));
    }
    Ok(())
}

fn to_arrangement(guest: Arc<GuestGraph>, seq: &[usize]) -> Result<Arrangement> {
    let h_g = guest.binary_height().expect("complete binary guest");
    let host = HostTree::new(2, h_g + 1)?;
    let occupants: Vec<Option<usize>> = seq.iter().map(|&v| (v != 0).then_some(v)).collect();
    Arrangement::from_occupants(guest, host, &occupants)
}

/// Leaf sequence of the algorithm's arrangement: entry `i` is the vertex on leaf `i+1`, 0 if free.
pub fn approx_leaf_sequence(h_g: u32) -> Result<Vec<usize>> {
    check_height(h_g)?;
    Ok(solve(h_g, &mut NoObserver))
}

pub fn approx_arrangement(h_g: u32) -> Result<Arrangement> {
    let seq = approx_leaf_sequence(h_g)?;
    to_arrangement(Arc::new(GuestGraph::complete_binary(h_g)?), &seq)
}

/// One swap performed inside some recursive call, on that call's own guest.
#[derive(Debug, Clone)]
pub struct PairExchange {
    pub guest_height: u32,
    pub before: Arrangement,
    pub after: Arrangement,
}

#[derive(Debug, Clone, Default)]
pub struct ApproxTrace {
    pub exchanges: Vec<PairExchange>,
    pub root_placements: usize,
    /// Calls in which the middle leaf was already taken when the root arrived.
    pub occupied_middles: usize,
}

#[derive(Default)]
struct Recorder {
    raw: Vec<(u32, Vec<usize>, Vec<usize>)>,
    roots: usize,
    occupied: usize,
}

impl ApproxObserver for Recorder {
    fn root_placed(&mut self, _h_g: u32, middle_was_free: bool) {
        self.roots += 1;
        if !middle_was_free {
            self.occupied += 1;
        }
    }

    fn pair_exchange(&mut self, h_g: u32, before: &[usize], after: &[usize]) {
        self.raw.push((h_g, before.to_vec(), after.to_vec()));
    }
}

/// Runs the algorithm while recording every pair-exchange and root placement.
pub fn approx_arrangement_traced(h_g: u32) -> Result<(Arrangement, ApproxTrace)> {
    check_height(h_g)?;
    let mut rec = Recorder::default();
    let seq = solve(h_g, &mut rec);
    let mut guests: HashMap<u32, Arc<GuestGraph>> = HashMap::new();
    let mut exchanges = Vec::with_capacity(rec.raw.len());
    for (h, before, after) in rec.raw {
        let guest = match guests.get(&h) {
            Some(g) => Arc::clone(g),
            None => {
                let g = Arc::new(GuestGraph::complete_binary(h)?);
                guests.insert(h, Arc::clone(&g));
                g
            }
        };
        exchanges.push(PairExchange {
            guest_height: h,
            before: to_arrangement(Arc::clone(&guest), &before)?,
            after: to_arrangement(guest, &after)?,
        });
    }
    let arr = to_arrangement(Arc::new(GuestGraph::complete_binary(h_g)?), &seq)?;
    Ok((arr, ApproxTrace { exchanges, root_placements: rec.roots, occupied_middles: rec.occupied }))
}

/// `OV(before) - OV(after)` for two arrangements that differ by one leaf swap.
pub fn pair_exchange_delta(before: &Arrangement, after: &Arrangement) -> Result<i64> {
    if before.host() != after.host() || before.guest() != after.guest() {
        return Err(DaptError::NotASingleSwap);
    }
    let moved: Vec<usize> = (1..=before.guest().vertex_count())
        .filter(|&v| before.leaf_of(v) != after.leaf_of(v))
        .collect();
    let single_swap = match moved.as_slice() {
        [] => true,
        &[v] => !before.leaves().contains(&after.leaf_of(v).get()),
        &[u, v] => before.leaf_of(u) == after.leaf_of(v) && before.leaf_of(v) == after.leaf_of(u),
        _ => false,
    };
    if !single_swap {
        return Err(DaptError::NotASingleSwap);
    }
    Ok(before.objective_value() as i64 - after.objective_value() as i64)
}

fn sign(h_g: u32) -> i128 {
    if h_g.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn pow2(e: u32) -> Result<i128> {
    if e > 100 {
        return Err(DaptError::Overflow(format!("2^{e}")));
    }
    Ok(1i128 << e)
}

fn to_u64(v: i128, what: &str) -> Result<u64> {
    u64::try_from(v).map_err(|_| DaptError::Overflow(what.to_string()))
}

/// Objective value of the algorithm's arrangement, in exact integers.
pub fn closed_form_objective(h_g: u32) -> Result<u64> {
    if h_g == 0 {
        return Ok(0);
    }
    let p = pow2(h_g)?;
    let v = (29 * p + sign(h_g)) / 3 - 4 * h_g as i128 - 9;
    to_u64(v, "closed-form objective")
}

/// Number of pair-exchanges across all recursive calls (0 for `h_g = 0`).
pub fn pair_exchange_count(h_g: u32) -> Result<u64> {
    if h_g == 0 {
        return Ok(0);
    }
    to_u64((pow2(h_g)? - 3 - sign(h_g)) / 6, "pair-exchange count")
}

/// Predicted `a_i` and `s_i` of the algorithm's arrangement for `h_g >= 1`.
pub fn closed_form_coefficients(h_g: u32) -> Result<DistanceProfile> {
    if h_g == 0 {
        return Err(DaptError::InvalidParameter("coefficients need guest height at least 1".into()));
    }
    let h = h_g + 1;
    let p = pow2(h_g)?;
    let sg = sign(h_g);
    let mut a = Vec::with_capacity(h as usize);
    for i in 1..=h {
        let v = if i == h {
            1
        } else if i == 1 {
            (4 * p - 3 - sg) / 6
        } else if i == 2 {
            (7 * p + 6 + 2 * sg) / 12
        } else {
            3 * pow2(h_g - i)?
        };
        a.push(to_u64(v, "coefficient")?);
    }
    Ok(DistanceProfile::from_counts(a))
}

/// Closed forms for the tail sums, kept separate from the `a_i` forms as a cross-check.
pub fn closed_form_tails(h_g: u32) -> Result<Vec<u64>> {
    if h_g == 0 {
        return Err(DaptError::InvalidParameter("tail sums need guest height at least 1".into()));
    }
    let h = h_g + 1;
    let p = pow2(h_g)?;
    (1..=h)
        .map(|i| {
            let v = match i {
                1 => 2 * p - 2,
                2 => (8 * p - 9 + sign(h_g)) / 6,
                _ => 3 * pow2(h_g + 1 - i)? - 2,
            };
            to_u64(v, "tail sum")
        })
        .collect()
}
