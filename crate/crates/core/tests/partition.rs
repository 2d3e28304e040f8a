use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use dapt_core::io::{partition_from_json, partition_to_json};
use dapt_core::oracle::{exact_kbpp, for_each_balanced_partition, OracleConfig};
use dapt_core::partition::{construct_optimal, lower_bound_cases, n1_of_construction, optimal_value, BoundRegime, Relation};
use dapt_core::{BalancedPartition, GuestGraph};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Components of each block by BFS restricted to the block.
fn bfs_components(guest: &GuestGraph, block_of: &[usize], k: usize) -> Vec<usize> {
    let n = guest.vertex_count();
    let mut seen = vec![false; n + 1];
    let mut comps = vec![0; k];
    for start in 1..=n {
        if seen[start] {
            continue;
        }
        let b = block_of[start - 1];
        comps[b - 1] += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in guest.neighbors(v) {
                if !seen[w] && block_of[w - 1] == b {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    comps
}

fn cut_of(guest: &GuestGraph, block_of: &[usize]) -> usize {
    guest.edges().iter().filter(|&&(u, v)| block_of[u - 1] != block_of[v - 1]).count()
}

fn random_balanced(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let cap = n.div_ceil(k);
    let mut slots: Vec<usize> = (1..=k).flat_map(|b| std::iter::repeat(b).take(cap)).collect();
    // every block keeps at least one vertex
    let mut out: Vec<usize> = (1..=k).collect();
    for b in 1..=k {
        let pos = slots.iter().position(|&s| s == b).unwrap();
        slots.swap_remove(pos);
    }
    while out.len() < n {
        let i = rng.gen_range(0..slots.len());
        out.push(slots.swap_remove(i));
    }
    for i in (1..n).rev() {
        out.swap(i, rng.gen_range(0..=i));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn component_counts_match_bfs(seed in any::<u64>(), h in 2u32..=4, k in 2usize..=6) {
        let guest = Arc::new(GuestGraph::complete_binary(h).unwrap());
        let n = guest.vertex_count();
        let block_of = random_balanced(n, k, &mut ChaCha8Rng::seed_from_u64(seed));
        let part = BalancedPartition::new(Arc::clone(&guest), k, block_of.clone()).unwrap();
        prop_assert_eq!(part.components_per_block(), bfs_components(&guest, &block_of, k));
        prop_assert_eq!(part.cut_count(), cut_of(&guest, &block_of));
        if k.is_power_of_two() {
            let text = partition_to_json(&part).unwrap();
            let back = partition_from_json(&text).unwrap();
            prop_assert_eq!(back.assignments(), part.assignments());
        }
    }
}

#[test]
fn random_partitions_at_height_three() {
    let guest = Arc::new(GuestGraph::complete_binary(3).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let block_of = random_balanced(15, 4, &mut rng);
        let part = BalancedPartition::new(Arc::clone(&guest), 4, block_of.clone()).unwrap();
        let comps = bfs_components(&guest, &block_of, 4);
        assert_eq!(part.components_per_block(), comps);
        let mut profile = BTreeMap::new();
        for c in comps {
            *profile.entry(c).or_insert(0) += 1;
        }
        assert_eq!(part.component_count_profile(), profile);
    }
}

#[test]
fn construction_invariants() {
    for h in 1..=8u32 {
        for kp in 1..=h {
            let built = construct_optimal(h, kp).unwrap();
            let part = &built.partition;
            let guest = part.guest();
            assert_eq!(part.k(), 1 << kp);
            assert_eq!(part.cut_count() as u64, optimal_value(h, kp).unwrap(), "h={h} k'={kp}");
            assert_eq!(part.cut_count(), cut_of(guest, part.assignments()));
            let nb = 1usize << (h - kp + 1);
            let mut sizes = part.block_sizes();
            sizes.sort_unstable();
            assert_eq!(sizes[0], nb - 1);
            assert!(sizes[1..].iter().all(|&s| s == nb), "h={h} k'={kp}: {sizes:?}");
            let profile = part.component_count_profile();
            assert!(profile.keys().all(|&i| i <= 2), "h={h} k'={kp}: {profile:?}");
            assert_eq!(profile.get(&1).copied().unwrap_or(0) as u64, n1_of_construction(h, kp).unwrap());
            // cut = (components) - 1 summed over blocks for a tree guest
            let comps: usize = part.components_per_block().iter().sum();
            assert_eq!(part.cut_count(), comps - 1);
        }
    }
}

#[test]
fn example_partition() {
    let built = construct_optimal(5, 4).unwrap();
    assert_eq!(built.partition.cut_count(), 21);
    let mut sizes = built.partition.block_sizes();
    sizes.sort_unstable();
    assert_eq!(sizes[0], 3);
    assert_eq!(&sizes[1..], &[4; 15]);
}

#[test]
fn rational_bound_cases() {
    for h in 1..=20u32 {
        for kp in 1..=h {
            let cut = optimal_value(h, kp).unwrap();
            let k = 1i64 << kp;
            for case in lower_bound_cases(h, kp).unwrap() {
                assert!(case.holds(cut), "h={h} k'={kp}: {case:?} vs {cut}");
                match case.regime {
                    BoundRegime::BelowHeight => {
                        assert_eq!(case.relation, Relation::AtLeast);
                        assert_eq!(case.value, Ratio::new(10 * k, 7) - 2);
                        assert!(kp < h);
                    }
                    BoundRegime::FullHeight => {
                        assert_eq!(case.relation, Relation::Equal);
                        let sign = if kp % 2 == 0 { 1 } else { -1 };
                        assert_eq!(case.value, Ratio::new(4 * k, 3) - Ratio::new(3, 2) + Ratio::new(sign, 6));
                        assert_eq!(kp, h);
                    }
                    BoundRegime::Shallow => {
                        assert_eq!(case.relation, Relation::Equal);
                        assert_eq!(case.value, Ratio::new(3 * k, 2) - 2);
                        assert!(kp <= h / 2 + 1);
                    }
                }
            }
        }
    }
}

/// Every balanced partition at small heights, compared with the construction.
#[test]
fn construction_dominates_exhaustively() {
    for h in 1..=3u32 {
        let guest = GuestGraph::complete_binary(h).unwrap();
        for kp in 1..=h {
            let k = 1usize << kp;
            if k > guest.vertex_count() {
                continue;
            }
            let built = construct_optimal(h, kp).unwrap();
            let star_cut = built.partition.cut_count();
            let star_n1 = built.partition.component_count_profile().get(&1).copied().unwrap_or(0);
            let mut best = usize::MAX;
            let count = for_each_balanced_partition(&guest, k, u64::MAX, |block_of| {
                let cut = cut_of(&guest, block_of);
                best = best.min(cut);
                let comps = bfs_components(&guest, block_of, k);
                let n1 = comps.iter().filter(|&&c| c == 1).count();
                assert!(star_n1 >= n1, "h={h} k'={kp}: n_1 {n1} beats {star_n1}");
                assert!(star_cut <= cut);
            })
            .unwrap();
            assert!(count > 0);
            assert_eq!(best, star_cut, "h={h} k'={kp}");
        }
    }
}

#[test]
fn enumeration_counts_small_cases() {
    // a path on 4 vertices into 2 blocks of 2: 3 labelled-by-first-vertex partitions
    let path = GuestGraph::new(4, vec![(1, 2), (2, 3), (3, 4)]).unwrap();
    let count = for_each_balanced_partition(&path, 2, u64::MAX, |_| {}).unwrap();
    assert_eq!(count, 3);
    // 7 vertices into 4 blocks of size <= 2: choose the singleton, then pair up the rest
    let tree = GuestGraph::complete_binary(2).unwrap();
    let count = for_each_balanced_partition(&tree, 4, u64::MAX, |_| {}).unwrap();
    assert_eq!(count, 7 * 15);
}

#[test]
fn oracle_matches_construction() {
    for h in 1..=3u32 {
        let guest = Arc::new(GuestGraph::complete_binary(h).unwrap());
        for kp in 1..=h {
            let res = exact_kbpp(Arc::clone(&guest), 1 << kp, &OracleConfig::default()).unwrap();
            assert_eq!(res.value, optimal_value(h, kp).unwrap(), "h={h} k'={kp}");
            assert_eq!(res.witness.cut_count() as u64, res.value);
        }
    }
}

#[test]
fn oracle_matches_construction_at_height_four() {
    let guest = Arc::new(GuestGraph::complete_binary(4).unwrap());
    let config = OracleConfig { threads: 4, ..OracleConfig::default() };
    for kp in [1, 4] {
        let res = exact_kbpp(Arc::clone(&guest), 1 << kp, &config).unwrap();
        assert_eq!(res.value, optimal_value(4, kp).unwrap(), "k'={kp}");
    }
}
