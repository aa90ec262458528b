#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use contention::model::AssignmentSet;
use contention::{StanceCounts, StanceSpace};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn exclusive_space(k: usize) -> Arc<StanceSpace> {
    Arc::new(StanceSpace::exclusive((1..=k).map(|i| format!("s{i}"))).unwrap())
}

pub fn counts(no_stance: u64, explicit: &[u64]) -> StanceCounts {
    StanceCounts::from_parts(exclusive_space(explicit.len()), no_stance, explicit).unwrap()
}

/// Conflicting ordered pairs by direct enumeration of every (i, j).
pub fn brute_force_pairs(set: &AssignmentSet) -> u128 {
    let space = set.space();
    let people = set.people();
    let mut hits = 0u128;
    for a in people {
        for b in people {
            let clash = a
                .as_slice()
                .iter()
                .any(|&x| b.as_slice().iter().any(|&y| space.conflicts(x, y)));
            hits += u128::from(clash);
        }
    }
    hits
}

/// Closed form straight from the group sizes: Σ_{i≠j} g_i g_j / n².
pub fn pairwise_raw(no_stance: u64, explicit: &[u64]) -> f64 {
    let n: u64 = no_stance + explicit.iter().sum::<u64>();
    let mut pairs = 0u128;
    for (i, &a) in explicit.iter().enumerate() {
        for (j, &b) in explicit.iter().enumerate() {
            if i != j {
                pairs += u128::from(a) * u128::from(b);
            }
        }
    }
    pairs as f64 / (u128::from(n) * u128::from(n)) as f64
}

/// Every way to split `n` people into `parts` ordered groups.
pub fn compositions(n: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

