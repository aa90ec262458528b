//! Contention: the probability that two people drawn with replacement from a
//! population hold conflicting stances on a topic.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::filter::SubpopulationFilter;
use crate::model::{AssignmentSet, HeldStances, StanceCounts, StanceSpace};

/// Which stance count the normalizing maximum is taken over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Every explicit stance declared in the space, including empty ones.
    #[default]
    Declared,
    /// Only explicit stances with at least one holder.
    Observed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Method {
    ExclusiveClosedForm,
    GeneralExact,
    GeneralSampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentionResult {
    pub raw: f64,
    pub normalized: f64,
    pub non_contention_raw: f64,
    pub non_contention_normalized: f64,
    /// Explicit stances declared in the space.
    pub k: usize,
    /// Stance count the normalization used.
    pub k_normalization: usize,
    pub population: u64,
    /// Conflicting ordered pairs (or sampled hits).
    pub conflicting_pairs: u128,
    /// |ω|² (or the sample count).
    pub total_pairs: u128,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<SubpopulationFilter>,
}

impl ContentionResult {
    fn from_pairs(conflicting: u128, total: u128, k: usize, k_norm: usize, population: u64, method: Method) -> Self {
        debug_assert!(total > 0 && conflicting <= total);
        let raw = conflicting as f64 / total as f64;
        let non_contention_raw = (total - conflicting) as f64 / total as f64;
        let normalized = normalize(raw, k_norm);
        Self {
            raw,
            normalized,
            non_contention_raw,
            non_contention_normalized: 1.0 - normalized,
            k,
            k_normalization: k_norm,
            population,
            conflicting_pairs: conflicting,
            total_pairs: total,
            method,
            filter: None,
        }
    }

    /// Attach the filter that selected the slice.
    pub fn with_filter(mut self, filter: SubpopulationFilter) -> Self {
        self.filter = Some(filter);
        self
    }
}

/// Maximum contention over `k` mutually exclusive explicit stances:
/// `(k - 1) / k`, or 0 when fewer than two stances exist.
pub fn max_contention(k: usize) -> f64 {
    if k < 2 {
        0.0
    } else {
        (k - 1) as f64 / k as f64
    }
}

/// Raw contention divided by [`max_contention`]. Zero for `k <= 1`.
///
/// Capped at 1: in the general model intrapersonal conflict can push raw
/// contention past the exclusive maximum.
pub fn normalize(raw: f64, k: usize) -> f64 {
    if k < 2 {
        0.0
    } else {
        (raw / max_contention(k)).min(1.0)
    }
}

/// Closed-form contention for mutually exclusive stances.
pub fn contention_exclusive(counts: &StanceCounts) -> Result<ContentionResult, ModelError> {
    contention_exclusive_with(counts, Normalization::Declared)
}

pub fn contention_exclusive_with(counts: &StanceCounts, mode: Normalization) -> Result<ContentionResult, ModelError> {
    if !counts.space().is_exclusive() {
        return Err(ModelError::NonExclusiveSpace);
    }
    let population = counts.population();
    if population == 0 {
        return Err(ModelError::EmptyPopulation);
    }
    // Σ_{i≠j} g_i g_j over explicit stances = S² − Σ g_i².
    let stanced: u128 = counts.explicit().iter().map(|&c| c as u128).sum();
    let squares: u128 = counts.explicit().iter().map(|&c| (c as u128) * (c as u128)).sum();
    let conflicting = stanced * stanced - squares;
    let total = (population as u128) * (population as u128);
    let k_norm = match mode {
        Normalization::Declared => counts.k(),
        Normalization::Observed => counts.observed_k(),
    };
    Ok(ContentionResult::from_pairs(
        conflicting,
        total,
        counts.k(),
        k_norm,
        population,
        Method::ExclusiveClosedForm,
    ))
}

/// Fixed-width bitset over stance indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct StanceBits(Box<[u64]>);

impl StanceBits {
    fn empty(dim: usize) -> Self {
        StanceBits(vec![0; dim.div_ceil(64)].into_boxed_slice())
    }

    fn of(dim: usize, held: &HeldStances) -> Self {
        let mut bits = Self::empty(dim);
        for &i in held.as_slice() {
            bits.0[i / 64] |= 1 << (i % 64);
        }
        bits
    }

    fn union_with(&mut self, other: &StanceBits) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= b;
        }
    }

    fn intersects(&self, other: &StanceBits) -> bool {
        self.0.iter().zip(other.0.iter()).any(|(a, b)| a & b != 0)
    }
}

/// People grouped by identical held-stance sets, with the set of stances
/// that conflict with each group.
struct GroupedPopulation {
    members: Vec<StanceBits>,
    opposed: Vec<StanceBits>,
    sizes: Vec<u64>,
    // Group index of each person, in input order.
    person_group: Vec<usize>,
}

impl GroupedPopulation {
    fn build(space: &StanceSpace, assignments: &AssignmentSet) -> Self {
        let dim = space.k() + 1;
        let conflict_rows: Vec<StanceBits> = (0..dim)
            .map(|i| {
                let mut row = StanceBits::empty(dim);
                for j in 0..dim {
                    if space.conflicts(i, j) {
                        row.0[j / 64] |= 1 << (j % 64);
                    }
                }
                row
            })
            .collect();

        let mut index: HashMap<&HeldStances, usize> = HashMap::new();
        let mut members = Vec::new();
        let mut opposed = Vec::new();
        let mut sizes: Vec<u64> = Vec::new();
        let mut person_group = Vec::with_capacity(assignments.len());
        for held in assignments.people() {
            let group = *index.entry(held).or_insert_with(|| {
                let mut opp = StanceBits::empty(dim);
                for &s in held.as_slice() {
                    opp.union_with(&conflict_rows[s]);
                }
                members.push(StanceBits::of(dim, held));
                opposed.push(opp);
                sizes.push(0);
                members.len() - 1
            });
            sizes[group] += 1;
            person_group.push(group);
        }
        Self {
            members,
            opposed,
            sizes,
            person_group,
        }
    }

    fn conflict(&self, a: usize, b: usize) -> bool {
        self.opposed[a].intersects(&self.members[b])
    }
}

/// Exact contention for arbitrary (possibly overlapping) stance holdings.
///
/// An ordered pair (p1, p2), including p1 = p2, conflicts when some stance
/// held by p1 conflicts with some stance held by p2; it is counted once no
/// matter how many conflicting combinations exist.
pub fn contention_general(assignments: &AssignmentSet) -> Result<ContentionResult, ModelError> {
    contention_general_with(assignments, Normalization::Declared)
}

pub fn contention_general_with(assignments: &AssignmentSet, mode: Normalization) -> Result<ContentionResult, ModelError> {
    let n = assignments.len() as u64;
    if n == 0 {
        return Err(ModelError::EmptyPopulation);
    }
    let space = assignments.space();
    let groups = GroupedPopulation::build(space, assignments);
    let group_count = groups.sizes.len();
    let mut conflicting: u128 = 0;
    for a in 0..group_count {
        let opposing: u128 = (0..group_count)
            .filter(|&b| groups.conflict(a, b))
            .map(|b| groups.sizes[b] as u128)
            .sum();
        conflicting += groups.sizes[a] as u128 * opposing;
    }
    Ok(ContentionResult::from_pairs(
        conflicting,
        (n as u128) * (n as u128),
        space.k(),
        k_for(assignments, mode),
        n,
        Method::GeneralExact,
    ))
}

/// Monte Carlo estimate: draws `samples` ordered pairs uniformly with
/// replacement from a ChaCha8 generator seeded with `seed`.
pub fn contention_sampled(assignments: &AssignmentSet, samples: u64, seed: u64) -> Result<ContentionResult, ModelError> {
    contention_sampled_with(assignments, samples, seed, Normalization::Declared)
}

pub fn contention_sampled_with(
    assignments: &AssignmentSet,
    samples: u64,
    seed: u64,
    mode: Normalization,
) -> Result<ContentionResult, ModelError> {
    let n = assignments.len();
    if n == 0 {
        return Err(ModelError::EmptyPopulation);
    }
    if samples == 0 {
        return Err(ModelError::ZeroSamples);
    }
    let space = assignments.space();
    let groups = GroupedPopulation::build(space, assignments);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: u64 = 0;
    for _ in 0..samples {
        let a = groups.person_group[rng.gen_range(0..n)];
        let b = groups.person_group[rng.gen_range(0..n)];
        if groups.conflict(a, b) {
            hits += 1;
        }
    }
    Ok(ContentionResult::from_pairs(
        hits as u128,
        samples as u128,
        space.k(),
        k_for(assignments, mode),
        n as u64,
        Method::GeneralSampled { samples, seed },
    ))
}

fn k_for(assignments: &AssignmentSet, mode: Normalization) -> usize {
    match mode {
        Normalization::Declared => assignments.space().k(),
        Normalization::Observed => assignments.observed_k(),
    }
}
