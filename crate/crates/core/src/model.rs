//! Stance spaces, per-stance population counts and per-person assignments.
//!
//! Index 0 always denotes the no-stance sentinel; explicit stances occupy
//! indices `1..=k`.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Index of the no-stance sentinel in every [`StanceSpace`].
pub const NO_STANCE: usize = 0;

/// Identifier used in files and filters to name the no-stance sentinel.
pub const NO_STANCE_ID: &str = "__none__";

/// One explicit stance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stance {
    pub id: String,
    pub label: String,
}

impl Stance {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
        }
    }
}

impl From<&str> for Stance {
    fn from(id: &str) -> Self {
        Stance::new(id, id)
    }
}

impl From<String> for Stance {
    fn from(id: String) -> Self {
        Stance {
            label: id.clone(),
            id,
        }
    }
}

/// The explicit stances on a topic plus the implicit no-stance sentinel,
/// together with a symmetric conflict relation over all `k + 1` of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StanceSpace {
    stances: Vec<Stance>,
    // (k + 1) x (k + 1), row-major.
    conflicts: Vec<bool>,
}

impl StanceSpace {
    /// Space where every explicit stance conflicts with every other explicit
    /// stance and the no-stance sentinel conflicts with nothing.
    pub fn exclusive<I, S>(stances: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Stance>,
    {
        let stances = collect_unique(stances)?;
        let dim = stances.len() + 1;
        let mut conflicts = vec![false; dim * dim];
        for i in 1..dim {
            for j in 1..dim {
                conflicts[i * dim + j] = i != j;
            }
        }
        Ok(Self { stances, conflicts })
    }

    /// Space built from a full `(k + 1) x (k + 1)` conflict matrix, where row
    /// and column 0 belong to the no-stance sentinel.
    ///
    /// The matrix must already be symmetric with a false diagonal and a false
    /// sentinel row; nothing is symmetrized silently.
    pub fn with_conflict_matrix<I, S>(stances: I, matrix: &[Vec<bool>]) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Stance>,
    {
        let stances = collect_unique(stances)?;
        let dim = stances.len() + 1;
        if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
            return Err(ModelError::ConflictMatrixShape { expected: dim });
        }
        for (i, row) in matrix.iter().enumerate() {
            if row[i] {
                return Err(ModelError::SelfConflict(i));
            }
            if matrix[0][i] || row[0] {
                return Err(ModelError::NoStanceConflict(i));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != matrix[j][i] {
                    return Err(ModelError::AsymmetricConflicts { a: i, b: j });
                }
            }
        }
        let conflicts = matrix.iter().flatten().copied().collect();
        Ok(Self { stances, conflicts })
    }

    /// Space whose conflict relation is exactly the listed unordered pairs of
    /// explicit stance indices (1-based).
    pub fn with_conflict_pairs<I, S>(stances: I, pairs: &[(usize, usize)]) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Stance>,
    {
        let stances = collect_unique(stances)?;
        let dim = stances.len() + 1;
        let mut conflicts = vec![false; dim * dim];
        for &(a, b) in pairs {
            for idx in [a, b] {
                if idx >= dim {
                    return Err(ModelError::StanceIndexOutOfRange { index: idx, k: dim - 1 });
                }
            }
            if a == NO_STANCE || b == NO_STANCE {
                return Err(ModelError::NoStanceConflict(a.max(b)));
            }
            if a == b {
                return Err(ModelError::SelfConflict(a));
            }
            conflicts[a * dim + b] = true;
            conflicts[b * dim + a] = true;
        }
        Ok(Self { stances, conflicts })
    }

    /// Number of explicit stances.
    pub fn k(&self) -> usize {
        self.stances.len()
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        let dim = self.k() + 1;
        a < dim && b < dim && self.conflicts[a * dim + b]
    }

    /// True when the conflict relation is the mutually-exclusive pattern:
    /// distinct explicit stances always conflict, the sentinel never does.
    pub fn is_exclusive(&self) -> bool {
        let dim = self.k() + 1;
        (0..dim).all(|i| (0..dim).all(|j| self.conflicts(i, j) == (i != j && i != 0 && j != 0)))
    }

    /// Explicit stances in index order (`stances()[0]` is stance 1).
    pub fn stances(&self) -> &[Stance] {
        &self.stances
    }

    /// Stance at `index`; `None` for the sentinel or out-of-range indices.
    pub fn stance(&self, index: usize) -> Option<&Stance> {
        index.checked_sub(1).and_then(|i| self.stances.get(i))
    }

    /// Resolve a stance id (or [`NO_STANCE_ID`]) to its index.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        if id == NO_STANCE_ID {
            return Some(NO_STANCE);
        }
        self.stances.iter().position(|s| s.id == id).map(|i| i + 1)
    }

    /// Id of any index, including the sentinel.
    pub fn id_of(&self, index: usize) -> Option<&str> {
        if index == NO_STANCE {
            Some(NO_STANCE_ID)
        } else {
            self.stance(index).map(|s| s.id.as_str())
        }
    }
}

fn collect_unique<I, S>(stances: I) -> Result<Vec<Stance>, ModelError>
where
    I: IntoIterator<Item = S>,
    S: Into<Stance>,
{
    let stances: Vec<Stance> = stances.into_iter().map(Into::into).collect();
    let mut seen = HashSet::new();
    for s in &stances {
        if s.id == NO_STANCE_ID {
            return Err(ModelError::ReservedStanceId(s.id.clone()));
        }
        if !seen.insert(s.id.as_str()) {
            return Err(ModelError::DuplicateStanceId(s.id.clone()));
        }
    }
    Ok(stances)
}

/// Population counts per stance for one topic and population slice.
/// `counts[0]` is the no-stance group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StanceCounts {
    space: Arc<StanceSpace>,
    counts: Vec<u64>,
}

impl StanceCounts {
    /// `counts` must have one entry per stance including the sentinel.
    pub fn new(space: Arc<StanceSpace>, counts: Vec<u64>) -> Result<Self, ModelError> {
        if counts.len() != space.k() + 1 {
            return Err(ModelError::CountsLength {
                expected: space.k() + 1,
                got: counts.len(),
            });
        }
        Ok(Self { space, counts })
    }

    pub fn from_parts(space: Arc<StanceSpace>, no_stance: u64, explicit: &[u64]) -> Result<Self, ModelError> {
        let mut counts = Vec::with_capacity(explicit.len() + 1);
        counts.push(no_stance);
        counts.extend_from_slice(explicit);
        Self::new(space, counts)
    }

    /// All-zero counts over `space`.
    pub fn zeros(space: Arc<StanceSpace>) -> Self {
        let counts = vec![0; space.k() + 1];
        Self { space, counts }
    }

    pub fn space(&self) -> &Arc<StanceSpace> {
        &self.space
    }

    pub fn k(&self) -> usize {
        self.space.k()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, index: usize) -> u64 {
        self.counts.get(index).copied().unwrap_or(0)
    }

    pub fn no_stance(&self) -> u64 {
        self.counts[NO_STANCE]
    }

    pub fn explicit(&self) -> &[u64] {
        &self.counts[1..]
    }

    /// Number of people holding any explicit stance.
    pub fn stanced(&self) -> u64 {
        self.explicit().iter().sum()
    }

    /// |ω|, the size of the slice.
    pub fn population(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Explicit stances with a nonzero count.
    pub fn observed_k(&self) -> usize {
        self.explicit().iter().filter(|&&c| c > 0).count()
    }

    pub fn set(&mut self, index: usize, count: u64) {
        self.counts[index] = count;
    }

    pub fn with_no_stance(&self, no_stance: u64) -> Self {
        let mut out = self.clone();
        out.counts[NO_STANCE] = no_stance;
        out
    }

    /// Slice restricted to the explicit-stance holders (G_1 ∪ … ∪ G_k).
    pub fn stanced_only(&self) -> Self {
        self.with_no_stance(0)
    }

    pub fn scaled(&self, factor: u64) -> Self {
        let counts = self.counts.iter().map(|c| c * factor).collect();
        Self {
            space: self.space.clone(),
            counts,
        }
    }

    /// Element-wise sum; both sides must share the same stance space.
    pub fn checked_add(&self, other: &StanceCounts) -> Result<Self, ModelError> {
        if self.space != other.space {
            return Err(ModelError::SpaceMismatch);
        }
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Ok(Self {
            space: self.space.clone(),
            counts,
        })
    }
}

/// Sorted, de-duplicated set of stance indices held by one person.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeldStances(Vec<usize>);

impl HeldStances {
    pub fn none() -> Self {
        HeldStances(vec![NO_STANCE])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn is_no_stance(&self) -> bool {
        self.0 == [NO_STANCE]
    }
}

/// Per-person held stance sets for the general (possibly overlapping) model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentSet {
    space: Arc<StanceSpace>,
    people: Vec<HeldStances>,
}

impl AssignmentSet {
    pub fn new(space: Arc<StanceSpace>) -> Self {
        Self {
            space,
            people: Vec::new(),
        }
    }

    /// Build from explicit per-person index lists.
    pub fn from_people<P, I>(space: Arc<StanceSpace>, people: P) -> Result<Self, ModelError>
    where
        P: IntoIterator<Item = I>,
        I: IntoIterator<Item = usize>,
    {
        let mut set = Self::new(space);
        for held in people {
            set.push(held)?;
        }
        Ok(set)
    }

    /// Expand counts into one singleton assignment per person.
    pub fn from_counts(counts: &StanceCounts) -> Self {
        let mut people = Vec::with_capacity(counts.population() as usize);
        for (index, &c) in counts.as_slice().iter().enumerate() {
            people.extend(std::iter::repeat_n(HeldStances(vec![index]), c as usize));
        }
        Self {
            space: counts.space().clone(),
            people,
        }
    }

    /// Add one person. An empty list is read as holding no stance.
    pub fn push<I: IntoIterator<Item = usize>>(&mut self, held: I) -> Result<(), ModelError> {
        let mut held: Vec<usize> = held.into_iter().collect();
        held.sort_unstable();
        held.dedup();
        if held.is_empty() {
            held.push(NO_STANCE);
        }
        if let Some(&bad) = held.iter().find(|&&i| i > self.space.k()) {
            return Err(ModelError::StanceIndexOutOfRange {
                index: bad,
                k: self.space.k(),
            });
        }
        if held.len() > 1 && held[0] == NO_STANCE {
            return Err(ModelError::NoStanceNotAlone);
        }
        self.people.push(HeldStances(held));
        Ok(())
    }

    pub fn space(&self) -> &Arc<StanceSpace> {
        &self.space
    }

    pub fn people(&self) -> &[HeldStances] {
        &self.people
    }

    pub fn len(&self) -> usize {
        self.people.len()
    }

    pub fn is_empty(&self) -> bool {
        self.people.is_empty()
    }

    /// Collapse into counts when every person holds exactly one stance.
    pub fn to_counts(&self) -> Option<StanceCounts> {
        let mut counts = StanceCounts::zeros(self.space.clone());
        for held in &self.people {
            match held.as_slice() {
                [only] => counts.counts[*only] += 1,
                _ => return None,
            }
        }
        Some(counts)
    }

    /// Explicit stances held by at least one person.
    pub fn observed_k(&self) -> usize {
        let mut seen = vec![false; self.space.k() + 1];
        for held in &self.people {
            for &i in held.as_slice() {
                seen[i] = true;
            }
        }
        seen[1..].iter().filter(|&&b| b).count()
    }

    pub(crate) fn retain<F: FnMut(usize, &HeldStances) -> bool>(&self, mut keep: F) -> Self {
        let people = self
            .people
            .iter()
            .enumerate()
            .filter(|(i, h)| keep(*i, h))
            .map(|(_, h)| h.clone())
            .collect();
        Self {
            space: self.space.clone(),
            people,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yes_no() -> Arc<StanceSpace> {
        Arc::new(StanceSpace::exclusive(["yes", "no"]).unwrap())
    }

    #[test]
    fn exclusive_pattern() {
        let space = StanceSpace::exclusive(["a", "b", "c"]).unwrap();
        assert!(space.is_exclusive());
        assert!(space.conflicts(1, 3));
        assert!(!space.conflicts(2, 2));
        assert!(!space.conflicts(0, 1));
        assert_eq!(space.index_of("c"), Some(3));
        assert_eq!(space.index_of(NO_STANCE_ID), Some(0));
        assert_eq!(space.id_of(0), Some(NO_STANCE_ID));
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let m = vec![
            vec![false, false, false],
            vec![false, false, true],
            vec![false, false, false],
        ];
        let err = StanceSpace::with_conflict_matrix(["a", "b"], &m).unwrap_err();
        assert!(matches!(err, ModelError::AsymmetricConflicts { .. }));
    }

    #[test]
    fn rejects_sentinel_and_self_conflicts() {
        let mut m = vec![vec![false; 3]; 3];
        m[0][1] = true;
        m[1][0] = true;
        assert!(matches!(
            StanceSpace::with_conflict_matrix(["a", "b"], &m),
            Err(ModelError::NoStanceConflict(_))
        ));
        let mut m = vec![vec![false; 3]; 3];
        m[2][2] = true;
        assert!(matches!(
            StanceSpace::with_conflict_matrix(["a", "b"], &m),
            Err(ModelError::SelfConflict(2))
        ));
        assert!(StanceSpace::with_conflict_pairs(["a"], &[(0, 1)]).is_err());
    }

    #[test]
    fn duplicate_and_reserved_ids() {
        assert!(matches!(
            StanceSpace::exclusive(["a", "a"]),
            Err(ModelError::DuplicateStanceId(_))
        ));
        assert!(matches!(
            StanceSpace::exclusive([NO_STANCE_ID]),
            Err(ModelError::ReservedStanceId(_))
        ));
    }

    #[test]
    fn partial_conflicts_are_not_exclusive() {
        let space = StanceSpace::with_conflict_pairs(["a", "b", "c"], &[(1, 2)]).unwrap();
        assert!(!space.is_exclusive());
        assert!(space.conflicts(2, 1));
        assert!(!space.conflicts(1, 3));
    }

    #[test]
    fn counts_accessors() {
        let c = StanceCounts::from_parts(yes_no(), 100, &[50, 50]).unwrap();
        assert_eq!(c.population(), 200);
        assert_eq!(c.stanced(), 100);
        assert_eq!(c.stanced_only().population(), 100);
        assert_eq!(c.scaled(3).as_slice(), &[300, 150, 150]);
        assert!(StanceCounts::new(yes_no(), vec![1, 2]).is_err());
    }

    #[test]
    fn assignments_enforce_sentinel_rules() {
        let mut set = AssignmentSet::new(yes_no());
        set.push([]).unwrap();
        assert!(set.people()[0].is_no_stance());
        assert!(matches!(set.push([0, 1]), Err(ModelError::NoStanceNotAlone)));
        assert!(set.push([3]).is_err());
        set.push([2, 1, 2]).unwrap();
        assert_eq!(set.people()[1].as_slice(), &[1, 2]);
        assert!(set.to_counts().is_none());
    }

    #[test]
    fn counts_round_trip_through_assignments() {
        let c = StanceCounts::from_parts(yes_no(), 3, &[2, 1]).unwrap();
        let set = AssignmentSet::from_counts(&c);
        assert_eq!(set.len(), 6);
        assert_eq!(set.to_counts().unwrap(), c);
    }
}
