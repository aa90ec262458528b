//! Sub-population selection.
//!
//! A [`SubpopulationFilter`] maps attribute names to allowed values; a record
//! is kept when every named attribute takes one of its allowed values. The
//! attribute [`STANCE_ATTRIBUTE`] is understood by every restrictable type and
//! selects stance groups directly.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{AssignmentSet, HeldStances, StanceCounts, StanceSpace};

pub const STANCE_ATTRIBUTE: &str = "stance";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubpopulationFilter {
    criteria: BTreeMap<String, BTreeSet<String>>,
}

impl SubpopulationFilter {
    /// The always-true filter.
    pub fn all() -> Self {
        Self::default()
    }

    pub fn with<I, S>(mut self, attribute: impl Into<String>, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.criteria
            .entry(attribute.into())
            .or_default()
            .extend(values.into_iter().map(Into::into));
        self
    }

    pub fn is_all(&self) -> bool {
        self.criteria.is_empty()
    }

    pub fn criteria(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.criteria
    }

    pub fn allowed(&self, attribute: &str) -> Option<&BTreeSet<String>> {
        self.criteria.get(attribute)
    }

    /// Attributes other than the stance attribute.
    pub fn record_attributes(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.criteria.iter().filter(|(k, _)| k.as_str() != STANCE_ATTRIBUTE)
    }

    /// Ensure every attribute is either the stance attribute or in `known`.
    pub fn check_attributes<'a, I>(&self, known: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let known: BTreeSet<&str> = known.into_iter().collect();
        match self.record_attributes().find(|(k, _)| !known.contains(k.as_str())) {
            Some((k, _)) => Err(ModelError::UnknownAttribute(k.clone())),
            None => Ok(()),
        }
    }

    /// Allowed stance indices, or `None` when stances are unrestricted.
    pub fn stance_mask(&self, space: &StanceSpace) -> Result<Option<Vec<bool>>, ModelError> {
        let Some(ids) = self.allowed(STANCE_ATTRIBUTE) else {
            return Ok(None);
        };
        let mut mask = vec![false; space.k() + 1];
        for id in ids {
            let index = space.index_of(id).ok_or_else(|| ModelError::UnknownStance(id.clone()))?;
            mask[index] = true;
        }
        Ok(Some(mask))
    }

    /// Evaluate the non-stance criteria against a record's attributes.
    pub fn matches_record<'a, F>(&self, lookup: F) -> bool
    where
        F: Fn(&str) -> Option<&'a str>,
    {
        self.record_attributes()
            .all(|(k, allowed)| lookup(k).is_some_and(|v| allowed.contains(v)))
    }
}

/// Types from which a sub-population slice can be selected.
pub trait Restrict: Sized {
    fn restrict(&self, filter: &SubpopulationFilter) -> Result<Self, ModelError>;
}

impl Restrict for StanceCounts {
    /// Keeps only the selected stance groups. Counts carry no per-person
    /// metadata, so any other attribute is unknown.
    fn restrict(&self, filter: &SubpopulationFilter) -> Result<Self, ModelError> {
        filter.check_attributes([])?;
        let mut out = self.clone();
        if let Some(mask) = filter.stance_mask(self.space())? {
            for (i, keep) in mask.into_iter().enumerate() {
                if !keep {
                    out.set(i, 0);
                }
            }
        }
        Ok(out)
    }
}

fn holds_any(held: &HeldStances, mask: &Option<Vec<bool>>) -> bool {
    match mask {
        None => true,
        Some(mask) => held.as_slice().iter().any(|&i| mask[i]),
    }
}

impl Restrict for AssignmentSet {
    /// Keeps people holding at least one selected stance.
    fn restrict(&self, filter: &SubpopulationFilter) -> Result<Self, ModelError> {
        filter.check_attributes([])?;
        let mask = filter.stance_mask(self.space())?;
        Ok(self.retain(|_, held| holds_any(held, &mask)))
    }
}

/// Assignments with per-person attributes (e.g. state, age band).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributedAssignments {
    assignments: AssignmentSet,
    attributes: Vec<BTreeMap<String, String>>,
}

impl AttributedAssignments {
    pub fn new(space: std::sync::Arc<StanceSpace>) -> Self {
        Self {
            assignments: AssignmentSet::new(space),
            attributes: Vec::new(),
        }
    }

    pub fn push<I, A, K, V>(&mut self, held: I, attributes: A) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = usize>,
        A: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        self.assignments.push(held)?;
        self.attributes
            .push(attributes.into_iter().map(|(k, v)| (k.into(), v.into())).collect());
        Ok(())
    }

    pub fn assignments(&self) -> &AssignmentSet {
        &self.assignments
    }

    pub fn attributes(&self) -> &[BTreeMap<String, String>] {
        &self.attributes
    }
}

impl Restrict for AttributedAssignments {
    fn restrict(&self, filter: &SubpopulationFilter) -> Result<Self, ModelError> {
        filter.check_attributes(self.attributes.iter().flat_map(|a| a.keys().map(String::as_str)))?;
        let mask = filter.stance_mask(self.assignments.space())?;
        let keep: Vec<bool> = self
            .assignments
            .people()
            .iter()
            .zip(&self.attributes)
            .map(|(held, attrs)| {
                holds_any(held, &mask) && filter.matches_record(|k| attrs.get(k).map(String::as_str))
            })
            .collect();
        Ok(Self {
            assignments: self.assignments.retain(|i, _| keep[i]),
            attributes: self
                .attributes
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(a, _)| a.clone())
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::contention::{contention_exclusive, contention_general};
    use crate::model::NO_STANCE_ID;

    fn counts() -> StanceCounts {
        let space = Arc::new(StanceSpace::exclusive(["leave", "remain"]).unwrap());
        StanceCounts::from_parts(space, 30, &[40, 50]).unwrap()
    }

    #[test]
    fn always_true_is_identity() {
        let c = counts();
        assert_eq!(c.restrict(&SubpopulationFilter::all()).unwrap(), c);
    }

    #[test]
    fn single_group_has_no_contention() {
        let g1 = counts().restrict(&SubpopulationFilter::all().with(STANCE_ATTRIBUTE, ["leave"])).unwrap();
        assert_eq!(g1.as_slice(), &[0, 40, 0]);
        assert_eq!(contention_exclusive(&g1).unwrap().raw, 0.0);
        let g1_g0 = counts()
            .restrict(&SubpopulationFilter::all().with(STANCE_ATTRIBUTE, ["remain", NO_STANCE_ID]))
            .unwrap();
        assert_eq!(g1_g0.as_slice(), &[30, 0, 50]);
        assert_eq!(contention_exclusive(&g1_g0).unwrap().raw, 0.0);
    }

    #[test]
    fn unknown_attributes() {
        let f = SubpopulationFilter::all().with("region", ["Gibraltar"]);
        assert_eq!(counts().restrict(&f), Err(ModelError::UnknownAttribute("region".into())));
        let f = SubpopulationFilter::all().with(STANCE_ATTRIBUTE, ["maybe"]);
        assert_eq!(counts().restrict(&f), Err(ModelError::UnknownStance("maybe".into())));
    }

    #[test]
    fn attributed_people() {
        let space = Arc::new(StanceSpace::exclusive(["a", "b"]).unwrap());
        let mut pop = AttributedAssignments::new(space);
        pop.push([1], [("state", "UT")]).unwrap();
        pop.push([2], [("state", "UT")]).unwrap();
        pop.push([1], [("state", "WY")]).unwrap();
        pop.push([1], [("state", "WY")]).unwrap();

        let wy = pop.restrict(&SubpopulationFilter::all().with("state", ["WY"])).unwrap();
        assert_eq!(wy.assignments().len(), 2);
        assert_eq!(contention_general(wy.assignments()).unwrap().raw, 0.0);

        let ut = pop.restrict(&SubpopulationFilter::all().with("state", ["UT"])).unwrap();
        assert_eq!(contention_general(ut.assignments()).unwrap().raw, 0.5);

        let all = pop.restrict(&SubpopulationFilter::all()).unwrap();
        assert_eq!(all, pop);
        assert!(pop.restrict(&SubpopulationFilter::all().with("age", ["30"])).is_err());
    }

    #[test]
    fn assignment_stance_slice() {
        let space = Arc::new(StanceSpace::exclusive(["a", "b"]).unwrap());
        let set = AssignmentSet::from_people(space, [vec![1], vec![2], vec![0], vec![1, 2]]).unwrap();
        let a = set.restrict(&SubpopulationFilter::all().with(STANCE_ATTRIBUTE, ["a"])).unwrap();
        assert_eq!(a.len(), 2);
    }
}
