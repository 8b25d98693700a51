//! The comparative yes/no game.
//!
//! The agent privately picks an object; the harness asks random strict
//! comparisons ("heavier than an elephant?") and maintains the feasible set of
//! catalog objects consistent with every answer so far. An empty feasible set
//! is a self-contradiction.
//!
//! Objects carry a rank only on their own attribute's column. A constraint on
//! attribute `a` never eliminates an object outside `a`'s column, so the
//! feasible set is empty exactly when every column has been emptied by its
//! own constraints.

mod catalog;
mod metrics;
mod trial;

pub use catalog::{load_catalog, Attribute, CatalogObject, ObjectCatalog, ObjectId};
pub use metrics::{compute_msc_pr, histogram_csv, histogram_steps, HistogramBin, YesNoMetrics};
pub use trial::{
    parse_query, render_query, run_yesno_trial, run_yesno_trial_with, sample_query, Ablation,
    QuerySource, RandomQueries, ScriptedQueries, TrialOutcome, TrialStatus, YesNoTrial,
    OBJECT_ACK, OBJECT_INSTRUCTION,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }
}

/// A comparison question before it has been answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub attribute: Attribute,
    pub reference: ObjectId,
    pub direction: Direction,
}

impl Query {
    pub fn new(
        catalog: &ObjectCatalog,
        attribute: Attribute,
        reference: &str,
        direction: Direction,
    ) -> Result<Self> {
        let reference = catalog.id_of(reference)?;
        if catalog.rank_on(reference, attribute).is_none() {
            return Err(crate::Error::domain(format!(
                "`{}` is not ranked on {attribute}",
                catalog.object(reference).name
            )));
        }
        Ok(Query {
            attribute,
            reference,
            direction,
        })
    }

    pub fn answered(self, catalog: &ObjectCatalog, answer: Answer, step: u32) -> Constraint {
        Constraint {
            attribute: self.attribute,
            reference: catalog.object(self.reference).name.to_string(),
            direction: self.direction,
            answer,
            step,
        }
    }

    /// Ground truth for an object ranked on the query's attribute.
    pub fn holds_for(self, catalog: &ObjectCatalog, object: ObjectId) -> Option<bool> {
        let rank = catalog.rank_on(object, self.attribute)?;
        let reference = catalog.rank_on(self.reference, self.attribute)?;
        Some(match self.direction {
            Direction::Greater => rank > reference,
            Direction::Less => rank < reference,
        })
    }
}

/// One answered comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub attribute: Attribute,
    pub reference: String,
    pub direction: Direction,
    pub answer: Answer,
    pub step: u32,
}

impl Constraint {
    pub fn query(&self, catalog: &ObjectCatalog) -> Result<Query> {
        Query::new(catalog, self.attribute, &self.reference, self.direction)
    }
}

/// Objects consistent with every constraint so far, as a 60-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeasibleSet {
    mask: u64,
}

impl FeasibleSet {
    pub fn full(catalog: &ObjectCatalog) -> Self {
        debug_assert!(catalog.len() <= 64);
        let mask = if catalog.len() == 64 {
            u64::MAX
        } else {
            (1u64 << catalog.len()) - 1
        };
        FeasibleSet { mask }
    }

    pub fn empty() -> Self {
        FeasibleSet { mask: 0 }
    }

    pub fn from_ids(ids: impl IntoIterator<Item = ObjectId>) -> Self {
        FeasibleSet {
            mask: ids.into_iter().fold(0, |m, id| m | (1u64 << id)),
        }
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.mask & (1u64 << id) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn is_subset_of(&self, other: &FeasibleSet) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn members(&self) -> impl Iterator<Item = ObjectId> + '_ {
        (0..64).filter(move |&id| self.contains(id))
    }

    pub fn member_names(&self, catalog: &ObjectCatalog) -> Vec<&'static str> {
        self.members().map(|id| catalog.object(id).name).collect()
    }

    /// Survivors within one attribute's column.
    pub fn column_len(&self, catalog: &ObjectCatalog, attribute: Attribute) -> usize {
        catalog
            .column(attribute)
            .iter()
            .filter(|&&id| self.contains(id))
            .count()
    }
}

/// Whether `object` survives `c`. Objects unranked on `c.attribute` always do.
pub fn is_consistent(object: &str, c: &Constraint, catalog: &ObjectCatalog) -> Result<bool> {
    let id = catalog.id_of(object)?;
    let query = c.query(catalog)?;
    Ok(consistent_id(catalog, id, query, c.answer))
}

fn consistent_id(catalog: &ObjectCatalog, id: ObjectId, query: Query, answer: Answer) -> bool {
    match query.holds_for(catalog, id) {
        None => true,
        Some(holds) => holds == answer.is_yes(),
    }
}

/// `{x ∈ s : is_consistent(x, c)}`.
pub fn update_feasible_set(
    s: FeasibleSet,
    c: &Constraint,
    catalog: &ObjectCatalog,
) -> Result<FeasibleSet> {
    let query = c.query(catalog)?;
    Ok(FeasibleSet::from_ids(
        s.members()
            .filter(|&id| consistent_id(catalog, id, query, c.answer)),
    ))
}

/// Feasible set after applying every constraint to the full catalog.
pub fn feasible_after(catalog: &ObjectCatalog, constraints: &[Constraint]) -> Result<FeasibleSet> {
    constraints
        .iter()
        .try_fold(FeasibleSet::full(catalog), |s, c| update_feasible_set(s, c, catalog))
}
