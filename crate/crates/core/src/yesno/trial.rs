use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{update_feasible_set, Answer, Attribute, Constraint, Direction, FeasibleSet, ObjectCatalog, ObjectId, Query};
use crate::agent::AgentHandle;
use crate::error::{Error, Result};
use crate::gateway::classify_yes_no;
use crate::seed;
use crate::transcript::{AnswerLabel, Message, Transcript};

pub const OBJECT_INSTRUCTION: &str = "Think of an object, but don't say it to me.";
pub const OBJECT_ACK: &str = "Got it! I've thought of an object. What's next?";

const QUERY_PREFIX: &str = "Is the object you're thinking of ";
const QUERY_SUFFIX: &str = "? Answer Yes or No.";
const TARGET_PREFIX: &str = " (The object you're thinking of is ";

// Independent RNG streams derived from the trial seed.
const QUERY_STREAM: u64 = 1;
const TARGET_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    None,
    /// Ground-truth rankings injected as a system message.
    Hint,
    /// The harness-chosen target object appended to every query.
    All,
    HintAll,
}

impl Ablation {
    pub fn hint(self) -> bool {
        matches!(self, Ablation::Hint | Ablation::HintAll)
    }

    pub fn all(self) -> bool {
        matches!(self, Ablation::All | Ablation::HintAll)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Ablation::None),
            "hint" => Ok(Ablation::Hint),
            "all" => Ok(Ablation::All),
            "hint_all" | "hint-all" | "hint+all" => Ok(Ablation::HintAll),
            other => Err(Error::domain(format!(
                "unknown ablation `{other}` (expected none, hint, all, hint_all)"
            ))),
        }
    }
}

/// Uniform attribute, uniform reference within its column, uniform direction.
pub fn sample_query<R: Rng + ?Sized>(rng: &mut R, catalog: &ObjectCatalog) -> Query {
    let attribute = Attribute::ALL[rng.gen_range(0..Attribute::ALL.len())];
    let column = catalog.column(attribute);
    let reference = column[rng.gen_range(0..column.len())];
    let direction = if rng.gen_bool(0.5) {
        Direction::Greater
    } else {
        Direction::Less
    };
    Query {
        attribute,
        reference,
        direction,
    }
}

pub fn render_query(query: Query, catalog: &ObjectCatalog, target: Option<ObjectId>) -> String {
    let (greater, less) = query.attribute.comparatives();
    let comparative = match query.direction {
        Direction::Greater => greater,
        Direction::Less => less,
    };
    let mut text = format!(
        "{QUERY_PREFIX}{comparative} than {}{QUERY_SUFFIX}",
        catalog.object(query.reference).phrase
    );
    if let Some(target) = target {
        text.push_str(TARGET_PREFIX);
        text.push_str(catalog.object(target).phrase);
        text.push_str(".)");
    }
    text
}

/// Inverse of [`render_query`]; ignores any appended target sentence.
pub fn parse_query(text: &str, catalog: &ObjectCatalog) -> Option<Query> {
    let rest = text.strip_prefix(QUERY_PREFIX)?;
    let end = rest.find(QUERY_SUFFIX)?;
    let (comparative, phrase) = rest[..end].split_once(" than ")?;
    let reference = catalog.id_of_phrase(phrase)?;
    let attribute = catalog.object(reference).attribute;
    let (greater, less) = attribute.comparatives();
    let direction = if comparative == greater {
        Direction::Greater
    } else if comparative == less {
        Direction::Less
    } else {
        return None;
    };
    Some(Query {
        attribute,
        reference,
        direction,
    })
}

/// Where the harness gets its next question.
pub trait QuerySource {
    fn next_query(&mut self, catalog: &ObjectCatalog) -> Option<Query>;
}

pub struct RandomQueries<R> {
    rng: R,
}

impl<R: Rng> RandomQueries<R> {
    pub fn new(rng: R) -> Self {
        RandomQueries { rng }
    }
}

impl<R: Rng> QuerySource for RandomQueries<R> {
    fn next_query(&mut self, catalog: &ObjectCatalog) -> Option<Query> {
        Some(sample_query(&mut self.rng, catalog))
    }
}

/// Fixed query list; the trial ends as a pass when it runs out.
pub struct ScriptedQueries {
    queries: std::vec::IntoIter<Query>,
}

impl ScriptedQueries {
    pub fn new(queries: Vec<Query>) -> Self {
        ScriptedQueries {
            queries: queries.into_iter(),
        }
    }
}

impl QuerySource for ScriptedQueries {
    fn next_query(&mut self, _catalog: &ObjectCatalog) -> Option<Query> {
        self.queries.next()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Contradiction,
    Pass,
    ProtocolFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub status: TrialStatus,
    pub steps_completed: u32,
    pub contradiction_step: Option<u32>,
    /// Attribute of the constraint that removed the last surviving object.
    pub first_emptied_attribute: Option<Attribute>,
    pub constraints: Vec<Constraint>,
}

impl TrialOutcome {
    /// Replays `constraints` from the full catalog and classifies the trial.
    ///
    /// Used by the report path to re-derive outcomes from persisted records.
    pub fn from_constraints(
        catalog: &ObjectCatalog,
        constraints: Vec<Constraint>,
        max_steps: u32,
        protocol_failure: bool,
    ) -> Result<Self> {
        let mut s = FeasibleSet::full(catalog);
        for c in &constraints {
            s = update_feasible_set(s, c, catalog)?;
            if s.is_empty() {
                return Ok(TrialOutcome {
                    status: TrialStatus::Contradiction,
                    steps_completed: c.step,
                    contradiction_step: Some(c.step),
                    first_emptied_attribute: Some(c.attribute),
                    constraints,
                });
            }
        }
        let steps = constraints.len() as u32;
        let status = if protocol_failure {
            TrialStatus::ProtocolFailure
        } else if steps >= max_steps {
            TrialStatus::Pass
        } else {
            return Err(Error::IncompleteData(format!(
                "{steps} constraints without contradiction, expected {max_steps}"
            )));
        };
        Ok(TrialOutcome {
            status,
            steps_completed: steps,
            contradiction_step: None,
            first_emptied_attribute: None,
            constraints,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YesNoTrial {
    pub transcript: Transcript,
    pub outcome: TrialOutcome,
    /// Harness-chosen target under the `all` ablations.
    pub target: Option<String>,
}

/// Runs one trial with randomly sampled queries.
pub fn run_yesno_trial(
    agent: &AgentHandle,
    catalog: &ObjectCatalog,
    trial_id: &str,
    seed: u64,
    max_steps: u32,
    ablation: Ablation,
) -> Result<YesNoTrial> {
    let mut queries = RandomQueries::new(seed::rng(seed::mix(&[seed, QUERY_STREAM])));
    run_yesno_trial_with(agent, catalog, trial_id, seed, max_steps, ablation, &mut queries)
}

pub fn run_yesno_trial_with(
    agent: &AgentHandle,
    catalog: &ObjectCatalog,
    trial_id: &str,
    seed: u64,
    max_steps: u32,
    ablation: Ablation,
    queries: &mut dyn QuerySource,
) -> Result<YesNoTrial> {
    if max_steps == 0 {
        return Err(Error::domain("max_steps must be at least 1"));
    }
    let target = ablation.all().then(|| {
        let mut rng = seed::rng(seed::mix(&[seed, TARGET_STREAM]));
        rng.gen_range(0..catalog.len())
    });

    let mut transcript = Transcript::new(trial_id, seed);
    if ablation.hint() {
        transcript.push(Message::system(catalog.rankings_text()));
    }
    transcript.push_user(OBJECT_INSTRUCTION);
    transcript.push_assistant(OBJECT_ACK);

    let mut feasible = FeasibleSet::full(catalog);
    let mut constraints = Vec::new();
    let mut status = TrialStatus::Pass;
    let mut contradiction_step = None;
    let mut first_emptied_attribute = None;

    for step in 1..=max_steps {
        let Some(query) = queries.next_query(catalog) else {
            break;
        };
        let text = render_query(query, catalog, target);
        let mut label = ask(agent, &mut transcript, &text)?;
        if label == AnswerLabel::Unparseable {
            label = ask(agent, &mut transcript, &text)?;
        }
        let answer = match label {
            AnswerLabel::Yes => Answer::Yes,
            AnswerLabel::No => Answer::No,
            AnswerLabel::Unparseable => {
                status = TrialStatus::ProtocolFailure;
                break;
            }
        };
        let constraint = query.answered(catalog, answer, step);
        let next = update_feasible_set(feasible, &constraint, catalog)?;
        debug_assert!(next.is_subset_of(&feasible));
        constraints.push(constraint);
        feasible = next;
        if feasible.is_empty() {
            status = TrialStatus::Contradiction;
            contradiction_step = Some(step);
            first_emptied_attribute = Some(query.attribute);
            break;
        }
    }

    let outcome = TrialOutcome {
        status,
        steps_completed: constraints.len() as u32,
        contradiction_step,
        first_emptied_attribute,
        constraints,
    };
    Ok(YesNoTrial {
        transcript,
        outcome,
        target: target.map(|id| catalog.object(id).name.to_string()),
    })
}

fn ask(agent: &AgentHandle, transcript: &mut Transcript, text: &str) -> Result<AnswerLabel> {
    transcript.push_user(text);
    let reply = agent.respond(transcript)?;
    let label = classify_yes_no(&reply);
    transcript.push_assistant(reply);
    Ok(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::yesno::load_catalog;

    #[test]
    fn render_weight_query() {
        let cat = load_catalog();
        let q = Query::new(&cat, Attribute::Weight, "Elephant", Direction::Greater).unwrap();
        assert_eq!(
            render_query(q, &cat, None),
            "Is the object you're thinking of heavier than an elephant? Answer Yes or No."
        );
        let q = Query::new(&cat, Attribute::Density, "Gold", Direction::Less).unwrap();
        assert_eq!(
            render_query(q, &cat, None),
            "Is the object you're thinking of less dense than gold? Answer Yes or No."
        );
    }

    #[test]
    fn parse_inverts_render_for_every_query() {
        let cat = load_catalog();
        let target = Some(cat.id_of("Cow").unwrap());
        for attr in Attribute::ALL {
            for &reference in cat.column(attr) {
                for direction in [Direction::Greater, Direction::Less] {
                    let q = Query { attribute: attr, reference, direction };
                    assert_eq!(parse_query(&render_query(q, &cat, None), &cat), Some(q));
                    assert_eq!(parse_query(&render_query(q, &cat, target), &cat), Some(q));
                }
            }
        }
        assert_eq!(parse_query("Is it a cat?", &cat), None);
    }

    #[test]
    fn ablation_parse() {
        assert_eq!(Ablation::parse("hint_all").unwrap(), Ablation::HintAll);
        assert!(Ablation::parse("both").is_err());
        assert!(Ablation::HintAll.hint() && Ablation::HintAll.all());
        assert!(!Ablation::None.hint() && !Ablation::None.all());
    }

    #[test]
    fn from_constraints_requires_full_length_for_pass() {
        let cat = load_catalog();
        let err = TrialOutcome::from_constraints(&cat, vec![], 250, false);
        assert!(matches!(err, Err(Error::IncompleteData(_))));
        let ok = TrialOutcome::from_constraints(&cat, vec![], 250, true).unwrap();
        assert_eq!(ok.status, TrialStatus::ProtocolFailure);
    }
}
