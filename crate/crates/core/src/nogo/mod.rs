//! The non-overlap argument as checkable artifacts: a set-expression
//! language, proof traces with an independent checker, a derivation
//! engine, trace mutations, and a bounded search for counter-models.

pub mod expr;
pub mod mutate;
pub mod search;
pub mod trace;

use thiserror::Error;

use crate::numerics::NumericsError;
use crate::ontology::OntologyError;
use crate::scenario::ScenarioError;

pub use expr::{entails, parse_assertion, Assertion, Atom, Entailment, ParseError, Relation, SetExpr};
pub use mutate::{mutations, Mutation};
pub use search::{
    check_witness, feasibility_search, Axiom, FeasibilityProblem, SatReport, SearchOutcome, UnsatReport,
    WitnessCheck,
};
pub use trace::{
    check_trace, derive_nonoverlap, CheckFailure, DerivationRequest, FailureSite, ProofTrace, Rule, Step,
    TraceVerdict, Variant,
};

#[derive(Debug, Error)]
pub enum NogoError {
    #[error("the either-or condition fails for outcome `{outcome}`")]
    ConditionNotMet { outcome: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("derived trace failed its own check: {0}")]
    Internal(CheckFailure),
    #[error("search budget exhausted after {explored} nodes")]
    BudgetExceeded { explored: u64 },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
