use thiserror::Error;

use crate::dsl::DslError;
use crate::tree::{ValueId, VariableId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable {0}")]
    UnknownVariable(VariableId),
    #[error("value {value} is not in the domain of {variable}")]
    UnknownValue {
        variable: VariableId,
        value: ValueId,
    },
    #[error("path not found: {0}")]
    PathNotFound(String),
    #[error("conditioning event has probability zero")]
    ZeroProbabilityConditioning,
    #[error("variable {0} appears on both sides")]
    OverlappingVariables(VariableId),
    #[error("no node resolves variable {0}")]
    VariableNotInTree(VariableId),
    #[error("variable {0} given more than once")]
    DuplicateVariable(VariableId),
    #[error("invalid literal `{0}`, expected VAR=VAL")]
    InvalidLiteral(String),
    #[error("observation has probability zero")]
    ZeroProbabilityObservation,
    #[error("hypothesis {hypothesis} is not resolved first on path {path}")]
    HypothesisNotFirst {
        hypothesis: VariableId,
        path: String,
    },
    #[error("hypothesis {0} must be resolved at the root")]
    HypothesisNotAtRoot(VariableId),
    #[error("every hypothesis assigns probability zero to trial {trial}")]
    ZeroTotalMass { trial: usize },
    #[error("replicated tree would have {leaves} leaves, limit is {limit}")]
    SizeGuardExceeded { leaves: String, limit: u64 },
    #[error("selector variable {0} is not resolved on every positive-probability path")]
    SelectorUnresolved(VariableId),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid posterior: {0}")]
    InvalidPosterior(String),
    #[error("invalid tree: {}", summarize(.0))]
    InvalidTree(Vec<Violation>),
    #[error("invalid experiment plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("trial log: {0}")]
    Csv(#[from] csv::Error),
}

fn summarize(violations: &[Violation]) -> String {
    match violations {
        [] => "no violations".to_string(),
        [one] => one.to_string(),
        [first, rest @ ..] => format!("{first} (and {} more)", rest.len()),
    }
}
