use thiserror::Error;

use crate::circuit::Violation;
use crate::dsl::ParseDiagnostic;
use crate::state::PathId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pair ket mixes stages: {minus:?} (minus) and {plus:?} (plus)")]
    MixedStage { minus: PathId, plus: PathId },

    #[error("amplitude is not finite")]
    NonFinite,

    #[error("stage mismatch: expected paths at stage {expected}, found {minus:?}/{plus:?}")]
    StageMismatch {
        expected: u8,
        minus: PathId,
        plus: PathId,
    },

    #[error("unexpected gamma ket {0} in a particle-only state")]
    UnexpectedGamma(String),

    #[error("no survivors: the state has no particle-sector amplitude")]
    NoSurvivors,

    #[error("state is not normalized (norm squared {0})")]
    NotNormalized(f64),

    #[error("invalid scheme: {}", join_violations(.0))]
    InvalidScheme(Vec<Violation>),

    #[error("invalid beam splitter: {0}")]
    InvalidSplitter(String),

    #[error("malformed behavior: {0}")]
    MalformedBehavior(String),

    #[error("no runs to estimate frequencies from")]
    EmptyTally,

    #[error("parse failed with {} diagnostic(s)", .0.len())]
    Parse(Vec<ParseDiagnostic>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
