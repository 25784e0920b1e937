use std::fmt;

use thiserror::Error;

/// A single broken invariant found while validating a model or an abstraction.
///
/// Validation never fails outright: it collects every violation so that a
/// caller (or the CLI) can report all of them at once.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateVariable {
        variable: String,
    },
    EmptyDomain {
        variable: String,
    },
    DuplicateOutcome {
        variable: String,
        outcome: String,
    },
    UnknownVariable {
        context: String,
        variable: String,
    },
    CycleDetected {
        variable: String,
    },
    MissingMechanism {
        variable: String,
    },
    ParentMismatch {
        variable: String,
    },
    ShapeMismatch {
        variable: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    RaggedMatrix {
        variable: String,
    },
    EntryOutOfRange {
        variable: String,
        row: usize,
        column: usize,
        value: f64,
    },
    ColumnNotStochastic {
        variable: String,
        column: usize,
        sum: f64,
    },
    DuplicateRelevant {
        variable: String,
    },
    UnmappedRelevant {
        variable: String,
    },
    MapNotSurjective {
        variable: String,
    },
    LowOrderMismatch {
        variable: String,
    },
    NotBinary {
        variable: String,
        row: usize,
        column: usize,
    },
    ColumnNotFunctional {
        variable: String,
        column: usize,
    },
    RowNotSurjective {
        variable: String,
        row: usize,
    },
}

impl Violation {
    /// Name of the variable the violation is attached to.
    pub fn variable(&self) -> &str {
        use Violation::*;
        match self {
            DuplicateVariable { variable }
            | EmptyDomain { variable }
            | DuplicateOutcome { variable, .. }
            | UnknownVariable { variable, .. }
            | CycleDetected { variable }
            | MissingMechanism { variable }
            | ParentMismatch { variable }
            | ShapeMismatch { variable, .. }
            | RaggedMatrix { variable }
            | EntryOutOfRange { variable, .. }
            | ColumnNotStochastic { variable, .. }
            | DuplicateRelevant { variable }
            | UnmappedRelevant { variable }
            | MapNotSurjective { variable }
            | LowOrderMismatch { variable }
            | NotBinary { variable, .. }
            | ColumnNotFunctional { variable, .. }
            | RowNotSurjective { variable, .. } => variable,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateVariable { variable } => write!(f, "{variable}: duplicate variable name"),
            EmptyDomain { variable } => write!(f, "{variable}: empty outcome list"),
            DuplicateOutcome { variable, outcome } => {
                write!(f, "{variable}: duplicate outcome label {outcome:?}")
            }
            UnknownVariable { context, variable } => {
                write!(f, "{variable}: unknown variable referenced by {context}")
            }
            CycleDetected { variable } => write!(f, "{variable}: cycle detected"),
            MissingMechanism { variable } => write!(f, "{variable}: missing mechanism"),
            ParentMismatch { variable } => {
                write!(
                    f,
                    "{variable}: mechanism parents differ from edge-declared parents"
                )
            }
            ShapeMismatch {
                variable,
                expected,
                found,
            } => write!(
                f,
                "{variable}: matrix shape {}x{} does not match expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            RaggedMatrix { variable } => write!(f, "{variable}: matrix rows have unequal length"),
            EntryOutOfRange {
                variable,
                row,
                column,
                value,
            } => {
                write!(
                    f,
                    "{variable}: entry ({row},{column}) = {value} outside [0, 1]"
                )
            }
            ColumnNotStochastic {
                variable,
                column,
                sum,
            } => {
                write!(
                    f,
                    "{variable}: column {column} not stochastic (sums to {sum})"
                )
            }
            DuplicateRelevant { variable } => write!(f, "{variable}: listed twice in relevant set"),
            UnmappedRelevant { variable } => {
                write!(
                    f,
                    "{variable}: relevant variable has no image under the variable map"
                )
            }
            MapNotSurjective { variable } => {
                write!(
                    f,
                    "{variable}: high-level variable has no preimage (map not surjective)"
                )
            }
            LowOrderMismatch { variable } => {
                write!(
                    f,
                    "{variable}: alpha low_order differs from the variable map preimage"
                )
            }
            NotBinary {
                variable,
                row,
                column,
            } => {
                write!(f, "{variable}: alpha entry ({row},{column}) is not 0 or 1")
            }
            ColumnNotFunctional { variable, column } => {
                write!(
                    f,
                    "{variable}: alpha column {column} not functional (needs exactly one 1)"
                )
            }
            RowNotSurjective { variable, row } => {
                write!(
                    f,
                    "{variable}: alpha row {row} not surjective (no 1 in row)"
                )
            }
        }
    }
}

/// Wrapper so a violation list can be carried inside an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(Violations),
    #[error("invalid abstraction: {0}")]
    InvalidAbstraction(Violations),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {variable:?} has no outcome {outcome:?}")]
    UnknownOutcome { variable: String, outcome: String },
    #[error("outcome index {index} out of range for variable {variable:?}")]
    OutcomeOutOfRange { variable: String, index: usize },
    #[error("cycle detected through variable {0:?}")]
    Cycle(String),
    #[error("variable {0:?} listed more than once")]
    DuplicateVariable(String),
    #[error("variable sets overlap on {0:?}")]
    Overlap(String),
    #[error("{0} variable set is empty")]
    EmptySet(&'static str),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not a probability vector: {0}")]
    NotDistribution(String),
    #[error("matrix row {0} has no 1 (not a surjection)")]
    NotSurjective(usize),
    #[error("no surjection from {domain} outcomes onto {codomain} outcomes")]
    NoSurjection { domain: usize, codomain: usize },
    #[error("abstraction has no alpha for high-level variable {0:?}")]
    MissingAlpha(String),
    #[error("pair touches unabstracted variables: {0:?} has an empty preimage")]
    Unabstracted(String),
    #[error("models do not compose: {0}")]
    ModelMismatch(String),
    #[error("nothing to aggregate: assessment set is empty")]
    EmptyAssessmentSet,
    #[error("assessment set would contain {count} pairs, above the limit of {limit}")]
    TooManyPairs { count: u128, limit: u128 },
    #[error("candidate space holds {count} candidates, above the limit of {limit}")]
    TooManyCandidates { count: u128, limit: u128 },
    #[error("candidate space is empty")]
    EmptyCandidateSpace,
    #[error("invalid candidate: {0}")]
    InvalidCandidate(String),
    #[error("hybrid sampling not severable: {0}")]
    NotSeverable(String),
    #[error("invalid data file {path}: {reason}")]
    Ingest { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
