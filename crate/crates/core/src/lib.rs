//! Finite discrete structural causal models, abstractions between them, and
//! interventional measures of how well an abstraction approximates its base
//! model.
//!
//! ```
//! use causal_abstraction::{assessment::Pair, measures::*, scenarios::*};
//!
//! let err = error_wrt_intervention(
//!     MeasureKind::Ic, &fig1a(), &fig1b(), &fig1_abstraction(), &["Sm'"], &["Hea'"],
//! ).unwrap();
//! assert!((err - 0.385).abs() < 1e-3);
//! # let _ = Pair::new(&["Sm'"], &["Hea'"]);
//! ```

pub mod abstraction;
pub mod assessment;
pub mod error;
pub mod graph;
pub mod index;
pub mod intervention;
pub mod learner;
pub mod matrix;
pub mod measures;
pub mod sampling;
pub mod scenarios;
pub mod scm;

pub use abstraction::{
    compose_abstractions, pseudo_inverse, validate_abstraction, Abstraction, AbstractionSpec,
};
pub use assessment::{build_assessment_set, AssessmentKind, AssessmentSet, Pair};
pub use error::{Error, Result, Violation};
pub use intervention::{intervene, interventional_matrix, Intervention, InterventionalMatrix};
pub use learner::{
    enumerate_surjections, learn, CandidateSpace, LearnConfig, LearnOutcome, LearnResult,
};
pub use matrix::StochasticMatrix;
pub use measures::{
    error_wrt_intervention, jsd, matrix_distance, overall_error, Aggregator, ErrorReport,
    MaybeInfiniteError, MeasureKind,
};
pub use sampling::{forward_sample, hybrid_sample, pullback_intervention_sample, Counts};
pub use scm::{validate_scm, Scm, ScmSpec, Variable};
