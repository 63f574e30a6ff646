//! Numerical solver for parameterized polynomial systems. Witness sets of a
//! generic fiber are computed by tracking solutions around loops in the
//! parameter line; when the coordinates admit an intermediate map, collection
//! can be restricted to one representative per symmetry class, cutting the
//! number of tracked paths roughly by the class size.

pub mod algebra;
mod error;
pub mod io;
pub mod monodromy;
pub mod problems;
pub mod tracking;
pub mod witness;

pub use algebra::{C64, CurveSystem, Monomial, ParameterizedSystem, Polynomial};
pub use error::{Error, Result};
pub use monodromy::{
    LoopSpec, MonodromyOptions, Permutation, PointFilter, RunStats, StoppingCriterion,
};
pub use problems::{GroupElement, InvariantClass, ProblemInstance};
pub use tracking::{FailureReason, PathOutcome, PathResult, TrackerConfig};
pub use witness::{
    AlphaFactor, AlphaMap, BetaFactor, EndpointAction, PointRegistry, WitnessSet,
};
