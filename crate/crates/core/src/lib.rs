//! Discrete maximal operators on ℤ, weighted inequalities and their
//! transference to finite measure-preserving systems.

pub mod cz;
pub mod ergodic;
pub mod error;
pub mod interval;
pub mod io;
pub mod maximal;
pub mod report;
pub mod scalar;
pub mod sequence;
pub mod weights;

pub use cz::CzDecomposition;
pub use ergodic::{AtomFunction, FinitePermutationSystem};
pub use error::{Error, Result};
pub use interval::{DyadicInterval, ExpandMode, IntegerInterval};
pub use maximal::{MaximalOp, MaximalResult};
pub use report::{CheckId, InequalityReport, Witness};
pub use scalar::{Exact, Scalar};
pub use sequence::{PrefixSums, WindowedSequence};
pub use weights::{ApReport, WeightSequence};
