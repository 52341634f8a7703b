//! Trust-region methods for unconstrained set optimization problems whose
//! objective is a finite family `F(x) = {f^1(x), ..., f^p(x)}` of smooth
//! vector-valued maps, compared under the lower set-less relation induced by a
//! polyhedral ordering cone.
//!
//! The crate is organised bottom-up:
//!
//! * [`cone`] — polyhedral ordering cones, the induced orders and the
//!   oriented-distance scalarization used by every acceptance test.
//! * [`problem`] — the set-valued objective, finite-difference derivatives and
//!   the registry of benchmark instances.
//! * [`partition`] — minimal / weakly minimal elements of `F(x)`, active index
//!   groups and the partition set.
//! * [`subproblem`] — quadratic models, the min-max trust-region subproblem and
//!   the criticality measure.
//! * [`solvers`] — monotone TRM, the max-type and average-type non-monotone
//!   variants, and steepest-descent / conjugate-gradient baselines.
//! * [`bench`] — experiment matrix, metric tables, performance profiles and
//!   CSV / JSON / SVG emission.

pub mod bench;
pub mod cone;
mod error;
pub mod linalg;
pub mod partition;
pub mod problem;
pub mod solvers;
pub mod subproblem;

pub use cone::{Cone, ConeError, Position};
pub use error::Error;
pub use partition::{MinimalStructure, PartitionElement};
pub use problem::{Bounds, DerivativeBundle, Problem, ProblemError};
pub use solvers::{Algorithm, RunResult, SolverConfig};
pub use subproblem::SubproblemSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;
