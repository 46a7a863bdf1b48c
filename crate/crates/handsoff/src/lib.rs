//! Maximum hands-off control of linear time-invariant systems.
//!
//! A *maximum hands-off* control is the admissible control with the shortest
//! support: among all inputs `u` with `‖u‖∞ ≤ 1` that steer `ẋ = Ax + Bu`
//! from an initial state `ξ` to the origin at time `T`, it minimizes the
//! total duration on which `u(t) ≠ 0`. For controllable plants with
//! nonsingular `A` this L0-optimal control coincides with the L1-optimal
//! control, which is computable by linear programming and is bang-off-bang
//! (values in `{-1, 0, +1}` almost everywhere).
//!
//! This crate discretizes the problem on a uniform zero-order-hold grid,
//! assembles the constraint `∫ e^{-As} B u(s) ds = -ξ` exactly per cell via
//! augmented matrix exponentials, and solves the resulting bounded-variable
//! LP with a self-contained two-phase simplex. On top of the solver it
//! provides:
//!
//! * the value function `V(ξ)` (minimum L1 = minimum L0 norm),
//! * budget-constrained reachability probes (`ξ ∈ R_α`),
//! * bisection of reachable-set and level-set boundaries along rays,
//! * verification suites for the structural properties of `V`: convexity,
//!   continuity, level-set identities and the bang-off-bang form,
//! * closed-form ground truth for scalar plants with `a < 0`.
//!
//! The crate is organized along the pipeline:
//! [`model`] (types and norms) → [`matfun`] (matrix exponentials,
//! plant validation) → [`transcribe`] (LP data) → [`lp`] (simplex) →
//! [`solver`] (hands-off solve, value function) → [`analysis`]
//! (property suites) with [`oracle1d`] as the independent reference.


pub mod analysis;
pub mod error;
pub mod lp;
pub mod matfun;
pub mod model;
pub mod oracle1d;
pub mod solver;
pub mod transcribe;

pub use analysis::{LineSpec, PropertyFailure, PropertyReport, RaySample, SweepPoint};
pub use error::{AssumptionFailure, Error, Result};
pub use matfun::ValidatedSystem;
pub use model::{ControlSignal, Grid, LtiSystem, ZeroTolerance};
pub use oracle1d::Scalar1dSystem;
pub use solver::{SolveContext, SolveReport, SolveStatus};
pub use transcribe::TranscribedProblem;
