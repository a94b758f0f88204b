//! Numerical laboratory for the interior Bernoulli free-boundary problem driven by the
//! infinity Laplacian.
//!
//! The crate builds 2D domains from disks and rectangles, computes exact distance fields and
//! parallel sets, solves for infinity-harmonic potentials with a monotone wide-stencil scheme,
//! constructs and verifies free-boundary solutions, and evaluates the closed-form radial
//! p-Laplacian solutions together with their p -> infinity limits.

pub mod bernoulli;
pub mod error;
pub mod field_io;
pub mod functional;
pub mod geometry;
pub mod grid;
pub mod radial;
pub mod report;
pub mod solver;

pub use bernoulli::{BernoulliSolution, Problem, SolutionKind};
pub use error::{Error, Result};
pub use geometry::{Domain, DomainSpec, Primitive};
pub use grid::{BoundingBox, CompactMask, Grid, Point, ScalarField};
pub use radial::{Branch, RadialBernoulli};
pub use report::{ReportSet, VerificationReport};
pub use solver::{Mode, Potential, SolveOptions};
