//! Piecewise-convex hyperplane approximation of multivariate data sets and
//! its translation to mixed-integer linear programs.
//!
//! The crate fits two families of piecewise-linear models to sampled data:
//!
//! * simple convex (or concave) models, the max (min) of a set of
//!   hyperplanes ([`convex_fit`]);
//! * piecewise-convex models, which split the domain at one interface
//!   hyperplane and use a convex plane family on each side, continuous by
//!   construction ([`pwca`]).
//!
//! Fitted models translate to MILP constraint blocks ([`milp_model`]),
//! alongside competing simplex-triangulation formulations ([`simplex_pwl`]).
//! A built-in bounded-variable simplex and branch-and-bound solver
//! ([`solver`]) runs everything without external dependencies; problems can
//! also be exported in the LP text format for outside solvers.

pub mod convex_fit;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod milp_model;
pub mod model_io;
pub mod optimizer;
pub mod pwca;
pub mod simplex_pwl;
pub mod solver;

pub use error::{Error, Result};
