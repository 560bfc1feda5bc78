//! Numerical toolkit for sweeping processes driven by moving prox-regular sets.
//!
//! The state is confined to a time-dependent closed set `C(t)` and evolves so
//! that its (measure) velocity points into the inward normal cone. This crate
//! provides:
//!
//! - exact distance/projection primitives for a family of prox-regular sets
//!   ([`geometry`]),
//! - time-dependent moving sets built from those primitives ([`dynamics`]),
//! - right-continuous bounded-variation trajectories, their differential
//!   measures and densities ([`measure`]),
//! - the catching-up time-stepping solver with grid refinement ([`solver`]),
//! - the variational residual and solution certificates ([`residual`]),
//! - built-in scenarios, convergence and stability studies ([`lab`]),
//! - a flat key-value scenario config format and CSV/JSON writers
//!   ([`config`], [`io`]).

pub mod config;
pub mod dynamics;
pub mod geometry;
pub mod io;
pub mod lab;
pub mod measure;
#[doc(hidden)]
pub mod oracle;
pub mod point;
pub mod residual;
pub mod rng;
pub mod solver;

pub use dynamics::{MotionPath, MovingSet};
pub use geometry::{ProxSet, SafetyFactor};
pub use measure::{BVTrajectory, Density, ReferenceMeasure, TimeGrid};
pub use point::Point;
pub use residual::{Certificate, ResidualReport, Tolerances};
pub use solver::SolveConfig;
