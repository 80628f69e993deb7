pub mod bench;
pub mod bnb;
#[cfg(feature = "cli")]
pub mod cli;
pub mod config;
pub mod convex_solver;
pub mod error;
pub mod expression;
pub mod geometry;
pub mod interval;
pub mod relaxation;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use expression::{Expression, Objective};
pub use geometry::BoxRegion;
pub use interval::{interval_evaluate, Interval};
pub use bnb::{solve, RunReport, Solver};
