//! Maximum feasible subsystem (MAX FS) heuristics for dense constraint
//! matrices.
//!
//! The crate is organized bottom-up:
//!
//! - [`system`]: dense linear systems and their text format;
//! - [`elastic`]: standard and full elastic LP models, with constraint
//!   removal by deactivation;
//! - [`lp`]: a dense bounded-variable revised simplex with dual prices and
//!   warm starts;
//! - [`changepoint`]: the mean-shift cut used by Extension 1;
//! - [`heuristic`]: the general MAX FS algorithm, Algorithms 1–3 and
//!   Extensions 1 and 2;
//! - [`sparse`]: sparse solutions of underdetermined systems (basis pursuit,
//!   Methods B, C, M and ME1E2);
//! - [`classify`]: binary linear classification as MAX FS;
//! - [`harness`]: seeded instance generation and benchmark sweeps.

pub mod changepoint;
pub mod classify;
pub mod elastic;
pub mod error;
pub mod harness;
pub mod heuristic;
pub mod lp;
pub mod sparse;
pub mod system;

pub use changepoint::{first_mean_change, ChangePointDetector, ScoreSeries};
pub use classify::{ClassificationReport, ClassifierAlgorithm, Dataset, Hyperplane, LabelMapping};
pub use elastic::{ConstraintRef, ElasticMode, ElasticModel};
pub use error::{Error, Result};
pub use heuristic::{solve_maxfs, Algorithm, MaxFsResult, StrategyConfig};
pub use lp::{LpProblem, LpSolution, SimplexSolver, Status, Tolerances};
pub use sparse::{Method, RecoveryProblem, RecoveryResult};
pub use system::{parse_vector, LinearSystem, Sense};
