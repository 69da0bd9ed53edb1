//! Carbon-aware permutation flow-shop scheduling.
//!
//! Jobs pass through `M` machines in a common order; each operation draws a
//! per-period power profile. Grid electricity carries a time-varying carbon
//! intensity and on-site renewable power is free of scope-2 emissions. The
//! crate derives intensities from generation-mix data, evaluates schedules
//! under carbon, cost and makespan objectives, searches schedules with a dual
//! random-key memetic algorithm, exports the exact MILP in LP format,
//! enumerates tiny instances exhaustively, and generates benchmark datasets.
//!
//! With the default `parallel` feature, population evaluation, oracle
//! enumeration and dataset generation run on a rayon pool. Results do not
//! depend on the thread count.

pub mod carbon;
pub mod error;
pub mod evaluator;
pub mod instgen;
pub mod memetic;
pub mod milp;
pub mod model;
pub mod par;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use evaluator::{demand_profile, evaluate, objective_identity_check, DemandProfile, Objective, ObjectiveKind};
pub use model::{fcfs_schedule, load_instance, save_instance, Instance, Job, OperationSpec, Schedule};
