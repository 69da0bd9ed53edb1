//! Dual random-key memetic algorithm for carbon-aware permutation flow shops.

mod engine;
mod genome;
mod operators;
mod params;

pub use engine::{history_csv, init_population, run, GenerationStats, RunResult};
pub use genome::{
    allocate_pauses, decode, encode_fcfs, job_sequence, normalize, random_individual, starts_with_pauses, Individual,
    Problem, SlackVector,
};
pub use operators::{crossover, crossover_with_mask, local_search, mutate, SwapMask};
pub use params::MaParams;
