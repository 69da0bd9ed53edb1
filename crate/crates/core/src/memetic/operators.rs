//! Variation operators: controlled swap crossover, nonuniform mutation and
//! adjacent-swap local search.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::genome::{job_sequence, normalize, Individual, Problem};
use super::params::MaParams;

/// Which genes to swap: one mask for job keys, one per pause array.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapMask {
    pub jobs: Vec<bool>,
    pub pauses: Vec<Vec<bool>>,
}

impl SwapMask {
    pub fn sample<R: Rng + ?Sized>(like: &Individual, params: &MaParams, rng: &mut R) -> Self {
        let jobs = like
            .job_keys
            .iter()
            .map(|_| rng.random::<f64>() < params.crossover_jobs)
            .collect();
        let pauses = like
            .pause_keys
            .iter()
            .map(|keys| {
                keys.iter()
                    .map(|_| rng.random::<f64>() < params.crossover_pauses)
                    .collect()
            })
            .collect();
        Self { jobs, pauses }
    }
}

fn swap_genes(a: &mut [f64], b: &mut [f64], mask: &[bool]) {
    if mask.iter().all(|&s| s) {
        // A whole-array exchange keeps both arrays normalized as they are.
        a.swap_with_slice(b);
        return;
    }
    let mut touched = false;
    for ((x, y), &swap) in a.iter_mut().zip(b.iter_mut()).zip(mask) {
        if swap {
            std::mem::swap(x, y);
            touched = true;
        }
    }
    if touched {
        normalize(a);
        normalize(b);
    }
}

/// Exchanges the masked genes between two parents and renormalizes every
/// array that mixes genes of both.
pub fn crossover_with_mask(a: &Individual, b: &Individual, mask: &SwapMask) -> (Individual, Individual) {
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    c1.fitness = None;
    c2.fitness = None;
    swap_genes(&mut c1.job_keys, &mut c2.job_keys, &mask.jobs);
    for ((p1, p2), m) in c1.pause_keys.iter_mut().zip(c2.pause_keys.iter_mut()).zip(&mask.pauses) {
        swap_genes(p1, p2, m);
    }
    (c1, c2)
}

pub fn crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    params: &MaParams,
    rng: &mut R,
) -> (Individual, Individual) {
    let mask = SwapMask::sample(a, params, rng);
    crossover_with_mask(a, b, &mask)
}

/// Adds `N(0, sigma)` noise to each key with probability `prob`, clips at
/// zero and renormalizes. Returns whether any key changed.
fn mutate_array<R: Rng + ?Sized>(keys: &mut [f64], prob: f64, sigma: f64, rng: &mut R) -> bool {
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let mut touched = false;
    for k in keys.iter_mut() {
        if rng.random::<f64>() < prob {
            let noise = normal.sample(rng);
            if noise != 0.0 {
                *k = (*k + noise).max(0.0);
                touched = true;
            }
        }
    }
    if touched {
        normalize(keys);
    }
    touched
}

pub fn mutate<R: Rng + ?Sized>(individual: &mut Individual, params: &MaParams, rng: &mut R) {
    let mut touched = mutate_array(&mut individual.job_keys, params.mutation_jobs, params.step_jobs, rng);
    for keys in individual.pause_keys.iter_mut() {
        touched |= mutate_array(keys, params.mutation_pauses, params.step_pauses, rng);
    }
    if touched {
        individual.fitness = None;
    }
}

/// First-improvement scan over adjacent pairs of the decoded sequence.
/// Returns true when a swap was applied.
pub fn local_search(individual: &mut Individual, problem: &Problem<'_>) -> bool {
    let current = problem.evaluate(individual);
    let sequence = job_sequence(&individual.job_keys);
    for pair in sequence.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mut candidate = individual.clone();
        candidate.job_keys.swap(a, b);
        let f = problem.fitness(&candidate);
        if f < current {
            candidate.fitness = Some(f);
            *individual = candidate;
            return true;
        }
    }
    false
}
