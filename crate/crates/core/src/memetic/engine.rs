//! The generational loop.
//!
//! Each generation produces `rho` offspring: crossover pairs plus mutated
//! copies of the current elite. Every offspring is mutated and receives one
//! local-search pass; the best `rho` of parents and offspring survive.
//!
//! Each offspring slot owns a random sub-stream keyed by generation and slot,
//! so serial and parallel builds produce identical runs.

use std::fmt::Write;
use std::time::{Duration, Instant};

use rand::Rng;

use super::genome::{encode_fcfs, random_individual, Individual, Problem};
use super::operators::{crossover, local_search, mutate};
use super::params::MaParams;
use crate::error::Result;
use crate::evaluator::{Objective, ObjectiveKind};
use crate::model::{Instance, Schedule};
use crate::par;
use crate::rng::stream;

const TAG_INIT: u64 = 1;
const TAG_PAIR: u64 = 2;
const TAG_COPY: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Individual,
    pub schedule: Schedule,
    pub objective: Objective,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationStats>,
}

impl RunResult {
    pub fn generations_completed(&self) -> usize {
        self.history.len() - 1
    }
}

fn fitness_of(ind: &Individual) -> f64 {
    ind.fitness.expect("individual evaluated")
}

fn debug_check(ind: &Individual) {
    debug_assert!(ind.is_normalized(1e-9), "genome invariant broken: {ind:?}");
}

/// `rho - 1` random individuals followed by the FCFS genome, all evaluated.
pub fn init_population(problem: &Problem<'_>, params: &MaParams) -> Result<Vec<Individual>> {
    params.validate()?;
    let instance = problem.instance;
    let rho = params.population;
    let seed = params.seed;
    Ok(par::map_range(rho, |i| {
        let mut ind = if i + 1 == rho {
            encode_fcfs(instance)
        } else {
            random_individual(instance, &mut stream(seed, &[TAG_INIT, i as u64]))
        };
        problem.evaluate(&mut ind);
        ind
    }))
}

fn stats(generation: usize, population: &[Individual]) -> GenerationStats {
    let total: f64 = population.iter().map(fitness_of).sum();
    GenerationStats {
        generation,
        best_fitness: fitness_of(&population[0]),
        mean_fitness: total / population.len() as f64,
    }
}

fn sort_by_fitness(population: &mut [Individual]) {
    population.sort_by(|a, b| fitness_of(a).total_cmp(&fitness_of(b)));
}

fn refine(ind: &mut Individual, problem: &Problem<'_>, params: &MaParams, rng: &mut impl Rng) {
    mutate(ind, params, rng);
    debug_check(ind);
    problem.evaluate(ind);
    local_search(ind, problem);
    debug_check(ind);
}

/// One generation of offspring from a population sorted best-first.
fn offspring(
    population: &[Individual],
    problem: &Problem<'_>,
    params: &MaParams,
    generation: usize,
) -> Vec<Individual> {
    let rho = population.len();
    let pairs = params.crossover_count() / 2;
    let copies = rho - 2 * pairs;
    let seed = params.seed;
    let g = generation as u64;

    let crossed = par::map_range(pairs, |k| {
        let mut rng = stream(seed, &[TAG_PAIR, g, k as u64]);
        let a = rng.random_range(0..rho);
        let mut b = rng.random_range(0..rho - 1);
        if b >= a {
            b += 1;
        }
        let (mut c1, mut c2) = crossover(&population[a], &population[b], params, &mut rng);
        debug_check(&c1);
        debug_check(&c2);
        refine(&mut c1, problem, params, &mut rng);
        refine(&mut c2, problem, params, &mut rng);
        [c1, c2]
    });
    let copied = par::map_range(copies, |j| {
        let mut rng = stream(seed, &[TAG_COPY, g, j as u64]);
        let mut c = population[j].clone();
        refine(&mut c, problem, params, &mut rng);
        c
    });
    crossed.into_iter().flatten().chain(copied).collect()
}

/// Runs the memetic search until `gamma` generations or the time limit.
pub fn run(
    instance: &Instance,
    params: &MaParams,
    kind: ObjectiveKind,
    time_limit: Option<Duration>,
) -> Result<RunResult> {
    let started = Instant::now();
    let problem = Problem::new(instance, kind)?;
    let mut population = init_population(&problem, params)?;
    sort_by_fitness(&mut population);
    let mut history = vec![stats(0, &population)];

    for generation in 1..=params.generations {
        if time_limit.is_some_and(|limit| started.elapsed() >= limit) {
            break;
        }
        let children = offspring(&population, &problem, params, generation);
        population.extend(children);
        sort_by_fitness(&mut population);
        population.truncate(params.population);
        history.push(stats(generation, &population));
    }

    let best = population.swap_remove(0);
    let schedule = problem.decode(&best);
    let objective = problem.objective(&schedule);
    Ok(RunResult {
        best,
        schedule,
        objective,
        history,
    })
}

/// `generation,best_fitness,mean_fitness` rows.
pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best_fitness,mean_fitness\n");
    for h in history {
        writeln!(out, "{},{},{}", h.generation, h.best_fitness, h.mean_fitness).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fcfs_schedule;
    use crate::model::fixtures::table2_instance;

    fn small_params(seed: u64) -> MaParams {
        let mut p = MaParams::default().with_seed(seed);
        p.population = 20;
        p.generations = 15;
        p
    }

    fn varying() -> Instance {
        table2_instance((0..96).map(|t| 200.0 + 150.0 * ((t as f64) / 9.0).sin()).collect())
    }

    #[test]
    fn history_is_monotone_and_beats_fcfs() {
        let inst = varying();
        let r = run(&inst, &small_params(4), ObjectiveKind::Carbon, None).unwrap();
        assert_eq!(r.history.len(), 16);
        assert!(r.history.windows(2).all(|w| w[1].best_fitness <= w[0].best_fitness));
        let fcfs = crate::evaluator::evaluate(&inst, &fcfs_schedule(&inst), ObjectiveKind::Carbon).unwrap();
        assert!(r.objective.fitness() <= fcfs.fitness());
        assert_eq!(r.objective.fitness(), r.history.last().unwrap().best_fitness);
        r.schedule.validate(&inst).unwrap();
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let inst = varying();
        let a = run(&inst, &small_params(11), ObjectiveKind::Carbon, None).unwrap();
        let b = run(&inst, &small_params(11), ObjectiveKind::Carbon, None).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn init_population_shape() {
        let inst = varying();
        let problem = Problem::new(&inst, ObjectiveKind::Carbon).unwrap();
        let mut p = small_params(1);
        p.population = 2;
        let pop = init_population(&problem, &p).unwrap();
        assert_eq!(pop.len(), 2);
        assert_eq!(pop[1].job_keys, encode_fcfs(&inst).job_keys);
        assert!(pop.iter().all(|i| i.fitness.is_some()));
        p.population = 250;
        let pop = init_population(&problem, &p).unwrap();
        assert_eq!(pop.len(), 250);
        assert!(pop.iter().any(|i| i.fitness.unwrap() < 1e10));
        assert_eq!(pop, init_population(&problem, &p).unwrap());
    }

    #[test]
    fn makespan_objective_reaches_total_duration() {
        let inst = varying();
        let r = run(&inst, &small_params(2), ObjectiveKind::Makespan, None).unwrap();
        assert_eq!(r.objective.value, 48.0);
    }

    #[test]
    fn zero_time_limit_stops_after_init() {
        let inst = varying();
        let r = run(&inst, &small_params(2), ObjectiveKind::Carbon, Some(Duration::ZERO)).unwrap();
        assert_eq!(r.generations_completed(), 0);
    }

    #[test]
    fn history_csv_header() {
        let text = history_csv(&[GenerationStats {
            generation: 0,
            best_fitness: 1.5,
            mean_fitness: 2.0,
        }]);
        assert_eq!(text, "generation,best_fitness,mean_fitness\n0,1.5,2\n");
    }
}
