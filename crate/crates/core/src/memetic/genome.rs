//! Dual random-key genome and its decoder.
//!
//! One key array orders the jobs (ascending key = earlier). One pause array
//! per machine, with `N + 1` slots, splits that machine's slack into integer
//! idle gaps before, between and after the operations.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::evaluator::{evaluate_starts, Objective, ObjectiveKind};
use crate::model::{Instance, Schedule};

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub job_keys: Vec<f64>,
    /// One array of `N + 1` keys per machine.
    pub pause_keys: Vec<Vec<f64>>,
    pub fitness: Option<f64>,
}

impl Individual {
    /// True when every key is non-negative and every array sums to one
    /// within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        std::iter::once(&self.job_keys).chain(&self.pause_keys).all(|keys| {
            keys.iter().all(|k| k.is_finite() && *k >= 0.0) && (keys.iter().sum::<f64>() - 1.0).abs() <= tol
        })
    }
}

/// Scales keys to sum to one; a non-positive total resets to uniform.
pub fn normalize(keys: &mut [f64]) {
    let total: f64 = keys.iter().sum();
    if total > 0.0 && total.is_finite() {
        keys.iter_mut().for_each(|k| *k /= total);
    } else {
        let uniform = 1.0 / keys.len() as f64;
        keys.iter_mut().for_each(|k| *k = uniform);
    }
}

/// Per-machine slack `T - sum(D)`; negative on overloaded machines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackVector(pub Vec<i64>);

impl SlackVector {
    pub fn of(instance: &Instance) -> Self {
        Self(instance.slack())
    }

    /// Fails when some machine cannot hold its operations within the horizon.
    pub fn require_feasible(&self) -> Result<()> {
        match self.0.iter().position(|&s| s < 0) {
            Some(m) => Err(Error::InfeasibleInstance(format!(
                "machine {m} is overloaded by {} periods",
                -self.0[m]
            ))),
            None => Ok(()),
        }
    }

    pub fn budget(&self, machine: usize) -> usize {
        self.0[machine].max(0) as usize
    }
}

/// Largest-remainder integer split of `total` proportionally to `keys`.
/// Leftover units go to the largest fractional parts, ties to the lowest
/// index. The result always sums to `total`.
pub fn allocate_pauses(keys: &[f64], total: usize) -> Vec<usize> {
    if keys.is_empty() {
        return Vec::new();
    }
    let sum: f64 = keys.iter().sum();
    let shares: Vec<f64> = if sum > 0.0 && sum.is_finite() {
        keys.iter().map(|k| k.max(0.0) / sum).collect()
    } else {
        vec![1.0 / keys.len() as f64; keys.len()]
    };
    let raw: Vec<f64> = shares.iter().map(|s| s * total as f64).collect();
    // The epsilon keeps exact products such as 0.25 * 48 from landing on
    // 11.999... after normalization noise.
    let mut alloc: Vec<usize> = raw.iter().map(|r| (r + 1e-9).floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    if assigned > total {
        // Only reachable through float noise; trim from the smallest fractions.
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = raw[a] - alloc[a] as f64;
            let fb = raw[b] - alloc[b] as f64;
            fa.total_cmp(&fb).then(b.cmp(&a))
        });
        let mut excess = assigned - total;
        for &i in order.iter().cycle() {
            if excess == 0 {
                break;
            }
            if alloc[i] > 0 {
                alloc[i] -= 1;
                excess -= 1;
            }
        }
        return alloc;
    }
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - alloc[a] as f64;
        let fb = raw[b] - alloc[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let remainder = total - assigned;
    for &i in order.iter().cycle().take(remainder) {
        alloc[i] += 1;
    }
    alloc
}

/// Job indices sorted by ascending key, ties to the lower index.
pub fn job_sequence(job_keys: &[f64]) -> Vec<usize> {
    let mut seq: Vec<usize> = (0..job_keys.len()).collect();
    seq.sort_by(|&a, &b| job_keys[a].total_cmp(&job_keys[b]).then(a.cmp(&b)));
    seq
}

/// Start periods for a sequence and per-machine pause allocations.
///
/// Machine 0 chains pauses and durations directly. Later machines start each
/// operation after its planned pause or when the job's previous operation
/// completes, whichever is later.
pub fn starts_with_pauses(instance: &Instance, sequence: &[usize], pauses: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut start = vec![vec![0; instance.machines]; instance.job_count()];
    for m in 0..instance.machines {
        let mut available = 1;
        for (pos, &job) in sequence.iter().enumerate() {
            let planned = available + pauses[m][pos];
            let tau = if m == 0 {
                planned
            } else {
                planned.max(start[job][m - 1] + instance.duration(job, m - 1))
            };
            start[job][m] = tau;
            available = tau + instance.duration(job, m);
        }
    }
    start
}

/// Decodes a genome into a schedule. Total: infeasible genomes decode to a
/// schedule whose completion exceeds the horizon.
pub fn decode(individual: &Individual, instance: &Instance, slack: &SlackVector) -> Schedule {
    let sequence = job_sequence(&individual.job_keys);
    let pauses: Vec<Vec<usize>> = individual
        .pause_keys
        .iter()
        .enumerate()
        .map(|(m, keys)| allocate_pauses(keys, slack.budget(m)))
        .collect();
    let start = starts_with_pauses(instance, &sequence, &pauses);
    Schedule::from_starts(instance, sequence, start)
}

/// Genome of the first-come-first-serve schedule: ascending job keys and
/// all slack placed after the last operation.
pub fn encode_fcfs(instance: &Instance) -> Individual {
    let n = instance.job_count();
    let mut job_keys: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    normalize(&mut job_keys);
    let mut pause = vec![0.0; n + 1];
    pause[n] = 1.0;
    Individual {
        job_keys,
        pause_keys: vec![pause; instance.machines],
        fitness: None,
    }
}

/// Uniform job keys and exponential (mean 1) pause keys, each normalized.
pub fn random_individual<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Individual {
    let n = instance.job_count();
    let mut job_keys: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    normalize(&mut job_keys);
    let pause_keys = (0..instance.machines)
        .map(|_| {
            let mut keys: Vec<f64> = (0..=n).map(|_| Exp1.sample(rng)).collect();
            normalize(&mut keys);
            keys
        })
        .collect();
    Individual {
        job_keys,
        pause_keys,
        fitness: None,
    }
}

/// An instance bound to an objective: the fitness landscape the search runs on.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub instance: &'a Instance,
    pub slack: SlackVector,
    pub kind: ObjectiveKind,
}

impl<'a> Problem<'a> {
    pub fn new(instance: &'a Instance, kind: ObjectiveKind) -> Result<Self> {
        let slack = SlackVector::of(instance);
        slack.require_feasible()?;
        if kind == ObjectiveKind::Cost && instance.prices.is_none() {
            return Err(Error::MissingPrices);
        }
        Ok(Self { instance, slack, kind })
    }

    pub fn decode(&self, individual: &Individual) -> Schedule {
        decode(individual, self.instance, &self.slack)
    }

    pub fn objective(&self, schedule: &Schedule) -> Objective {
        evaluate_starts(self.instance, &schedule.start, schedule.completion, self.kind)
            .expect("prices checked at construction")
    }

    pub fn fitness(&self, individual: &Individual) -> f64 {
        self.objective(&self.decode(individual)).fitness()
    }

    /// Fills the cached fitness if missing and returns it.
    pub fn evaluate(&self, individual: &mut Individual) -> f64 {
        match individual.fitness {
            Some(f) => f,
            None => {
                let f = self.fitness(individual);
                individual.fitness = Some(f);
                f
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{chain, table2_instance};
    use crate::model::{fcfs_schedule, Job, OperationSpec};

    #[test]
    fn largest_remainder_thirds() {
        assert_eq!(allocate_pauses(&[1.0 / 3.0; 3], 10), vec![4, 3, 3]);
    }

    #[test]
    fn equal_keys_divisible_slack() {
        assert_eq!(allocate_pauses(&[0.25; 4], 12), vec![3, 3, 3, 3]);
    }

    #[test]
    fn allocation_handles_degenerate_keys() {
        assert_eq!(allocate_pauses(&[0.0, 0.0], 3), vec![2, 1]);
        assert_eq!(allocate_pauses(&[0.0, 1.0, 0.0], 0), vec![0, 0, 0]);
        assert_eq!(allocate_pauses(&[0.1, 0.1, 0.8], 1), vec![0, 0, 1]);
    }

    fn figure6() -> Individual {
        Individual {
            job_keys: vec![0.26, 0.06, 0.34, 0.12, 0.22],
            pause_keys: vec![vec![0.25, 0.17, 0.19, 0.0, 0.25, 0.14]],
            fitness: None,
        }
    }

    #[test]
    fn figure6_decoding() {
        let inst = table2_instance(vec![300.0; 96]);
        let slack = SlackVector::of(&inst);
        assert_eq!(slack.0, vec![48]);
        let ind = figure6();
        assert_eq!(allocate_pauses(&ind.pause_keys[0], 48), vec![12, 8, 9, 0, 12, 7]);
        let s = decode(&ind, &inst, &slack);
        assert_eq!(s.sequence, vec![1, 3, 4, 0, 2]);
        assert_eq!(s.start[1][0], 13);
        assert_eq!(s.start[3][0], 29);
        assert_eq!(s.start[4][0], 46);
        assert_eq!(s.start[0][0], 54);
        assert_eq!(s.start[2][0], 77);
        assert_eq!(s.completion, 89);
        assert!(s.feasible);
    }

    #[test]
    fn fcfs_genome_decodes_to_fcfs() {
        let mut inst = chain(&[3, 2, 4], 20);
        inst.jobs.push(Job::new(vec![
            OperationSpec::new(vec![1.0; 1]),
            OperationSpec::new(vec![1.0; 5]),
            OperationSpec::dummy(),
        ]));
        let ind = encode_fcfs(&inst);
        assert!(ind.is_normalized(1e-12));
        assert_eq!(decode(&ind, &inst, &SlackVector::of(&inst)), fcfs_schedule(&inst));
    }

    #[test]
    fn fcfs_genome_table2_completion() {
        let inst = table2_instance(vec![300.0; 96]);
        let s = decode(&encode_fcfs(&inst), &inst, &SlackVector::of(&inst));
        assert_eq!(s.sequence, vec![0, 1, 2, 3, 4]);
        assert_eq!(s.completion, 48);
    }

    #[test]
    fn later_machines_respect_precedence() {
        // Machine 1 takes all its slack up front; machine 2 must wait for it.
        let inst = chain(&[2, 2], 6);
        let ind = Individual {
            job_keys: vec![1.0],
            pause_keys: vec![vec![1.0, 0.0], vec![1.0, 0.0]],
            fitness: None,
        };
        let s = decode(&ind, &inst, &SlackVector::of(&inst));
        assert_eq!(s.start, vec![vec![5, 7]]);
        assert_eq!(s.completion, 8);
        assert!(!s.feasible);
    }

    #[test]
    fn tied_keys_order_by_index() {
        assert_eq!(job_sequence(&[0.5, 0.25, 0.25]), vec![1, 2, 0]);
    }

    #[test]
    fn overloaded_machine_is_rejected() {
        let inst = chain(&[5], 4);
        assert!(matches!(
            Problem::new(&inst, ObjectiveKind::Carbon),
            Err(Error::InfeasibleInstance(_))
        ));
    }

    #[test]
    fn normalize_resets_zero_arrays() {
        let mut keys = vec![0.0; 4];
        normalize(&mut keys);
        assert_eq!(keys, vec![0.25; 4]);
    }
}
