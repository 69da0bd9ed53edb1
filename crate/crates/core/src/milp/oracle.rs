//! Exhaustive enumeration of every feasible permutation schedule with
//! integer start periods. Only viable for tiny instances; anything beyond the
//! evaluation budget is refused rather than truncated.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::error::{Error, Result};
use crate::evaluator::{evaluate_starts, Objective, ObjectiveKind};
use crate::model::{completion_of, Instance, Schedule};
use crate::par;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Which schedule space the oracle walked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchSpace {
    /// Single machine: permutations times integer pause compositions.
    PauseCompositions,
    /// Several machines: permutations times all precedence-feasible starts.
    StartTimes,
}

impl SearchSpace {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchSpace::PauseCompositions => "pause-compositions",
            SearchSpace::StartTimes => "start-times",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub schedule: Schedule,
    pub objective: Objective,
    /// Number of complete schedules evaluated.
    pub enumerated: u64,
    pub space: SearchSpace,
}

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Size of the single-machine space: `N! * C(S + N, N)`. `None` on overflow.
pub fn single_machine_space(jobs: usize, slack: usize) -> Option<u64> {
    factorial(jobs)?.checked_mul(binomial((slack + jobs) as u64, jobs as u64)?)
}

struct Candidate {
    fitness: f64,
    sequence: Vec<usize>,
    start: Vec<Vec<usize>>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        match self.fitness.partial_cmp(&other.fitness) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) => false,
            _ => (&self.sequence, &self.start) < (&other.sequence, &other.start),
        }
    }
}

struct Walker<'a> {
    instance: &'a Instance,
    kind: ObjectiveKind,
    budget: u64,
    counter: &'a AtomicU64,
    sequence: Vec<usize>,
    /// `suffix_load[p][m]`: load on machine `m` from position `p` onward.
    suffix_load: Vec<Vec<usize>>,
    /// `job_tail[i][m]`: duration of job `i` on machines `m..`.
    job_tail: Vec<Vec<usize>>,
    start: Vec<Vec<usize>>,
    available: Vec<usize>,
    best: Option<Candidate>,
    evaluated: u64,
}

impl<'a> Walker<'a> {
    fn new(
        instance: &'a Instance,
        kind: ObjectiveKind,
        budget: u64,
        counter: &'a AtomicU64,
        sequence: Vec<usize>,
    ) -> Self {
        let machines = instance.machines;
        let n = sequence.len();
        let mut suffix_load = vec![vec![0; machines]; n + 1];
        for p in (0..n).rev() {
            suffix_load[p] = (0..machines)
                .map(|m| suffix_load[p + 1][m] + instance.duration(sequence[p], m))
                .collect();
        }
        let job_tail = (0..n)
            .map(|i| {
                let mut tail = vec![0; machines + 1];
                for m in (0..machines).rev() {
                    tail[m] = tail[m + 1] + instance.duration(i, m);
                }
                tail
            })
            .collect();
        Self {
            instance,
            kind,
            budget,
            counter,
            sequence,
            suffix_load,
            job_tail,
            start: vec![vec![0; machines]; n],
            available: vec![1; machines],
            best: None,
            evaluated: 0,
        }
    }

    fn visit(&mut self, position: usize, machine: usize, ready: usize) -> Result<()> {
        let instance = self.instance;
        if position == self.sequence.len() {
            return self.leaf();
        }
        if machine == instance.machines {
            return self.visit(position + 1, 0, 1);
        }
        let job = self.sequence[position];
        let d = instance.duration(job, machine);
        let earliest = self.available[machine].max(ready);
        if d == 0 {
            // Zero-width operations sit at their earliest slot.
            self.start[job][machine] = earliest;
            return self.visit(position, machine + 1, earliest);
        }
        let room = self.suffix_load[position][machine].max(self.job_tail[job][machine]);
        let Some(latest) = (instance.horizon + 1).checked_sub(room) else {
            return Ok(());
        };
        let saved = self.available[machine];
        for tau in earliest..=latest {
            self.start[job][machine] = tau;
            self.available[machine] = tau + d;
            self.visit(position, machine + 1, tau + d)?;
        }
        self.available[machine] = saved;
        Ok(())
    }

    fn leaf(&mut self) -> Result<()> {
        self.evaluated += 1;
        if self.evaluated.is_multiple_of(1024) {
            self.flush()?;
        }
        let completion = completion_of(self.instance, &self.start);
        let objective = evaluate_starts(self.instance, &self.start, completion, self.kind)?;
        let fitness = objective.fitness();
        let improves = match &self.best {
            None => true,
            Some(best) => match fitness.partial_cmp(&best.fitness) {
                Some(Ordering::Less) => true,
                Some(Ordering::Greater) => false,
                _ => self.start < best.start,
            },
        };
        if improves {
            self.best = Some(Candidate {
                fitness,
                sequence: self.sequence.clone(),
                start: self.start.clone(),
            });
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        let total = self.counter.fetch_add(self.evaluated, AtomicOrdering::Relaxed) + self.evaluated;
        self.evaluated = 0;
        if total > self.budget {
            return Err(Error::BudgetExceeded(format!(
                "enumeration passed the budget of {} schedules",
                self.budget
            )));
        }
        Ok(())
    }
}

/// Advances `items` to the next lexicographic permutation; false at the last.
fn next_permutation(items: &mut [usize]) -> bool {
    let n = items.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

/// Enumerates every permutation starting with `first`, in lexicographic order.
fn shard(
    instance: &Instance,
    kind: ObjectiveKind,
    budget: u64,
    counter: &AtomicU64,
    first: usize,
) -> Result<Option<Candidate>> {
    let mut rest: Vec<usize> = (0..instance.job_count()).filter(|&j| j != first).collect();
    let mut best: Option<Candidate> = None;
    loop {
        let mut sequence = vec![first];
        sequence.extend_from_slice(&rest);
        let mut walker = Walker::new(instance, kind, budget, counter, sequence);
        walker.visit(0, 0, 1)?;
        walker.flush()?;
        if let Some(c) = walker.best {
            if best.as_ref().is_none_or(|b| c.better_than(b)) {
                best = Some(c);
            }
        }
        if !next_permutation(&mut rest) {
            break;
        }
    }
    Ok(best)
}

/// Finds the optimum of `kind` over all feasible schedules by exhaustive
/// enumeration. Refuses with [`Error::BudgetExceeded`] once more than
/// `budget` schedules would be evaluated.
pub fn exact_oracle(instance: &Instance, kind: ObjectiveKind, budget: u64) -> Result<OracleResult> {
    instance.validate()?;
    if kind == ObjectiveKind::Cost && instance.prices.is_none() {
        return Err(Error::MissingPrices);
    }
    let n = instance.job_count();
    let slack = instance.slack();
    if let Some(m) = slack.iter().position(|&s| s < 0) {
        return Err(Error::InfeasibleInstance(format!(
            "machine {} has negative slack",
            m + 1
        )));
    }
    let permutations = factorial(n).filter(|&p| p <= budget);
    if permutations.is_none() {
        return Err(Error::BudgetExceeded(format!(
            "{n}! permutations exceed the budget of {budget}"
        )));
    }
    let space = if instance.machines == 1 {
        let size = single_machine_space(n, slack[0] as usize);
        if size.is_none_or(|s| s > budget) {
            return Err(Error::BudgetExceeded(format!(
                "{n} jobs with slack {} give more than {budget} schedules",
                slack[0]
            )));
        }
        SearchSpace::PauseCompositions
    } else {
        SearchSpace::StartTimes
    };

    let counter = AtomicU64::new(0);
    let shards = par::map_range(n, |first| shard(instance, kind, budget, &counter, first));
    let mut best: Option<Candidate> = None;
    for result in shards {
        if let Some(c) = result? {
            if best.as_ref().is_none_or(|b| c.better_than(b)) {
                best = Some(c);
            }
        }
    }
    let enumerated = counter.load(AtomicOrdering::Relaxed);
    let best = best.ok_or_else(|| Error::InfeasibleInstance("no schedule fits the horizon".into()))?;
    let schedule = Schedule::from_starts(instance, best.sequence, best.start);
    let objective = evaluate_starts(instance, &schedule.start, schedule.completion, kind)?;
    Ok(OracleResult {
        schedule,
        objective,
        enumerated,
        space,
    })
}
