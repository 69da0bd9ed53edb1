#![allow(dead_code)]

use cas_pfsp::model::{Instance, Job, OperationSpec, Schedule};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random instance whose FCFS schedule leaves `extra` idle periods.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    machines: usize,
    jobs: usize,
    max_duration: usize,
    extra: usize,
) -> Instance {
    let min_duration = if machines == 1 { 1 } else { 0 };
    let jobs: Vec<Job> = (0..jobs)
        .map(|_| {
            let mut ops: Vec<OperationSpec> = (0..machines)
                .map(|_| {
                    let d = rng.random_range(min_duration..=max_duration);
                    OperationSpec::new((0..d).map(|_| rng.random_range(0.0..500.0)).collect())
                })
                .collect();
            if ops.iter().all(OperationSpec::is_dummy) {
                ops[0] = OperationSpec::new(vec![rng.random_range(0.0..500.0)]);
            }
            Job::new(ops)
        })
        .collect();
    let mut inst = Instance {
        label: "random".into(),
        machines,
        horizon: 1,
        period_hours: 0.25,
        jobs,
        carbon: vec![],
        onsite: vec![],
        prices: None,
    };
    let horizon = cas_pfsp::fcfs_schedule(&inst).completion.max(1) + extra;
    inst.horizon = horizon;
    inst.carbon = (0..horizon).map(|_| rng.random_range(10.0..820.0)).collect();
    inst.onsite = (0..horizon)
        .map(|_| {
            if rng.random_bool(0.5) {
                rng.random_range(0.0..600.0)
            } else {
                0.0
            }
        })
        .collect();
    inst.prices = Some((0..horizon).map(|_| rng.random_range(0.02..0.4)).collect());
    inst
}

/// Completion when everything from (`pos`, `machine`) on runs as early as
/// possible, given machine availability and the current job's ready time.
fn earliest_completion(
    inst: &Instance,
    sequence: &[usize],
    pos: usize,
    machine: usize,
    mut available: Vec<usize>,
    mut ready: usize,
) -> usize {
    let mut completion = 0;
    let mut m0 = machine;
    for &job in &sequence[pos..] {
        for (m, avail) in available.iter_mut().enumerate().skip(m0) {
            let tau = (*avail).max(ready);
            *avail = tau + inst.duration(job, m);
            ready = *avail;
            completion = completion.max(ready.saturating_sub(1));
        }
        m0 = 0;
        ready = 1;
    }
    completion
}

/// Feasible start periods for a random order that fits, each drawn uniformly
/// among the starts that still let the rest fit. Built without the genome
/// decoder.
pub fn random_feasible_schedule<R: Rng>(rng: &mut R, inst: &Instance) -> Schedule {
    let n = inst.job_count();
    let mut sequence: Vec<usize> = (0..n).collect();
    // With several machines some orders cannot fit even with no idle time.
    // Index order always does, so this terminates.
    loop {
        sequence.shuffle(rng);
        if earliest_completion(inst, &sequence, 0, 0, vec![1; inst.machines], 1) <= inst.horizon {
            break;
        }
    }
    let mut start = vec![vec![0; inst.machines]; n];
    let mut available = vec![1usize; inst.machines];
    for (pos, &job) in sequence.iter().enumerate() {
        let mut ready = 1;
        for m in 0..inst.machines {
            let earliest = available[m].max(ready);
            let d = inst.duration(job, m);
            let fits = |tau: usize| {
                let mut avail = available.clone();
                avail[m] = tau + d;
                let done = earliest_completion(inst, &sequence, pos, m + 1, avail, tau + d);
                done.max((tau + d).saturating_sub(1)) <= inst.horizon
            };
            let mut latest = earliest;
            while fits(latest + 1) {
                latest += 1;
            }
            let tau = rng.random_range(earliest..=latest);
            start[job][m] = tau;
            available[m] = tau + d;
            ready = available[m];
        }
    }
    Schedule::from_starts(inst, sequence, start)
}
