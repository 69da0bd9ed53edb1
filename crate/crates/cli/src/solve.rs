use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use cas_pfsp::evaluator::{demand_profile, Objective};
use cas_pfsp::memetic::{history_csv, run as run_ma, MaParams, RunResult};
use cas_pfsp::report::{to_csv_string, RunRecord, RunStats, TimingRecord};
use cas_pfsp::rng::derive_seed;
use cas_pfsp::{par, Instance, ObjectiveKind, Schedule};
use clap::Args;
use serde::Serialize;

use crate::io;
use crate::{parse_objectives, Global, SearchArgs};

#[derive(Args)]
pub struct SolveArgs {
    /// Instance files or dataset directories.
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "carbon")]
    objective: Vec<ObjectiveKind>,
    /// Independent seeded runs per instance.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Write Gantt and power-profile documents for each best run.
    #[arg(long)]
    emit_plot: bool,
    #[command(flatten)]
    search: SearchArgs,
}

/// One memetic run and its outcome.
pub struct Outcome {
    pub instance: usize,
    pub objective: ObjectiveKind,
    pub run: usize,
    pub result: RunResult,
    pub seconds: f64,
}

impl Outcome {
    pub fn record(&self, instances: &[Instance]) -> RunRecord {
        let o: &Objective = &self.result.objective;
        RunRecord {
            instance: instances[self.instance].label.clone(),
            method: "ma".into(),
            objective: self.objective,
            run: self.run,
            value: o.value,
            penalty: o.penalty,
            feasible: o.feasible(),
        }
    }

    pub fn timing(&self, instances: &[Instance]) -> TimingRecord {
        TimingRecord {
            instance: instances[self.instance].label.clone(),
            method: "ma".into(),
            objective: self.objective,
            run: self.run,
            seconds: self.seconds,
        }
    }
}

/// Seed of run `run` on an instance: a function of the master seed, the
/// label and the objective only, so task order and thread count do not matter.
pub fn run_seed(master: u64, label: &str, objective: ObjectiveKind, run: usize) -> u64 {
    derive_seed(master, &[io::label_key(label), objective as u64, run as u64])
}

/// Every (instance, objective, run) combination, run across the worker pool.
pub fn run_all(
    global: &Global,
    search: &SearchArgs,
    instances: &[Instance],
    objectives: &[ObjectiveKind],
    runs: usize,
) -> Result<Vec<Outcome>> {
    let params: Vec<MaParams> = instances
        .iter()
        .map(|inst| io::params_for(global, search, inst))
        .collect::<Result<_>>()?;
    let time_limit = global.time_limit()?;
    let tasks: Vec<(usize, ObjectiveKind, usize)> = (0..instances.len())
        .flat_map(|i| objectives.iter().flat_map(move |&k| (0..runs).map(move |r| (i, k, r))))
        .collect();
    par::map_slice(&tasks, |&(i, objective, run)| -> Result<Outcome> {
        let inst = &instances[i];
        let p = params[i]
            .clone()
            .with_seed(run_seed(global.seed, &inst.label, objective, run));
        let started = Instant::now();
        let result = run_ma(inst, &p, objective, time_limit)
            .with_context(|| format!("{} ({objective}, run {run})", inst.label))?;
        Ok(Outcome {
            instance: i,
            objective,
            run,
            result,
            seconds: started.elapsed().as_secs_f64(),
        })
    })
    .into_iter()
    .collect()
}

/// Lowest fitness, earliest run on ties.
pub fn best_of(outcomes: &[Outcome], instance: usize, objective: ObjectiveKind) -> Option<&Outcome> {
    outcomes
        .iter()
        .filter(|o| o.instance == instance && o.objective == objective)
        .min_by(|a, b| {
            a.result
                .objective
                .fitness()
                .total_cmp(&b.result.objective.fitness())
                .then(a.run.cmp(&b.run))
        })
}

#[derive(Serialize)]
struct Bar {
    job: usize,
    machine: usize,
    start: usize,
    duration: usize,
}

#[derive(Serialize)]
struct Period {
    period: usize,
    demand: f64,
    onsite_used: f64,
    grid_draw: f64,
    carbon_intensity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    price: Option<f64>,
}

#[derive(Serialize)]
struct PlotDocument<'a> {
    instance: &'a str,
    objective: ObjectiveKind,
    run: usize,
    value: f64,
    penalty: f64,
    sequence: Vec<usize>,
    /// Operations per machine; jobs and machines are 1-based.
    gantt: Vec<Bar>,
    profile: Vec<Period>,
}

pub fn plot_json(inst: &Instance, schedule: &Schedule, outcome: &Outcome) -> String {
    let mut gantt = Vec::new();
    for m in 0..inst.machines {
        for &job in &schedule.sequence {
            gantt.push(Bar {
                job: job + 1,
                machine: m + 1,
                start: schedule.start[job][m],
                duration: inst.duration(job, m),
            });
        }
    }
    let p = demand_profile(inst, schedule);
    let profile = (0..inst.horizon)
        .map(|t| Period {
            period: t + 1,
            demand: p.demand[t],
            onsite_used: p.onsite_used[t],
            grid_draw: p.grid_draw[t],
            carbon_intensity: inst.carbon[t],
            price: inst.prices.as_ref().map(|pr| pr[t]),
        })
        .collect();
    let doc = PlotDocument {
        instance: &inst.label,
        objective: outcome.objective,
        run: outcome.run,
        value: outcome.result.objective.value,
        penalty: outcome.result.objective.penalty,
        sequence: schedule.sequence.iter().map(|j| j + 1).collect(),
        gantt,
        profile,
    };
    serde_json::to_string_pretty(&doc).expect("plot document serializes") + "\n"
}

pub fn run(global: &Global, args: SolveArgs) -> Result<()> {
    let instances = io::load_all(&args.instances)?;
    let objectives = parse_objectives(&args.objective);
    let outcomes = run_all(global, &args.search, &instances, &objectives, args.runs)?;

    let records: Vec<RunRecord> = outcomes.iter().map(|o| o.record(&instances)).collect();
    let timings: Vec<TimingRecord> = outcomes.iter().map(|o| o.timing(&instances)).collect();
    io::write(&global.out.join("results.csv"), to_csv_string(&records)?)?;
    io::write(&global.out.join("timings.csv"), to_csv_string(&timings)?)?;
    for o in &outcomes {
        let label = &instances[o.instance].label;
        let name = format!("{label}-{}-run{}.csv", o.objective, o.run);
        io::write(&global.out.join("history").join(name), history_csv(&o.result.history))?;
    }

    for (i, inst) in instances.iter().enumerate() {
        for &objective in &objectives {
            let Some(best) = best_of(&outcomes, i, objective) else {
                continue;
            };
            let fitness: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.instance == i && o.objective == objective)
                .map(|o| o.result.objective.fitness())
                .collect();
            let stats = RunStats::of(&fitness).expect("at least one run");
            println!(
                "{} {objective}: best {} mean {} cv {}",
                inst.label,
                stats.best,
                stats.mean,
                stats.cv.map_or("-".to_string(), |c| format!("{c:.4}"))
            );
            if args.emit_plot {
                let path = global
                    .out
                    .join("plots")
                    .join(format!("{}-{objective}.json", inst.label));
                io::write(&path, plot_json(inst, &best.result.schedule, best))?;
            }
        }
    }
    println!(
        "wrote {} runs to {}",
        records.len(),
        global.out.join("results.csv").display()
    );
    Ok(())
}
