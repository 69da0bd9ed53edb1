use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cas_pfsp::milp::{exact_oracle, DEFAULT_BUDGET};
use cas_pfsp::report::{
    diagonal_holds, gap_row, read_csv, relative_cross, summarize, to_csv_string, CrossRow, ExternalRecord, GapRow,
    RunRecord, RunStats, TimingRecord,
};
use cas_pfsp::{evaluate, par, Instance, ObjectiveKind};
use clap::{Args, ValueEnum};

use crate::solve::{best_of, run_all, Outcome};
use crate::{io, parse_objectives, Global, SearchArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ma,
    Oracle,
    External,
}

#[derive(Args)]
pub struct BenchmarkArgs {
    /// Dataset directories or instance files.
    #[arg(required = true)]
    datasets: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "ma")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "carbon")]
    objectives: Vec<ObjectiveKind>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// External solver results: `instance,objective,value,seconds`.
    #[arg(long)]
    external: Option<PathBuf>,
    /// Method the gaps are measured against; defaults to the oracle when it
    /// runs, else the external results.
    #[arg(long)]
    reference: Option<Method>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    search: SearchArgs,
}

struct Exact {
    instance: usize,
    objective: ObjectiveKind,
    value: f64,
    penalty: f64,
    seconds: f64,
}

fn run_oracles(instances: &[Instance], objectives: &[ObjectiveKind], budget: u64) -> Result<Vec<Exact>> {
    let tasks: Vec<(usize, ObjectiveKind)> = (0..instances.len())
        .flat_map(|i| objectives.iter().map(move |&k| (i, k)))
        .collect();
    par::map_slice(&tasks, |&(i, objective)| -> Result<Exact> {
        let started = Instant::now();
        let r = exact_oracle(&instances[i], objective, budget)
            .with_context(|| format!("oracle on {} ({objective})", instances[i].label))?;
        Ok(Exact {
            instance: i,
            objective,
            value: r.objective.value,
            penalty: r.objective.penalty,
            seconds: started.elapsed().as_secs_f64(),
        })
    })
    .into_iter()
    .collect()
}

/// Champion schedule per optimized objective, re-evaluated under every
/// objective the instance supports.
fn cross_rows(instances: &[Instance], objectives: &[ObjectiveKind], outcomes: &[Outcome]) -> Result<Vec<CrossRow>> {
    let mut rows = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for &optimized in objectives {
            let Some(best) = best_of(outcomes, i, optimized) else {
                continue;
            };
            let mut values = Vec::new();
            for kind in ObjectiveKind::ALL {
                if kind == ObjectiveKind::Cost && inst.prices.is_none() {
                    continue;
                }
                values.push((kind, evaluate(inst, &best.result.schedule, kind)?.fitness()));
            }
            rows.push(CrossRow::new(&inst.label, optimized, &values));
        }
    }
    Ok(rows)
}

pub fn run(global: &Global, args: BenchmarkArgs) -> Result<()> {
    let instances = io::load_all(&args.datasets)?;
    let objectives = parse_objectives(&args.objectives);
    let methods = &args.methods;
    let reference = args.reference.or(if methods.contains(&Method::Oracle) {
        Some(Method::Oracle)
    } else if args.external.is_some() {
        Some(Method::External)
    } else {
        None
    });
    if reference == Some(Method::Ma) {
        bail!("--reference must be oracle or external");
    }
    if (methods.contains(&Method::External) || reference == Some(Method::External)) && args.external.is_none() {
        bail!("the external method needs --external <results.csv>");
    }

    let mut records: Vec<RunRecord> = Vec::new();
    let mut timings: Vec<TimingRecord> = Vec::new();

    let outcomes = if methods.contains(&Method::Ma) {
        run_all(global, &args.search, &instances, &objectives, args.runs)?
    } else {
        Vec::new()
    };
    records.extend(outcomes.iter().map(|o| o.record(&instances)));
    timings.extend(outcomes.iter().map(|o| o.timing(&instances)));

    let needs_oracle = methods.contains(&Method::Oracle) || reference == Some(Method::Oracle);
    let exact = if needs_oracle {
        run_oracles(&instances, &objectives, args.budget)?
    } else {
        Vec::new()
    };
    for e in &exact {
        let label = instances[e.instance].label.clone();
        records.push(RunRecord {
            instance: label.clone(),
            method: "oracle".into(),
            objective: e.objective,
            run: 0,
            value: e.value,
            penalty: e.penalty,
            feasible: e.penalty == 0.0,
        });
        timings.push(TimingRecord {
            instance: label,
            method: "oracle".into(),
            objective: e.objective,
            run: 0,
            seconds: e.seconds,
        });
    }

    let external: Vec<ExternalRecord> = match &args.external {
        Some(path) => read_csv(File::open(path).with_context(|| format!("opening {}", path.display()))?)
            .with_context(|| format!("reading {}", path.display()))?,
        None => Vec::new(),
    };
    if methods.contains(&Method::External) {
        for e in &external {
            records.push(RunRecord {
                instance: e.instance.clone(),
                method: "external".into(),
                objective: e.objective,
                run: 0,
                value: e.value,
                penalty: 0.0,
                feasible: true,
            });
            if let Some(seconds) = e.seconds {
                timings.push(TimingRecord {
                    instance: e.instance.clone(),
                    method: "external".into(),
                    objective: e.objective,
                    run: 0,
                    seconds,
                });
            }
        }
    }

    // Gaps of the MA mean against the reference, per instance and objective.
    let mut gaps: Vec<GapRow> = Vec::new();
    if let (Some(reference), false) = (reference, outcomes.is_empty()) {
        let lookup: BTreeMap<(&str, ObjectiveKind), f64> = match reference {
            Method::Oracle => exact
                .iter()
                .map(|e| ((instances[e.instance].label.as_str(), e.objective), e.value + e.penalty))
                .collect(),
            _ => external
                .iter()
                .map(|e| ((e.instance.as_str(), e.objective), e.value))
                .collect(),
        };
        let name = if reference == Method::Oracle {
            "oracle"
        } else {
            "external"
        };
        for (i, inst) in instances.iter().enumerate() {
            for &objective in &objectives {
                let reference_value = *lookup
                    .get(&(inst.label.as_str(), objective))
                    .with_context(|| format!("reference results missing for {} ({objective})", inst.label))?;
                let fitness: Vec<f64> = outcomes
                    .iter()
                    .filter(|o| o.instance == i && o.objective == objective)
                    .map(|o| o.result.objective.fitness())
                    .collect();
                let stats = RunStats::of(&fitness).expect("runs exist");
                gaps.push(gap_row(&inst.label, objective, name, reference_value, &stats));
            }
        }
    }

    let cross = cross_rows(&instances, &objectives, &outcomes)?;
    let summary = summarize(&records);
    let out = &global.out;
    io::write(&out.join("runs.csv"), to_csv_string(&records)?)?;
    io::write(&out.join("timings.csv"), to_csv_string(&timings)?)?;
    io::write(&out.join("summary.csv"), to_csv_string(&summary)?)?;
    if !gaps.is_empty() {
        io::write(&out.join("gaps.csv"), to_csv_string(&gaps)?)?;
    }
    if !cross.is_empty() {
        io::write(&out.join("cross.csv"), to_csv_string(&cross)?)?;
        io::write(&out.join("cross_relative.csv"), to_csv_string(&relative_cross(&cross))?)?;
    }
    let text = summary_text(&instances, &objectives, &summary, &gaps, &cross, reference);
    io::write(&out.join("summary.txt"), &text)?;
    print!("{text}");
    if gaps.iter().any(|g| g.below_reference && g.reference == "oracle") {
        bail!("a memetic run beat the exact oracle; see gaps.csv");
    }
    Ok(())
}

fn summary_text(
    instances: &[Instance],
    objectives: &[ObjectiveKind],
    summary: &[cas_pfsp::report::SummaryRow],
    gaps: &[GapRow],
    cross: &[CrossRow],
    reference: Option<Method>,
) -> String {
    let mut s = String::new();
    writeln!(s, "instances: {}", instances.len()).unwrap();
    for &objective in objectives {
        let rows: Vec<_> = summary
            .iter()
            .filter(|r| r.objective == objective && r.method == "ma")
            .collect();
        if !rows.is_empty() {
            let cvs: Vec<f64> = rows.iter().filter_map(|r| r.cv).collect();
            let mean_cv = cvs.iter().sum::<f64>() / cvs.len().max(1) as f64;
            writeln!(
                s,
                "[{objective}] ma: mean CV {:.6} over {} instances",
                mean_cv,
                rows.len()
            )
            .unwrap();
        }
        let g: Vec<&GapRow> = gaps.iter().filter(|g| g.objective == objective).collect();
        if let (false, Some(reference)) = (g.is_empty(), reference) {
            let defined: Vec<f64> = g.iter().filter_map(|g| g.gap_percent).collect();
            let mean = defined.iter().sum::<f64>() / defined.len().max(1) as f64;
            let matched = g.iter().filter(|g| g.ma_best == g.reference_value).count();
            let below = g.iter().filter(|g| g.below_reference).count();
            writeln!(
                s,
                "[{objective}] gap vs {reference:?}: mean {mean:.4}%, best run matches reference on {matched}/{}, below reference on {below}",
                g.len()
            )
            .unwrap();
        }
        if cross.iter().any(|r| r.optimized == objective) {
            let labels: Vec<&str> = instances.iter().map(|i| i.label.as_str()).collect();
            let held = labels
                .iter()
                .filter(|l| diagonal_holds(cross, l, objective) == Some(true))
                .count();
            writeln!(
                s,
                "[{objective}] cross table: {objective}-min row holds the column minimum on {held}/{}",
                labels.len()
            )
            .unwrap();
        }
    }
    s
}
