use std::path::PathBuf;

use anyhow::{Context, Result};
use cas_pfsp::milp::{build_milp, exact_oracle, write_lp, DEFAULT_BUDGET};
use cas_pfsp::model::{load_schedule, schedule_to_json};
use cas_pfsp::report::to_csv_string;
use cas_pfsp::{evaluate as eval, ObjectiveKind};
use clap::Args;
use serde::Serialize;

use crate::io;
use crate::{parse_objectives, Global};

#[derive(Args)]
pub struct OracleArgs {
    instance: PathBuf,
    #[arg(long, default_value = "carbon")]
    objective: ObjectiveKind,
    /// Maximum number of schedules to evaluate before refusing.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

pub fn oracle(global: &Global, args: OracleArgs) -> Result<()> {
    let inst = io::load(&args.instance)?;
    let r = exact_oracle(&inst, args.objective, args.budget)
        .with_context(|| format!("oracle refused {}", args.instance.display()))?;
    let path = global
        .out
        .join(format!("{}-{}.oracle.json", inst.label, args.objective));
    let doc = format!(
        "# enumerated={}\n# space={}\n# objective={} value={}\n{}\n",
        r.enumerated,
        r.space.as_str(),
        args.objective,
        r.objective.value,
        schedule_to_json(&r.schedule)
    );
    io::write(&path, doc)?;
    println!(
        "{} {}: optimum {} over {} schedules ({})",
        inst.label,
        args.objective,
        r.objective.value,
        r.enumerated,
        r.space.as_str()
    );
    Ok(())
}

#[derive(Args)]
pub struct ExportArgs {
    instance: PathBuf,
}

pub fn export(global: &Global, args: ExportArgs) -> Result<()> {
    let inst = io::load(&args.instance)?;
    let model = build_milp(&inst)?;
    let path = global.out.join(format!("{}.lp", inst.label));
    io::write(&path, write_lp(&model))?;
    let c = model.counts();
    println!(
        "{}: x={} s={} y={} tau={} p={} constraints={}",
        path.display(),
        c.x,
        c.s,
        c.y,
        c.tau,
        c.p,
        model.constraints.len()
    );
    Ok(())
}

#[derive(Args)]
pub struct EvaluateArgs {
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "carbon")]
    objective: Vec<ObjectiveKind>,
}

#[derive(Serialize)]
struct EvaluationRow<'a> {
    instance: &'a str,
    objective: ObjectiveKind,
    value: f64,
    penalty: f64,
    feasible: bool,
}

pub fn evaluate(global: &Global, args: EvaluateArgs) -> Result<()> {
    let inst = io::load(&args.instance)?;
    let schedule = load_schedule(&args.schedule)?;
    schedule
        .validate(&inst)
        .with_context(|| format!("schedule {} does not fit {}", args.schedule.display(), inst.label))?;
    let rows = parse_objectives(&args.objective)
        .into_iter()
        .map(|kind| {
            let o = eval(&inst, &schedule, kind)?;
            Ok(EvaluationRow {
                instance: &inst.label,
                objective: kind,
                value: o.value,
                penalty: o.penalty,
                feasible: o.feasible(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let csv = to_csv_string(&rows)?;
    io::write(&global.out.join("evaluation.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}
