//! Power-demand profiles and the three scheduling objectives.
//!
//! Demand is netted against on-site availability first; only the remaining
//! grid draw carries emissions and cost. Periods past the horizon are not
//! charged; lateness is priced by the penalty term instead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::carbon::emission_matrix;
use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};

/// Penalty per period of lateness past the horizon.
pub const LATENESS_PENALTY: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Carbon,
    Cost,
    Makespan,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [ObjectiveKind::Carbon, ObjectiveKind::Cost, ObjectiveKind::Makespan];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Carbon => "carbon",
            ObjectiveKind::Cost => "cost",
            ObjectiveKind::Makespan => "makespan",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "carbon" => Ok(ObjectiveKind::Carbon),
            "cost" => Ok(ObjectiveKind::Cost),
            "makespan" => Ok(ObjectiveKind::Makespan),
            other => Err(Error::Parse(format!("unknown objective `{other}`"))),
        }
    }
}

/// An objective value (grams, currency or periods) plus the lateness penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub value: f64,
    pub penalty: f64,
}

impl Objective {
    pub fn fitness(&self) -> f64 {
        self.value + self.penalty
    }

    pub fn feasible(&self) -> bool {
        self.penalty == 0.0
    }
}

pub fn lateness_penalty(completion: usize, horizon: usize) -> f64 {
    completion.saturating_sub(horizon) as f64 * LATENESS_PENALTY
}

/// Per-period power (kW) of a schedule over `1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandProfile {
    pub demand: Vec<f64>,
    pub onsite_used: Vec<f64>,
    pub grid_draw: Vec<f64>,
}

/// Sums the power of every running operation per period. Operations are
/// visited in job-index order so the result depends only on start periods.
pub(crate) fn demand_from_starts(instance: &Instance, start: &[Vec<usize>]) -> Vec<f64> {
    let horizon = instance.horizon;
    let mut demand = vec![0.0; horizon];
    for (job, row) in instance.jobs.iter().zip(start) {
        for (op, &tau) in job.operations.iter().zip(row) {
            for (k, p) in op.power.iter().enumerate() {
                let t = tau + k;
                if t > horizon {
                    break;
                }
                demand[t - 1] += p;
            }
        }
    }
    demand
}

pub fn demand_profile(instance: &Instance, schedule: &Schedule) -> DemandProfile {
    let demand = demand_from_starts(instance, &schedule.start);
    let onsite_used: Vec<f64> = demand.iter().zip(&instance.onsite).map(|(d, a)| d.min(*a)).collect();
    let grid_draw = demand.iter().zip(&onsite_used).map(|(d, y)| d - y).collect();
    DemandProfile {
        demand,
        onsite_used,
        grid_draw,
    }
}

/// Evaluates an objective straight from start periods and completion.
pub(crate) fn evaluate_starts(
    instance: &Instance,
    start: &[Vec<usize>],
    completion: usize,
    kind: ObjectiveKind,
) -> Result<Objective> {
    let penalty = lateness_penalty(completion, instance.horizon);
    let value = match kind {
        ObjectiveKind::Makespan => completion as f64,
        ObjectiveKind::Carbon => priced_grid_draw(instance, start, &instance.carbon),
        ObjectiveKind::Cost => {
            let prices = instance.prices.as_ref().ok_or(Error::MissingPrices)?;
            priced_grid_draw(instance, start, prices)
        }
    };
    Ok(Objective { kind, value, penalty })
}

fn priced_grid_draw(instance: &Instance, start: &[Vec<usize>], rate: &[f64]) -> f64 {
    let h = instance.period_hours;
    demand_from_starts(instance, start)
        .iter()
        .zip(&instance.onsite)
        .zip(rate)
        .map(|((d, a), r)| r * (d - d.min(*a)) * h)
        .sum()
}

pub fn evaluate(instance: &Instance, schedule: &Schedule, kind: ObjectiveKind) -> Result<Objective> {
    evaluate_starts(instance, &schedule.start, schedule.completion, kind)
}

/// Checks that the precomputed-emission form of the carbon objective,
/// `sum E[tau] - sum C*y*h`, agrees with direct evaluation (1e-6 relative).
pub fn objective_identity_check(instance: &Instance, schedule: &Schedule) -> bool {
    let Ok(matrix) = emission_matrix(instance) else {
        return false;
    };
    let mut grid_only = 0.0;
    for (i, row) in schedule.start.iter().enumerate() {
        for (m, &tau) in row.iter().enumerate() {
            match matrix.at(i, m, tau) {
                Some(e) => grid_only += e,
                None => return false,
            }
        }
    }
    let profile = demand_profile(instance, schedule);
    let saved: f64 = instance
        .carbon
        .iter()
        .zip(&profile.onsite_used)
        .map(|(c, y)| c * y * instance.period_hours)
        .sum();
    let decomposed = grid_only - saved;
    let Ok(direct) = evaluate(instance, schedule, ObjectiveKind::Carbon) else {
        return false;
    };
    let scale = decomposed.abs().max(direct.value.abs()).max(1.0);
    (decomposed - direct.value).abs() <= 1e-6 * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{chain, table2_instance};
    use crate::model::{earliest_starts, fcfs_schedule};

    fn asap(instance: &Instance, sequence: Vec<usize>) -> Schedule {
        let start = earliest_starts(instance, &sequence);
        Schedule::from_starts(instance, sequence, start)
    }

    #[test]
    fn table2_profile_first_period_and_total() {
        let inst = table2_instance(vec![300.0; 96]);
        let s = asap(&inst, vec![1, 3, 4, 0, 2]);
        let p = demand_profile(&inst, &s);
        assert_eq!(p.demand[0], 2000.0);
        assert_eq!(p.demand.iter().sum::<f64>(), 73_800.0);
        assert_eq!(p.demand[48..].iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn table2_constant_intensity_carbon() {
        let inst = table2_instance(vec![300.0; 96]);
        for seq in [vec![0, 1, 2, 3, 4], vec![1, 3, 4, 0, 2]] {
            let obj = evaluate(&inst, &asap(&inst, seq), ObjectiveKind::Carbon).unwrap();
            assert!((obj.value - 5_535_000.0).abs() < 1e-6);
            assert_eq!(obj.penalty, 0.0);
        }
    }

    #[test]
    fn all_dummy_schedule_has_zero_profile() {
        let inst = chain(&[0, 0], 4);
        let p = demand_profile(&inst, &fcfs_schedule(&inst));
        assert!(p.demand.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn ample_onsite_zeroes_grid_draw() {
        let mut inst = table2_instance(vec![300.0; 96]);
        inst.onsite = vec![5000.0; 96];
        let s = fcfs_schedule(&inst);
        let p = demand_profile(&inst, &s);
        assert!(p.grid_draw.iter().all(|&g| g == 0.0));
        assert_eq!(evaluate(&inst, &s, ObjectiveKind::Carbon).unwrap().value, 0.0);
    }

    #[test]
    fn lateness_penalty_formula() {
        assert_eq!(lateness_penalty(100, 96), 4e10);
        assert_eq!(lateness_penalty(96, 96), 0.0);
        assert_eq!(lateness_penalty(3, 96), 0.0);
    }

    #[test]
    fn overrun_is_penalized_not_charged() {
        let inst = chain(&[3], 4);
        let s = Schedule::from_starts(&inst, vec![0], vec![vec![3]]);
        assert_eq!(s.completion, 5);
        let obj = evaluate(&inst, &s, ObjectiveKind::Carbon).unwrap();
        assert_eq!(obj.penalty, 1e10);
        assert_eq!(obj.value, 2.0 * 100.0 * 0.25);
        let mk = evaluate(&inst, &s, ObjectiveKind::Makespan).unwrap();
        assert_eq!(mk.fitness(), 5.0 + 1e10);
    }

    #[test]
    fn cost_requires_prices() {
        let mut inst = chain(&[2], 4);
        let s = fcfs_schedule(&inst);
        assert!(matches!(
            evaluate(&inst, &s, ObjectiveKind::Cost),
            Err(Error::MissingPrices)
        ));
        inst.prices = Some(vec![0.1, 0.2, 0.3, 0.4]);
        let cost = evaluate(&inst, &s, ObjectiveKind::Cost).unwrap();
        assert!((cost.value - (0.1 + 0.2) * 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_holds_without_onsite() {
        let inst = table2_instance((1..=96).map(|t| 100.0 + t as f64).collect());
        assert!(objective_identity_check(&inst, &fcfs_schedule(&inst)));
    }

    #[test]
    fn identity_single_forced_placement() {
        let mut inst = chain(&[4], 4);
        inst.onsite = vec![0.5, 2.0, 0.0, 1.0];
        inst.carbon = vec![10.0, 20.0, 30.0, 40.0];
        assert!(objective_identity_check(&inst, &fcfs_schedule(&inst)));
    }

    #[test]
    fn objective_kind_parses() {
        assert_eq!("Carbon".parse::<ObjectiveKind>().unwrap(), ObjectiveKind::Carbon);
        assert!("speed".parse::<ObjectiveKind>().is_err());
    }
}
