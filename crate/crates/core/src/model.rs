//! Domain types shared by every module: operations, jobs, instances and
//! decoded schedules, plus the JSON instance and schedule documents.
//!
//! Periods are 1-based (`1..=horizon`). Job and machine indices are 0-based
//! positions into [`Instance::jobs`] and [`Job::operations`].

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default period length: a quarter hour.
pub const DEFAULT_PERIOD_HOURS: f64 = 0.25;

/// One processing step of a job on one machine.
///
/// A zero `duration` marks a dummy operation: the job skips that machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationSpec {
    pub duration: usize,
    /// Power draw in kW for each period the operation runs.
    pub power: Vec<f64>,
}

impl OperationSpec {
    pub fn new(power: Vec<f64>) -> Self {
        Self {
            duration: power.len(),
            power,
        }
    }

    pub fn dummy() -> Self {
        Self {
            duration: 0,
            power: Vec::new(),
        }
    }

    pub fn is_dummy(&self) -> bool {
        self.duration == 0
    }

    /// Sum of per-period power, in kW-periods.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// A job: one operation per machine, in machine order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Job {
    pub operations: Vec<OperationSpec>,
}

impl Job {
    pub fn new(operations: Vec<OperationSpec>) -> Self {
        Self { operations }
    }

    pub fn durations(&self) -> impl Iterator<Item = usize> + '_ {
        self.operations.iter().map(|op| op.duration)
    }
}

/// A scheduling problem: jobs plus the per-period energy data of the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub label: String,
    pub machines: usize,
    pub horizon: usize,
    pub period_hours: f64,
    pub jobs: Vec<Job>,
    /// Grid carbon intensity per period, gCO2eq/kWh.
    pub carbon: Vec<f64>,
    /// On-site renewable power available per period, kW.
    pub onsite: Vec<f64>,
    /// Energy price per period, currency/kWh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prices: Option<Vec<f64>>,
}

impl Instance {
    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    pub fn duration(&self, job: usize, machine: usize) -> usize {
        self.jobs[job].operations[machine].duration
    }

    /// Total processing time on `machine`.
    pub fn machine_load(&self, machine: usize) -> usize {
        self.jobs.iter().map(|job| job.operations[machine].duration).sum()
    }

    /// Idle budget per machine: horizon minus total processing time.
    /// Negative when the machine is overloaded.
    pub fn slack(&self) -> Vec<i64> {
        (0..self.machines)
            .map(|m| self.horizon as i64 - self.machine_load(m) as i64)
            .collect()
    }

    /// Total number of operations, dummies included.
    pub fn operation_count(&self) -> usize {
        self.jobs.len() * self.machines
    }

    /// Sum of every operation's power, in kW-periods.
    pub fn total_power(&self) -> f64 {
        self.jobs
            .iter()
            .flat_map(|job| job.operations.iter())
            .map(OperationSpec::total_power)
            .sum()
    }

    /// First feasible start period of operation `(job, machine)`.
    pub fn earliest_start(&self, job: usize, machine: usize) -> usize {
        1 + self.jobs[job].operations[..machine]
            .iter()
            .map(|op| op.duration)
            .sum::<usize>()
    }

    /// Last feasible start period of operation `(job, machine)`; `None` when
    /// the remaining operations of the job are longer than the horizon.
    pub fn latest_start(&self, job: usize, machine: usize) -> Option<usize> {
        let remaining: usize = self.jobs[job].operations[machine..].iter().map(|op| op.duration).sum();
        (self.horizon + 1).checked_sub(remaining)
    }

    /// Checks every structural invariant, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        if self.machines == 0 {
            return Err(Error::validation("machines", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::validation("horizon", "must be at least 1"));
        }
        if !(self.period_hours.is_finite() && self.period_hours > 0.0) {
            return Err(Error::validation("period_hours", "must be a positive number"));
        }
        if self.jobs.is_empty() {
            return Err(Error::validation("jobs", "at least one job is required"));
        }
        for (i, job) in self.jobs.iter().enumerate() {
            if job.operations.len() != self.machines {
                return Err(Error::validation(
                    format!("jobs[{i}]"),
                    format!("has {} operations, expected {}", job.operations.len(), self.machines),
                ));
            }
            for (m, op) in job.operations.iter().enumerate() {
                if op.power.len() != op.duration {
                    return Err(Error::validation(
                        format!("jobs[{i}][{m}].power"),
                        format!("length {} does not match duration {}", op.power.len(), op.duration),
                    ));
                }
                if let Some(k) = op.power.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::validation(
                        format!("jobs[{i}][{m}].power[{k}]"),
                        "must be a finite non-negative number",
                    ));
                }
            }
        }
        check_series("carbon", &self.carbon, self.horizon, true)?;
        check_series("onsite", &self.onsite, self.horizon, true)?;
        if let Some(prices) = &self.prices {
            check_series("prices", prices, self.horizon, false)?;
        }
        Ok(())
    }
}

fn check_series(field: &str, values: &[f64], horizon: usize, non_negative: bool) -> Result<()> {
    if values.len() != horizon {
        return Err(Error::validation(
            field,
            format!("length {} does not match horizon {horizon}", values.len()),
        ));
    }
    if let Some(t) = values.iter().position(|v| !v.is_finite() || (non_negative && *v < 0.0)) {
        let reason = if non_negative {
            "must be a finite non-negative number"
        } else {
            "must be a finite number"
        };
        return Err(Error::validation(format!("{field}[{t}]"), reason));
    }
    Ok(())
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let instance: Instance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    instance.validate()?;
    Ok(instance)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text)
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(instance).expect("instance serializes")
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(instance)).map_err(|e| Error::io(path, e))
}

/// A decoded permutation schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Job indices in processing order, shared by all machines.
    pub sequence: Vec<usize>,
    /// `start[job][machine]`: 1-based start period.
    pub start: Vec<Vec<usize>>,
    /// Last occupied period over all operations.
    pub completion: usize,
    pub feasible: bool,
}

impl Schedule {
    /// Builds a schedule from start periods, deriving completion and feasibility.
    pub fn from_starts(instance: &Instance, sequence: Vec<usize>, start: Vec<Vec<usize>>) -> Self {
        let completion = completion_of(instance, &start);
        Self {
            sequence,
            start,
            feasible: completion <= instance.horizon,
            completion,
        }
    }

    /// Checks shape, permutation property, precedence and machine non-overlap.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        let n = instance.job_count();
        let mut seen = vec![false; n];
        if self.sequence.len() != n {
            return Err(Error::validation("sequence", format!("expected {n} jobs")));
        }
        for &job in &self.sequence {
            if job >= n || std::mem::replace(&mut seen[job], true) {
                return Err(Error::validation("sequence", "not a permutation of the jobs"));
            }
        }
        if self.start.len() != n || self.start.iter().any(|row| row.len() != instance.machines) {
            return Err(Error::validation("start", "shape does not match jobs x machines"));
        }
        for (i, row) in self.start.iter().enumerate() {
            for m in 0..instance.machines {
                if row[m] == 0 {
                    return Err(Error::validation(format!("start[{i}][{m}]"), "periods are 1-based"));
                }
                if m + 1 < instance.machines && row[m + 1] < row[m] + instance.duration(i, m) {
                    return Err(Error::validation(
                        format!("start[{i}][{}]", m + 1),
                        "starts before the previous operation of the job completes",
                    ));
                }
            }
        }
        for m in 0..instance.machines {
            for pair in self.sequence.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                if self.start[b][m] < self.start[a][m] + instance.duration(a, m) {
                    return Err(Error::validation(
                        format!("start[{b}][{m}]"),
                        "overlaps the preceding job on the machine",
                    ));
                }
            }
        }
        let completion = completion_of(instance, &self.start);
        if completion != self.completion || self.feasible != (completion <= instance.horizon) {
            return Err(Error::validation("completion", "inconsistent with start periods"));
        }
        Ok(())
    }
}

/// Last occupied period: `max(start + duration - 1)` over all operations.
pub fn completion_of(instance: &Instance, start: &[Vec<usize>]) -> usize {
    start
        .iter()
        .zip(&instance.jobs)
        .flat_map(|(row, job)| {
            row.iter()
                .zip(&job.operations)
                .map(|(&s, op)| (s + op.duration).saturating_sub(1))
        })
        .max()
        .unwrap_or(0)
}

pub fn parse_schedule(text: &str) -> Result<Schedule> {
    // Oracle output carries `#` provenance lines ahead of the document.
    let body: String = text
        .lines()
        .filter(|line| !line.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    serde_json::from_str(&body).map_err(|e| Error::Parse(e.to_string()))
}

pub fn load_schedule(path: impl AsRef<Path>) -> Result<Schedule> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_schedule(&text)
}

pub fn schedule_to_json(schedule: &Schedule) -> String {
    serde_json::to_string_pretty(schedule).expect("schedule serializes")
}

/// Jobs in index order, each operation as early as machine availability and
/// precedence allow.
pub fn fcfs_schedule(instance: &Instance) -> Schedule {
    let sequence: Vec<usize> = (0..instance.job_count()).collect();
    let start = earliest_starts(instance, &sequence);
    Schedule::from_starts(instance, sequence, start)
}

/// Semi-active start periods for a fixed job sequence (no planned idle).
pub fn earliest_starts(instance: &Instance, sequence: &[usize]) -> Vec<Vec<usize>> {
    let mut start = vec![vec![0; instance.machines]; instance.job_count()];
    let mut available = vec![1usize; instance.machines];
    for &job in sequence {
        let mut ready = 1;
        for m in 0..instance.machines {
            let tau = available[m].max(ready);
            let d = instance.duration(job, m);
            start[job][m] = tau;
            available[m] = tau + d;
            ready = tau + d;
        }
    }
    start
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn fcfs_single_machine_table2() {
        let inst = table2_instance(vec![300.0; 96]);
        let s = fcfs_schedule(&inst);
        let starts: Vec<usize> = s.start.iter().map(|r| r[0]).collect();
        assert_eq!(starts, vec![1, 12, 20, 33, 41]);
        assert_eq!(s.completion, 48);
        assert!(s.feasible);
        assert_eq!(inst.slack(), vec![48]);
        s.validate(&inst).unwrap();
    }

    #[test]
    fn fcfs_single_job_single_machine() {
        let s = fcfs_schedule(&chain(&[5], 10));
        assert_eq!(s.start, vec![vec![1]]);
        assert_eq!(s.completion, 5);
    }

    #[test]
    fn fcfs_chains_precedence() {
        let s = fcfs_schedule(&chain(&[3, 4], 10));
        assert_eq!(s.start, vec![vec![1, 4]]);
        assert_eq!(s.completion, 7);
    }

    #[test]
    fn fcfs_can_be_infeasible() {
        let s = fcfs_schedule(&chain(&[3, 4], 6));
        assert_eq!(s.completion, 7);
        assert!(!s.feasible);
    }

    #[test]
    fn dummy_operations_have_zero_width() {
        let mut inst = chain(&[3, 0, 2], 10);
        inst.jobs.push(Job::new(vec![
            OperationSpec::new(vec![1.0; 2]),
            OperationSpec::new(vec![1.0; 1]),
            OperationSpec::dummy(),
        ]));
        let s = fcfs_schedule(&inst);
        assert_eq!(s.start[0], vec![1, 4, 4]);
        assert_eq!(s.start[1], vec![4, 6, 7]);
        assert_eq!(s.completion, 6);
        s.validate(&inst).unwrap();
    }

    #[test]
    fn table2_fixture_serializes_durations() {
        let inst = table2_instance(vec![300.0; 96]);
        let value: serde_json::Value = serde_json::from_str(&instance_to_json(&inst)).unwrap();
        let durations: Vec<u64> = value["jobs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|job| job[0]["duration"].as_u64().unwrap())
            .collect();
        assert_eq!(durations, vec![11, 8, 13, 8, 8]);
        assert!(value.get("prices").is_none());
    }

    #[test]
    fn load_table2_counts_jobs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t2.json");
        save_instance(&table2_instance(vec![300.0; 96]), &path).unwrap();
        let inst = load_instance(&path).unwrap();
        assert_eq!(inst.job_count(), 5);
        assert_eq!(inst.machine_load(0), 48);
    }

    #[test]
    fn short_carbon_series_is_rejected() {
        let mut inst = chain(&[2], 4);
        inst.carbon.pop();
        let err = parse_instance(&instance_to_json(&inst)).unwrap_err();
        assert!(
            matches!(err, Error::Validation { ref field, .. } if field == "carbon"),
            "{err}"
        );
    }

    #[test]
    fn negative_onsite_is_rejected() {
        let mut inst = chain(&[2], 4);
        inst.onsite[2] = -1.0;
        let err = inst.validate().unwrap_err();
        assert!(err.to_string().contains("onsite[2]"), "{err}");
    }

    #[test]
    fn power_length_mismatch_is_rejected() {
        let mut inst = chain(&[2], 4);
        inst.jobs[0].operations[0].duration = 3;
        let err = inst.validate().unwrap_err();
        assert!(err.to_string().contains("jobs[0][0].power"), "{err}");
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(parse_instance("{ not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn save_to_missing_directory_fails() {
        let inst = chain(&[2], 4);
        let err = save_instance(&inst, "/nonexistent-dir/x/inst.json").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn schedule_document_skips_provenance_header() {
        let inst = chain(&[3, 4], 10);
        let s = fcfs_schedule(&inst);
        let text = format!("# enumerated=12\n{}", schedule_to_json(&s));
        assert_eq!(parse_schedule(&text).unwrap(), s);
    }

    #[test]
    fn overlapping_schedule_fails_validation() {
        let inst = table2_instance(vec![1.0; 96]);
        let mut s = fcfs_schedule(&inst);
        s.start[1][0] = 5;
        assert!(s.validate(&inst).is_err());
    }

    #[test]
    fn windows_match_preprocessing_formulas() {
        let inst = chain(&[3, 4], 10);
        assert_eq!(inst.earliest_start(0, 1), 4);
        assert_eq!(inst.latest_start(0, 0), Some(4));
        assert_eq!(inst.latest_start(0, 1), Some(7));
        assert_eq!(chain(&[6, 6], 10).latest_start(0, 0), None);
    }
}
