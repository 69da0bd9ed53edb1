//! Benchmark statistics: per-run records, run aggregates, percentage gaps
//! against a reference method, and the cross-objective table.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::ObjectiveKind;

/// One solver run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub method: String,
    pub objective: ObjectiveKind,
    pub run: usize,
    pub value: f64,
    pub penalty: f64,
    pub feasible: bool,
}

impl RunRecord {
    pub fn fitness(&self) -> f64 {
        self.value + self.penalty
    }
}

/// Wall time of one run, kept apart from results so those stay reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub instance: String,
    pub method: String,
    pub objective: ObjectiveKind,
    pub run: usize,
    pub seconds: f64,
}

/// Reference objective values from an external solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalRecord {
    pub instance: String,
    pub objective: ObjectiveKind,
    pub value: f64,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    /// `std / mean`; absent when the mean is 0.
    pub cv: Option<f64>,
    pub best: f64,
}

impl RunStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let best = values.iter().copied().fold(f64::INFINITY, f64::min);
        let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Identical runs keep their exact value rather than a rounded mean.
        let mean = if best == worst {
            best
        } else {
            values.iter().sum::<f64>() / n as f64
        };
        let std = if n > 1 && best != worst {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let cv = (mean != 0.0).then(|| std / mean.abs());
        Some(Self {
            runs: n,
            mean,
            std,
            cv,
            best,
        })
    }
}

/// Percentage gap `(reference - candidate) / reference * 100`. Positive when
/// the candidate is better. Undefined unless the reference is positive.
pub fn percentage_gap(reference: f64, candidate: f64) -> Option<f64> {
    (reference > 0.0).then(|| (reference - candidate) / reference * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub method: String,
    pub objective: ObjectiveKind,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    pub cv: Option<f64>,
    pub best: f64,
}

/// Aggregates fitness per `(instance, method, objective)`, keeping the order
/// of first appearance.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, &str, ObjectiveKind)> = Vec::new();
    for r in records {
        let key = (r.instance.as_str(), r.method.as_str(), r.objective);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(instance, method, objective)| {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.instance == instance && r.method == method && r.objective == objective)
                .map(RunRecord::fitness)
                .collect();
            let s = RunStats::of(&values).expect("key came from a record");
            SummaryRow {
                instance: instance.to_string(),
                method: method.to_string(),
                objective,
                runs: s.runs,
                mean: s.mean,
                std: s.std,
                cv: s.cv,
                best: s.best,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub instance: String,
    pub objective: ObjectiveKind,
    pub reference: String,
    pub reference_value: f64,
    pub ma_mean: f64,
    pub ma_best: f64,
    pub gap_percent: Option<f64>,
    /// Some run beat a reference that is supposed to be optimal.
    pub below_reference: bool,
}

/// Gap of the MA mean against the reference. `below_reference` is only
/// meaningful when the reference is exact.
pub fn gap_row(
    instance: &str,
    objective: ObjectiveKind,
    reference: &str,
    reference_value: f64,
    ma: &RunStats,
) -> GapRow {
    GapRow {
        instance: instance.to_string(),
        objective,
        reference: reference.to_string(),
        reference_value,
        ma_mean: ma.mean,
        ma_best: ma.best,
        gap_percent: percentage_gap(reference_value, ma.mean),
        below_reference: ma.best < reference_value,
    }
}

/// One row of the cross table: the schedule found when optimizing
/// `optimized`, evaluated under every objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossRow {
    pub instance: String,
    pub optimized: ObjectiveKind,
    pub carbon: Option<f64>,
    pub cost: Option<f64>,
    pub makespan: Option<f64>,
}

impl CrossRow {
    pub fn get(&self, kind: ObjectiveKind) -> Option<f64> {
        match kind {
            ObjectiveKind::Carbon => self.carbon,
            ObjectiveKind::Cost => self.cost,
            ObjectiveKind::Makespan => self.makespan,
        }
    }

    fn slot(&mut self, kind: ObjectiveKind) -> &mut Option<f64> {
        match kind {
            ObjectiveKind::Carbon => &mut self.carbon,
            ObjectiveKind::Cost => &mut self.cost,
            ObjectiveKind::Makespan => &mut self.makespan,
        }
    }

    pub fn new(instance: &str, optimized: ObjectiveKind, values: &[(ObjectiveKind, f64)]) -> Self {
        let mut row = Self {
            instance: instance.to_string(),
            optimized,
            carbon: None,
            cost: None,
            makespan: None,
        };
        for &(k, v) in values {
            *row.slot(k) = Some(v);
        }
        row
    }
}

/// Each value as a percentage above its column minimum within the instance.
pub fn relative_cross(rows: &[CrossRow]) -> Vec<CrossRow> {
    rows.iter()
        .map(|row| {
            let mut rel = row.clone();
            for kind in ObjectiveKind::ALL {
                let column_min = rows
                    .iter()
                    .filter(|r| r.instance == row.instance)
                    .filter_map(|r| r.get(kind))
                    .fold(f64::INFINITY, f64::min);
                *rel.slot(kind) = row.get(kind).map(|v| {
                    if column_min > 0.0 {
                        (v - column_min) / column_min * 100.0
                    } else if v == column_min {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                });
            }
            rel
        })
        .collect()
}

/// True when the row optimizing `kind` holds the minimum of column `kind`
/// for its instance.
pub fn diagonal_holds(rows: &[CrossRow], instance: &str, kind: ObjectiveKind) -> Option<bool> {
    let own = rows
        .iter()
        .find(|r| r.instance == instance && r.optimized == kind)?
        .get(kind)?;
    Some(
        rows.iter()
            .filter(|r| r.instance == instance)
            .filter_map(|r| r.get(kind))
            .all(|v| own <= v),
    )
}

pub fn write_csv<T: Serialize, W: Write>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Csv(e.to_string()))
}

pub fn read_csv<T: DeserializeOwned, R: Read>(reader: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::Csv(format!("row {}: {e}", i + 2))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(instance: &str, run: usize, value: f64) -> RunRecord {
        RunRecord {
            instance: instance.into(),
            method: "ma".into(),
            objective: ObjectiveKind::Carbon,
            run,
            value,
            penalty: 0.0,
            feasible: true,
        }
    }

    #[test]
    fn gap_formula() {
        assert_eq!(percentage_gap(100.0, 90.0), Some(10.0));
        assert_eq!(percentage_gap(100.0, 110.0), Some(-10.0));
        assert_eq!(percentage_gap(0.0, 1.0), None);
    }

    #[test]
    fn sample_statistics() {
        let s = RunStats::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert!((s.cv.unwrap() - s.std / 5.0).abs() < 1e-15);
        assert_eq!(s.best, 2.0);
        let one = RunStats::of(&[3.0]).unwrap();
        assert_eq!((one.std, one.cv), (0.0, Some(0.0)));
        assert_eq!(RunStats::of(&[0.0, 0.0]).unwrap().cv, None);
    }

    #[test]
    fn summary_round_trips_through_csv() {
        let records = vec![record("a", 0, 1.5), record("a", 1, 2.25), record("b", 0, 0.1 + 0.2)];
        let text = to_csv_string(&records).unwrap();
        assert!(text.starts_with("instance,method,objective,run,value,penalty,feasible\n"));
        let back: Vec<RunRecord> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, records);
        let summary = summarize(&back);
        assert_eq!(summary.len(), 2);
        assert_eq!(summary[0].mean, 1.875);
        let again: Vec<SummaryRow> = read_csv(to_csv_string(&summary).unwrap().as_bytes()).unwrap();
        assert_eq!(again, summary);
    }

    #[test]
    fn cross_table_diagonal() {
        use ObjectiveKind::*;
        let rows = vec![
            CrossRow::new("i", Carbon, &[(Carbon, 100.0), (Cost, 12.0), (Makespan, 90.0)]),
            CrossRow::new("i", Cost, &[(Carbon, 120.0), (Cost, 10.0), (Makespan, 80.0)]),
            CrossRow::new("i", Makespan, &[(Carbon, 150.0), (Cost, 15.0), (Makespan, 40.0)]),
        ];
        for kind in ObjectiveKind::ALL {
            assert_eq!(diagonal_holds(&rows, "i", kind), Some(true));
        }
        let rel = relative_cross(&rows);
        assert_eq!(rel[0].carbon, Some(0.0));
        assert_eq!(rel[1].carbon, Some(20.0));
        assert_eq!(rel[2].makespan, Some(0.0));
        assert_eq!(rel[0].makespan, Some(125.0));
    }

    #[test]
    fn flags_runs_below_exact_reference() {
        let s = RunStats::of(&[9.0, 10.0]).unwrap();
        assert!(gap_row("i", ObjectiveKind::Carbon, "oracle", 10.0, &s).below_reference);
        let t = RunStats::of(&[10.0, 11.0]).unwrap();
        let row = gap_row("i", ObjectiveKind::Carbon, "oracle", 10.0, &t);
        assert!(!row.below_reference);
        assert_eq!(row.gap_percent, Some(-5.0));
    }
}
