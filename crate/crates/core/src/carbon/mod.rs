//! Grid carbon intensity from generation-mix data, and the grid-only
//! emission matrix of every operation over its feasible start window.

mod ingest;

pub use ingest::{
    grid_mix_from_reader, ingest_grid_mix, ingest_onsite, ingest_prices, load_column_map, onsite_from_reader,
    prices_from_reader, ColumnMap, GridMixIngest, SeriesIngest, DEFAULT_ONSITE_SCALE,
};

use crate::error::{Error, Result};
use crate::model::Instance;

/// Lifecycle emission factor range of one supply technology, gCO2eq/kWh.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionFactor {
    pub name: String,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// Which column of the factor table to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorLevel {
    Min,
    #[default]
    Median,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionFactorTable {
    entries: Vec<EmissionFactor>,
}

const LIFECYCLE_FACTORS: [(&str, f64, f64, f64); 10] = [
    ("coal", 740.0, 820.0, 910.0),
    ("gas-cc", 410.0, 490.0, 650.0),
    ("biomass-cofiring", 620.0, 740.0, 890.0),
    ("biomass-dedicated", 130.0, 230.0, 420.0),
    ("geothermal", 6.0, 38.0, 79.0),
    ("hydro", 1.0, 24.0, 2200.0),
    ("nuclear", 3.7, 12.0, 110.0),
    ("solar-pv", 26.0, 41.0, 60.0),
    ("wind-onshore", 7.0, 11.0, 56.0),
    ("wind-offshore", 8.0, 12.0, 35.0),
];

impl Default for EmissionFactorTable {
    fn default() -> Self {
        Self {
            entries: LIFECYCLE_FACTORS
                .iter()
                .map(|&(name, min, median, max)| EmissionFactor {
                    name: name.to_string(),
                    min,
                    median,
                    max,
                })
                .collect(),
        }
    }
}

impl EmissionFactorTable {
    /// Builds a table from explicit entries; every factor must be positive.
    pub fn new(entries: Vec<EmissionFactor>) -> Result<Self> {
        for e in &entries {
            if !(e.min > 0.0 && e.median > 0.0 && e.max > 0.0) {
                return Err(Error::validation(
                    format!("factor `{}`", e.name),
                    "emission factors must be positive",
                ));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[EmissionFactor] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn get(&self, name: &str) -> Option<&EmissionFactor> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Median factor of `name`.
    pub fn factor(&self, name: &str) -> Option<f64> {
        self.factor_at(name, FactorLevel::Median)
    }

    pub fn factor_at(&self, name: &str, level: FactorLevel) -> Option<f64> {
        self.get(name).map(|e| match level {
            FactorLevel::Min => e.min,
            FactorLevel::Median => e.median,
            FactorLevel::Max => e.max,
        })
    }
}

/// Per-period energy contribution of each source.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationMixSeries {
    sources: Vec<String>,
    /// `quantities[t][g]`.
    quantities: Vec<Vec<f64>>,
}

impl GenerationMixSeries {
    pub fn new(sources: Vec<String>, quantities: Vec<Vec<f64>>) -> Result<Self> {
        for (t, row) in quantities.iter().enumerate() {
            if row.len() != sources.len() {
                return Err(Error::validation(
                    format!("quantities[{t}]"),
                    format!("expected {} sources, found {}", sources.len(), row.len()),
                ));
            }
            if let Some(g) = row.iter().position(|q| !(q.is_finite() && *q >= 0.0)) {
                return Err(Error::validation(
                    format!("quantities[{t}][{g}]"),
                    "must be a finite non-negative number",
                ));
            }
            if row.iter().sum::<f64>() <= 0.0 {
                return Err(Error::ZeroGeneration { period: t });
            }
        }
        Ok(Self { sources, quantities })
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn quantities(&self) -> &[Vec<f64>] {
        &self.quantities
    }

    pub fn period_count(&self) -> usize {
        self.quantities.len()
    }

    /// Share of every source in period `t` (0-based); sums to one.
    pub fn shares(&self, t: usize) -> Vec<f64> {
        let row = &self.quantities[t];
        let total: f64 = row.iter().sum();
        row.iter().map(|q| q / total).collect()
    }
}

/// Carbon intensity per period: the share-weighted mean of median factors.
pub fn carbon_intensity(mix: &GenerationMixSeries, factors: &EmissionFactorTable) -> Result<Vec<f64>> {
    carbon_intensity_at(mix, factors, FactorLevel::Median)
}

pub fn carbon_intensity_at(
    mix: &GenerationMixSeries,
    factors: &EmissionFactorTable,
    level: FactorLevel,
) -> Result<Vec<f64>> {
    let theta = mix
        .sources()
        .iter()
        .map(|s| {
            factors
                .factor_at(s, level)
                .ok_or_else(|| Error::UnknownSource(s.clone()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((0..mix.period_count())
        .map(|t| mix.shares(t).iter().zip(&theta).map(|(w, th)| w * th).sum())
        .collect())
}

/// Grid-only emissions (grams) of one operation for each start in its window.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionWindow {
    /// First feasible start period.
    pub first: usize,
    /// `values[k]` is the emission of starting at `first + k`.
    pub values: Vec<f64>,
}

impl EmissionWindow {
    pub fn last(&self) -> usize {
        self.first + self.values.len() - 1
    }

    pub fn at(&self, start: usize) -> Option<f64> {
        start.checked_sub(self.first).and_then(|k| self.values.get(k)).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMatrix {
    /// `windows[job][machine]`.
    pub windows: Vec<Vec<EmissionWindow>>,
}

impl EmissionMatrix {
    pub fn window(&self, job: usize, machine: usize) -> &EmissionWindow {
        &self.windows[job][machine]
    }

    pub fn at(&self, job: usize, machine: usize, start: usize) -> Option<f64> {
        self.windows[job][machine].at(start)
    }
}

/// Emission of running an operation from `start` on grid power only.
pub(crate) fn grid_only_emission(instance: &Instance, power: &[f64], start: usize) -> f64 {
    let h = instance.period_hours;
    power
        .iter()
        .zip(&instance.carbon[start - 1..])
        .map(|(p, c)| p * h * c)
        .sum()
}

/// Precomputes the grid-only emission of every operation at every feasible start.
pub fn emission_matrix(instance: &Instance) -> Result<EmissionMatrix> {
    let mut windows = Vec::with_capacity(instance.job_count());
    for (i, job) in instance.jobs.iter().enumerate() {
        let mut row = Vec::with_capacity(instance.machines);
        for (m, op) in job.operations.iter().enumerate() {
            let first = instance.earliest_start(i, m);
            let last = instance.latest_start(i, m).filter(|&f| f >= first).ok_or_else(|| {
                Error::InfeasibleInstance(format!("job {i} does not fit in the horizon from machine {m}"))
            })?;
            let values = (first..=last)
                .map(|t| grid_only_emission(instance, &op.power, t))
                .collect();
            row.push(EmissionWindow { first, values });
        }
        windows.push(row);
    }
    Ok(EmissionMatrix { windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::chain;
    use crate::model::{Job, OperationSpec};

    fn mix(sources: &[&str], rows: Vec<Vec<f64>>) -> GenerationMixSeries {
        GenerationMixSeries::new(sources.iter().map(|s| s.to_string()).collect(), rows).unwrap()
    }

    #[test]
    fn default_table_has_ten_median_factors() {
        let t = EmissionFactorTable::default();
        assert_eq!(t.len(), 10);
        assert_eq!(t.factor("coal"), Some(820.0));
        assert_eq!(t.factor("nuclear"), Some(12.0));
        assert_eq!(t.factor("wind-onshore"), Some(11.0));
        assert_eq!(t.factor_at("hydro", FactorLevel::Max), Some(2200.0));
    }

    #[test]
    fn nuclear_only_is_twelve() {
        let c = carbon_intensity(&mix(&["nuclear"], vec![vec![5.0]]), &Default::default()).unwrap();
        assert_eq!(c, vec![12.0]);
    }

    #[test]
    fn coal_nuclear_halves() {
        let c = carbon_intensity(&mix(&["coal", "nuclear"], vec![vec![1.0, 1.0]]), &Default::default()).unwrap();
        assert_eq!(c, vec![416.0]);
    }

    #[test]
    fn three_source_mix() {
        let m = mix(&["gas-cc", "nuclear", "solar-pv"], vec![vec![5.0, 3.0, 2.0]]);
        assert_eq!(carbon_intensity(&m, &Default::default()).unwrap(), vec![256.8]);
    }

    #[test]
    fn unknown_source_is_an_error() {
        let m = mix(&["lignite"], vec![vec![1.0]]);
        assert!(matches!(
            carbon_intensity(&m, &Default::default()),
            Err(Error::UnknownSource(s)) if s == "lignite"
        ));
    }

    #[test]
    fn zero_total_period_is_rejected() {
        let err = GenerationMixSeries::new(vec!["coal".into()], vec![vec![1.0], vec![0.0]]).unwrap_err();
        assert!(matches!(err, Error::ZeroGeneration { period: 1 }));
    }

    #[test]
    fn nonpositive_factor_is_rejected() {
        let e = EmissionFactor {
            name: "x".into(),
            min: 0.0,
            median: 1.0,
            max: 2.0,
        };
        assert!(EmissionFactorTable::new(vec![e]).is_err());
    }

    #[test]
    fn constant_intensity_emission() {
        let mut inst = chain(&[2], 2);
        inst.jobs[0].operations[0] = OperationSpec::new(vec![2.0, 3.0]);
        inst.carbon = vec![1.0, 1.0];
        let e = emission_matrix(&inst).unwrap();
        assert_eq!(e.at(0, 0, 1), Some(1.25));
    }

    #[test]
    fn shifted_start_emission() {
        let mut inst = chain(&[2], 3);
        inst.carbon = vec![100.0, 200.0, 300.0];
        let e = emission_matrix(&inst).unwrap();
        assert_eq!(e.window(0, 0).first, 1);
        assert_eq!(e.window(0, 0).last(), 2);
        assert_eq!(e.at(0, 0, 2), Some(125.0));
        assert_eq!(e.at(0, 0, 3), None);
    }

    #[test]
    fn dummy_operation_emits_nothing() {
        let mut inst = chain(&[2, 0], 5);
        inst.jobs
            .push(Job::new(vec![OperationSpec::new(vec![4.0]), OperationSpec::dummy()]));
        let e = emission_matrix(&inst).unwrap();
        assert!(e.window(0, 1).values.iter().all(|&v| v == 0.0));
        assert_eq!(e.window(0, 1).first, 3);
        assert_eq!(e.window(0, 1).last(), 6);
    }

    #[test]
    fn job_longer_than_horizon_is_infeasible() {
        let inst = chain(&[3, 4], 6);
        assert!(matches!(emission_matrix(&inst), Err(Error::InfeasibleInstance(_))));
    }
}
