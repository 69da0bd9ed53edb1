//! Benchmark instance generation: an operation pool, FCFS-checked job
//! assembly, and energy data sliced from a random day of historical series.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{fcfs_schedule, save_instance, Instance, Job, OperationSpec, DEFAULT_PERIOD_HOURS};
use crate::par;
use crate::rng::stream;

const TAG_POOL: u64 = 11;
const TAG_INSTANCE: u64 = 12;
const MAX_VACUOUS_DRAWS: usize = 100_000;

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: i64,
    pub hi: i64,
}

impl Bounds {
    pub const fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> i64 {
        rng.random_range(self.lo..=self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub machines: usize,
    pub horizon: usize,
    pub period_hours: f64,
    pub count: usize,
    pub pool_size: usize,
    pub duration: Bounds,
    pub power: Bounds,
    pub jitter: Bounds,
    /// Consecutive rejected candidate jobs after which an instance is closed.
    /// The default of 1 closes an instance at the first job that does not fit.
    pub max_rejections: usize,
    pub seed: u64,
}

impl GenConfig {
    /// Defaults for a dataset class: durations `{2,16}` on one machine and
    /// `{0,8}` otherwise.
    pub fn new(machines: usize, horizon: usize) -> Self {
        Self {
            machines,
            horizon,
            period_hours: DEFAULT_PERIOD_HOURS,
            count: 50,
            pool_size: 2000,
            duration: if machines == 1 {
                Bounds::new(2, 16)
            } else {
                Bounds::new(0, 8)
            },
            power: Bounds::new(100, 3000),
            jitter: Bounds::new(-250, 250),
            max_rejections: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::Generation(reason));
        if self.machines == 0 || self.horizon == 0 {
            return bad("machines and horizon must be at least 1".into());
        }
        if !(self.period_hours > 0.0 && self.period_hours.is_finite()) {
            return bad("period_hours must be positive".into());
        }
        if self.pool_size == 0 {
            return bad("pool_size must be at least 1".into());
        }
        for (name, b) in [
            ("duration", self.duration),
            ("power", self.power),
            ("jitter", self.jitter),
        ] {
            if b.lo > b.hi {
                return bad(format!("{name} bounds are reversed ({} > {})", b.lo, b.hi));
            }
        }
        if self.duration.lo < 0 {
            return bad("durations cannot be negative".into());
        }
        if self.power.lo <= 0 {
            return bad("base power lower bound must be positive".into());
        }
        if self.duration.hi == 0 {
            return bad("every operation would be a dummy".into());
        }
        Ok(())
    }
}

/// Draws the operation pool. Each period's power is `max(0, base + jitter)`
/// with a fresh jitter per period.
pub fn build_operation_pool<R: Rng + ?Sized>(config: &GenConfig, rng: &mut R) -> Vec<OperationSpec> {
    (0..config.pool_size)
        .map(|_| {
            let duration = config.duration.sample(rng) as usize;
            let base = config.power.sample(rng);
            let power = (0..duration)
                .map(|_| (base + config.jitter.sample(rng)).max(0) as f64)
                .collect();
            OperationSpec::new(power)
        })
        .collect()
}

/// Historical per-period series the energy windows are sliced from.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalData {
    pub carbon: Vec<f64>,
    pub onsite: Vec<f64>,
    pub prices: Option<Vec<f64>>,
}

impl HistoricalData {
    fn periods(&self) -> usize {
        self.carbon.len()
    }

    fn check(&self, config: &GenConfig) -> Result<usize> {
        let len = self.periods();
        if self.onsite.len() != len || self.prices.as_ref().is_some_and(|p| p.len() != len) {
            return Err(Error::Generation(format!(
                "historical series differ in length (carbon {len}, onsite {}{})",
                self.onsite.len(),
                self.prices
                    .as_ref()
                    .map(|p| format!(", prices {}", p.len()))
                    .unwrap_or_default()
            )));
        }
        let per_day = (24.0 / config.period_hours).round() as usize;
        if len < config.horizon || len < per_day.max(1) {
            return Err(Error::Generation(format!(
                "historical data has {len} periods; at least one day and the {}-period horizon are required",
                config.horizon
            )));
        }
        Ok(len / per_day.max(1))
    }

    /// `horizon` periods from `offset`, wrapping at the end of the data.
    fn window(series: &[f64], offset: usize, horizon: usize) -> Vec<f64> {
        (0..horizon).map(|k| series[(offset + k) % series.len()]).collect()
    }
}

/// Summary of one generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub label: String,
    pub jobs: usize,
    pub operations: usize,
    pub slack: Vec<i64>,
    /// 1-based day the energy window was taken from.
    pub day: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub instance: Instance,
    pub stats: InstanceStats,
}

fn assemble<R: Rng + ?Sized>(config: &GenConfig, pool: &[OperationSpec], rng: &mut R) -> Result<Vec<Job>> {
    let mut jobs: Vec<Job> = Vec::new();
    let mut available = vec![0usize; config.machines];
    let mut rejections = 0;
    let mut vacuous = 0;
    while rejections < config.max_rejections {
        let candidate: Vec<OperationSpec> = (0..config.machines)
            .map(|_| pool[rng.random_range(0..pool.len())].clone())
            .collect();
        if candidate.iter().all(OperationSpec::is_dummy) {
            // Vacuous jobs are redrawn without counting as a rejection.
            vacuous += 1;
            if vacuous > MAX_VACUOUS_DRAWS {
                return Err(Error::Generation("the pool yields only zero-duration jobs".into()));
            }
            continue;
        }
        // FCFS completion with the candidate appended at the end.
        let mut next = available.clone();
        let mut ready = 0;
        for (m, op) in candidate.iter().enumerate() {
            let start = next[m].max(ready);
            next[m] = start + op.duration;
            ready = next[m];
        }
        if ready < config.horizon {
            jobs.push(Job::new(candidate));
            available = next;
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
    if jobs.is_empty() {
        return Err(Error::Generation(format!(
            "no job fits the {}-period horizon after {} draws",
            config.horizon, config.max_rejections
        )));
    }
    Ok(jobs)
}

fn label(config: &GenConfig, index: usize) -> String {
    format!("m{}t{}-{:03}", config.machines, config.horizon, index + 1)
}

/// Builds `config.count` instances. Instance `n` draws from its own random
/// stream, so the result does not depend on thread count.
pub fn generate_dataset(
    config: &GenConfig,
    pool: &[OperationSpec],
    historical: &HistoricalData,
) -> Result<Vec<Generated>> {
    config.validate()?;
    if pool.is_empty() {
        return Err(Error::Generation("operation pool is empty".into()));
    }
    let days = historical.check(config)?;
    let per_day = historical.periods() / days;
    let results = par::map_range(config.count, |n| -> Result<Generated> {
        let mut rng = stream(config.seed, &[TAG_INSTANCE, n as u64]);
        let jobs = assemble(config, pool, &mut rng)?;
        let day = rng.random_range(0..days);
        let offset = day * per_day;
        let instance = Instance {
            label: label(config, n),
            machines: config.machines,
            horizon: config.horizon,
            period_hours: config.period_hours,
            jobs,
            carbon: HistoricalData::window(&historical.carbon, offset, config.horizon),
            onsite: HistoricalData::window(&historical.onsite, offset, config.horizon),
            prices: historical
                .prices
                .as_ref()
                .map(|p| HistoricalData::window(p, offset, config.horizon)),
        };
        instance.validate()?;
        debug_assert!(fcfs_schedule(&instance).completion < config.horizon);
        let stats = InstanceStats {
            label: instance.label.clone(),
            jobs: instance.job_count(),
            operations: instance.operation_count(),
            slack: instance.slack(),
            day: day + 1,
        };
        Ok(Generated { instance, stats })
    });
    results.into_iter().collect()
}

/// Pool plus dataset from one seed.
pub fn generate(config: &GenConfig, historical: &HistoricalData) -> Result<Vec<Generated>> {
    let pool = build_operation_pool(config, &mut stream(config.seed, &[TAG_POOL]));
    generate_dataset(config, &pool, historical)
}

/// Min, median and max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        Some(Self {
            min: v[0],
            median,
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: GenConfig,
    /// Source files the energy data came from, as given.
    pub sources: Vec<String>,
    pub operations: Option<Spread>,
    /// Spread over instances of each instance's median per-machine slack.
    pub median_slack: Option<Spread>,
    pub instances: Vec<InstanceStats>,
}

impl Manifest {
    pub fn new(config: &GenConfig, sources: Vec<String>, generated: &[Generated]) -> Self {
        let operations: Vec<f64> = generated.iter().map(|g| g.stats.operations as f64).collect();
        let slack: Vec<f64> = generated
            .iter()
            .filter_map(|g| {
                let s: Vec<f64> = g.stats.slack.iter().map(|&s| s as f64).collect();
                Spread::of(&s).map(|s| s.median)
            })
            .collect();
        Self {
            config: config.clone(),
            sources,
            operations: Spread::of(&operations),
            median_slack: Spread::of(&slack),
            instances: generated.iter().map(|g| g.stats.clone()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Writes `<label>.json` per instance and `manifest.json` into `dir`.
pub fn write_dataset(dir: impl AsRef<Path>, manifest: &Manifest, generated: &[Generated]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for g in generated {
        save_instance(&g.instance, dir.join(format!("{}.json", g.instance.label)))?;
    }
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_json() + "\n").map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history(days: usize) -> HistoricalData {
        let n = days * 96;
        HistoricalData {
            carbon: (0..n).map(|t| 100.0 + (t % 96) as f64).collect(),
            onsite: (0..n).map(|t| (t % 7) as f64).collect(),
            prices: None,
        }
    }

    #[test]
    fn pool_respects_bounds() {
        let config = GenConfig::new(1, 96);
        let pool = build_operation_pool(&config, &mut stream(1, &[0]));
        assert_eq!(pool.len(), 2000);
        for op in &pool {
            assert!((2..=16).contains(&op.duration));
            assert!(op.power.iter().all(|&p| (0.0..=3250.0).contains(&p)));
            assert_eq!(op.power.len(), op.duration);
        }
        let multi = build_operation_pool(&GenConfig::new(3, 96), &mut stream(1, &[0]));
        assert!(multi.iter().all(|op| op.duration <= 8));
    }

    #[test]
    fn instances_fit_strictly() {
        let mut config = GenConfig::new(1, 96);
        config.count = 12;
        config.seed = 3;
        let data = generate(&config, &history(3)).unwrap();
        assert_eq!(data.len(), 12);
        for g in &data {
            assert!(fcfs_schedule(&g.instance).completion < 96);
            assert!(g.stats.slack[0] >= 1);
            assert!((1..=3).contains(&g.stats.day));
            let offset = (g.stats.day - 1) * 96;
            assert_eq!(g.instance.carbon[0], 100.0 + (offset % 96) as f64);
        }
    }

    #[test]
    fn multi_machine_rejects_vacuous_jobs() {
        let mut config = GenConfig::new(3, 96);
        config.count = 4;
        let data = generate(&config, &history(1)).unwrap();
        for g in &data {
            assert!(g
                .instance
                .jobs
                .iter()
                .all(|j| j.operations.iter().any(|o| !o.is_dummy())));
            assert!(g.stats.slack.iter().all(|&s| s >= 1));
        }
    }

    #[test]
    fn deterministic() {
        let mut config = GenConfig::new(1, 96);
        config.count = 5;
        config.seed = 9;
        let a = generate(&config, &history(2)).unwrap();
        let b = generate(&config, &history(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn short_history_is_an_error() {
        let config = GenConfig::new(1, 96);
        let mut h = history(1);
        h.carbon.truncate(50);
        h.onsite.truncate(50);
        assert!(matches!(generate(&config, &h), Err(Error::Generation(_))));
    }

    #[test]
    fn spread_median() {
        let s = Spread::of(&[3.0, 1.0, 2.0, 10.0]).unwrap();
        assert_eq!((s.min, s.median, s.max), (1.0, 2.5, 10.0));
    }
}
