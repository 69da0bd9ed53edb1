use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the memetic search. Serialized field names follow the
/// conventional symbols (`rho`, `gamma`, `xi`, `chi_j`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaParams {
    /// Population size.
    #[serde(rename = "rho")]
    pub population: usize,
    /// Maximum number of generations.
    #[serde(rename = "gamma")]
    pub generations: usize,
    /// Fraction of offspring produced by crossover.
    #[serde(rename = "xi")]
    pub crossover_rate: f64,
    /// Per-gene swap probability for job keys.
    #[serde(rename = "chi_j")]
    pub crossover_jobs: f64,
    /// Per-gene swap probability for pause keys.
    #[serde(rename = "chi_p")]
    pub crossover_pauses: f64,
    #[serde(rename = "pi_j")]
    pub mutation_jobs: f64,
    #[serde(rename = "pi_p")]
    pub mutation_pauses: f64,
    /// Standard deviation of job key noise.
    #[serde(rename = "sigma_j")]
    pub step_jobs: f64,
    #[serde(rename = "sigma_p")]
    pub step_pauses: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Tuned profiles per dataset class: (name, xi, chi_j, chi_p, pi_j, pi_p, sigma_j, sigma_p).
const PROFILES: [(&str, [f64; 7]); 4] = [
    ("m1t1", [0.5851, 0.3779, 0.1041, 0.1662, 0.1985, 0.0564, 0.1873]),
    ("m1t3", [0.5565, 0.1168, 0.4627, 0.0589, 0.0227, 0.0168, 0.1832]),
    ("m3t1", [0.8273, 0.3596, 0.2963, 0.0679, 0.0330, 0.1039, 0.1959]),
    ("m3t3", [0.8203, 0.4297, 0.0681, 0.0113, 0.0084, 0.0050, 0.1901]),
];

impl Default for MaParams {
    fn default() -> Self {
        Self::profile("m1t1").expect("built-in profile")
    }
}

impl MaParams {
    pub const PROFILE_NAMES: [&'static str; 4] = ["m1t1", "m1t3", "m3t1", "m3t3"];

    /// Built-in profile with population 250 and 100 generations.
    pub fn profile(name: &str) -> Option<Self> {
        let key = name.to_ascii_lowercase();
        let key = key.trim_start_matches("cas-pfsp-");
        PROFILES.iter().find(|(n, _)| *n == key).map(|(_, v)| Self {
            population: 250,
            generations: 100,
            crossover_rate: v[0],
            crossover_jobs: v[1],
            crossover_pauses: v[2],
            mutation_jobs: v[3],
            mutation_pauses: v[4],
            step_jobs: v[5],
            step_pauses: v[6],
            seed: 0,
        })
    }

    /// Picks the profile closest to an instance shape: multi-machine vs
    /// single-machine, one day (<= 96 periods) vs longer.
    pub fn profile_for(machines: usize, horizon: usize) -> Self {
        let name = match (machines > 1, horizon > 96) {
            (false, false) => "m1t1",
            (false, true) => "m1t3",
            (true, false) => "m3t1",
            (true, true) => "m3t3",
        };
        Self::profile(name).expect("built-in profile")
    }

    /// A profile name, or a path to a TOML parameter file.
    pub fn resolve(spec: &str) -> Result<Self> {
        if let Some(p) = Self::profile(spec) {
            return Ok(p);
        }
        let path = Path::new(spec);
        if !path.exists() {
            return Err(Error::InvalidParams(format!(
                "`{spec}` is neither a profile ({}) nor an existing file",
                Self::PROFILE_NAMES.join(", ")
            )));
        }
        Self::load(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params: Self =
            toml::from_str(&text).map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("params serialize")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidParams("rho must be at least 2".into()));
        }
        if self.generations < 1 {
            return Err(Error::InvalidParams("gamma must be at least 1".into()));
        }
        let rates = [
            ("xi", self.crossover_rate),
            ("chi_j", self.crossover_jobs),
            ("chi_p", self.crossover_pauses),
            ("pi_j", self.mutation_jobs),
            ("pi_p", self.mutation_pauses),
        ];
        for (name, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} must lie in [0, 1]")));
            }
        }
        for (name, v) in [("sigma_j", self.step_jobs), ("sigma_p", self.step_pauses)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Offspring produced by crossover: `xi * rho` rounded to the nearest
    /// even number, capped at the largest even count not above `rho`.
    pub fn crossover_count(&self) -> usize {
        let raw = self.crossover_rate * self.population as f64;
        let even = 2 * (raw / 2.0).round() as usize;
        even.min(self.population & !1)
    }
}

#[cfg(test)]
#[allow(clippy::field_reassign_with_default)]
mod tests {
    use super::*;

    #[test]
    fn m1t1_profile_values() {
        let p = MaParams::profile("M1T1").unwrap();
        assert_eq!(p.population, 250);
        assert_eq!(p.generations, 100);
        assert_eq!(p.crossover_rate, 0.5851);
        assert_eq!(p.crossover_jobs, 0.3779);
        assert_eq!(p.crossover_pauses, 0.1041);
        assert_eq!(p.mutation_jobs, 0.1662);
        assert_eq!(p.mutation_pauses, 0.1985);
        assert_eq!(p.step_jobs, 0.0564);
        assert_eq!(p.step_pauses, 0.1873);
        assert_eq!(MaParams::profile("cas-pfsp-m3t3").unwrap().step_jobs, 0.0050);
    }

    #[test]
    fn crossover_count_is_even_and_bounded() {
        let mut p = MaParams::default();
        assert_eq!(p.crossover_count(), 146);
        p.population = 100;
        p.crossover_rate = 0.7;
        assert_eq!(p.crossover_count(), 70);
        p.population = 5;
        p.crossover_rate = 1.0;
        assert_eq!(p.crossover_count(), 4);
        p.population = 2;
        p.crossover_rate = 0.1;
        assert_eq!(p.crossover_count(), 0);
    }

    #[test]
    fn toml_round_trip_uses_symbol_names() {
        let p = MaParams::profile("m3t1").unwrap().with_seed(9);
        let text = p.to_toml();
        assert!(text.contains("chi_j"), "{text}");
        let back: MaParams = toml::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut p = MaParams::default();
        p.population = 1;
        assert!(p.validate().is_err());
        let mut p = MaParams::default();
        p.mutation_jobs = 1.5;
        assert!(p.validate().is_err());
        let mut p = MaParams::default();
        p.step_pauses = -0.1;
        assert!(p.validate().is_err());
        assert!(MaParams::resolve("no-such-profile").is_err());
    }
}
