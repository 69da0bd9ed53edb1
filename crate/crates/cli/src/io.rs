use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cas_pfsp::memetic::MaParams;
use cas_pfsp::model::{fcfs_schedule, load_instance};
use cas_pfsp::Instance;

use crate::{Global, SearchArgs};

/// Expands directories to their instance files (every `*.json` except the
/// manifest), sorted by name.
pub fn instance_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .filter(|p| p.file_name().is_some_and(|n| n != "manifest.json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    if out.is_empty() {
        bail!("no instance files found");
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Instance> {
    let instance = load_instance(path).with_context(|| format!("loading {}", path.display()))?;
    let fcfs = fcfs_schedule(&instance);
    if !fcfs.feasible {
        eprintln!(
            "warning: {}: the FCFS schedule ends in period {}, past the horizon {}",
            path.display(),
            fcfs.completion,
            instance.horizon
        );
    }
    Ok(instance)
}

pub fn load_all(inputs: &[PathBuf]) -> Result<Vec<Instance>> {
    let instances = instance_paths(inputs)?
        .iter()
        .map(|p| load(p))
        .collect::<Result<Vec<_>>>()?;
    let mut labels: Vec<&str> = instances.iter().map(|i| i.label.as_str()).collect();
    labels.sort_unstable();
    if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
        bail!("duplicate instance label `{}`", w[0]);
    }
    Ok(instances)
}

/// Parameters for an instance: `--params` when given, else the profile for
/// its shape, then the command-line overrides.
pub fn params_for(global: &Global, search: &SearchArgs, instance: &Instance) -> Result<MaParams> {
    let mut params = match &global.params {
        Some(spec) => MaParams::resolve(spec)?,
        None => MaParams::profile_for(instance.machines, instance.horizon),
    };
    if let Some(rho) = search.population {
        params.population = rho;
    }
    if let Some(gamma) = search.generations {
        params.generations = gamma;
    }
    params.validate()?;
    Ok(params)
}

/// FNV-1a, used to key random streams by instance label.
pub fn label_key(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
