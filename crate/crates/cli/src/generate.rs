use std::path::PathBuf;

use anyhow::{Context, Result};
use cas_pfsp::carbon::{
    carbon_intensity, ingest_grid_mix, ingest_onsite, ingest_prices, load_column_map, ColumnMap, EmissionFactorTable,
    DEFAULT_ONSITE_SCALE,
};
use cas_pfsp::instgen::{generate, write_dataset, GenConfig, HistoricalData, Manifest};
use clap::Args;

use crate::Global;

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    machines: usize,
    #[arg(long, default_value_t = 96)]
    horizon: usize,
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Grid generation mix CSV (timestamp plus one column per source).
    #[arg(long)]
    grid_mix: PathBuf,
    /// TOML table mapping CSV headers to emission factor sources.
    #[arg(long)]
    column_map: Option<PathBuf>,
    /// Regional renewable output CSV, scaled down to one site.
    #[arg(long)]
    onsite: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ONSITE_SCALE)]
    onsite_scale: f64,
    /// Hourly day-ahead prices per MWh.
    #[arg(long)]
    prices: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pool_size: usize,
    /// Stop adding jobs after this many consecutive rejected candidates.
    #[arg(long, default_value_t = 1)]
    max_rejections: usize,
    /// Duration bounds `LO,HI`; defaults to 2,16 on one machine, 0,8 otherwise.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    durations: Option<Vec<i64>>,
}

pub fn run(global: &Global, args: GenerateArgs) -> Result<()> {
    let factors = EmissionFactorTable::default();
    let map = match &args.column_map {
        Some(p) => load_column_map(p)?,
        None => ColumnMap::new(),
    };
    let mix = ingest_grid_mix(&args.grid_mix, &factors, &map)
        .with_context(|| format!("--grid-mix {}", args.grid_mix.display()))?;
    let onsite = ingest_onsite(&args.onsite, args.onsite_scale)
        .with_context(|| format!("--onsite {}", args.onsite.display()))?;
    let prices = args
        .prices
        .as_ref()
        .map(|p| ingest_prices(p).with_context(|| format!("--prices {}", p.display())))
        .transpose()?;
    for (name, filled) in [
        ("grid mix", mix.filled),
        ("on-site", onsite.filled),
        ("prices", prices.as_ref().map_or(0, |p| p.filled)),
    ] {
        if filled > 0 {
            eprintln!("warning: {name}: {filled} empty cells carried forward");
        }
    }
    let historical = HistoricalData {
        carbon: carbon_intensity(&mix.series, &factors)?,
        onsite: onsite.values,
        prices: prices.map(|p| p.values),
    };

    let mut config = GenConfig::new(args.machines, args.horizon);
    config.count = args.count;
    config.pool_size = args.pool_size;
    config.max_rejections = args.max_rejections;
    config.seed = global.seed;
    if let Some(d) = args.durations {
        config.duration = cas_pfsp::instgen::Bounds::new(d[0], d[1]);
    }
    let dataset = generate(&config, &historical)?;
    let mut sources = vec![args.grid_mix.display().to_string(), args.onsite.display().to_string()];
    sources.extend(args.prices.iter().map(|p| p.display().to_string()));
    let manifest = Manifest::new(&config, sources, &dataset);
    write_dataset(&global.out, &manifest, &dataset)?;

    println!("wrote {} instances to {}", dataset.len(), global.out.display());
    if let (Some(o), Some(s)) = (manifest.operations, manifest.median_slack) {
        println!("|O| min/median/max: {}/{}/{}", o.min, o.median, o.max);
        println!("median slack min/median/max: {}/{}/{}", s.min, s.median, s.max);
    }
    Ok(())
}
