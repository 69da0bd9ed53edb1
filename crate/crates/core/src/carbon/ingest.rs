//! File-based ingestion of grid mix, on-site generation and price feeds.
//!
//! All three schemas are CSV with a header row and a leading timestamp
//! column. Rows are ordered by timestamp (ISO 8601 strings sort correctly).
//! Empty cells carry the previous period's value forward and are counted.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Read;
use std::path::Path;

use super::{EmissionFactorTable, GenerationMixSeries};
use crate::error::{Error, Result};

/// Regional on-site generation is scaled down to a single site by this factor.
pub const DEFAULT_ONSITE_SCALE: f64 = 0.005;

/// Target name that drops a column instead of mapping it to a source.
const IGNORE: &str = "ignore";

/// CSV header -> emission factor source name.
pub type ColumnMap = BTreeMap<String, String>;

/// Reads a column map from a flat TOML table of `"Header" = "source"` pairs.
pub fn load_column_map(path: impl AsRef<Path>) -> Result<ColumnMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("column map {}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMixIngest {
    pub series: GenerationMixSeries,
    /// Number of empty cells filled by carry-forward.
    pub filled: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesIngest {
    pub values: Vec<f64>,
    pub filled: usize,
}

struct Table {
    headers: Vec<String>,
    rows: Vec<(String, Vec<Option<f64>>)>,
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() < 2 {
        return Err(Error::Csv(
            "expected a timestamp column and at least one value column".into(),
        ));
    }
    let mut rows = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let cells = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(c, cell)| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Some)
                        .ok_or_else(|| {
                            Error::Csv(format!(
                                "row {}, column `{}`: `{cell}` is not a number",
                                r + 1,
                                headers[c + 1]
                            ))
                        })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((record[0].to_string(), cells));
    }
    if rows.is_empty() {
        return Err(Error::Csv("file has no data rows".into()));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Table { headers, rows })
}

/// Replaces empty cells column-wise by the previous row's value. A missing
/// first cell becomes zero. Returns the number of filled cells.
fn carry_forward(rows: &[(String, Vec<Option<f64>>)], width: usize) -> (Vec<Vec<f64>>, usize) {
    let mut last = vec![0.0; width];
    let mut filled = 0;
    let values = rows
        .iter()
        .map(|(_, cells)| {
            cells
                .iter()
                .enumerate()
                .map(|(c, cell)| match cell {
                    Some(v) => {
                        last[c] = *v;
                        *v
                    }
                    None => {
                        filled += 1;
                        last[c]
                    }
                })
                .collect()
        })
        .collect();
    (values, filled)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub fn ingest_grid_mix(
    path: impl AsRef<Path>,
    factors: &EmissionFactorTable,
    column_map: &ColumnMap,
) -> Result<GridMixIngest> {
    grid_mix_from_reader(open(path.as_ref())?, factors, column_map)
}

/// Grid mix CSV: `timestamp,<source>,<source>,...` with one row per period.
/// Several headers may map onto one source; their quantities add up.
pub fn grid_mix_from_reader<R: Read>(
    reader: R,
    factors: &EmissionFactorTable,
    column_map: &ColumnMap,
) -> Result<GridMixIngest> {
    let table = read_table(reader)?;
    let mut sources: Vec<String> = Vec::new();
    // For each value column: index into `sources`, or None when ignored.
    let mut targets: Vec<Option<usize>> = Vec::new();
    for header in &table.headers[1..] {
        let name = column_map.get(header).map(String::as_str).unwrap_or(header);
        if name == IGNORE {
            targets.push(None);
            continue;
        }
        if !factors.contains(name) {
            return Err(Error::UnknownSource(header.clone()));
        }
        let idx = match sources.iter().position(|s| s == name) {
            Some(i) => i,
            None => {
                sources.push(name.to_string());
                sources.len() - 1
            }
        };
        targets.push(Some(idx));
    }
    let (values, filled) = carry_forward(&table.rows, table.headers.len() - 1);
    let quantities = values
        .into_iter()
        .map(|row| {
            let mut q = vec![0.0; sources.len()];
            for (v, target) in row.into_iter().zip(&targets) {
                if let Some(g) = target {
                    q[*g] += v;
                }
            }
            q
        })
        .collect();
    Ok(GridMixIngest {
        series: GenerationMixSeries::new(sources, quantities)?,
        filled,
    })
}

pub fn ingest_onsite(path: impl AsRef<Path>, scale: f64) -> Result<SeriesIngest> {
    onsite_from_reader(open(path.as_ref())?, scale)
}

/// On-site CSV: `timestamp,kw`. Values are scaled and clipped at zero.
pub fn onsite_from_reader<R: Read>(reader: R, scale: f64) -> Result<SeriesIngest> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::validation("scale", "must be a finite non-negative number"));
    }
    let (raw, filled) = single_column(reader)?;
    Ok(SeriesIngest {
        values: raw.into_iter().map(|v| (v * scale).max(0.0)).collect(),
        filled,
    })
}

pub fn ingest_prices(path: impl AsRef<Path>) -> Result<SeriesIngest> {
    prices_from_reader(open(path.as_ref())?)
}

/// Price CSV: `timestamp,price` with hourly prices per MWh. Each hour is
/// expanded to four quarter-hour periods priced per kWh.
pub fn prices_from_reader<R: Read>(reader: R) -> Result<SeriesIngest> {
    let (hourly, filled) = single_column(reader)?;
    if hourly.len() % 24 != 0 {
        return Err(Error::Csv(format!(
            "price file has {} hourly rows; expected a multiple of 24",
            hourly.len()
        )));
    }
    let values = hourly.iter().flat_map(|p| std::iter::repeat_n(p / 1000.0, 4)).collect();
    Ok(SeriesIngest { values, filled })
}

fn single_column<R: Read>(reader: R) -> Result<(Vec<f64>, usize)> {
    let table = read_table(reader)?;
    if table.headers.len() != 2 {
        return Err(Error::Csv(format!(
            "expected 2 columns (timestamp, value), found {}",
            table.headers.len()
        )));
    }
    let (values, filled) = carry_forward(&table.rows, 1);
    Ok((values.into_iter().map(|row| row[0]).collect(), filled))
}
