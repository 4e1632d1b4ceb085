use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ResultRow;
use crate::error::{Error, Result};
use crate::network::TopologySpec;

pub const CSV_HEADER: &str =
    "alpha,algorithm,topology,smnr_db,signal,srer_db,asce,outer_mean,outer_std,inner_mean,inner_std,realizations,wall_seconds";

fn csv_error(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

fn write_records<T: Serialize>(records: &[T], out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_csv(rows: &[ResultRow], out: impl Write) -> std::io::Result<()> {
    write_records(rows, out)
}

fn nonempty<T>(rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid("no result rows to write"));
    }
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes rows as CSV with the [`CSV_HEADER`] columns.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    nonempty(rows)?;
    write_csv(rows, std::io::BufWriter::new(create(path)?)).map_err(|e| Error::io(path, e))
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}

const CURVE_COLUMNS: &str = "srer_db asce outer_mean outer_std inner_mean inner_std";

fn curve_line(x: impl std::fmt::Display, r: &ResultRow) -> String {
    format!(
        "{x} {} {} {} {} {} {}\n",
        r.srer_db, r.asce, r.outer_mean, r.outer_std, r.inner_mean, r.inner_std
    )
}

/// Whitespace-separated curve files under `dir`:
///
/// * `alpha_<algorithm>_<topology>.dat`: one curve per algorithm and topology
///   against α;
/// * `degree_<algorithm>_a<alpha>.dat`: one curve per algorithm and α against
///   ring degree, written when at least two ring degrees were run.
///
/// Returns the written paths.
pub fn emit_plotdata(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>> {
    nonempty(rows)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: BTreeMap<PathBuf, String> = BTreeMap::new();
    for r in rows {
        let name = format!("alpha_{}_{}.dat", slug(&r.algorithm), slug(&r.topology));
        files
            .entry(dir.join(name))
            .or_insert_with(|| format!("# alpha {CURVE_COLUMNS}\n"))
            .push_str(&curve_line(r.alpha, r));
    }
    let mut by_degree: BTreeMap<(String, String), Vec<(usize, &ResultRow)>> = BTreeMap::new();
    for r in rows {
        if let Ok(TopologySpec::Ring(d)) = r.topology.parse() {
            by_degree
                .entry((r.algorithm.clone(), r.alpha.to_string()))
                .or_default()
                .push((d, r));
        }
    }
    for ((algorithm, alpha), mut points) in by_degree {
        if points.len() < 2 {
            continue;
        }
        points.sort_by_key(|(d, _)| *d);
        let mut text = format!("# degree {CURVE_COLUMNS}\n");
        for (d, r) in points {
            text.push_str(&curve_line(d, r));
        }
        files.insert(dir.join(format!("degree_{}_a{}.dat", slug(&algorithm), alpha)), text);
    }
    for (path, text) in &files {
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(files.into_keys().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub algorithm: String,
    pub topology: String,
    /// Total run time over total baseline run time, summed over α values
    /// present for both.
    pub time_ratio: f64,
}

/// Run times normalized to `baseline`, in first-appearance order.
pub fn timing_ratios(rows: &[ResultRow], baseline: &str) -> Result<Vec<TimingRow>> {
    let base: BTreeMap<String, f64> = rows
        .iter()
        .filter(|r| r.algorithm == baseline)
        .map(|r| (r.alpha.to_string(), r.wall_seconds))
        .collect();
    if base.is_empty() {
        return Err(Error::invalid(format!("timing baseline '{baseline}' was not run")));
    }
    let mut order: Vec<(String, String)> = Vec::new();
    let mut sums: BTreeMap<(String, String), (f64, f64)> = BTreeMap::new();
    for r in rows {
        let Some(&b) = base.get(&r.alpha.to_string()) else { continue };
        let key = (r.algorithm.clone(), r.topology.clone());
        if !sums.contains_key(&key) {
            order.push(key.clone());
        }
        let e = sums.entry(key).or_default();
        e.0 += r.wall_seconds;
        e.1 += b;
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let (t, b) = sums[&key];
            TimingRow {
                algorithm: key.0,
                topology: key.1,
                time_ratio: if b > 0.0 { t / b } else { f64::NAN },
            }
        })
        .collect())
}

/// Writes the timing table as CSV (`algorithm,topology,time_ratio`).
pub fn emit_timing(rows: &[ResultRow], baseline: &str, path: &Path) -> Result<Vec<TimingRow>> {
    let table = timing_ratios(rows, baseline)?;
    write_records(&table, std::io::BufWriter::new(create(path)?)).map_err(|e| Error::io(path, e))?;
    Ok(table)
}
