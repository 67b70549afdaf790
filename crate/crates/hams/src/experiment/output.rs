//! CSV output with a `#`-prefixed JSON header line carrying the config
//! hash, master seed, and toolkit version, so every file is traceable to
//! the run that produced it.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Header metadata written as the first line of every output file.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct FileHeader {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl FileHeader {
    pub fn new(config_hash: &str, seed: u64) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn line(&self) -> String {
        format!("# {}", serde_json::to_string(self).expect("header serializes"))
    }
}

/// Per-iteration chain record: draw, acceptance flag, log acceptance ratio,
/// and elapsed wall time.
#[derive(Clone, Debug)]
pub struct ChainRecordRow {
    pub iter: usize,
    pub accepted: bool,
    pub log_rho: f64,
    pub time_s: f64,
    pub x: DVector<f64>,
}

/// Stream chain records to `path` as CSV.
pub fn write_draws_csv(path: &Path, header: &FileHeader, rows: &[ChainRecordRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.line())?;
    let dim = rows.first().map(|r| r.x.len()).unwrap_or(0);
    let coord_cols: Vec<String> = (0..dim).map(|j| format!("x{j}")).collect();
    writeln!(f, "iter,accepted,log_rho,time_s,{}", coord_cols.join(","))?;
    for r in rows {
        write!(f, "{},{},{},{:.6}", r.iter, r.accepted as u8, r.log_rho, r.time_s)?;
        for v in r.x.iter() {
            write!(f, ",{v}")?;
        }
        writeln!(f)?;
    }
    Ok(())
}

/// Read a draws CSV back: header, draw matrix, acceptance flags, final
/// elapsed time.
pub fn read_draws_csv(path: &Path) -> Result<(FileHeader, Vec<DVector<f64>>, Vec<bool>, f64)> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines();
    let header_line =
        lines.next().ok_or_else(|| Error::Parse("empty draws file".into()))??;
    let header: FileHeader = serde_json::from_str(
        header_line
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse("missing # header line".into()))?,
    )
    .map_err(|e| Error::Parse(format!("bad header: {e}")))?;
    let columns = lines.next().ok_or_else(|| Error::Parse("missing column line".into()))??;
    let ncols = columns.split(',').count();
    if ncols < 5 {
        return Err(Error::Parse("draws file has no coordinate columns".into()));
    }
    let dim = ncols - 4;
    let mut draws = Vec::new();
    let mut accepted = Vec::new();
    let mut last_time = 0.0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncols {
            return Err(Error::Parse(format!("row has {} fields, want {ncols}", fields.len())));
        }
        accepted.push(fields[1] == "1");
        last_time = fields[3].parse().map_err(|e| Error::Parse(format!("bad time: {e}")))?;
        let mut x = DVector::zeros(dim);
        for j in 0..dim {
            x[j] = fields[4 + j].parse().map_err(|e| Error::Parse(format!("bad value: {e}")))?;
        }
        draws.push(x);
    }
    Ok((header, draws, accepted, last_time))
}

/// One aggregated summary row (medians over repetitions).
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub method: String,
    pub time_s: f64,
    pub ess_min: f64,
    pub ess_median: f64,
    pub ess_max: f64,
    pub min_ess_per_time: f64,
    pub acceptance_rate: f64,
}

pub fn write_summary_csv(path: &Path, header: &FileHeader, rows: &[SummaryRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.line())?;
    writeln!(f, "method,time_s,ess_min,ess_median,ess_max,min_ess_per_time,acceptance_rate")?;
    for r in rows {
        writeln!(
            f,
            "{},{:.6},{},{},{},{},{}",
            r.method, r.time_s, r.ess_min, r.ess_median, r.ess_max, r.min_ess_per_time,
            r.acceptance_rate
        )?;
    }
    Ok(())
}

/// Per-repetition summary detail.
#[derive(Clone, Debug)]
pub struct RepSummaryRow {
    pub method: String,
    pub rep: usize,
    pub time_s: f64,
    pub ess_min: f64,
    pub ess_median: f64,
    pub ess_max: f64,
    pub min_ess_per_time: f64,
    pub acceptance_rate: f64,
    pub epsilon: f64,
}

pub fn write_rep_summary_csv(
    path: &Path,
    header: &FileHeader,
    rows: &[RepSummaryRow],
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.line())?;
    writeln!(
        f,
        "method,rep,time_s,ess_min,ess_median,ess_max,min_ess_per_time,acceptance_rate,epsilon"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{:.6},{},{},{},{},{},{}",
            r.method, r.rep, r.time_s, r.ess_min, r.ess_median, r.ess_max, r.min_ess_per_time,
            r.acceptance_rate, r.epsilon
        )?;
    }
    Ok(())
}

/// Tuning trace: one row per adjustment window.
pub fn write_tuning_csv(path: &Path, header: &FileHeader, trace: &[(f64, f64)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.line())?;
    writeln!(f, "window,epsilon,rate")?;
    for (i, (eps, rate)) in trace.iter().enumerate() {
        writeln!(f, "{i},{eps},{rate}")?;
    }
    Ok(())
}

/// ACF series for the selected coordinates.
pub fn write_acf_csv(
    path: &Path,
    header: &FileHeader,
    coords: &[usize],
    series: &[Vec<f64>],
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.line())?;
    let cols: Vec<String> = coords.iter().map(|c| format!("acf_x{c}")).collect();
    writeln!(f, "lag,{}", cols.join(","))?;
    let max_lag = series.first().map(|s| s.len()).unwrap_or(0);
    for lag in 0..max_lag {
        write!(f, "{}", lag + 1)?;
        for s in series {
            write!(f, ",{}", s[lag])?;
        }
        writeln!(f)?;
    }
    Ok(())
}
