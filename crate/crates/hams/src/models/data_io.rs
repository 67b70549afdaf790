//! Columnar text format for simulated data sets: a two-line header holding
//! the dimension and the seed, then one value per line. Keeps experiment
//! inputs replayable and diffable.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};

pub fn write_column_file(path: &Path, values: &DVector<f64>, seed: u64) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", values.len())?;
    writeln!(f, "{seed}")?;
    for v in values.iter() {
        writeln!(f, "{v:e}")?;
    }
    Ok(())
}

/// Read a column file back; returns `(values, seed)`.
pub fn read_column_file(path: &Path) -> Result<(DVector<f64>, u64)> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines();
    let dim: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("missing dimension line".into()))??
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
    let seed: u64 = lines
        .next()
        .ok_or_else(|| Error::Parse("missing seed line".into()))??
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad seed: {e}")))?;
    let mut values = Vec::with_capacity(dim);
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        values.push(t.parse::<f64>().map_err(|e| Error::Parse(format!("bad value: {e}")))?);
    }
    if values.len() != dim {
        return Err(Error::Parse(format!(
            "header says {dim} values, file holds {}",
            values.len()
        )));
    }
    Ok((DVector::from_vec(values), seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join("hams_data_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("col.txt");
        let v = DVector::from_row_slice(&[1.5, -2.25, 0.0, 1e-12]);
        write_column_file(&path, &v, 99).unwrap();
        let (back, seed) = read_column_file(&path).unwrap();
        assert_eq!(back, v);
        assert_eq!(seed, 99);
        std::fs::remove_dir_all(&dir).ok();
    }
}
