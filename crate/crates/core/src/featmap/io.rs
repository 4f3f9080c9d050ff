//! Feature matrix files.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "MAFM"
//! 4       8     N (u64, sample count)
//! 12      8     d (u64, axis count)
//! 20      4     flags (u32, see FLAG_*)
//! 24      8*N*d values, row-major f64: value[k * d + i] = a_i(x_k)
//! ```
//!
//! The CSV form has a header `a_0,...,a_{d-1}` and one row per sample.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::axiscore::{AxisSource, FeatureMatrix};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MAFM";
/// Every value lies in `[-1, 1]`.
pub const FLAG_BOUNDED: u32 = 1;
/// Produced by the Pauli simulator.
pub const FLAG_PAULI: u32 = 1 << 1;
/// Produced by the tanh projection proxy.
pub const FLAG_PROXY: u32 = 1 << 2;

pub fn write_binary<W: Write>(matrix: &FeatureMatrix, flags: u32, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(matrix.sample_count() as u64).to_le_bytes())?;
    out.write_all(&(matrix.axis_count() as u64).to_le_bytes())?;
    out.write_all(&flags.to_le_bytes())?;
    for v in matrix.to_row_major() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Returns the matrix and its flags.
pub fn read_binary<R: Read>(mut input: R) -> Result<(FeatureMatrix, u32)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a feature matrix file (bad magic)".into()));
    }
    let mut u64buf = [0u8; 8];
    input.read_exact(&mut u64buf)?;
    let n = u64::from_le_bytes(u64buf) as usize;
    input.read_exact(&mut u64buf)?;
    let d = u64::from_le_bytes(u64buf) as usize;
    let mut u32buf = [0u8; 4];
    input.read_exact(&mut u32buf)?;
    let flags = u32::from_le_bytes(u32buf);
    let count = n
        .checked_mul(d)
        .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        input.read_exact(&mut u64buf)?;
        values.push(f64::from_le_bytes(u64buf));
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after feature values".into()));
    }
    Ok((FeatureMatrix::from_row_major(n, d, &values)?, flags))
}

pub fn write_csv<W: Write>(matrix: &FeatureMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((0..matrix.axis_count()).map(|i| format!("a_{i}")))?;
    for k in 0..matrix.sample_count() {
        w.write_record(matrix.row(k).iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<FeatureMatrix> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad value '{s}': {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    FeatureMatrix::from_rows(&rows)
}

/// Writes by extension: `.csv` as CSV, anything else binary.
pub fn save(matrix: &FeatureMatrix, flags: u32, path: &Path) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    if is_csv(path) {
        write_csv(matrix, out)
    } else {
        write_binary(matrix, flags, out)
    }
}

pub fn load(path: &Path) -> Result<FeatureMatrix> {
    let input = BufReader::new(File::open(path)?);
    if is_csv(path) {
        read_csv(input)
    } else {
        Ok(read_binary(input)?.0)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        FeatureMatrix::from_rows(&[vec![0.1, -0.25, 1.0], vec![-1.0, 0.333, 1e-300]]).unwrap()
    }

    #[test]
    fn binary_layout() {
        let m = sample();
        let mut buf = Vec::new();
        write_binary(&m, FLAG_BOUNDED | FLAG_PROXY, &mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 8 * 6);
        assert_eq!(&buf[..4], b"MAFM");
        assert_eq!(u64::from_le_bytes(buf[4..12].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(buf[20..24].try_into().unwrap()), 5);
        // row-major: second value is row 0, axis 1
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), -0.25);
        let (back, flags) = read_binary(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(flags, 5);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(read_binary(&b"NOPE"[..]).is_err());
        let mut buf = Vec::new();
        write_binary(&sample(), 0, &mut buf).unwrap();
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(read_binary(&buf[..]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = sample();
        let mut buf = Vec::new();
        write_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a_0,a_1,a_2\n"));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.axis_count(), 3);
    }
}
