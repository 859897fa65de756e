//! Binary grid files.
//!
//! Layout, all little-endian:
//! 8-byte magic `QWGRID01`, u64 column count, u64 row count, the column axis
//! (f64 per column), the row axis (f64 per row), then the values row by row.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"QWGRID01";

/// Two-dimensional sampled field, `values[row * columns.len() + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub columns: Vec<f64>,
    pub rows: Vec<f64>,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(columns: Vec<f64>, rows: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != columns.len() * rows.len() {
            return Err(Error::Precondition(format!(
                "grid has {} values for {} x {} axes",
                values.len(),
                rows.len(),
                columns.len()
            )));
        }
        Ok(Self { columns, rows, values })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.columns.len() as u64).to_le_bytes())?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        for v in self.columns.iter().chain(&self.rows).chain(&self.values) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Precondition("not a grid file".into()));
        }
        let mut word = [0u8; 8];
        let mut next_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut word)?;
            Ok(u64::from_le_bytes(word))
        };
        let nc = next_u64(&mut r)? as usize;
        let nr = next_u64(&mut r)? as usize;
        let mut read_f64s = |n: usize| -> Result<Vec<f64>> {
            let mut buf = vec![0u8; 8 * n];
            r.read_exact(&mut buf)?;
            Ok(buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect())
        };
        let columns = read_f64s(nc)?;
        let rows = read_f64s(nr)?;
        let values = read_f64s(nc * nr)?;
        Self::new(columns, rows, values)
    }
}
