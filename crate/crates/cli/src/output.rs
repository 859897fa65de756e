//! Output directory handling: CSV, binary grids, JSON and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qwrad::gridfile::Grid;
use qwrad::scenario::{ResolvedScenario, ScenarioConfig};
use serde::Serialize;

use crate::config::to_flat_toml;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Bin,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Bin
    }

    pub fn bin(self) -> bool {
        self != Format::Csv
    }
}

/// Shortest round-trip representation.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a ScenarioConfig,
    resolved: Option<&'a ResolvedScenario>,
    outputs: &'a [String],
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn grid(&mut self, name: &str, grid: &Grid) -> Result<()> {
        let mut w = self.create(name)?;
        grid.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Matrix CSV: first row is the column axis, first column the row axis.
    pub fn matrix_csv(&mut self, name: &str, corner: &str, grid: &Grid) -> Result<()> {
        let mut header = vec![corner.to_string()];
        header.extend(grid.columns.iter().map(|&v| num(v)));
        let nc = grid.columns.len();
        let mut w = csv::Writer::from_writer(self.create(name)?);
        w.write_record(&header)?;
        for (i, &r) in grid.rows.iter().enumerate() {
            let mut rec = vec![num(r)];
            rec.extend(grid.values[i * nc..(i + 1) * nc].iter().map(|&v| num(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    /// Write `config.toml` and `manifest.json` describing this run.
    pub fn finish(mut self, command: &str, config: &ScenarioConfig, resolved: Option<&ResolvedScenario>) -> Result<Vec<String>> {
        let flat = to_flat_toml(config)?;
        let mut w = self.create("config.toml")?;
        w.write_all(flat.as_bytes())?;
        w.flush()?;
        let outputs = self.files.clone();
        let manifest = Manifest {
            tool: "qwrad",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            resolved,
            outputs: &outputs,
        };
        self.json("manifest.json", &manifest)?;
        Ok(self.files)
    }
}
