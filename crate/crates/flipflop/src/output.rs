//! Writers for the three artifact formats. Every file starts with the
//! version and the resolved config of the run that produced it.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::svg::Plot;
use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type CsvWriter = csv::Writer<BufWriter<File>>;

/// Round-trippable decimal form with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Output {
    cfg: RunConfig,
    config_json: String,
    notes: Vec<String>,
}

impl Output {
    pub fn new(cfg: RunConfig) -> Result<Output, Failure> {
        if !cfg.formats.is_empty() {
            fs::create_dir_all(&cfg.out_dir).map_err(|e| {
                Failure::Io(format!("cannot create {}: {e}", cfg.out_dir.display()))
            })?;
        }
        let config_json = serde_json::to_string(&cfg).expect("config serializes");
        Ok(Output {
            cfg,
            config_json,
            notes: Vec::new(),
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.cfg.formats.contains(&f)
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn path(&self, name: &str, f: Format) -> PathBuf {
        self.cfg.out_dir.join(format!("{name}.{}", f.extension()))
    }

    fn create(&self, name: &str, f: Format) -> Result<BufWriter<File>, Failure> {
        let path = self.path(name, f);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
    }

    /// Header lines without their comment markers.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("flipflop {VERSION}"), format!("config: {}", self.config_json)];
        lines.extend(self.notes.iter().map(|n| format!("note: {n}")));
        lines
    }

    /// Writes `name.csv` if CSV output was requested. `rows` receives a
    /// writer whose column header is already written.
    pub fn csv(
        &self,
        name: &str,
        columns: &[&str],
        rows: impl FnOnce(&mut CsvWriter) -> csv::Result<()>,
    ) -> Result<(), Failure> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let mut out = self.create(name, Format::Csv)?;
        let io = |e: std::io::Error| Failure::Io(e.to_string());
        for line in self.header_lines() {
            writeln!(out, "# {line}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(columns)
            .and_then(|_| rows(&mut w))
            .and_then(|_| w.flush().map_err(csv::Error::from))
            .map_err(|e| Failure::Io(e.to_string()))
    }

    pub fn json(&self, name: &str, result: &impl Serialize) -> Result<(), Failure> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        let doc = json!({
            "version": VERSION,
            "config": &self.cfg,
            "notes": &self.notes,
            "result": result,
        });
        let mut out = self.create(name, Format::Json)?;
        serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::Io(e.to_string()))?;
        writeln!(out)
            .and_then(|_| out.flush())
            .map_err(|e| Failure::Io(e.to_string()))
    }

    pub fn svg(&self, name: &str, plot: &Plot) -> Result<(), Failure> {
        if !self.wants(Format::Svg) {
            return Ok(());
        }
        let mut out = self.create(name, Format::Svg)?;
        plot.render(&mut out, &self.header_lines())
            .and_then(|_| out.flush())
            .map_err(|e| Failure::Io(e.to_string()))
    }
}
