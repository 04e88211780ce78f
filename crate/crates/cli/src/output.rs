//! CSV tables behind a `#`-prefixed run manifest.

use std::io::Write;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra manifest lines, e.g. summary estimates.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip formatting, identical on every platform.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

pub fn manifest(cfg: &ExperimentConfig) -> String {
    let mut out = format!("# kcsm {}\n", env!("CARGO_PKG_VERSION"));
    if let Some(c) = &cfg.command {
        out.push_str(&format!("# command: {c}\n"));
    }
    if let Some(seed) = cfg.sampling.seed {
        out.push_str(&format!("# seed: {seed}\n"));
    }
    out.push_str(&format!("# config_sha256: {}\n# config:\n", config_hash(cfg)));
    for line in cfg.to_toml().lines() {
        out.push_str(&format!("#   {line}\n"));
    }
    out
}

pub fn render(cfg: &ExperimentConfig, table: &Table) -> Result<String> {
    let mut out = manifest(cfg);
    for note in &table.notes {
        out.push_str(&format!("# {note}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner()?).expect("csv output is utf-8"));
    Ok(out)
}

/// Writes to `output.csv`, or standard output when it is unset.
pub fn emit(cfg: &ExperimentConfig, table: &Table) -> Result<()> {
    let text = render(cfg, table)?;
    match &cfg.output.csv {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_prefixes_every_line() {
        let mut cfg = ExperimentConfig { command: Some("gap".into()), ..Default::default() };
        cfg.sampling.seed = Some(3);
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), num(0.5)]);
        let text = render(&cfg, &t).unwrap();
        let (head, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
        assert!(head.iter().any(|l| l.starts_with("# config_sha256: ")));
        assert!(head.iter().any(|l| l.contains("seed = 3")));
        assert!(head.contains(&"# seed: 3"));
        assert_eq!(body, vec!["a,b", "1,0.5"]);
    }

    #[test]
    fn hash_tracks_the_config() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.sampling.seed = Some(1);
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
    }
}
