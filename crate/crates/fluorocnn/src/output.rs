//! Run directory artifacts.
//!
//! A cross-validation run directory holds:
//!
//! - `summary.json`: both candidate runs, the selected one and run metadata
//! - `folds.csv`: `oil_id,true_value,mae_train,mae_val,checkpoint,checkpoint_epoch`
//! - `scatter.csv`: `oil_id,repetition,true_value,predicted,exp_error`
//! - `traces/<oil_id>.csv`: `epoch,train_mse,val_mse`
//! - `manifest.json`

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use fluorocnn_core::eval::LoocvRun;
use fluorocnn_core::nn::TrainingTrace;
use fluorocnn_core::{CvSummary, HyperParams, ParameterId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{read_to_string, write_string};

pub const SUMMARY_FILE: &str = "summary.json";
pub const FOLDS_FILE: &str = "folds.csv";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACES_DIR: &str = "traces";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub parameter: ParameterId,
    pub seed: u64,
    pub hyperparams: HyperParams,
    pub parameter_count: usize,
    pub n_oils: usize,
    pub repetitions: u32,
    /// Cross-validated MAE of predicting the training mean.
    pub baseline_mae: f64,
    pub leakage_flag: bool,
    pub zero_labels_excluded: usize,
    pub selected: CvSummary,
    pub best_val_run: CvSummary,
    pub best_train_run: CvSummary,
}

impl RunSummary {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        serde_json::from_str(&read_to_string(&path)?).map_err(|e| Error::format(&path, e.to_string()))
    }
}

pub fn format_folds(summary: &CvSummary) -> String {
    let mut out = String::from("oil_id,true_value,mae_train,mae_val,checkpoint,checkpoint_epoch\n");
    for f in &summary.per_fold {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f.held_out_oil,
            f.true_value,
            f.mae_train,
            f.mae_val,
            f.chosen_checkpoint.as_str(),
            f.checkpoint_epoch
        ));
    }
    out
}

/// One row per held-out spectrum.
pub fn format_scatter(summary: &CvSummary, exp_errors: Option<&BTreeMap<String, f64>>) -> String {
    let mut out = String::from("oil_id,repetition,true_value,predicted,exp_error\n");
    for f in &summary.per_fold {
        let err = exp_errors
            .and_then(|m| m.get(&f.held_out_oil))
            .map_or_else(String::new, |e| e.to_string());
        for (r, p) in f.predictions.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                f.held_out_oil,
                r + 1,
                f.true_value,
                p,
                err
            ));
        }
    }
    out
}

pub fn format_trace(trace: &TrainingTrace) -> String {
    let mut out = String::from("epoch,train_mse,val_mse\n");
    for row in &trace.rows {
        let val = row.val_mse.map_or_else(String::new, |v| v.to_string());
        out.push_str(&format!("{},{},{}\n", row.epoch, row.train_mse, val));
    }
    out
}

/// Per-fold validation MAE keyed by oil id, read back from `folds.csv`.
pub fn load_fold_maes(dir: &Path) -> Result<BTreeMap<String, f64>> {
    let path = dir.join(FOLDS_FILE);
    let text = read_to_string(&path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(&path, 1, e.to_string()))?
        .clone();
    let id = header.iter().position(|h| h == "oil_id");
    let val = header.iter().position(|h| h == "mae_val");
    let (Some(id), Some(val)) = (id, val) else {
        return Err(Error::parse(&path, 1, "header must contain `oil_id` and `mae_val`"));
    };
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::parse(&path, 0, e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let v: f64 = row[val]
            .parse()
            .map_err(|_| Error::parse(&path, line, format!("`{}` is not a number", &row[val])))?;
        out.insert(row[id].to_string(), v);
    }
    Ok(out)
}

pub fn write_run(
    dir: &Path,
    summary: &RunSummary,
    run: &LoocvRun,
    exp_errors: Option<&BTreeMap<String, f64>>,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: PathBuf, contents: String| -> Result<()> {
        write_string(&dir.join(&name), &contents)?;
        written.push(name);
        Ok(())
    };
    put(SUMMARY_FILE.into(), summary.to_json()?)?;
    put(FOLDS_FILE.into(), format_folds(&summary.selected))?;
    put(SCATTER_FILE.into(), format_scatter(&summary.selected, exp_errors))?;
    for (oil, trace) in &run.traces {
        put(Path::new(TRACES_DIR).join(format!("{oil}.csv")), format_trace(trace))?;
    }
    Ok(written)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub config_paths: BTreeMap<String, String>,
    pub hyperparams: Option<HyperParams>,
    /// SHA-256 over the input files, in the order they were read.
    pub dataset_fingerprint: Option<String>,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    /// SHA-256 of every output file, by path relative to the directory.
    pub outputs: BTreeMap<String, String>,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            args,
            seed: None,
            config_paths: BTreeMap::new(),
            hyperparams: None,
            dataset_fingerprint: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: now(),
            finished_at: String::new(),
            outputs: BTreeMap::new(),
        }
    }

    /// Hashes `files` (relative to `dir`), stamps the finish time and writes
    /// `manifest.json`.
    pub fn finish(mut self, dir: &Path, files: &[PathBuf]) -> Result<Self> {
        for f in files {
            let path = dir.join(f);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let key = f.to_string_lossy().replace('\\', "/");
            self.outputs.insert(key, sha256_hex(&bytes));
        }
        self.finished_at = now();
        let mut json = serde_json::to_string_pretty(&self)?;
        json.push('\n');
        write_string(&dir.join(MANIFEST_FILE), &json)?;
        Ok(self)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        serde_json::from_str(&read_to_string(&path)?).map_err(|e| Error::format(&path, e.to_string()))
    }
}

/// Hash of several input files, each prefixed by its length.
pub fn fingerprint(paths: &[&Path]) -> Result<String> {
    let mut h = Sha256::new();
    for p in paths {
        let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.1}"))
}

/// Plain-text table with one row per run.
pub fn format_report(runs: &[RunSummary]) -> String {
    let mut out = format!(
        "{:<16} {:>6} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9}  {}\n",
        "parameter", "oils", "<MAE_T>", "sd(MAE_T)", "<MAE_V>", "sd(MAE_V)", "avg err%", "lab err%", "checkpoint"
    );
    for r in runs {
        let s = &r.selected;
        out.push_str(&format!(
            "{:<16} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>9} {:>9}  {}{}\n",
            r.parameter.display_name(),
            s.n_folds(),
            s.mean_mae_train,
            s.sd_mae_train,
            s.mean_mae_val,
            s.sd_mae_val,
            pct(s.average_error_pct),
            pct(s.label_error_pct),
            s.checkpoint.as_str(),
            if r.leakage_flag { "  LEAKAGE?" } else { "" }
        ));
    }
    out
}
