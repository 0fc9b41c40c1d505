//! Command-line interface.
//!
//! Configuration precedence is flags, then config files, then built-in
//! defaults. Every command that writes a directory also writes
//! `manifest.json` there.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fluorocnn_core::eval::error_percentages;
use fluorocnn_core::nn::{build_network, train, TrainConfig, TrainingSet};
use fluorocnn_core::stats::{compare_configs_with, Tail};
use fluorocnn_core::synth::generate_dataset;
use fluorocnn_core::{
    classify, filter_for_parameter, seed, Dataset, Excitation, HyperParams, OilRecord, ParameterId, ThresholdSet,
    WavelengthGrid,
};

use crate::checkpoint::Checkpoint;
use crate::config;
use crate::error::{Error, Result};
use crate::io;
use crate::output::{self, fingerprint, format_report, RunManifest, RunSummary};
use crate::runner::loocv_parallel;

#[derive(Debug, Parser)]
#[command(
    name = "fluorocnn",
    version,
    about = "Regress olive oil chemistry from fluorescence spectra"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic spectra dataset from oil labels.
    Generate(GenerateArgs),
    /// Train one network on every oil that has the parameter.
    Train(TrainArgs),
    /// Leave-one-oil-out cross-validation for one parameter.
    Loocv(LoocvArgs),
    /// t-test on the per-fold validation MAE of two cross-validation runs.
    Compare(CompareArgs),
    /// Grade oils as EVOO, VOO or LOO from chemical parameters.
    Classify(ClassifyArgs),
    /// Summarize cross-validation runs in one table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Labels CSV; the bundled 22-oil table when omitted.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Generator config file.
    #[arg(long)]
    pub gen_config: Option<PathBuf>,
    /// Excitation wavelength in nm (365 or 395).
    #[arg(long, default_value_t = 395)]
    pub excitation: u32,
    /// Spectra per oil.
    #[arg(long, default_value_t = 20)]
    pub repetitions: u32,
    /// Overrides the generator config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 450.0)]
    pub grid_start: f64,
    #[arg(long, default_value_t = 800.0)]
    pub grid_end: f64,
    #[arg(long, default_value_t = 1024)]
    pub pixels: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct HyperParamArgs {
    /// Hyperparameter config file.
    #[arg(long)]
    pub hp_config: Option<PathBuf>,
    #[arg(long)]
    pub filters1: Option<usize>,
    #[arg(long)]
    pub ksize1: Option<usize>,
    #[arg(long)]
    pub pool: Option<usize>,
    #[arg(long)]
    pub filters2: Option<usize>,
    #[arg(long)]
    pub ksize2: Option<usize>,
    #[arg(long)]
    pub dense1: Option<usize>,
    #[arg(long)]
    pub dense2: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// `flatten` or `dense`.
    #[arg(long)]
    pub dropout_placement: Option<fluorocnn_core::nn::DropoutPlacement>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

impl HyperParamArgs {
    pub fn resolve(&self) -> Result<HyperParams> {
        let mut hp = match &self.hp_config {
            Some(p) => config::load_hyperparams(p)?,
            None => HyperParams::default(),
        };
        macro_rules! overlay {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { hp.$f = v; } )* };
        }
        overlay!(
            filters1,
            ksize1,
            pool,
            filters2,
            ksize2,
            dense1,
            dense2,
            dropout,
            dropout_placement,
            epochs,
            batch,
            learning_rate
        );
        hp.validate()?;
        Ok(hp)
    }
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Dataset directory (spectra.csv, grid.txt, labels.csv, optional dark.txt).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Labels CSV overriding the dataset's own.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// acidity, peroxide, k270, k232 or ethyl_esters.
    #[arg(long)]
    pub parameter: ParameterId,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub hp: HyperParamArgs,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LoocvArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub hp: HyperParamArgs,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads for folds; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// CSV `oil_id,exp_error` with laboratory errors, for the label error column.
    #[arg(long)]
    pub exp_errors: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub run1: PathBuf,
    pub run2: PathBuf,
    #[arg(long, default_value_t = fluorocnn_core::stats::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Two-sided instead of the default one-sided test.
    #[arg(long)]
    pub two_sided: bool,
    /// Also write the report as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// CSV with `oil_id` and any of the parameter columns; a `quality`
    /// column, when present, is compared against the verdict.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Verdicts CSV; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub runs: Vec<PathBuf>,
    /// Directory for `report.txt` and the combined `scatter.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn args_vec() -> Vec<String> {
    std::env::args().collect()
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Loocv(a) => cmd_loocv(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("generate", args_vec());
    let records = match &a.labels {
        Some(p) => {
            manifest.config_paths.insert("labels".into(), path_str(p));
            io::load_labels(p)?
        }
        None => io::bundled_labels(),
    };
    let mut gen = match &a.gen_config {
        Some(p) => {
            manifest.config_paths.insert("gen_config".into(), path_str(p));
            config::load_generator(p)?
        }
        None => fluorocnn_core::GeneratorConfig::default(),
    };
    if let Some(s) = a.seed {
        gen.seed = s;
    }
    Excitation::from_nm(a.excitation)?;
    let grid = WavelengthGrid::linear(a.grid_start, a.grid_end, a.pixels)?;
    let dataset = generate_dataset(&records, a.excitation, a.repetitions, &gen, &grid)?;
    io::write_dataset(&a.out, &dataset)?;
    io::write_string(&a.out.join("generator.conf"), &config::format_generator(&gen))?;
    manifest.seed = Some(gen.seed);
    let files: Vec<PathBuf> = [io::SPECTRA_FILE, io::GRID_FILE, io::LABELS_FILE, "generator.conf"]
        .iter()
        .map(PathBuf::from)
        .collect();
    manifest.dataset_fingerprint = Some(fingerprint(
        &files
            .iter()
            .take(3)
            .map(|f| a.out.join(f))
            .collect::<Vec<_>>()
            .iter()
            .map(PathBuf::as_path)
            .collect::<Vec<_>>(),
    )?);
    manifest.finish(&a.out, &files)?;
    eprintln!(
        "generated {} spectra ({} oils x {}) at {} nm into {}",
        dataset.len(),
        dataset.n_oils(),
        a.repetitions,
        a.excitation,
        a.out.display()
    );
    Ok(())
}

fn load_for(d: &DatasetArgs, manifest: &mut RunManifest) -> Result<Dataset> {
    let dataset = io::load_dataset(&d.dataset, d.labels.as_deref())?;
    manifest.config_paths.insert("dataset".into(), path_str(&d.dataset));
    let labels = d.labels.clone().unwrap_or_else(|| d.dataset.join(io::LABELS_FILE));
    manifest.config_paths.insert("labels".into(), path_str(&labels));
    manifest.dataset_fingerprint = Some(fingerprint(&[
        &d.dataset.join(io::SPECTRA_FILE),
        &d.dataset.join(io::GRID_FILE),
        &labels,
    ])?);
    let filtered = filter_for_parameter(&dataset, d.parameter)?;
    if filtered.n_oils() == 0 {
        return Err(Error::Empty(format!("no oil has a {} label", d.parameter)));
    }
    Ok(filtered)
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mut manifest = RunManifest::new("train", args_vec());
    let hp = a.hp.resolve()?;
    let dataset = load_for(&a.data, &mut manifest)?.normalized()?;
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for s in dataset.spectra() {
        inputs.push(s.intensities.as_slice());
        labels.push(
            dataset
                .record(&s.oil_id)
                .and_then(|r| r.get(a.data.parameter))
                .expect("filtered"),
        );
    }
    let n = labels.len() as f64;
    let offset = labels.iter().sum::<f64>() / n;
    let var = labels.iter().map(|t| (t - offset) * (t - offset)).sum::<f64>() / n;
    let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
    let set = TrainingSet::new(inputs.clone(), labels.iter().map(|t| (t - offset) / scale).collect())?;

    let mut net = build_network(&hp, dataset.pixels(), &mut seed::stream(a.seed, &[b"init", b"all"]))?;
    let mut rng = seed::stream(a.seed, &[b"train", b"all"]);
    let trace = train(&mut net, &set, None, &TrainConfig::from(&hp), &mut rng, |_| {})?;
    let ckpt = Checkpoint {
        network: net,
        target_offset: offset,
        target_scale: scale,
    };
    ckpt.save(&a.out.join("checkpoint.bin"))?;
    io::write_string(&a.out.join("trace.csv"), &output::format_trace(&trace))?;
    io::write_string(&a.out.join("hyperparams.conf"), &config::format_hyperparams(&hp))?;

    let key = a.data.parameter.key();
    let mut pred = format!("oil_id,repetition,true_{key},{key}\n");
    for (s, (x, y)) in dataset.spectra().iter().zip(inputs.iter().zip(&labels)) {
        pred.push_str(&format!("{},{},{},{}\n", s.oil_id, s.repetition, y, ckpt.predict(x)?));
    }
    io::write_string(&a.out.join("predictions.csv"), &pred)?;

    manifest.seed = Some(a.seed);
    manifest.hyperparams = Some(hp);
    let files: Vec<PathBuf> = ["checkpoint.bin", "trace.csv", "hyperparams.conf", "predictions.csv"]
        .iter()
        .map(PathBuf::from)
        .collect();
    manifest.finish(&a.out, &files)?;
    let last = trace.rows.last().map_or(f64::NAN, |r| r.train_mse);
    eprintln!(
        "trained on {} spectra of {} oils, final training MSE {last:.6} (standardized units)",
        dataset.len(),
        dataset.n_oils()
    );
    Ok(())
}

pub fn cmd_loocv(a: &LoocvArgs) -> Result<()> {
    let mut manifest = RunManifest::new("loocv", args_vec());
    let hp = a.hp.resolve()?;
    let dataset = load_for(&a.data, &mut manifest)?;
    let exp_errors: Option<BTreeMap<String, f64>> = match &a.exp_errors {
        Some(p) => {
            manifest.config_paths.insert("exp_errors".into(), path_str(p));
            Some(io::load_exp_errors(p)?)
        }
        None => None,
    };
    if let Some(p) = &a.hp.hp_config {
        manifest.config_paths.insert("hp_config".into(), path_str(p));
    }
    let (data, mut run) = loocv_parallel(&dataset, a.data.parameter, &hp, a.seed, a.jobs)?;
    let mut zero_labels_excluded = 0;
    for s in [&mut run.selected, &mut run.best_val_run, &mut run.best_train_run] {
        let p = error_percentages(s, exp_errors.as_ref());
        s.label_error_pct = p.label_error_pct;
        zero_labels_excluded = p.zero_labels_excluded;
    }
    if zero_labels_excluded > 0 {
        eprintln!("warning: {zero_labels_excluded} oil(s) with a zero label left out of the error percentages");
    }
    let parameter_count = fluorocnn_core::nn::Architecture::from_hyperparams(&hp, dataset.pixels())?.parameter_count();
    let summary = RunSummary {
        parameter: a.data.parameter,
        seed: a.seed,
        hyperparams: hp.clone(),
        parameter_count,
        n_oils: data.n_oils(),
        repetitions: dataset.repetitions(),
        baseline_mae: data.mean_predictor_mae(),
        leakage_flag: run.selected.leakage_flag(),
        zero_labels_excluded,
        selected: run.selected.clone(),
        best_val_run: run.best_val_run.clone(),
        best_train_run: run.best_train_run.clone(),
    };
    let files = output::write_run(&a.out, &summary, &run, exp_errors.as_ref())?;
    manifest.seed = Some(a.seed);
    manifest.hyperparams = Some(hp);
    manifest.finish(&a.out, &files)?;

    print!("{}", format_report(std::slice::from_ref(&summary)));
    println!(
        "baseline (training mean) MAE {:.4}; comparability best-val {:.3}, best-train {:.3}",
        summary.baseline_mae, run.best_val_run.comparability, run.best_train_run.comparability
    );
    if summary.leakage_flag {
        eprintln!("warning: <MAE_V> exceeds 3 <MAE_T>; the network may be memorizing training oils");
    }
    Ok(())
}

pub fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let s1 = RunSummary::load(&a.run1)?;
    let s2 = RunSummary::load(&a.run2)?;
    if s1.parameter != s2.parameter {
        return Err(Error::Input(format!(
            "runs cover different parameters ({} vs {})",
            s1.parameter, s2.parameter
        )));
    }
    let m1 = output::load_fold_maes(&a.run1)?;
    let m2 = output::load_fold_maes(&a.run2)?;
    if !m1.keys().eq(m2.keys()) {
        return Err(Error::Input("runs were cross-validated over different oil sets".into()));
    }
    let v1: Vec<f64> = m1.values().copied().collect();
    let v2: Vec<f64> = m2.values().copied().collect();
    let tail = if a.two_sided { Tail::TwoSided } else { Tail::Upper };
    let report = compare_configs_with(&v1, &v2, a.alpha, tail)?;
    let recommend = recommendation(&report, (&a.run1, &s1), (&a.run2, &s2));
    println!("parameter        {}", s1.parameter);
    println!("N_oil            {}", report.n_oil);
    println!("<MAE_1> Var_1    {:.6} {:.6}", report.mean1, report.var1);
    println!("<MAE_2> Var_2    {:.6} {:.6}", report.mean2, report.var2);
    println!("S_P              {:.6}", report.s_p);
    println!("T                {:.6}", report.t_value);
    println!(
        "t_alpha({})     {:.6}  (alpha {}, {:?})",
        report.dof, report.t_critical, report.alpha, report.tail
    );
    println!("reject H0        {}", report.reject_equal_means);
    println!("recommend        {}", recommend.display());
    if let Some(out) = &a.out {
        let json = serde_json::json!({
            "report": report,
            "run1": path_str(&a.run1),
            "run2": path_str(&a.run2),
            "recommend": path_str(recommend),
        });
        io::write_string(out, &(serde_json::to_string_pretty(&json)? + "\n"))?;
    }
    Ok(())
}

/// With equal means not rejected, the smaller network wins; otherwise the
/// lower `<MAE_V>`.
fn recommendation<'a>(
    report: &fluorocnn_core::TTestReport,
    a: (&'a PathBuf, &RunSummary),
    b: (&'a PathBuf, &RunSummary),
) -> &'a PathBuf {
    if report.reject_equal_means {
        if report.mean1 <= report.mean2 {
            a.0
        } else {
            b.0
        }
    } else if b.1.parameter_count < a.1.parameter_count {
        b.0
    } else {
        a.0
    }
}

pub fn cmd_classify(a: &ClassifyArgs) -> Result<()> {
    let records: Vec<OilRecord> = match &a.input {
        Some(p) => io::load_labels(p)?,
        None => io::bundled_labels(),
    };
    if records.is_empty() {
        return Err(Error::Empty("no oils to classify".into()));
    }
    let thresholds = match &a.thresholds {
        Some(p) => config::load_thresholds(p)?,
        None => ThresholdSet::default(),
    };
    let mut out = String::from("oil_id,grade,failing_evoo,failing_voo,unevaluated,label_quality,agrees\n");
    let (mut checked, mut agree) = (0, 0);
    for r in &records {
        let v = classify(r, &thresholds)?;
        let keys = |fs: &[fluorocnn_core::quality::Failure]| {
            fs.iter().map(|f| f.parameter.key()).collect::<Vec<_>>().join(";")
        };
        let unevaluated: Vec<&str> = v.unevaluated.iter().map(|p| p.key()).collect();
        let (label, agrees) = match r.quality {
            Some(q) => {
                checked += 1;
                if q == v.grade {
                    agree += 1;
                }
                (q.as_str(), if q == v.grade { "yes" } else { "no" })
            }
            None => ("", ""),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.oil_id,
            v.grade.as_str(),
            keys(&v.failing_parameters),
            keys(&v.failing_voo),
            unevaluated.join(";"),
            label,
            agrees
        ));
    }
    match &a.out {
        Some(p) => io::write_string(p, &out)?,
        None => print!("{out}"),
    }
    eprintln!("chemical parameters only, organoleptic assessment not included");
    if checked > 0 {
        eprintln!("{agree}/{checked} verdicts agree with the quality column");
    }
    Ok(())
}

pub fn cmd_report(a: &ReportArgs) -> Result<()> {
    let mut runs = Vec::new();
    let mut scatter = String::from("parameter,oil_id,repetition,true_value,predicted,exp_error\n");
    for dir in &a.runs {
        let summary = match RunSummary::load(dir) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", dir.display());
                continue;
            }
        };
        let path = dir.join(output::SCATTER_FILE);
        match io::read_to_string(&path) {
            Ok(text) => {
                for line in text.lines().skip(1).filter(|l| !l.is_empty()) {
                    scatter.push_str(&format!("{},{line}\n", summary.parameter.key()));
                }
            }
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", dir.display());
                continue;
            }
        }
        runs.push(summary);
    }
    if runs.is_empty() {
        return Err(Error::Empty("no completed runs".into()));
    }
    let table = format_report(&runs);
    print!("{table}");
    if let Some(out) = &a.out {
        io::write_string(&out.join("report.txt"), &table)?;
        io::write_string(&out.join(output::SCATTER_FILE), &scatter)?;
        let mut manifest = RunManifest::new("report", args_vec());
        for (i, d) in a.runs.iter().enumerate() {
            manifest.config_paths.insert(format!("run{i}"), path_str(d));
        }
        manifest.finish(out, &[PathBuf::from("report.txt"), PathBuf::from(output::SCATTER_FILE)])?;
    }
    Ok(())
}
