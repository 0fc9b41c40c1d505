//! Error metrics and leave-one-oil-out cross-validation.
//!
//! Each fold holds out every repetition of one oil, trains a fresh network on
//! the remaining oils and keeps two snapshots of it: the one with the lowest
//! validation loss and the one with the lowest training loss seen at the
//! evaluation epochs. Both snapshots are scored on every fold, giving two
//! complete cross-validation runs; [`select_checkpoint`] keeps the run whose
//! training and validation MAE are closest in relative terms.
//!
//! Targets are standardized per fold (training mean and population
//! deviation) before training and predictions are mapped back, so reported
//! errors are in label units.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{Dataset, ParameterId};
use crate::error::{Error, Result};
use crate::nn::{build_network, train, HyperParams, TrainConfig, TrainingSet, TrainingTrace};
use crate::seed;

/// Mean absolute error.
pub fn mae(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Dimension {
            expected: pred.len(),
            actual: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

/// Mean squared error without the gradient.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    crate::nn::mse_loss(pred, target).map(|(l, _)| l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Checkpoint {
    BestValLoss,
    BestTrainLoss,
}

impl Checkpoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Checkpoint::BestValLoss => "best_val_loss",
            Checkpoint::BestTrainLoss => "best_train_loss",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldResult {
    pub held_out_oil: String,
    pub true_value: f64,
    /// Oils whose spectra were used for training in this fold.
    pub training_oils: Vec<String>,
    pub mae_train: f64,
    pub mae_val: f64,
    /// One prediction per held-out repetition, in repetition order.
    pub predictions: Vec<f64>,
    pub chosen_checkpoint: Checkpoint,
    pub checkpoint_epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CvSummary {
    pub parameter: ParameterId,
    pub checkpoint: Checkpoint,
    pub mean_mae_train: f64,
    pub sd_mae_train: f64,
    pub mean_mae_val: f64,
    pub sd_mae_val: f64,
    pub var_mae_val: f64,
    /// `|<MAE_T> - <MAE_V>| / <MAE_T>`.
    pub comparability: f64,
    /// Fold validation MAE over the held-out label, averaged, in percent.
    pub average_error_pct: Option<f64>,
    /// Laboratory error over the label, averaged, in percent.
    pub label_error_pct: Option<f64>,
    pub per_fold: Vec<FoldResult>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var))
}

impl CvSummary {
    /// Aggregates fold results, ordered by oil id. Dispersions use the
    /// `n - 1` form.
    pub fn from_folds(parameter: ParameterId, checkpoint: Checkpoint, mut per_fold: Vec<FoldResult>) -> Result<Self> {
        if per_fold.is_empty() {
            return Err(Error::EmptyDataset);
        }
        per_fold.sort_by(|a, b| a.held_out_oil.cmp(&b.held_out_oil));
        let train: Vec<f64> = per_fold.iter().map(|f| f.mae_train).collect();
        let val: Vec<f64> = per_fold.iter().map(|f| f.mae_val).collect();
        let (mean_mae_train, sd_mae_train) = mean_sd(&train);
        let (mean_mae_val, sd_mae_val) = mean_sd(&val);
        let mut summary = Self {
            parameter,
            checkpoint,
            mean_mae_train,
            sd_mae_train,
            mean_mae_val,
            sd_mae_val,
            var_mae_val: sd_mae_val * sd_mae_val,
            comparability: comparability(mean_mae_train, mean_mae_val),
            average_error_pct: None,
            label_error_pct: None,
            per_fold,
        };
        summary.average_error_pct = error_percentages(&summary, None).average_error_pct;
        Ok(summary)
    }

    pub fn n_folds(&self) -> usize {
        self.per_fold.len()
    }

    pub fn val_maes(&self) -> Vec<f64> {
        self.per_fold.iter().map(|f| f.mae_val).collect()
    }

    /// `true` when `<MAE_V> > 3 <MAE_T>`, the symptom of a network that only
    /// memorized the training oils.
    pub fn leakage_flag(&self) -> bool {
        self.mean_mae_val > 3.0 * self.mean_mae_train
    }
}

fn comparability(train: f64, val: f64) -> f64 {
    let diff = (train - val).abs();
    if diff == 0.0 {
        0.0
    } else if train == 0.0 {
        f64::INFINITY
    } else {
        diff / train
    }
}

/// Picks the run whose training and validation `<MAE>` are most comparable.
/// Ties go to the first argument.
pub fn select_checkpoint(best_val_run: &CvSummary, best_train_run: &CvSummary) -> CvSummary {
    if best_train_run.comparability < best_val_run.comparability {
        best_train_run.clone()
    } else {
        best_val_run.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPercentages {
    pub average_error_pct: Option<f64>,
    pub label_error_pct: Option<f64>,
    /// Oils skipped because their label is zero.
    pub zero_labels_excluded: usize,
}

/// Relative errors in percent: fold validation MAE over the true label and,
/// when per-oil laboratory errors are given, laboratory error over the true
/// label, each averaged over oils with a nonzero label.
pub fn error_percentages(summary: &CvSummary, lab_errors: Option<&BTreeMap<String, f64>>) -> ErrorPercentages {
    let usable: Vec<&FoldResult> = summary.per_fold.iter().filter(|f| f.true_value != 0.0).collect();
    let zero_labels_excluded = summary.per_fold.len() - usable.len();
    let average_error_pct = (!usable.is_empty())
        .then(|| 100.0 * usable.iter().map(|f| f.mae_val / f.true_value.abs()).sum::<f64>() / usable.len() as f64);
    let label_error_pct = lab_errors.and_then(|errs| {
        let ratios: Vec<f64> = usable
            .iter()
            .filter_map(|f| errs.get(&f.held_out_oil).map(|e| e / f.true_value.abs()))
            .collect();
        (!ratios.is_empty()).then(|| 100.0 * ratios.iter().sum::<f64>() / ratios.len() as f64)
    });
    ErrorPercentages {
        average_error_pct,
        label_error_pct,
        zero_labels_excluded,
    }
}

/// Normalized spectra and labels of one oil.
#[derive(Debug, Clone, PartialEq)]
pub struct OilSamples {
    pub oil_id: String,
    pub target: f64,
    pub spectra: Vec<Vec<f64>>,
}

/// Cross-validation input: per-oil normalized spectra, sorted by oil id.
#[derive(Debug, Clone, PartialEq)]
pub struct LoocvData {
    pub parameter: ParameterId,
    pub input_len: usize,
    pub oils: Vec<OilSamples>,
}

impl LoocvData {
    /// The dataset must already be filtered for `parameter` and hold at least
    /// three oils.
    pub fn new(dataset: &Dataset, parameter: ParameterId) -> Result<Self> {
        let normalized;
        let ds = if dataset.is_normalized() {
            dataset
        } else {
            normalized = dataset.normalized()?;
            &normalized
        };
        let mut oils = Vec::with_capacity(ds.n_oils());
        for oil_id in ds.oil_ids() {
            let record = ds.record(oil_id).expect("oil ids come from records");
            let target = record.get(parameter).ok_or_else(|| {
                Error::InvalidDataset(format!(
                    "oil `{oil_id}` has no {parameter} label; filter the dataset first"
                ))
            })?;
            oils.push(OilSamples {
                oil_id: oil_id.into(),
                target,
                spectra: ds
                    .spectra_for(oil_id)
                    .into_iter()
                    .map(|s| s.intensities.clone())
                    .collect(),
            });
        }
        if oils.len() < 3 {
            return Err(Error::InsufficientSamples(format!(
                "cross-validation needs at least 3 oils, got {}",
                oils.len()
            )));
        }
        Ok(Self {
            parameter,
            input_len: ds.pixels(),
            oils,
        })
    }

    pub fn n_oils(&self) -> usize {
        self.oils.len()
    }

    /// Ids of the oils used for training when `fold` is held out.
    pub fn training_oils(&self, fold: usize) -> Vec<String> {
        self.oils
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .map(|(_, o)| o.oil_id.clone())
            .collect()
    }

    /// Cross-validated MAE of predicting the training-set mean label.
    pub fn mean_predictor_mae(&self) -> f64 {
        let n = self.oils.len();
        let folds: Vec<f64> = (0..n)
            .map(|fold| {
                let (sum, count) = self
                    .oils
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != fold)
                    .fold((0.0, 0usize), |(s, c), (_, o)| {
                        (s + o.target * o.spectra.len() as f64, c + o.spectra.len())
                    });
                (sum / count as f64 - self.oils[fold].target).abs()
            })
            .collect();
        folds.iter().sum::<f64>() / n as f64
    }
}

/// Both checkpoint results of one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub best_val: FoldResult,
    pub best_train: FoldResult,
    pub trace: TrainingTrace,
}

struct Snapshot {
    loss: f64,
    epoch: usize,
    params: Vec<f64>,
}

/// Trains and scores the fold that holds out `data.oils[fold]`.
///
/// Weight initialization and the training stream are keyed by
/// `(seed, held-out oil id)`, so folds may run in any order or in parallel.
pub fn run_fold(data: &LoocvData, fold: usize, hp: &HyperParams, seed: u64) -> Result<FoldOutcome> {
    let held = data
        .oils
        .get(fold)
        .ok_or_else(|| Error::Internal(format!("fold {fold} out of range")))?;

    let mut train_inputs = Vec::new();
    let mut train_labels = Vec::new();
    for (i, oil) in data.oils.iter().enumerate() {
        if i == fold {
            continue;
        }
        for s in &oil.spectra {
            train_inputs.push(s.as_slice());
            train_labels.push(oil.target);
        }
    }
    let n = train_labels.len() as f64;
    let offset = train_labels.iter().sum::<f64>() / n;
    let var = train_labels.iter().map(|t| (t - offset) * (t - offset)).sum::<f64>() / n;
    let scale = if var > 0.0 { libm::sqrt(var) } else { 1.0 };
    let standardize = |t: f64| (t - offset) / scale;

    let train_set = TrainingSet::new(
        train_inputs.clone(),
        train_labels.iter().map(|&t| standardize(t)).collect(),
    )?;
    let val_inputs: Vec<&[f64]> = held.spectra.iter().map(Vec::as_slice).collect();
    let val_set = TrainingSet::new(
        val_inputs.clone(),
        alloc::vec![standardize(held.target); val_inputs.len()],
    )?;

    let id = held.oil_id.as_bytes();
    let mut net = build_network(hp, data.input_len, &mut seed::stream(seed, &[b"init", id]))?;
    let mut rng = seed::stream(seed, &[b"train", id]);

    let mut best_val: Option<Snapshot> = None;
    let mut best_train: Option<Snapshot> = None;
    let keep = |slot: &mut Option<Snapshot>, loss: f64, epoch: usize, params: &[f64]| {
        if slot.as_ref().is_none_or(|s| loss < s.loss) {
            *slot = Some(Snapshot {
                loss,
                epoch,
                params: params.to_vec(),
            });
        }
    };
    let trace = train(
        &mut net,
        &train_set,
        Some(&val_set),
        &TrainConfig::from(hp),
        &mut rng,
        |report| {
            if let Some(eval) = report.evaluation {
                let params = report.network.params();
                if let Some(v) = eval.val_mse {
                    keep(&mut best_val, v, report.epoch, params);
                }
                keep(&mut best_train, eval.train_mse, report.epoch, params);
            }
        },
    )?;

    let training_oils = data.training_oils(fold);
    let mut score = |snap: Snapshot, which: Checkpoint| -> Result<FoldResult> {
        net.set_params(&snap.params)?;
        let unscale = |z: f64| z * scale + offset;
        let predictions: Vec<f64> = net
            .predict_many(val_inputs.iter().copied())?
            .into_iter()
            .map(unscale)
            .collect();
        let train_pred: Vec<f64> = net
            .predict_many(train_inputs.iter().copied())?
            .into_iter()
            .map(unscale)
            .collect();
        Ok(FoldResult {
            held_out_oil: held.oil_id.clone(),
            true_value: held.target,
            training_oils: training_oils.clone(),
            mae_train: mae(&train_pred, &train_labels)?,
            mae_val: mae(&predictions, &alloc::vec![held.target; predictions.len()])?,
            predictions,
            chosen_checkpoint: which,
            checkpoint_epoch: snap.epoch,
        })
    };
    let missing = || Error::Internal("no evaluation epoch recorded".into());
    let best_val = score(best_val.ok_or_else(missing)?, Checkpoint::BestValLoss)?;
    let best_train = score(best_train.ok_or_else(missing)?, Checkpoint::BestTrainLoss)?;
    Ok(FoldOutcome {
        best_val,
        best_train,
        trace,
    })
}

/// Both candidate runs and the selected one.
#[derive(Debug, Clone, PartialEq)]
pub struct LoocvRun {
    pub selected: CvSummary,
    pub best_val_run: CvSummary,
    pub best_train_run: CvSummary,
    /// Per-fold training traces, ordered like `selected.per_fold`.
    pub traces: Vec<(String, TrainingTrace)>,
}

/// Builds the two candidate summaries from fold outcomes and selects one.
pub fn assemble(parameter: ParameterId, outcomes: Vec<FoldOutcome>) -> Result<LoocvRun> {
    let mut vals = Vec::with_capacity(outcomes.len());
    let mut trains = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        traces.push((o.best_val.held_out_oil.clone(), o.trace));
        vals.push(o.best_val);
        trains.push(o.best_train);
    }
    traces.sort_by(|a, b| a.0.cmp(&b.0));
    let best_val_run = CvSummary::from_folds(parameter, Checkpoint::BestValLoss, vals)?;
    let best_train_run = CvSummary::from_folds(parameter, Checkpoint::BestTrainLoss, trains)?;
    Ok(LoocvRun {
        selected: select_checkpoint(&best_val_run, &best_train_run),
        best_val_run,
        best_train_run,
        traces,
    })
}

/// Sequential leave-one-oil-out cross-validation.
pub fn loocv(dataset: &Dataset, parameter: ParameterId, hp: &HyperParams, seed: u64) -> Result<LoocvRun> {
    let data = LoocvData::new(dataset, parameter)?;
    let outcomes = (0..data.n_oils())
        .map(|i| run_fold(&data, i, hp, seed).map_err(|e| e.in_fold(&data.oils[i].oil_id)))
        .collect::<Result<Vec<_>>>()?;
    assemble(parameter, outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Excitation, OilRecord, Spectrum, WavelengthGrid};
    use crate::nn::DropoutPlacement;
    use alloc::vec;
    use proptest::prelude::*;

    fn fold(oil: &str, truth: f64, t: f64, v: f64) -> FoldResult {
        FoldResult {
            held_out_oil: oil.into(),
            true_value: truth,
            training_oils: Vec::new(),
            mae_train: t,
            mae_val: v,
            predictions: vec![truth],
            chosen_checkpoint: Checkpoint::BestValLoss,
            checkpoint_epoch: 0,
        }
    }

    fn summary(t: f64, v: f64, which: Checkpoint) -> CvSummary {
        CvSummary::from_folds(
            ParameterId::Acidity,
            which,
            vec![fold("A", 1.0, t, v), fold("B", 1.0, t, v)],
        )
        .unwrap()
    }

    #[test]
    fn mae_values() {
        assert_eq!(mae(&[0.3, 0.2], &[0.3, 0.2]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, 3.0], &[0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(mae(&[], &[]), Err(Error::EmptyBatch));
    }

    #[test]
    fn selection_prefers_comparable_run() {
        let a = summary(0.10, 0.12, Checkpoint::BestValLoss);
        let b = summary(0.01, 0.30, Checkpoint::BestTrainLoss);
        assert!((a.comparability - 0.2).abs() < 1e-12);
        assert!((b.comparability - 29.0).abs() < 1e-9);
        assert_eq!(select_checkpoint(&a, &b).checkpoint, Checkpoint::BestValLoss);
        assert_eq!(select_checkpoint(&b, &a).checkpoint, Checkpoint::BestValLoss);
        let same = summary(0.1, 0.2, Checkpoint::BestTrainLoss);
        let first = summary(0.1, 0.2, Checkpoint::BestValLoss);
        assert_eq!(select_checkpoint(&first, &same).checkpoint, Checkpoint::BestValLoss);
        // validation below training is still comparable
        let low = summary(0.2, 0.15, Checkpoint::BestTrainLoss);
        assert!((low.comparability - 0.25).abs() < 1e-12);
    }

    #[test]
    fn summary_statistics() {
        let s = CvSummary::from_folds(
            ParameterId::K232,
            Checkpoint::BestValLoss,
            vec![
                fold("C", 2.0, 0.1, 0.3),
                fold("A", 1.0, 0.2, 0.1),
                fold("B", 4.0, 0.3, 0.2),
            ],
        )
        .unwrap();
        assert_eq!(s.per_fold[0].held_out_oil, "A");
        assert!((s.mean_mae_val - 0.2).abs() < 1e-12);
        assert!((s.sd_mae_val - 0.1).abs() < 1e-12);
        assert!((s.var_mae_val - s.sd_mae_val * s.sd_mae_val).abs() < 1e-12);
        let recomputed = s.per_fold.iter().map(|f| f.mae_val).sum::<f64>() / 3.0;
        assert!((recomputed - s.mean_mae_val).abs() < 1e-12);
        // (0.1/1 + 0.3/2 + 0.2/4) / 3 = 0.1
        assert!((s.average_error_pct.unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn error_percentage_cases() {
        let one = CvSummary::from_folds(
            ParameterId::Acidity,
            Checkpoint::BestValLoss,
            vec![fold("A", 2.0, 0.1, 0.2)],
        )
        .unwrap();
        let p = error_percentages(&one, None);
        assert!((p.average_error_pct.unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(p.label_error_pct, None);

        let s = CvSummary::from_folds(
            ParameterId::Acidity,
            Checkpoint::BestValLoss,
            vec![
                fold("A", 2.0, 0.1, 0.2),
                fold("B", 0.5, 0.1, 0.1),
                fold("Z", 0.0, 0.1, 0.1),
            ],
        )
        .unwrap();
        let errs: BTreeMap<String, f64> = [("A".into(), 0.2), ("B".into(), 0.05)].into_iter().collect();
        let p = error_percentages(&s, Some(&errs));
        assert!((p.label_error_pct.unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(p.zero_labels_excluded, 1);
    }

    fn toy_dataset(n_oils: usize, reps: u32, label: impl Fn(usize) -> f64) -> Dataset {
        let len = 48;
        let grid = WavelengthGrid::linear(600.0, 700.0, len).unwrap();
        let mut spectra = Vec::new();
        let mut records = Vec::new();
        for o in 0..n_oils {
            let id = format!("O{o:02}");
            records.push(OilRecord::new(id.clone()).with(ParameterId::Acidity, label(o)));
            for r in 1..=reps {
                let values = (0..len)
                    .map(|i| {
                        let x = i as f64 - 20.0 - o as f64;
                        libm::exp(-x * x / 30.0) + 0.001 * (r as f64) * (i % 3) as f64
                    })
                    .collect();
                spectra.push(Spectrum {
                    oil_id: id.clone(),
                    excitation: Excitation::Nm395,
                    repetition: r,
                    intensities: values,
                    normalized: false,
                });
            }
        }
        Dataset::new(grid, spectra, records, reps).unwrap()
    }

    fn toy_hp(epochs: usize) -> HyperParams {
        HyperParams {
            filters1: 2,
            ksize1: 5,
            pool: 2,
            filters2: 2,
            ksize2: 3,
            dense1: 4,
            dense2: 3,
            dropout: 0.0,
            dropout_placement: DropoutPlacement::Flatten,
            epochs,
            batch: 4,
            learning_rate: 1e-2,
        }
    }

    #[test]
    fn partition_arithmetic() {
        let ds = toy_dataset(3, 2, |o| 0.2 + o as f64 * 0.1);
        let data = LoocvData::new(&ds, ParameterId::Acidity).unwrap();
        let run = loocv(&ds, ParameterId::Acidity, &toy_hp(3), 1).unwrap();
        assert_eq!(run.selected.n_folds(), 3);
        for (i, f) in run.selected.per_fold.iter().enumerate() {
            assert_eq!(f.predictions.len(), 2);
            assert_eq!(f.training_oils.len(), 2);
            assert!(!f.training_oils.contains(&f.held_out_oil));
            let train_spectra: usize = data
                .oils
                .iter()
                .filter(|o| f.training_oils.contains(&o.oil_id))
                .map(|o| o.spectra.len())
                .sum();
            assert_eq!(train_spectra, 4);
            assert_eq!(f.held_out_oil, data.oils[i].oil_id);
        }
    }

    #[test]
    fn too_few_oils() {
        let ds = toy_dataset(2, 2, |_| 0.3);
        assert!(matches!(
            LoocvData::new(&ds, ParameterId::Acidity),
            Err(Error::InsufficientSamples(_))
        ));
        let ds = toy_dataset(3, 1, |_| 0.3);
        assert!(matches!(
            LoocvData::new(&ds, ParameterId::Peroxide),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn constant_target_is_learned() {
        let c = 0.8;
        let ds = toy_dataset(4, 3, |_| c);
        let run = loocv(&ds, ParameterId::Acidity, &toy_hp(60), 3).unwrap();
        assert!(
            run.selected.mean_mae_val <= 0.05 * c + 1e-3,
            "{}",
            run.selected.mean_mae_val
        );
    }

    #[test]
    fn zero_epochs_scores_the_untrained_network() {
        let ds = toy_dataset(3, 2, |o| o as f64);
        let run = loocv(&ds, ParameterId::Acidity, &toy_hp(0), 5).unwrap();
        for f in &run.selected.per_fold {
            assert_eq!(f.checkpoint_epoch, 0);
        }
        assert_eq!(run.best_val_run.per_fold, {
            let mut v = run.best_train_run.per_fold.clone();
            for f in &mut v {
                f.chosen_checkpoint = Checkpoint::BestValLoss;
            }
            v
        });
    }

    #[test]
    fn runs_are_reproducible() {
        let ds = toy_dataset(4, 2, |o| 0.1 * o as f64 + 0.2);
        let a = loocv(&ds, ParameterId::Acidity, &toy_hp(5), 11).unwrap();
        let b = loocv(&ds, ParameterId::Acidity, &toy_hp(5), 11).unwrap();
        assert_eq!(a, b);
        // fold order does not matter
        let data = LoocvData::new(&ds, ParameterId::Acidity).unwrap();
        let reversed: Vec<FoldOutcome> = (0..4)
            .rev()
            .map(|i| run_fold(&data, i, &toy_hp(5), 11).unwrap())
            .collect();
        assert_eq!(assemble(ParameterId::Acidity, reversed).unwrap(), a);
    }

    #[test]
    fn mean_predictor_baseline() {
        let ds = toy_dataset(3, 2, |o| [0.0, 1.0, 2.0][o]);
        let data = LoocvData::new(&ds, ParameterId::Acidity).unwrap();
        // folds: |1.5-0| , |1-1|, |0.5-2|
        assert!((data.mean_predictor_mae() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn mae_bounded_by_rmse(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..50)
        ) {
            let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let m = mae(&p, &t).unwrap();
            let s = mse(&p, &t).unwrap();
            prop_assert!(m <= libm::sqrt(s) + 1e-12);
        }
    }
}
