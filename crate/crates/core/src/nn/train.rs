use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::dropout::Mode;
use super::network::{HyperParams, Network, NoRng, Workspace};
use crate::error::{Error, Result};

/// Borrowed inputs with their regression targets.
#[derive(Debug, Clone)]
pub struct TrainingSet<'a> {
    pub inputs: Vec<&'a [f64]>,
    pub targets: Vec<f64>,
}

impl<'a> TrainingSet<'a> {
    pub fn new(inputs: Vec<&'a [f64]>, targets: Vec<f64>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Dimension {
                expected: inputs.len(),
                actual: targets.len(),
            });
        }
        if inputs.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidDataset("non-finite training target".into()));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Eval-mode losses are computed at epoch 0, every `eval_every` epochs and
    /// at the last epoch.
    pub eval_every: usize,
}

impl From<&HyperParams> for TrainConfig {
    fn from(hp: &HyperParams) -> Self {
        Self {
            epochs: hp.epochs,
            batch: hp.batch,
            learning_rate: hp.learning_rate,
            eval_every: 10,
        }
    }
}

/// Adam with bias-corrected moments.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - libm::pow(b1, f64::from(self.t));
        let c2 = 1.0 - libm::pow(b2, f64::from(self.t));
        let lr = self.learning_rate;
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (libm::sqrt(v_hat) + self.epsilon);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub train_mse: f64,
    pub val_mse: Option<f64>,
}

/// Handed to the epoch callback after every epoch (and once before the
/// first, as epoch 0).
pub struct EpochReport<'a> {
    pub epoch: usize,
    /// Mean train-mode loss over the epoch's mini-batches; eval-mode loss for
    /// epoch 0.
    pub train_loss: f64,
    pub evaluation: Option<Evaluation>,
    pub network: &'a Network,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingTrace {
    pub rows: Vec<TraceRow>,
}

impl Network {
    /// Eval-mode mean squared error over a set.
    pub fn mse(&self, set: &TrainingSet<'_>) -> Result<f64> {
        let mut ws = Workspace::new(self.architecture());
        let mut acc = 0.0;
        for (x, t) in set.inputs.iter().zip(&set.targets) {
            if x.len() != self.architecture().input_len {
                return Err(Error::Dimension {
                    expected: self.architecture().input_len,
                    actual: x.len(),
                });
            }
            let r = self.forward_ws(x, &mut ws, Mode::Eval, &mut NoRng) - t;
            acc += r * r;
        }
        Ok(acc / set.len() as f64)
    }
}

fn evaluate(
    net: &Network,
    train: &TrainingSet<'_>,
    validation: Option<&TrainingSet<'_>>,
    epoch: usize,
) -> Result<Evaluation> {
    let train_mse = net.mse(train)?;
    let val_mse = validation.map(|v| net.mse(v)).transpose()?;
    if !train_mse.is_finite() || val_mse.is_some_and(|v| !v.is_finite()) {
        return Err(Error::Divergence { epoch });
    }
    Ok(Evaluation { train_mse, val_mse })
}

/// Mini-batch Adam on the mean squared error.
///
/// Each epoch shuffles the training order with `rng` and walks it in batches
/// of `config.batch` (the last batch may be smaller). Dropout masks draw from
/// the same `rng`, so a run is fully determined by the network, data, config
/// and generator state.
pub fn train<R, F>(
    net: &mut Network,
    train_set: &TrainingSet<'_>,
    validation: Option<&TrainingSet<'_>>,
    config: &TrainConfig,
    rng: &mut R,
    mut on_epoch: F,
) -> Result<TrainingTrace>
where
    R: Rng + ?Sized,
    F: FnMut(&EpochReport<'_>),
{
    if config.batch == 0 {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    let input_len = net.architecture().input_len;
    for x in train_set
        .inputs
        .iter()
        .chain(validation.iter().flat_map(|v| v.inputs.iter()))
    {
        if x.len() != input_len {
            return Err(Error::Dimension {
                expected: input_len,
                actual: x.len(),
            });
        }
    }

    let mut trace = TrainingTrace::default();
    let initial = evaluate(net, train_set, validation, 0)?;
    trace.rows.push(TraceRow {
        epoch: 0,
        train_mse: initial.train_mse,
        val_mse: initial.val_mse,
    });
    on_epoch(&EpochReport {
        epoch: 0,
        train_loss: initial.train_mse,
        evaluation: Some(initial),
        network: net,
    });

    let n = train_set.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut grads = vec![0.0; net.parameter_count()];
    let mut adam = Adam::new(net.parameter_count(), config.learning_rate);
    let mut ws = Workspace::new(net.architecture());

    for epoch in 1..=config.epochs {
        order.shuffle(rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch) {
            grads.fill(0.0);
            let scale = 2.0 / batch.len() as f64;
            for &i in batch {
                let x = train_set.inputs[i];
                let y = net.forward_ws(x, &mut ws, Mode::Train, rng);
                let r = y - train_set.targets[i];
                loss_sum += r * r;
                net.backward_ws(x, &mut ws, scale * r, &mut grads);
            }
            adam.step(net.params_mut(), &grads);
        }
        let train_loss = loss_sum / n as f64;
        if !train_loss.is_finite() || net.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch });
        }

        let evaluation = if epoch % config.eval_every.max(1) == 0 || epoch == config.epochs {
            Some(evaluate(net, train_set, validation, epoch)?)
        } else {
            None
        };
        trace.rows.push(TraceRow {
            epoch,
            train_mse: train_loss,
            val_mse: evaluation.and_then(|e| e.val_mse),
        });
        on_epoch(&EpochReport {
            epoch,
            train_loss,
            evaluation,
            network: net,
        });
    }
    Ok(trace)
}
