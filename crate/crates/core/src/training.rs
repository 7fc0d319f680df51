//! Supervised training of the heuristic on oracle transitions.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::dataset::TrainingPair;
use crate::error::{Error, Result};
use crate::formats;
use crate::heuristic::{FeatureMode, Heuristic, HeuristicConfig};
use crate::kinematics::KinematicModel;
use crate::rng::{self, derive_named, derive_seed};
use crate::tensor::{AdamConfig, AdamState, DropoutMode, Graph, ParamStore, Tensor};
use crate::world::Workspace;

pub const TRAIN_STATE_FORMAT: &str = "armplan.train_state";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub validation_fraction: f64,
    /// Epochs without a validation improvement before stopping; 0 disables early stopping.
    pub patience: usize,
    pub seed: u64,
    pub feature_mode: FeatureMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            learning_rate: 1e-3,
            validation_fraction: 0.1,
            patience: 20,
            seed: 0,
            feature_mode: FeatureMode::Full,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be positive"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invalid("validation_fraction must lie in (0, 1)"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean batch loss per epoch, dropout active.
    pub train_loss: Vec<f64>,
    /// Validation loss per epoch, dropout off.
    pub validation_loss: Vec<f64>,
    /// Index into the loss vectors of the lowest validation loss.
    pub best_epoch: usize,
    pub stopped_early: bool,
    /// Seconds spent in epochs, summed over resumed runs.
    pub wall_time: f64,
}

/// Network inputs and normalized targets for a list of pairs, one row per pair.
#[derive(Debug, Clone)]
pub struct EncodedPairs {
    features: Vec<f64>,
    obstacles: Vec<f64>,
    targets: Vec<f64>,
    feature_width: usize,
    obstacle_width: usize,
    len: usize,
}

impl EncodedPairs {
    pub fn new(
        pairs: &[TrainingPair],
        worlds: &[Workspace],
        model: &KinematicModel,
        heuristic: &Heuristic,
    ) -> Result<Self> {
        let by_id: HashMap<&str, &Workspace> = worlds.iter().map(|w| (w.id.as_str(), w)).collect();
        let scale = model.angle_scale();
        let mut out = Self {
            features: Vec::new(),
            obstacles: Vec::new(),
            targets: Vec::new(),
            feature_width: 0,
            obstacle_width: 0,
            len: pairs.len(),
        };
        for p in pairs {
            let ws = by_id.get(p.workspace.as_str()).ok_or_else(|| {
                Error::invalid(format!("pair refers to unknown world {:?}", p.workspace))
            })?;
            let (f, o) = heuristic.inputs(&p.q_t, &p.q_goal, ws, model)?;
            out.feature_width = f.len();
            out.obstacle_width = o.len();
            out.features.extend(f);
            out.obstacles.extend(o);
            out.targets.extend(p.target.0.iter().map(|v| v / scale));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn gather(data: &[f64], width: usize, rows: &[usize]) -> Result<Tensor> {
        let mut v = Vec::with_capacity(rows.len() * width);
        for &r in rows {
            v.extend_from_slice(&data[r * width..(r + 1) * width]);
        }
        Tensor::new(rows.len(), width, v)
    }

    fn batch(&self, rows: &[usize]) -> Result<(Tensor, Tensor, Tensor)> {
        Ok((
            Self::gather(&self.features, self.feature_width, rows)?,
            Self::gather(&self.obstacles, self.obstacle_width, rows)?,
            Self::gather(&self.targets, crate::kinematics::DOF, rows)?,
        ))
    }
}

fn forward_loss(
    h: &Heuristic,
    data: &EncodedPairs,
    rows: &[usize],
    mode: DropoutMode,
    rng: &mut rng::Rng,
) -> Result<(Graph, crate::tensor::Var)> {
    let (f, o, t) = data.batch(rows)?;
    let mut g = Graph::new();
    let fv = g.constant(f);
    let ov = g.constant(o);
    let out = h.forward(&mut g, fv, ov, mode, rng)?;
    let loss = g.mse_loss(out, &t)?;
    Ok((g, loss))
}

/// Mean squared error over `rows` in normalized angle space, dropout off.
pub fn encoded_loss(
    h: &Heuristic,
    data: &EncodedPairs,
    rows: &[usize],
    batch: usize,
) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::invalid("loss over an empty set"));
    }
    let mut total = 0.0;
    let mut rng = rng::seeded(0);
    for chunk in rows.chunks(batch.max(1)) {
        let (g, loss) = forward_loss(h, data, chunk, DropoutMode::Off, &mut rng)?;
        total += g.value(loss).data()[0] * chunk.len() as f64;
    }
    Ok(total / rows.len() as f64)
}

/// Mean squared error of the deterministic heuristic over `pairs`.
pub fn evaluate_loss(
    pairs: &[TrainingPair],
    worlds: &[Workspace],
    model: &KinematicModel,
    heuristic: &Heuristic,
) -> Result<f64> {
    let data = EncodedPairs::new(pairs, worlds, model, heuristic)?;
    let rows: Vec<usize> = (0..data.len()).collect();
    encoded_loss(heuristic, &data, &rows, 256)
}

#[derive(Serialize, Deserialize)]
struct TrainState {
    config: TrainConfig,
    heuristic: HeuristicConfig,
    epoch: usize,
    best_validation: Option<f64>,
    since_best: usize,
    done: bool,
    report: TrainReport,
    adam: AdamState,
    best_weights: String,
}

/// Epoch-by-epoch trainer with checkpointing. Epoch `e` shuffles and drops out with a
/// generator seeded by `derive_seed(seed, e)`, so resuming from a checkpoint continues
/// exactly as an uninterrupted run would.
pub struct Trainer {
    config: TrainConfig,
    heuristic: Heuristic,
    adam: AdamState,
    data: EncodedPairs,
    train_rows: Vec<usize>,
    validation_rows: Vec<usize>,
    epoch: usize,
    best_validation: f64,
    best: ParamStore,
    since_best: usize,
    done: bool,
    report: TrainReport,
}

impl Trainer {
    pub fn new(
        pairs: &[TrainingPair],
        worlds: &[Workspace],
        model: &KinematicModel,
        config: TrainConfig,
        heuristic_config: HeuristicConfig,
    ) -> Result<Self> {
        config.validate()?;
        if heuristic_config.feature_mode != config.feature_mode {
            return Err(Error::invalid(
                "feature mode differs between training and heuristic config",
            ));
        }
        if pairs.len() < 2 {
            return Err(Error::invalid("training needs at least two pairs"));
        }
        let heuristic =
            Heuristic::for_model(model, heuristic_config, derive_named(config.seed, "init"))?;
        let data = EncodedPairs::new(pairs, worlds, model, &heuristic)?;
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut rng::seeded(derive_named(config.seed, "split")));
        let n_val = ((pairs.len() as f64 * config.validation_fraction).round() as usize)
            .clamp(1, pairs.len() - 1);
        let validation_rows = order[..n_val].to_vec();
        let mut train_rows = order[n_val..].to_vec();
        train_rows.sort_unstable();
        let adam = AdamState::new(
            heuristic.params(),
            AdamConfig {
                lr: config.learning_rate,
                ..AdamConfig::default()
            },
        );
        let best = heuristic.params().clone();
        Ok(Self {
            config,
            heuristic,
            adam,
            data,
            train_rows,
            validation_rows,
            epoch: 0,
            best_validation: f64::INFINITY,
            best,
            since_best: 0,
            done: false,
            report: TrainReport::default(),
        })
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn is_done(&self) -> bool {
        self.done || self.epoch >= self.config.epochs
    }

    pub fn report(&self) -> &TrainReport {
        &self.report
    }

    /// Runs one epoch; returns `(train loss, validation loss)`.
    pub fn run_epoch(&mut self) -> Result<(f64, f64)> {
        let started = Instant::now();
        let mut rng = rng::seeded(derive_seed(self.config.seed, self.epoch as u64));
        let mut rows = self.train_rows.clone();
        rows.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in rows.chunks(self.config.batch_size) {
            let (g, loss) = forward_loss(
                &self.heuristic,
                &self.data,
                chunk,
                DropoutMode::Train,
                &mut rng,
            )?;
            let value = g.value(loss).data()[0];
            if !value.is_finite() {
                return Err(Error::NonFinite("training loss"));
            }
            let grads = g.backward(loss)?;
            let store = self.heuristic.params_mut();
            store.zero_grad();
            grads.accumulate(store);
            self.adam.step(store)?;
            total += value * chunk.len() as f64;
        }
        let train = total / rows.len() as f64;
        let validation = encoded_loss(&self.heuristic, &self.data, &self.validation_rows, 256)?;
        self.report.train_loss.push(train);
        self.report.validation_loss.push(validation);
        if validation < self.best_validation {
            self.best_validation = validation;
            self.best = self.heuristic.params().clone();
            self.report.best_epoch = self.epoch;
            self.since_best = 0;
        } else {
            self.since_best += 1;
            if self.config.patience > 0 && self.since_best >= self.config.patience {
                self.done = true;
                self.report.stopped_early = true;
            }
        }
        self.epoch += 1;
        self.report.wall_time += started.elapsed().as_secs_f64();
        Ok((train, validation))
    }

    /// The network with the best validation weights seen so far.
    pub fn best_heuristic(&self) -> Result<Heuristic> {
        let mut h = self.heuristic.clone();
        h.params_mut().load_values_from(&self.best)?;
        Ok(h)
    }

    /// The network with the current weights.
    pub fn current_heuristic(&self) -> &Heuristic {
        &self.heuristic
    }

    /// Sidecar file holding optimizer and progress state next to a weight file.
    pub fn state_path(weights: &Path) -> PathBuf {
        let mut name = weights.file_name().unwrap_or_default().to_os_string();
        name.push(".state");
        weights.with_file_name(name)
    }

    /// Writes the current weights to `path` and the trainer state to its sidecar.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        self.heuristic.save(path)?;
        let state = TrainState {
            config: self.config.clone(),
            heuristic: self.heuristic.config().clone(),
            epoch: self.epoch,
            best_validation: self
                .best_validation
                .is_finite()
                .then_some(self.best_validation),
            since_best: self.since_best,
            done: self.done,
            report: self.report.clone(),
            adam: self.adam.clone(),
            best_weights: self.best.to_document(serde_json::Value::Null)?,
        };
        formats::save(&Self::state_path(path), TRAIN_STATE_FORMAT, &state)
    }

    /// Restores a trainer from a checkpoint. The pairs and worlds must be the ones the
    /// checkpoint was trained on; `epochs` may be raised to continue training.
    pub fn resume(
        path: &Path,
        pairs: &[TrainingPair],
        worlds: &[Workspace],
        model: &KinematicModel,
        epochs: Option<usize>,
    ) -> Result<Self> {
        let state: TrainState = formats::load(&Self::state_path(path), TRAIN_STATE_FORMAT)?;
        let weights = Heuristic::load(path)?;
        if *weights.config() != state.heuristic {
            return Err(Error::Format {
                path: Some(path.to_path_buf()),
                detail: "checkpoint weights and state disagree on the architecture".into(),
            });
        }
        let mut config = state.config;
        if let Some(e) = epochs {
            config.epochs = e;
        }
        let mut t = Self::new(pairs, worlds, model, config, state.heuristic)?;
        t.heuristic
            .params_mut()
            .load_values_from(weights.params())?;
        let (best, _) = ParamStore::from_document(&state.best_weights, Some(path))?;
        t.best.load_values_from(&best)?;
        t.adam = state.adam;
        t.epoch = state.epoch;
        t.best_validation = state.best_validation.unwrap_or(f64::INFINITY);
        t.since_best = state.since_best;
        t.done = state.done;
        t.report = state.report;
        Ok(t)
    }
}

/// Trains a fresh heuristic and returns the best-validation weights with the report.
pub fn train(
    pairs: &[TrainingPair],
    worlds: &[Workspace],
    model: &KinematicModel,
    config: &TrainConfig,
    heuristic_config: HeuristicConfig,
) -> Result<(Heuristic, TrainReport)> {
    let mut t = Trainer::new(pairs, worlds, model, config.clone(), heuristic_config)?;
    while !t.is_done() {
        t.run_epoch()?;
    }
    Ok((t.best_heuristic()?, t.report.clone()))
}
