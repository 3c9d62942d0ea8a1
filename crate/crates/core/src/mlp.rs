//! Black-box power model: a small fully connected ReLU network.
//!
//! Architecture 3 -> 24 -> 4 -> 1 with ReLU on both hidden layers and on
//! the output (power is nonnegative). Inputs (airtime, snr, mcs) are
//! z-scored with statistics frozen from the training split; the target
//! stays in raw watts. Training minimizes mean squared error plus an L1
//! activity penalty on the hidden and output activations, with Adam on a
//! single sequential stream so a (seed, data, config) triple reproduces
//! the model bit-for-bit. All arithmetic is f64.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Sample};
use crate::error::TrainError;

/// Stock layer widths.
pub const DEFAULT_LAYER_DIMS: [usize; 4] = [3, 24, 4, 1];

/// Per-feature standardization statistics, frozen at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl NormStats {
    /// Mean/std of (airtime, snr, mcs) over a dataset. A zero-variance
    /// feature gets std 1 so the invariant `std > 0` always holds.
    pub fn from_dataset(ds: &Dataset) -> NormStats {
        let n = ds.len() as f64;
        let mut mean = [0.0f64; 3];
        for s in ds.samples() {
            mean[0] += s.airtime;
            mean[1] += s.snr_db;
            mean[2] += f64::from(s.mcs);
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = [0.0f64; 3];
        for s in ds.samples() {
            let f = [s.airtime, s.snr_db, f64::from(s.mcs)];
            for i in 0..3 {
                let d = f[i] - mean[i];
                var[i] += d * d;
            }
        }
        let mut std = [0.0f64; 3];
        for i in 0..3 {
            let s = (var[i] / n).sqrt();
            std[i] = if s > 0.0 { s } else { 1.0 };
        }
        NormStats { mean, std }
    }

    pub fn identity() -> NormStats {
        NormStats {
            mean: [0.0; 3],
            std: [1.0; 3],
        }
    }

    fn apply(&self, airtime: f64, snr_db: f64, mcs: u8) -> [f64; 3] {
        [
            (airtime - self.mean[0]) / self.std[0],
            (snr_db - self.mean[1]) / self.std[1],
            (f64::from(mcs) - self.mean[2]) / self.std[2],
        ]
    }
}

/// A trained (or initialized) network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_dims: Vec<usize>,
    /// Row-major per layer: `weights[l][out * fan_in + in]`.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    norm: NormStats,
}

impl MlpModel {
    /// All-zero network (predicts 0 everywhere).
    pub fn zeros(layer_dims: &[usize]) -> MlpModel {
        let weights = layer_pairs(layer_dims)
            .map(|(i, o)| vec![0.0; i * o])
            .collect();
        let biases = layer_pairs(layer_dims).map(|(_, o)| vec![0.0; o]).collect();
        MlpModel {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            norm: NormStats::identity(),
        }
    }

    /// He-style uniform init: weights from U(-sqrt(6/fan_in), +...), biases
    /// zero. Draw order is layer-major, row-major, which pins the RNG
    /// stream layout.
    pub fn he_init(layer_dims: &[usize], norm: NormStats, rng: &mut ChaCha8Rng) -> MlpModel {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (fan_in, fan_out) in layer_pairs(layer_dims) {
            let limit = (6.0 / fan_in as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-limit..limit))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        MlpModel {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            norm,
        }
    }

    /// Rebuilds a model from serialized parts, validating shapes.
    pub fn from_parts(
        layer_dims: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        norm: NormStats,
    ) -> Result<MlpModel, TrainError> {
        let n_layers = layer_dims.len().saturating_sub(1);
        if layer_dims.len() < 2 || weights.len() != n_layers || biases.len() != n_layers {
            return Err(TrainError::DimensionMismatch {
                expected: layer_dims.clone(),
                found: vec![weights.len(), biases.len()],
            });
        }
        for (l, (fan_in, fan_out)) in layer_pairs(&layer_dims).enumerate() {
            if weights[l].len() != fan_in * fan_out || biases[l].len() != fan_out {
                return Err(TrainError::DimensionMismatch {
                    expected: vec![fan_in * fan_out, fan_out],
                    found: vec![weights[l].len(), biases[l].len()],
                });
            }
        }
        if norm.std.iter().any(|&s| !(s > 0.0)) {
            return Err(TrainError::InvalidConfig(
                "norm std entries must be > 0".into(),
            ));
        }
        Ok(MlpModel {
            layer_dims,
            weights,
            biases,
            norm,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn norm_stats(&self) -> &NormStats {
        &self.norm
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Predicted power in watts; nonnegative by the output ReLU.
    pub fn predict(&self, airtime: f64, snr_db: f64, mcs: u8) -> f64 {
        let x = self.norm.apply(airtime, snr_db, mcs);
        let mut acts = self.fresh_buffers();
        self.forward(&x, &mut acts);
        acts.post.last().unwrap()[0]
    }

    fn fresh_buffers(&self) -> Activations {
        Activations {
            pre: self.layer_dims[1..].iter().map(|&d| vec![0.0; d]).collect(),
            post: self.layer_dims[1..].iter().map(|&d| vec![0.0; d]).collect(),
        }
    }

    fn forward(&self, x: &[f64; 3], acts: &mut Activations) {
        for l in 0..self.weights.len() {
            let fan_in = self.layer_dims[l];
            let fan_out = self.layer_dims[l + 1];
            // Split borrows: input of layer l is x or post[l-1].
            let (done, rest) = acts.post.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &done[l - 1] };
            let post = &mut rest[0];
            let pre = &mut acts.pre[l];
            for o in 0..fan_out {
                let mut z = self.biases[l][o];
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                for (w, v) in row.iter().zip(input) {
                    z += w * v;
                }
                pre[o] = z;
                post[o] = if z > 0.0 { z } else { 0.0 };
            }
        }
    }
}

struct Activations {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

fn layer_pairs(dims: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    dims.windows(2).map(|w| (w[0], w[1]))
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub l1_activity_coeff: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            learning_rate: 0.001,
            batch_size: 32,
            epochs: 220,
            l1_activity_coeff: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            shuffle_each_epoch: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.l1_activity_coeff < 0.0 {
            return Err(TrainError::InvalidConfig(
                "l1_activity_coeff must be >= 0".into(),
            ));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(TrainError::InvalidConfig(format!("{name} must be in [0, 1)")));
            }
        }
        if !(self.adam_eps > 0.0) {
            return Err(TrainError::InvalidConfig("adam_eps must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-epoch record of the training loss (MSE + activity penalty).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub epoch_losses: Vec<f64>,
    pub total_steps: usize,
}

/// Trains a fresh network on the dataset.
///
/// The output bias starts at the training-target mean; everything else is
/// He-initialized from the seed.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<(MlpModel, TrainingTrace), TrainError> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let norm = NormStats::from_dataset(ds);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::he_init(&DEFAULT_LAYER_DIMS, norm, &mut rng);
    let target_mean =
        ds.samples().iter().map(|s| s.power_w).sum::<f64>() / ds.len() as f64;
    *model.biases.last_mut().unwrap().last_mut().unwrap() = target_mean;
    let trace = run_training(&mut model, ds, cfg, &mut rng)?;
    Ok((model, trace))
}

/// Warm-start training from an existing model's weights.
///
/// Normalization statistics are retained from the source model (not
/// recomputed) so the inherited weights keep their meaning.
pub fn fine_tune(
    model: &MlpModel,
    ds: &Dataset,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainingTrace), TrainError> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if model.layer_dims != DEFAULT_LAYER_DIMS {
        return Err(TrainError::DimensionMismatch {
            expected: DEFAULT_LAYER_DIMS.to_vec(),
            found: model.layer_dims.clone(),
        });
    }
    let mut tuned = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trace = run_training(&mut tuned, ds, cfg, &mut rng)?;
    Ok((tuned, trace))
}

fn run_training(
    model: &mut MlpModel,
    ds: &Dataset,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainingTrace, TrainError> {
    let xs: Vec<[f64; 3]> = ds
        .samples()
        .iter()
        .map(|s| model.norm.apply(s.airtime, s.snr_db, s.mcs))
        .collect();
    let ys: Vec<f64> = ds.samples().iter().map(|s| s.power_w).collect();
    let n = xs.len();

    let mut adam = AdamState::new(model);
    let mut grads = Gradients::zeros(model);
    let mut acts = model.fresh_buffers();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut total_steps = 0usize;

    for epoch in 0..cfg.epochs {
        if cfg.shuffle_each_epoch {
            shuffle(&mut indices, rng);
        }
        let mut loss_sum = 0.0;
        for (step, chunk) in indices.chunks(cfg.batch_size).enumerate() {
            grads.clear();
            let loss = accumulate_batch(model, &xs, &ys, chunk, cfg.l1_activity_coeff,
                &mut grads, &mut acts);
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, step });
            }
            loss_sum += loss * chunk.len() as f64;
            adam.step(model, &grads, cfg);
            total_steps += 1;
        }
        epoch_losses.push(loss_sum / n as f64);
    }

    Ok(TrainingTrace {
        epoch_losses,
        total_steps,
    })
}

/// Fisher-Yates with a pinned RNG stream (one draw per swap).
fn shuffle(indices: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..indices.len()).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
}

/// Batch loss (MSE + L1 activity) with gradients accumulated into `grads`,
/// averaged over the batch.
fn accumulate_batch(
    model: &MlpModel,
    xs: &[[f64; 3]],
    ys: &[f64],
    batch: &[usize],
    l1: f64,
    grads: &mut Gradients,
    acts: &mut Activations,
) -> f64 {
    let b = batch.len() as f64;
    let act_units: usize = model.layer_dims[1..].iter().sum();
    let l1_per_unit = l1 / act_units as f64;
    let n_layers = model.weights.len();

    let mut mse = 0.0;
    let mut activity = 0.0;
    let mut deltas: Vec<Vec<f64>> = model.layer_dims[1..]
        .iter()
        .map(|&d| vec![0.0; d])
        .collect();

    for &i in batch {
        model.forward(&xs[i], acts);
        let pred = acts.post[n_layers - 1][0];
        let err = pred - ys[i];
        mse += err * err;
        activity += acts.post.iter().flatten().map(|a| a.abs()).sum::<f64>();

        // Output layer delta: d(err^2)/dz + activity subgradient.
        let out_pre = acts.pre[n_layers - 1][0];
        deltas[n_layers - 1][0] = if out_pre > 0.0 {
            2.0 * err + l1_per_unit
        } else {
            0.0
        };
        for l in (0..n_layers - 1).rev() {
            let fan_out = model.layer_dims[l + 1];
            let next_out = model.layer_dims[l + 2];
            let next_w = &model.weights[l + 1];
            for o in 0..fan_out {
                if acts.pre[l][o] <= 0.0 {
                    deltas[l][o] = 0.0;
                    continue;
                }
                let mut back = 0.0;
                for q in 0..next_out {
                    back += next_w[q * fan_out + o] * deltas[l + 1][q];
                }
                deltas[l][o] = back + l1_per_unit;
            }
        }

        for l in 0..n_layers {
            let fan_in = model.layer_dims[l];
            let input: &[f64] = if l == 0 { &xs[i] } else { &acts.post[l - 1] };
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for (o, &d) in deltas[l].iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                let row = &mut gw[o * fan_in..(o + 1) * fan_in];
                for (g, v) in row.iter_mut().zip(input) {
                    *g += d * v;
                }
            }
        }
    }

    grads.scale(1.0 / b);
    mse / b + l1_per_unit * activity / b
}

struct Gradients {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros(model: &MlpModel) -> Gradients {
        Gradients {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn clear(&mut self) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    fn scale(&mut self, f: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|g| *g *= f);
        }
    }
}

struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    beta1_pow: f64,
    beta2_pow: f64,
}

impl AdamState {
    fn new(model: &MlpModel) -> AdamState {
        AdamState {
            m_w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            beta1_pow: 1.0,
            beta2_pow: 1.0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &Gradients, cfg: &TrainConfig) {
        self.beta1_pow *= cfg.adam_beta1;
        self.beta2_pow *= cfg.adam_beta2;
        let bc1 = 1.0 - self.beta1_pow;
        let bc2 = 1.0 - self.beta2_pow;
        for l in 0..model.weights.len() {
            update(
                &mut model.weights[l],
                &grads.weights[l],
                &mut self.m_w[l],
                &mut self.v_w[l],
                cfg,
                bc1,
                bc2,
            );
            update(
                &mut model.biases[l],
                &grads.biases[l],
                &mut self.m_b[l],
                &mut self.v_b[l],
                cfg,
                bc1,
                bc2,
            );
        }

        fn update(
            params: &mut [f64],
            grads: &[f64],
            m: &mut [f64],
            v: &mut [f64],
            cfg: &TrainConfig,
            bc1: f64,
            bc2: f64,
        ) {
            for i in 0..params.len() {
                m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grads[i];
                v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grads[i] * grads[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
            }
        }
    }
}

/// Mean absolute activation (hidden + output units) over a sample set.
pub fn mean_activity(model: &MlpModel, samples: &[Sample]) -> f64 {
    let act_units: usize = model.layer_dims[1..].iter().sum();
    let mut acts = model.fresh_buffers();
    let mut total = 0.0;
    for s in samples {
        let x = model.norm.apply(s.airtime, s.snr_db, s.mcs);
        model.forward(&x, &mut acts);
        total += acts.post.iter().flatten().map(|a| a.abs()).sum::<f64>();
    }
    total / (samples.len() * act_units) as f64
}

/// Root mean squared prediction error over a sample set, watts.
pub fn rmse_on(model: &MlpModel, samples: &[Sample]) -> f64 {
    let mut sse = 0.0;
    for s in samples {
        let e = model.predict(s.airtime, s.snr_db, s.mcs) - s.power_w;
        sse += e * e;
    }
    (sse / samples.len() as f64).sqrt()
}

/// Outcome of a finite-difference gradient audit.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Largest relative error among checked parameters.
    pub max_rel_error: f64,
    pub n_checked: usize,
    /// Parameters skipped because a ReLU kink sat within the probe step.
    pub n_excluded: usize,
}

/// Compares analytic gradients of the full training loss against central
/// finite differences over every weight and bias.
///
/// A parameter whose +h/-h probes land on different sides of any ReLU
/// kink (the activation pattern changes) is excluded from the comparison
/// and counted separately, since the loss is not differentiable there.
/// Gradients below the rounding-noise floor of the difference quotient
/// (which cancels ~epsilon of the loss magnitude across the 2h step) are
/// compared against that floor instead of their own magnitude.
pub fn gradient_check(
    model: &MlpModel,
    batch: &[Sample],
    l1_activity_coeff: f64,
    h: f64,
) -> GradCheckReport {
    assert!(!batch.is_empty(), "gradient check needs a nonempty batch");
    let xs: Vec<[f64; 3]> = batch
        .iter()
        .map(|s| model.norm.apply(s.airtime, s.snr_db, s.mcs))
        .collect();
    let ys: Vec<f64> = batch.iter().map(|s| s.power_w).collect();
    let idx: Vec<usize> = (0..batch.len()).collect();

    let mut grads = Gradients::zeros(model);
    let mut acts = model.fresh_buffers();
    let center_loss =
        accumulate_batch(model, &xs, &ys, &idx, l1_activity_coeff, &mut grads, &mut acts);
    let noise_floor = 1e5 * f64::EPSILON * center_loss.abs().max(1.0) / h;

    let mut probe = model.clone();
    let mut max_rel = 0.0f64;
    let mut checked = 0usize;
    let mut excluded = 0usize;

    let n_layers = model.weights.len();
    for l in 0..n_layers {
        for is_bias in [false, true] {
            let len = if is_bias {
                model.biases[l].len()
            } else {
                model.weights[l].len()
            };
            for p in 0..len {
                let original = *param_slot(&mut probe, is_bias, l, p);

                *param_slot(&mut probe, is_bias, l, p) = original + h;
                let (loss_plus, mask_plus) =
                    loss_and_mask(&probe, &xs, &ys, l1_activity_coeff, &mut acts);
                *param_slot(&mut probe, is_bias, l, p) = original - h;
                let (loss_minus, mask_minus) =
                    loss_and_mask(&probe, &xs, &ys, l1_activity_coeff, &mut acts);
                *param_slot(&mut probe, is_bias, l, p) = original;

                if mask_plus != mask_minus {
                    excluded += 1;
                    continue;
                }
                let numeric = (loss_plus - loss_minus) / (2.0 * h);
                let analytic = if is_bias {
                    grads.biases[l][p]
                } else {
                    grads.weights[l][p]
                };
                let rel = (analytic - numeric).abs()
                    / (analytic.abs() + numeric.abs()).max(noise_floor);
                max_rel = max_rel.max(rel);
                checked += 1;
            }
        }
    }

    GradCheckReport {
        max_rel_error: max_rel,
        n_checked: checked,
        n_excluded: excluded,
    }
}

fn param_slot(m: &mut MlpModel, is_bias: bool, l: usize, p: usize) -> &mut f64 {
    if is_bias {
        &mut m.biases[l][p]
    } else {
        &mut m.weights[l][p]
    }
}

fn loss_and_mask(
    model: &MlpModel,
    xs: &[[f64; 3]],
    ys: &[f64],
    l1: f64,
    acts: &mut Activations,
) -> (f64, Vec<bool>) {
    let act_units: usize = model.layer_dims[1..].iter().sum();
    let l1_per_unit = l1 / act_units as f64;
    let b = xs.len() as f64;
    let n_layers = model.weights.len();
    let mut mse = 0.0;
    let mut activity = 0.0;
    let mut mask = Vec::with_capacity(xs.len() * act_units);
    for (x, &y) in xs.iter().zip(ys) {
        model.forward(x, acts);
        let pred = acts.post[n_layers - 1][0];
        mse += (pred - y) * (pred - y);
        activity += acts.post.iter().flatten().map(|a| a.abs()).sum::<f64>();
        mask.extend(acts.pre.iter().flatten().map(|&z| z > 0.0));
    }
    (mse / b + l1_per_unit * activity / b, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DataSource, Scheduler};
    use crate::datagen::{generate, GenConfig};
    use crate::profile::PlatformProfile;

    fn band_dataset(n: usize, seed: u64) -> Dataset {
        let cfg = GenConfig::new(
            PlatformProfile::builtin("Server1").unwrap().noiseless(),
            Scheduler::Default,
            n,
            seed,
        );
        generate(&cfg).unwrap()
    }

    fn noisy_band_dataset(n: usize, seed: u64) -> Dataset {
        let mut profile = PlatformProfile::builtin("Server1").unwrap();
        profile.outlier_prob = 0.0;
        let cfg = GenConfig::new(profile, Scheduler::Default, n, seed);
        generate(&cfg).unwrap()
    }

    #[test]
    fn zero_network_predicts_zero() {
        let model = MlpModel::zeros(&DEFAULT_LAYER_DIMS);
        for (a, c, m) in [(0.0, 0.0, 0), (0.5, 12.0, 7), (1.0, 30.0, 28)] {
            assert_eq!(model.predict(a, c, m), 0.0);
        }
    }

    #[test]
    fn predictions_are_nonnegative() {
        let ds = noisy_band_dataset(200, 9);
        let cfg = TrainConfig {
            epochs: 30,
            ..TrainConfig::default()
        };
        let (model, _) = train(&ds, &cfg).unwrap();
        for a in [0.0, 0.5, 1.0] {
            for c in [0.0, 10.0, 30.0] {
                for m in [0u8, 14, 28] {
                    assert!(model.predict(a, c, m) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn training_is_bit_deterministic() {
        let ds = noisy_band_dataset(150, 4);
        let cfg = TrainConfig {
            epochs: 12,
            seed: 99,
            ..TrainConfig::default()
        };
        let (m1, t1) = train(&ds, &cfg).unwrap();
        let (m2, t2) = train(&ds, &cfg).unwrap();
        assert_eq!(t1, t2);
        for (w1, w2) in m1.weights().iter().zip(m2.weights()) {
            for (a, b) in w1.iter().zip(w2) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert_eq!(
            m1.predict(0.5, 15.0, 14).to_bits(),
            m2.predict(0.5, 15.0, 14).to_bits()
        );
    }

    #[test]
    fn epochs_zero_rejected_and_step_count_exact() {
        let ds = noisy_band_dataset(100, 2);
        let bad = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(train(&ds, &bad).is_err());

        let one = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        let (_, trace) = train(&ds, &one).unwrap();
        assert_eq!(trace.total_steps, 100usize.div_ceil(32));
        assert_eq!(trace.epoch_losses.len(), 1);
    }

    #[test]
    fn default_config_reaches_noise_floor_on_band_data() {
        let sigma = 0.15;
        let ds = noisy_band_dataset(500, 21);
        let (model, trace) = train(&ds, &TrainConfig::default()).unwrap();
        assert!(trace.epoch_losses.iter().all(|l| l.is_finite()));
        let train_rmse = rmse_on(&model, ds.samples());
        assert!(
            (train_rmse - sigma).abs() <= 3.0 * sigma,
            "train rmse {train_rmse} not within 3 sigma of {sigma}"
        );
    }

    #[test]
    fn strong_activity_penalty_shrinks_activations() {
        let ds = noisy_band_dataset(300, 5);
        let base = TrainConfig {
            epochs: 60,
            l1_activity_coeff: 0.0,
            seed: 3,
            ..TrainConfig::default()
        };
        let strong = TrainConfig {
            l1_activity_coeff: 1.0,
            ..base.clone()
        };
        let (m0, _) = train(&ds, &base).unwrap();
        let (m1, _) = train(&ds, &strong).unwrap();
        let a0 = mean_activity(&m0, ds.samples());
        let a1 = mean_activity(&m1, ds.samples());
        assert!(a1 < a0, "activity {a1} should shrink below {a0}");
    }

    #[test]
    fn fine_tune_with_vanishing_rate_keeps_weights() {
        let ds = noisy_band_dataset(120, 6);
        let cfg = TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        };
        let (model, _) = train(&ds, &cfg).unwrap();
        // With lr = 1e-300 the Adam step underflows every weight's ulp.
        let frozen = TrainConfig {
            learning_rate: 1e-300,
            epochs: 1,
            ..TrainConfig::default()
        };
        let (tuned, _) = fine_tune(&model, &ds, &frozen).unwrap();
        for (w1, w2) in model.weights().iter().zip(tuned.weights()) {
            for (a, b) in w1.iter().zip(w2) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert_eq!(model.norm_stats(), tuned.norm_stats());
    }

    #[test]
    fn fine_tune_deterministic_and_keeps_norm_stats() {
        let source = noisy_band_dataset(150, 7);
        let target = noisy_band_dataset(150, 8);
        let cfg = TrainConfig {
            epochs: 15,
            seed: 11,
            ..TrainConfig::default()
        };
        let (model, _) = train(&source, &cfg).unwrap();
        let (t1, tr1) = fine_tune(&model, &target, &cfg).unwrap();
        let (t2, tr2) = fine_tune(&model, &target, &cfg).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(tr1, tr2);
        assert_eq!(t1.norm_stats(), model.norm_stats());
    }

    #[test]
    fn fine_tune_rejects_foreign_dims() {
        let model = MlpModel::zeros(&[3, 8, 1]);
        let ds = noisy_band_dataset(60, 1);
        assert!(matches!(
            fine_tune(&model, &ds, &TrainConfig::default()),
            Err(TrainError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exploding_rate_reports_nonfinite_loss() {
        let ds = noisy_band_dataset(100, 3);
        let cfg = TrainConfig {
            learning_rate: 1e155,
            epochs: 5,
            ..TrainConfig::default()
        };
        match train(&ds, &cfg) {
            Err(TrainError::NonFiniteLoss { .. }) => {}
            other => panic!("expected NonFiniteLoss, got {other:?}"),
        }
    }

    fn random_batch(seed: u64, n: usize) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Sample::new(
                    rng.random_range(0.01..1.0),
                    rng.random_range(0.0..30.0),
                    rng.random_range(0..=28),
                    rng.random_range(5.0..30.0),
                    Scheduler::Custom,
                    "T",
                )
                .unwrap()
            })
            .collect()
    }

    // Finite-difference oracle for the analytic gradients.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let model = MlpModel::he_init(&DEFAULT_LAYER_DIMS, NormStats::identity(), &mut rng);
        let batch = random_batch(18, 8);
        let report = gradient_check(&model, &batch, 1e-4, 1e-5);
        assert!(
            report.max_rel_error <= 1e-4,
            "max rel error {}",
            report.max_rel_error
        );
        let total = report.n_checked + report.n_excluded;
        assert_eq!(total, model.param_count());
        assert!(
            (report.n_excluded as f64) < 0.01 * total as f64,
            "{} of {} excluded",
            report.n_excluded,
            total
        );
    }

    #[test]
    fn zero_network_gradcheck_dead_units() {
        let model = MlpModel::zeros(&DEFAULT_LAYER_DIMS);
        let batch = random_batch(19, 4);
        let report = gradient_check(&model, &batch, 1e-4, 1e-5);
        // Weight gradients feeding dead ReLUs are zero on both routes, so
        // everything that is checked agrees exactly; only bias probes that
        // wake a unit up are excluded.
        assert_eq!(report.max_rel_error, 0.0);
        assert!(report.n_excluded > 0);
    }

    // Standardization absorbs affine input shifts: with dyadic data the
    // arithmetic is exact and the loss traces match bit-for-bit.
    #[test]
    fn snr_shift_with_recomputed_stats_is_invisible() {
        let airtime_grid = [0.25, 0.5, 0.75, 1.0];
        let build = |shift: f64| {
            let samples: Vec<Sample> = (0..64)
                .map(|i| {
                    Sample::new(
                        airtime_grid[i % 4],
                        i as f64 * 0.5 + shift,
                        (i % 29) as u8,
                        10.0 + (i % 16) as f64 * 0.125,
                        Scheduler::Custom,
                        "T",
                    )
                    .unwrap()
                })
                .collect();
            Dataset::new(samples, "T", Scheduler::Custom, None, DataSource::Synthetic).unwrap()
        };
        let cfg = TrainConfig {
            epochs: 8,
            seed: 42,
            ..TrainConfig::default()
        };
        let (_, trace_base) = train(&build(0.0), &cfg).unwrap();
        let (_, trace_shift) = train(&build(2.0), &cfg).unwrap();
        for (a, b) in trace_base.epoch_losses.iter().zip(&trace_shift.epoch_losses) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
        }
    }
}
