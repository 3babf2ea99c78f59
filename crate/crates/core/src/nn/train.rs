use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, CheckpointMeta};
use super::loss::{cross_entropy, cross_entropy_logit_grad};
use super::model::{argmax, Input, ModelConfig, Network};
use super::optim::{Adam, AdamConfig};
use super::{NnError, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: AdamConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Fraction of the training data held back for per-epoch validation loss.
    pub val_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: AdamConfig::default(),
            batch_size: 32,
            epochs: 20,
            seed: 0,
            val_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(NnError::InvalidConfig("batch size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(NnError::InvalidConfig(format!(
                "validation fraction {} outside [0, 1)",
                self.val_fraction
            )));
        }
        Ok(())
    }
}

/// One labelled training example. Grids are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub audio: Option<Vec<f32>>,
    pub image: Option<Vec<f32>>,
    pub label: usize,
}

impl Sample {
    pub fn audio(audio: Vec<f32>, label: usize) -> Self {
        Sample {
            audio: Some(audio),
            image: None,
            label,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

fn cast_vec<T: Scalar>(v: &Option<Vec<f32>>) -> Option<Vec<T>> {
    v.as_ref()
        .map(|x| x.iter().map(|&a| T::from_f32(a).expect("finite input")).collect())
}

/// Forward one sample, returning its probabilities.
pub fn predict_sample<T: Scalar>(net: &Network<T>, s: &Sample) -> Result<Vec<T>> {
    let a = cast_vec::<T>(&s.audio);
    let i = cast_vec::<T>(&s.image);
    net.forward(&Input {
        audio: a.as_deref(),
        image: i.as_deref(),
    })
}

/// Loss and parameter gradient of one sample, in a fresh buffer.
pub fn sample_gradient<T: Scalar>(net: &Network<T>, s: &Sample) -> Result<(T, Vec<T>)> {
    let a = cast_vec::<T>(&s.audio);
    let i = cast_vec::<T>(&s.image);
    let trace = net.forward_trace(&Input {
        audio: a.as_deref(),
        image: i.as_deref(),
    })?;
    let loss = cross_entropy(&trace.probs, s.label)?;
    let mut g = vec![T::zero(); net.num_params()];
    net.backward(&trace, &cross_entropy_logit_grad(&trace.probs, s.label), &mut g);
    Ok((loss, g))
}

/// Mean loss and mean gradient over a batch. Per-sample gradients may be
/// computed in parallel; they are always summed in batch order.
pub fn batch_gradient<T: Scalar>(net: &Network<T>, batch: &[&Sample]) -> Result<(T, Vec<T>)> {
    let parts: Vec<Result<(T, Vec<T>)>> = batch.par_iter().map(|s| sample_gradient(net, s)).collect();
    let mut total = vec![T::zero(); net.num_params()];
    let mut loss = T::zero();
    for p in parts {
        let (l, g) = p?;
        loss += l;
        for (t, v) in total.iter_mut().zip(&g) {
            *t += *v;
        }
    }
    let n = T::from_usize(batch.len()).expect("batch size fits");
    total.iter_mut().for_each(|v| *v = *v / n);
    Ok((loss / n, total))
}

pub fn mean_loss<T: Scalar>(net: &Network<T>, data: &[&Sample]) -> Result<f64> {
    if data.is_empty() {
        return Ok(f64::NAN);
    }
    let losses: Vec<Result<T>> = data
        .par_iter()
        .map(|s| cross_entropy(&predict_sample(net, s)?, s.label))
        .collect();
    let mut sum = 0.0;
    for l in losses {
        sum += l?.to_f64().unwrap_or(f64::NAN);
    }
    Ok(sum / data.len() as f64)
}

pub fn predict_all<T: Scalar>(net: &Network<T>, data: &[Sample]) -> Result<Vec<usize>> {
    data.par_iter()
        .map(|s| predict_sample(net, s).map(|p| argmax(&p)))
        .collect()
}

fn check_data(data: &[Sample], classes: usize) -> Result<()> {
    if data.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    if let Some(s) = data.iter().find(|s| s.label >= classes) {
        return Err(NnError::LabelOutOfRange { label: s.label, classes });
    }
    Ok(())
}

/// Train in place with seeded shuffled mini-batches and ADAM.
pub fn train_network<T: Scalar>(net: &mut Network<T>, data: &[Sample], cfg: &TrainConfig) -> Result<History> {
    cfg.validate()?;
    check_data(data, net.num_classes())?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut crate::seed::child_rng(cfg.seed, 0x5A1));
    let n_val = ((data.len() as f64) * cfg.val_fraction).floor() as usize;
    let n_val = n_val.min(data.len() - 1);
    let val: Vec<&Sample> = order[..n_val].iter().map(|&i| &data[i]).collect();
    let mut train_idx: Vec<usize> = order[n_val..].to_vec();

    let mut opt = Adam::new(cfg.optimizer, net.num_params());
    let mut history = History::default();
    for epoch in 0..cfg.epochs {
        train_idx.shuffle(&mut crate::seed::child_rng(cfg.seed, 0xE90C + epoch as u64));
        let mut sum = 0.0;
        for chunk in train_idx.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &data[i]).collect();
            let (loss, grad) = batch_gradient(net, &batch)?;
            let loss = loss.to_f64().unwrap_or(f64::NAN);
            if !loss.is_finite() {
                return Err(NnError::NonFinite(format!("training loss at epoch {epoch}")));
            }
            sum += loss * batch.len() as f64;
            opt.step(&mut net.params, &grad);
        }
        history.train_loss.push(sum / train_idx.len() as f64);
        if !val.is_empty() {
            history.val_loss.push(mean_loss(net, &val)?);
        }
        log::debug!(
            "epoch {epoch}: train {:.4} val {:?}",
            history.train_loss[epoch],
            history.val_loss.last()
        );
    }
    Ok(history)
}

/// Initialize from `cfg.seed`, train, and package as a checkpoint.
pub fn train(config: ModelConfig, data: &[Sample], cfg: &TrainConfig) -> Result<Checkpoint> {
    let mut net = Network::<f32>::new(config, cfg.seed)?;
    let history = train_network(&mut net, data, cfg)?;
    Ok(Checkpoint::from_network(
        &net,
        CheckpointMeta {
            seed: cfg.seed,
            train: Some(*cfg),
            history,
            ..CheckpointMeta::default()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::layers::LayerSpec;
    use crate::nn::Merge;

    fn small_config() -> ModelConfig {
        ModelConfig {
            audio_net: Some(vec![
                LayerSpec::Conv2d { filters: 2, kernel: 3, stride: 1 },
                LayerSpec::Relu,
                LayerSpec::MaxPool { window: 2 },
                LayerSpec::Dense { units: 8 },
                LayerSpec::FeatureNorm,
            ]),
            visual_net: None,
            audio_shape: [8, 6],
            image_shape: [8, 6],
            merge: Merge::None,
            num_classes: 2,
        }
    }

    /// Class 0 lights the top half, class 1 the bottom half, plus noise.
    fn toy(n: usize, seed: u64) -> Vec<Sample> {
        use rand::Rng;
        let mut rng = crate::seed::rng(seed);
        (0..n)
            .map(|i| {
                let label = i % 2;
                let grid = (0..48)
                    .map(|p| {
                        let top = p / 6 < 4;
                        let on = (label == 0) == top;
                        (if on { 0.8 } else { 0.2 }) + rng.random_range(-0.1f32..0.1)
                    })
                    .collect();
                Sample::audio(grid, label)
            })
            .collect()
    }

    #[test]
    fn zero_lr_leaves_parameters() {
        let data = toy(20, 1);
        let mut net = Network::<f32>::new(small_config(), 5).unwrap();
        let before = net.params.clone();
        let cfg = TrainConfig {
            optimizer: AdamConfig { lr: 0.0, ..AdamConfig::default() },
            epochs: 3,
            ..TrainConfig::default()
        };
        train_network(&mut net, &data, &cfg).unwrap();
        assert_eq!(net.params, before);
    }

    #[test]
    fn separable_toy_converges_for_three_seeds() {
        for seed in 0..3 {
            let data = toy(64, 10 + seed);
            let cfg = TrainConfig {
                epochs: 500,
                seed,
                ..TrainConfig::default()
            };
            let mut net = Network::<f32>::new(small_config(), seed).unwrap();
            let h = train_network(&mut net, &data, &cfg).unwrap();
            let last = *h.train_loss.last().unwrap();
            assert!(last < 0.05, "seed {seed}: {last}");
        }
    }

    #[test]
    fn deterministic_checkpoints() {
        let data = toy(40, 2);
        let cfg = TrainConfig {
            epochs: 5,
            seed: 7,
            val_fraction: 0.2,
            ..TrainConfig::default()
        };
        let a = train(small_config(), &data, &cfg).unwrap();
        let b = train(small_config(), &data, &cfg).unwrap();
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
        assert_eq!(a.meta.history.val_loss.len(), 5);
    }

    #[test]
    fn data_errors() {
        let cfg = TrainConfig::default();
        assert!(matches!(train(small_config(), &[], &cfg), Err(NnError::EmptyDataset)));
        let bad = vec![Sample::audio(vec![0.0; 48], 5)];
        assert!(matches!(train(small_config(), &bad, &cfg), Err(NnError::LabelOutOfRange { .. })));
    }
}
