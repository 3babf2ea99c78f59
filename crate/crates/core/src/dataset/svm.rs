use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DatasetError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Relative objective change between epochs counted as converged.
    pub tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-3,
            epochs: 40,
            seed: 0,
            tol: 1e-3,
        }
    }
}

/// One-vs-rest linear SVM. Row `c` of `weights` scores class `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// False when some class hit the epoch limit before the objective settled.
    pub converged: bool,
}

fn dot(w: &[f64], x: &[f32]) -> f64 {
    w.iter().zip(x).map(|(&a, &b)| a * b as f64).sum()
}

/// Regularized hinge objective; the bias is treated as a weight on a
/// constant feature.
fn objective(w: &[f64], b: f64, data: &[&[f32]], y: &[f64], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let hinge: f64 = data
        .iter()
        .zip(y)
        .map(|(x, &t)| (1.0 - t * (dot(w, x) + b)).max(0.0))
        .sum();
    reg + hinge / data.len() as f64
}

impl LinearSvm {
    /// Stochastic subgradient descent on the hinge loss with step
    /// `1 / (lambda * t)`, one binary problem per class.
    pub fn train(data: &[&[f32]], labels: &[usize], num_classes: usize, cfg: &SvmConfig) -> Result<Self> {
        if data.is_empty() {
            return Err(DatasetError::EmptyTrainSet);
        }
        if num_classes < 2 {
            return Err(DatasetError::InvalidConfig("an SVM needs at least two classes".into()));
        }
        if !(cfg.lambda > 0.0) || cfg.epochs == 0 {
            return Err(DatasetError::InvalidConfig("lambda and epochs must be positive".into()));
        }
        if labels.len() != data.len() || labels.iter().any(|&l| l >= num_classes) {
            return Err(DatasetError::InvalidConfig("labels do not match data".into()));
        }
        let dim = data[0].len();
        let mut weights = Vec::with_capacity(num_classes);
        let mut bias = Vec::with_capacity(num_classes);
        let mut converged = true;
        for c in 0..num_classes {
            let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            let mut w = vec![0.0; dim];
            let mut b = 0.0;
            let mut rng = crate::seed::child_rng(cfg.seed, 0x5F3 + c as u64);
            let mut order: Vec<usize> = (0..data.len()).collect();
            let mut t = 0usize;
            let mut last = f64::INFINITY;
            let mut settled = false;
            for _ in 0..cfg.epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    t += 1;
                    let eta = 1.0 / (cfg.lambda * t as f64);
                    let margin = y[i] * (dot(&w, data[i]) + b);
                    let shrink = 1.0 - eta * cfg.lambda;
                    w.iter_mut().for_each(|v| *v *= shrink);
                    b *= shrink;
                    if margin < 1.0 {
                        let step = eta * y[i];
                        for (v, &x) in w.iter_mut().zip(data[i]) {
                            *v += step * x as f64;
                        }
                        b += step;
                    }
                }
                let obj = objective(&w, b, data, &y, cfg.lambda);
                if (last - obj).abs() <= cfg.tol * obj.abs().max(1e-12) {
                    settled = true;
                    break;
                }
                last = obj;
            }
            if !settled {
                log::warn!("SVM class {c} did not converge in {} epochs", cfg.epochs);
                converged = false;
            }
            weights.push(w);
            bias.push(b);
        }
        Ok(LinearSvm {
            weights,
            bias,
            converged,
        })
    }

    pub fn margins(&self, x: &[f32]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, &b)| dot(w, x) + b)
            .collect()
    }

    /// Class with the largest margin; ties go to the lower index.
    pub fn classify(&self, x: &[f32]) -> usize {
        let m = self.margins(x);
        let mut best = 0;
        for (c, &v) in m.iter().enumerate().skip(1) {
            if v > m[best] {
                best = c;
            }
        }
        best
    }
}
