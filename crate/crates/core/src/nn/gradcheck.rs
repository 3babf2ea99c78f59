//! Central finite-difference checks of the analytic gradients.

use super::loss::cross_entropy;
use super::model::Network;
use super::train::{batch_gradient, predict_sample, Sample};
use super::Result;

/// Relative error `|a - b| / max(|a|, |b|)` over a block of parameters,
/// measured as vector norms.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb: f64 = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn batch_loss(net: &Network<f64>, batch: &[&Sample]) -> Result<f64> {
    let mut s = 0.0;
    for x in batch {
        s += cross_entropy(&predict_sample(net, x)?, x.label)?;
    }
    Ok(s / batch.len() as f64)
}

/// Per parameter block: `(name, relative error)` between backprop and
/// central differences with step `h`. At most `max_per_block` parameters of
/// each block are probed, evenly spaced.
pub fn check_parameters(
    net: &Network<f64>,
    batch: &[&Sample],
    h: f64,
    max_per_block: usize,
) -> Result<Vec<(String, f64)>> {
    let (_, grad) = batch_gradient(net, batch)?;
    let mut probe = net.clone();
    let mut out = Vec::new();
    for (name, range) in net.param_blocks() {
        let n = range.len();
        let stride = n.div_ceil(max_per_block.max(1)).max(1);
        let mut analytic = Vec::new();
        let mut numeric = Vec::new();
        for i in range.step_by(stride) {
            let orig = probe.params[i];
            probe.params[i] = orig + h;
            let up = batch_loss(&probe, batch)?;
            probe.params[i] = orig - h;
            let down = batch_loss(&probe, batch)?;
            probe.params[i] = orig;
            analytic.push(grad[i]);
            numeric.push((up - down) / (2.0 * h));
        }
        out.push((name, relative_error(&analytic, &numeric)));
    }
    Ok(out)
}
