use serde::{Deserialize, Serialize};

use super::model::{Input, Network};
use super::{NnError, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Audio,
    Image,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActMaxResult<T> {
    /// Optimized input grid, values in `[0, 1]`.
    pub input: Vec<T>,
    /// Class logit before the first step and after every accepted step.
    pub logit_trace: Vec<T>,
}

fn with_input<'a, T: Scalar>(
    modality: Modality,
    x: &'a [T],
    other: &'a [T],
    audio_used: bool,
    image_used: bool,
) -> Input<'a, T> {
    match modality {
        Modality::Audio => Input {
            audio: Some(x),
            image: image_used.then_some(other),
        },
        Modality::Image => Input {
            audio: audio_used.then_some(other),
            image: Some(x),
        },
    }
}

/// Projected gradient ascent on one input modality, maximizing the
/// pre-softmax logit of `class`. The other modality is held at zero.
///
/// Each iteration tries a step along the gradient, clamps to `[0, 1]`, and
/// halves the step until the logit does not decrease; a successful step
/// grows the next trial step by half. Stops early once no step helps.
///
/// Ascent runs from an all-zero and from a mid-gray start (an all-zero
/// input can sit on ReLU kinks with no gradient); the better end point wins.
pub fn activation_maximization<T: Scalar>(
    net: &Network<T>,
    class: usize,
    iters: usize,
    step: f64,
    modality: Modality,
) -> Result<ActMaxResult<T>> {
    let a = ascend(net, class, iters, step, modality, T::zero())?;
    let b = ascend(net, class, iters, step, modality, T::from_f64(0.5).expect("fits"))?;
    Ok(if b.logit_trace.last() > a.logit_trace.last() { b } else { a })
}

fn ascend<T: Scalar>(
    net: &Network<T>,
    class: usize,
    iters: usize,
    step: f64,
    modality: Modality,
    start: T,
) -> Result<ActMaxResult<T>> {
    let cfg = net.config();
    if class >= cfg.num_classes {
        return Err(NnError::LabelOutOfRange {
            label: class,
            classes: cfg.num_classes,
        });
    }
    let (audio_used, image_used) = (cfg.uses_audio(), cfg.uses_image());
    let (len, other_len) = match modality {
        Modality::Audio if audio_used => (cfg.audio_shape[0] * cfg.audio_shape[1], cfg.image_shape[0] * cfg.image_shape[1]),
        Modality::Image if image_used => (cfg.image_shape[0] * cfg.image_shape[1], cfg.audio_shape[0] * cfg.audio_shape[1]),
        _ => return Err(NnError::MissingModality(if modality == Modality::Audio { "audio" } else { "image" })),
    };
    let other = vec![T::zero(); other_len];
    let logit = |x: &[T]| -> Result<T> {
        Ok(net.forward_trace(&with_input(modality, x, &other, audio_used, image_used))?.logits[class])
    };

    let mut x = vec![start; len];
    let mut current = logit(&x)?;
    let mut trace = vec![current];
    let mut s = T::from_f64(step).expect("step fits");
    let half = T::from_f64(0.5).expect("fits");
    let grow = T::from_f64(1.5).expect("fits");
    let mut dlogits = vec![T::zero(); cfg.num_classes];
    dlogits[class] = T::one();
    let mut scratch = vec![T::zero(); net.num_params()];

    for _ in 0..iters {
        let tr = net.forward_trace(&with_input(modality, &x, &other, audio_used, image_used))?;
        let g = net.backward(&tr, &dlogits, &mut scratch);
        let g = match modality {
            Modality::Audio => g.audio,
            Modality::Image => g.image,
        }
        .expect("gradient for the optimized modality");
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<T> = x
                .iter()
                .zip(&g)
                .map(|(&v, &d)| (v + s * d).max(T::zero()).min(T::one()))
                .collect();
            if cand == x {
                break;
            }
            let val = logit(&cand)?;
            if val >= current {
                x = cand;
                current = val;
                accepted = true;
                s = s * grow;
                break;
            }
            s = s * half;
        }
        if !accepted {
            break;
        }
        trace.push(current);
    }
    Ok(ActMaxResult { input: x, logit_trace: trace })
}
