use super::{NnError, Result, Scalar};

pub const PROB_FLOOR: f64 = 1e-12;
const SIMPLEX_TOL: f64 = 1e-4;

pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let mut p = vec![T::zero(); logits.len()];
    super::layers::softmax_into(logits, &mut p);
    p
}

/// Categorical cross entropy `-log p[label]` with `p` clamped at 1e-12.
pub fn cross_entropy<T: Scalar>(probs: &[T], label: usize) -> Result<T> {
    if label >= probs.len() {
        return Err(NnError::LabelOutOfRange {
            label,
            classes: probs.len(),
        });
    }
    let sum = probs.iter().copied().sum::<T>().to_f64().unwrap_or(f64::NAN);
    if probs.iter().any(|p| !p.is_finite() || *p < T::zero()) || (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(NnError::InvalidDistribution(format!("entries sum to {sum}")));
    }
    let floor = T::from_f64(PROB_FLOOR).expect("floor fits");
    Ok(-probs[label].max(floor).ln())
}

/// Gradient of softmax + cross entropy with respect to the logits: `p - y`.
pub fn cross_entropy_logit_grad<T: Scalar>(probs: &[T], label: usize) -> Vec<T> {
    let mut g = probs.to_vec();
    g[label] -= T::one();
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(cross_entropy(&[0.0, 1.0, 0.0], 1).unwrap(), 0.0);
        let u = cross_entropy(&[1.0 / 3.0; 3], 0).unwrap();
        assert!((u - 3f64.ln()).abs() < 1e-12);
        let mut last = 0.0;
        for p in [0.9, 0.7, 0.5, 0.2, 0.01] {
            let l = cross_entropy(&[p, 1.0 - p], 0).unwrap();
            assert!(l > last);
            last = l;
        }
        assert!(cross_entropy::<f64>(&[0.0, 1.0], 0).unwrap().is_finite());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(cross_entropy(&[0.5, 0.6], 0), Err(NnError::InvalidDistribution(_))));
        assert!(matches!(cross_entropy(&[f64::NAN, 1.0], 0), Err(NnError::InvalidDistribution(_))));
        assert!(matches!(cross_entropy(&[0.5, 0.5], 2), Err(NnError::LabelOutOfRange { .. })));
    }

    #[test]
    fn logit_gradient_is_p_minus_y() {
        let logits: [f64; 3] = [0.3, -1.2, 2.0];
        let p = softmax(&logits);
        let g = cross_entropy_logit_grad(&p, 2);
        let h = 1e-6;
        for i in 0..3 {
            let mut a = logits;
            let mut b = logits;
            a[i] += h;
            b[i] -= h;
            let fd = (cross_entropy(&softmax(&a), 2).unwrap() - cross_entropy(&softmax(&b), 2).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }
}
