use serde::{Deserialize, Serialize};

use super::{NnError, Result, Scalar};

const NORM_EPS: f64 = 1e-5;

/// One layer of a subnet. Softmax is only valid as the head's terminal layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2d { filters: usize, kernel: usize, stride: usize },
    MaxPool { window: usize },
    Dense { units: usize },
    FeatureNorm,
    Relu,
    Softmax,
}

/// Activation shape: channels × height × width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub fn new(c: usize, h: usize, w: usize) -> Self {
        Shape { c, h, w }
    }

    pub fn flat(n: usize) -> Self {
        Shape { c: n, h: 1, w: 1 }
    }

    pub fn len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A layer resolved against its input shape, with its slice of the flat
/// parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerPlan {
    pub spec: LayerSpec,
    pub input: Shape,
    pub output: Shape,
    pub offset: usize,
    pub len: usize,
}

impl LayerPlan {
    pub fn new(spec: LayerSpec, input: Shape, offset: usize) -> Result<Self> {
        let bad = |m: String| Err(NnError::InvalidConfig(m));
        let (output, len) = match spec {
            LayerSpec::Conv2d { filters, kernel, stride } => {
                if filters == 0 || kernel == 0 || stride == 0 {
                    return bad(format!("{spec:?}: dimensions must be positive"));
                }
                if input.h < kernel || input.w < kernel {
                    return bad(format!("{spec:?}: kernel larger than {}x{} input", input.h, input.w));
                }
                let out = Shape::new(filters, (input.h - kernel) / stride + 1, (input.w - kernel) / stride + 1);
                (out, filters * input.c * kernel * kernel + filters)
            }
            LayerSpec::MaxPool { window } => {
                if window == 0 || input.h < window || input.w < window {
                    return bad(format!("{spec:?}: window does not fit {}x{} input", input.h, input.w));
                }
                (Shape::new(input.c, input.h / window, input.w / window), 0)
            }
            LayerSpec::Dense { units } => {
                if units == 0 {
                    return bad(format!("{spec:?}: units must be positive"));
                }
                (Shape::flat(units), units * input.len() + units)
            }
            LayerSpec::FeatureNorm => (input, 2 * input.len()),
            LayerSpec::Relu | LayerSpec::Softmax => (input, 0),
        };
        Ok(LayerPlan {
            spec,
            input,
            output,
            offset,
            len,
        })
    }

    /// Fan-in of the layer's weights, for initialization.
    pub fn fan_in(&self) -> usize {
        match self.spec {
            LayerSpec::Conv2d { kernel, .. } => self.input.c * kernel * kernel,
            LayerSpec::Dense { .. } => self.input.len(),
            _ => 0,
        }
    }

    /// Number of weights before the bias block (conv and dense).
    pub fn weight_len(&self) -> usize {
        match self.spec {
            LayerSpec::Conv2d { filters, .. } | LayerSpec::Dense { units: filters } => self.len - filters,
            _ => 0,
        }
    }

    /// Initial parameters: uniform weights scaled by fan-in, zero biases,
    /// unit scale and zero shift for feature normalization.
    pub fn init(&self, rng: &mut impl rand::Rng) -> Vec<f64> {
        match self.spec {
            LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. } => {
                let gain = if matches!(self.spec, LayerSpec::Conv2d { .. }) { 6.0 } else { 3.0 };
                let limit = (gain / self.fan_in() as f64).sqrt();
                let mut p: Vec<f64> = (0..self.weight_len()).map(|_| rng.random_range(-limit..limit)).collect();
                p.resize(self.len, 0.0);
                p
            }
            LayerSpec::FeatureNorm => {
                let n = self.input.len();
                let mut p = vec![1.0; n];
                p.resize(2 * n, 0.0);
                p
            }
            _ => Vec::new(),
        }
    }

    pub fn forward<T: Scalar>(&self, params: &[T], x: &[T], y: &mut Vec<T>) {
        let p = &params[self.offset..self.offset + self.len];
        y.clear();
        y.resize(self.output.len(), T::zero());
        match self.spec {
            LayerSpec::Conv2d { kernel, stride, .. } => conv_forward(self.input, self.output, kernel, stride, p, x, y),
            LayerSpec::MaxPool { window } => pool_forward(self.input, self.output, window, x, y),
            LayerSpec::Dense { units } => {
                let n = self.input.len();
                let (w, b) = p.split_at(units * n);
                for u in 0..units {
                    y[u] = b[u] + dot(&w[u * n..(u + 1) * n], x);
                }
            }
            LayerSpec::FeatureNorm => {
                let n = x.len();
                let (gamma, beta) = p.split_at(n);
                let (mean, inv) = moments(x);
                for i in 0..n {
                    y[i] = gamma[i] * (x[i] - mean) * inv + beta[i];
                }
            }
            LayerSpec::Relu => {
                for (o, &v) in y.iter_mut().zip(x) {
                    *o = if v > T::zero() { v } else { T::zero() };
                }
            }
            LayerSpec::Softmax => softmax_into(x, y),
        }
    }

    /// Accumulate parameter gradients into `dparams` (full-length buffer) and
    /// write the input gradient into `dx`.
    pub fn backward<T: Scalar>(&self, params: &[T], x: &[T], y: &[T], dy: &[T], dx: &mut Vec<T>, dparams: &mut [T]) {
        let p = &params[self.offset..self.offset + self.len];
        let dp = &mut dparams[self.offset..self.offset + self.len];
        dx.clear();
        dx.resize(self.input.len(), T::zero());
        match self.spec {
            LayerSpec::Conv2d { kernel, stride, .. } => {
                conv_backward(self.input, self.output, kernel, stride, p, x, dy, dx, dp)
            }
            LayerSpec::MaxPool { window } => pool_backward(self.input, self.output, window, x, dy, dx),
            LayerSpec::Dense { units } => {
                let n = self.input.len();
                let (w, _) = p.split_at(units * n);
                let (dw, db) = dp.split_at_mut(units * n);
                for u in 0..units {
                    let g = dy[u];
                    if g == T::zero() {
                        continue;
                    }
                    db[u] += g;
                    axpy(g, x, &mut dw[u * n..(u + 1) * n]);
                    axpy(g, &w[u * n..(u + 1) * n], dx);
                }
            }
            LayerSpec::FeatureNorm => {
                let n = x.len();
                let nf = T::from_usize(n).expect("length fits");
                let (gamma, _) = p.split_at(n);
                let (dgamma, dbeta) = dp.split_at_mut(n);
                let (mean, inv) = moments(x);
                let mut sum_d = T::zero();
                let mut sum_dx = T::zero();
                let mut dxhat = vec![T::zero(); n];
                for i in 0..n {
                    let xhat = (x[i] - mean) * inv;
                    dgamma[i] += dy[i] * xhat;
                    dbeta[i] += dy[i];
                    dxhat[i] = dy[i] * gamma[i];
                    sum_d += dxhat[i];
                    sum_dx += dxhat[i] * xhat;
                }
                for i in 0..n {
                    let xhat = (x[i] - mean) * inv;
                    dx[i] = inv / nf * (nf * dxhat[i] - sum_d - xhat * sum_dx);
                }
            }
            LayerSpec::Relu => {
                for i in 0..x.len() {
                    dx[i] = if x[i] > T::zero() { dy[i] } else { T::zero() };
                }
            }
            LayerSpec::Softmax => {
                let s: T = y.iter().zip(dy).map(|(&a, &b)| a * b).sum();
                for i in 0..y.len() {
                    dx[i] = y[i] * (dy[i] - s);
                }
            }
        }
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    // Eight independent partial sums let the compiler vectorize the loop.
    let mut acc = [T::zero(); 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (pa, pb) = (&a[c * 8..c * 8 + 8], &b[c * 8..c * 8 + 8]);
        for l in 0..8 {
            acc[l] += pa[l] * pb[l];
        }
    }
    let mut s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for i in chunks * 8..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (o, &v) in y.iter_mut().zip(x) {
        *o += alpha * v;
    }
}

fn moments<T: Scalar>(x: &[T]) -> (T, T) {
    let n = T::from_usize(x.len()).expect("length fits");
    let mean = x.iter().copied().sum::<T>() / n;
    let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let eps = T::from_f64(NORM_EPS).expect("eps fits");
    (mean, T::one() / (var + eps).sqrt())
}

pub(crate) fn softmax_into<T: Scalar>(x: &[T], y: &mut [T]) {
    let m = x.iter().copied().fold(T::neg_infinity(), T::max);
    let mut s = T::zero();
    for (o, &v) in y.iter_mut().zip(x) {
        *o = (v - m).exp();
        s += *o;
    }
    for o in y.iter_mut() {
        *o = *o / s;
    }
}

// Stride-1 convolution runs on "full-width" rows: output row i is computed
// over all W input columns so the inner loops are long contiguous runs; the
// k-1 trailing columns of each row are discarded.
fn conv_forward<T: Scalar>(input: Shape, output: Shape, k: usize, stride: usize, p: &[T], x: &[T], y: &mut [T]) {
    let (c_in, h, w) = (input.c, input.h, input.w);
    let (f_out, ho, wo) = (output.c, output.h, output.w);
    let (weights, bias) = p.split_at(f_out * c_in * k * k);
    if stride == 1 {
        let run = (ho - 1) * w + wo;
        let mut full = vec![T::zero(); run];
        for f in 0..f_out {
            full.iter_mut().for_each(|v| *v = bias[f]);
            for c in 0..c_in {
                let xc = &x[c * h * w..(c + 1) * h * w];
                for ki in 0..k {
                    for kj in 0..k {
                        let wv = weights[((f * c_in + c) * k + ki) * k + kj];
                        let off = ki * w + kj;
                        axpy(wv, &xc[off..off + run], &mut full);
                    }
                }
            }
            let yf = &mut y[f * ho * wo..(f + 1) * ho * wo];
            for i in 0..ho {
                yf[i * wo..(i + 1) * wo].copy_from_slice(&full[i * w..i * w + wo]);
            }
        }
    } else {
        for f in 0..f_out {
            for i in 0..ho {
                for j in 0..wo {
                    let mut s = bias[f];
                    for c in 0..c_in {
                        for ki in 0..k {
                            for kj in 0..k {
                                s += weights[((f * c_in + c) * k + ki) * k + kj]
                                    * x[(c * h + i * stride + ki) * w + j * stride + kj];
                            }
                        }
                    }
                    y[(f * ho + i) * wo + j] = s;
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn conv_backward<T: Scalar>(
    input: Shape,
    output: Shape,
    k: usize,
    stride: usize,
    p: &[T],
    x: &[T],
    dy: &[T],
    dx: &mut [T],
    dp: &mut [T],
) {
    let (c_in, h, w) = (input.c, input.h, input.w);
    let (f_out, ho, wo) = (output.c, output.h, output.w);
    let nw = f_out * c_in * k * k;
    let (weights, _) = p.split_at(nw);
    let (dw, db) = dp.split_at_mut(nw);
    if stride == 1 {
        let run = (ho - 1) * w + wo;
        let mut full = vec![T::zero(); run];
        for f in 0..f_out {
            let dyf = &dy[f * ho * wo..(f + 1) * ho * wo];
            full.iter_mut().for_each(|v| *v = T::zero());
            for i in 0..ho {
                full[i * w..i * w + wo].copy_from_slice(&dyf[i * wo..(i + 1) * wo]);
            }
            db[f] += dyf.iter().copied().sum::<T>();
            for c in 0..c_in {
                let xc = &x[c * h * w..(c + 1) * h * w];
                let dxc = &mut dx[c * h * w..(c + 1) * h * w];
                for ki in 0..k {
                    for kj in 0..k {
                        let wi = ((f * c_in + c) * k + ki) * k + kj;
                        let off = ki * w + kj;
                        dw[wi] += dot(&full, &xc[off..off + run]);
                        axpy(weights[wi], &full, &mut dxc[off..off + run]);
                    }
                }
            }
        }
    } else {
        for f in 0..f_out {
            for i in 0..ho {
                for j in 0..wo {
                    let g = dy[(f * ho + i) * wo + j];
                    db[f] += g;
                    for c in 0..c_in {
                        for ki in 0..k {
                            for kj in 0..k {
                                let wi = ((f * c_in + c) * k + ki) * k + kj;
                                let xi = (c * h + i * stride + ki) * w + j * stride + kj;
                                dw[wi] += g * x[xi];
                                dx[xi] += g * weights[wi];
                            }
                        }
                    }
                }
            }
        }
    }
}

fn pool_argmax<T: Scalar>(input: Shape, win: usize, x: &[T], c: usize, i: usize, j: usize) -> usize {
    let mut best = (c * input.h + i * win) * input.w + j * win;
    for a in 0..win {
        for b in 0..win {
            let idx = (c * input.h + i * win + a) * input.w + j * win + b;
            if x[idx] > x[best] {
                best = idx;
            }
        }
    }
    best
}

fn pool_forward<T: Scalar>(input: Shape, output: Shape, win: usize, x: &[T], y: &mut [T]) {
    for c in 0..output.c {
        for i in 0..output.h {
            for j in 0..output.w {
                y[(c * output.h + i) * output.w + j] = x[pool_argmax(input, win, x, c, i, j)];
            }
        }
    }
}

fn pool_backward<T: Scalar>(input: Shape, output: Shape, win: usize, x: &[T], dy: &[T], dx: &mut [T]) {
    for c in 0..output.c {
        for i in 0..output.h {
            for j in 0..output.w {
                dx[pool_argmax(input, win, x, c, i, j)] += dy[(c * output.h + i) * output.w + j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let conv = LayerPlan::new(LayerSpec::Conv2d { filters: 16, kernel: 3, stride: 1 }, Shape::new(1, 62, 25), 0).unwrap();
        assert_eq!(conv.output, Shape::new(16, 60, 23));
        assert_eq!(conv.len, 16 * 9 + 16);
        let pool = LayerPlan::new(LayerSpec::MaxPool { window: 2 }, conv.output, 0).unwrap();
        assert_eq!(pool.output, Shape::new(16, 30, 11));
        let strided = LayerPlan::new(LayerSpec::Conv2d { filters: 2, kernel: 3, stride: 2 }, Shape::new(1, 9, 7), 0).unwrap();
        assert_eq!(strided.output, Shape::new(2, 4, 3));
        assert!(LayerPlan::new(LayerSpec::Conv2d { filters: 2, kernel: 9, stride: 1 }, Shape::new(1, 4, 4), 0).is_err());
        assert!(LayerPlan::new(LayerSpec::Dense { units: 0 }, Shape::flat(3), 0).is_err());
    }

    #[test]
    fn conv_matches_direct_sum() {
        // Stride-1 fast path against the generic loop.
        let input = Shape::new(2, 6, 5);
        let spec = LayerSpec::Conv2d { filters: 3, kernel: 3, stride: 1 };
        let plan = LayerPlan::new(spec, input, 0).unwrap();
        let mut rng = crate::seed::rng(9);
        let params: Vec<f64> = (0..plan.len).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let x: Vec<f64> = (0..input.len()).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let mut y = Vec::new();
        plan.forward(&params, &x, &mut y);
        let (w, b) = params.split_at(3 * 2 * 9);
        for f in 0..3 {
            for i in 0..4 {
                for j in 0..3 {
                    let mut s = b[f];
                    for c in 0..2 {
                        for a in 0..3 {
                            for bb in 0..3 {
                                s += w[((f * 2 + c) * 3 + a) * 3 + bb] * x[(c * 6 + i + a) * 5 + j + bb];
                            }
                        }
                    }
                    assert!((y[(f * 4 + i) * 3 + j] - s).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pool_and_relu() {
        let plan = LayerPlan::new(LayerSpec::MaxPool { window: 2 }, Shape::new(1, 2, 4), 0).unwrap();
        let mut y = Vec::new();
        plan.forward::<f64>(&[], &[1.0, 5.0, -1.0, -2.0, 3.0, 2.0, -3.0, -0.5], &mut y);
        assert_eq!(y, vec![5.0, -0.5]);
        let relu = LayerPlan::new(LayerSpec::Relu, Shape::flat(3), 0).unwrap();
        relu.forward::<f64>(&[], &[-1.0, 0.0, 2.0], &mut y);
        assert_eq!(y, vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn feature_norm_standardizes() {
        let plan = LayerPlan::new(LayerSpec::FeatureNorm, Shape::flat(4), 0).unwrap();
        let params = plan.init(&mut crate::seed::rng(0));
        let mut y = Vec::new();
        plan.forward(&params, &[1.0, 2.0, 3.0, 4.0], &mut y);
        let mean: f64 = y.iter().sum::<f64>() / 4.0;
        let var: f64 = y.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-4);
    }
}
