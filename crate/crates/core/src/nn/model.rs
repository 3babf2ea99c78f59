use serde::{Deserialize, Serialize};

use super::fusion::{concat_fuse, mfb_backward, mfb_project, mfb_pool, Merge};
use super::layers::{LayerPlan, LayerSpec, Shape};
use super::loss::softmax;
use super::{NnError, Result, Scalar};
use crate::dsp::{N_MELS, N_TIME_BINS};

pub const IMAGE_ROWS: usize = 64;
pub const IMAGE_COLS: usize = 25;

/// Conv(16) → ReLU → Pool → Conv(32) → ReLU → Pool → Dense(64) → FeatureNorm.
pub fn default_subnet() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Conv2d { filters: 16, kernel: 3, stride: 1 },
        LayerSpec::Relu,
        LayerSpec::MaxPool { window: 2 },
        LayerSpec::Conv2d { filters: 32, kernel: 3, stride: 1 },
        LayerSpec::Relu,
        LayerSpec::MaxPool { window: 2 },
        LayerSpec::Dense { units: 64 },
        LayerSpec::FeatureNorm,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub audio_net: Option<Vec<LayerSpec>>,
    pub visual_net: Option<Vec<LayerSpec>>,
    /// `[rows, cols]` of the spectrogram input.
    pub audio_shape: [usize; 2],
    /// `[rows, cols]` of the grayscale image input.
    pub image_shape: [usize; 2],
    pub merge: Merge,
    pub num_classes: usize,
}

impl ModelConfig {
    /// Audio-only network with the default subnet.
    pub fn echo_cnn_a(num_classes: usize) -> Self {
        ModelConfig {
            audio_net: Some(default_subnet()),
            visual_net: None,
            audio_shape: [N_MELS, N_TIME_BINS],
            image_shape: [IMAGE_ROWS, IMAGE_COLS],
            merge: Merge::None,
            num_classes,
        }
    }

    /// Audio-visual network; both subnets use the default layout.
    pub fn echo_cnn_av(num_classes: usize, merge: Merge) -> Self {
        ModelConfig {
            visual_net: Some(default_subnet()),
            merge,
            ..Self::echo_cnn_a(num_classes)
        }
    }

    pub fn uses_audio(&self) -> bool {
        self.audio_net.is_some()
    }

    pub fn uses_image(&self) -> bool {
        self.visual_net.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(NnError::InvalidConfig("need at least two classes".into()));
        }
        let nets = self.audio_net.is_some() as usize + self.visual_net.is_some() as usize;
        match self.merge {
            Merge::None if nets != 1 => {
                return Err(NnError::InvalidConfig("merge `none` needs exactly one subnet".into()))
            }
            Merge::Concat | Merge::Mfb { .. } if nets != 2 => {
                return Err(NnError::InvalidConfig("a merge layer needs both subnets".into()))
            }
            _ => {}
        }
        for net in self.audio_net.iter().chain(&self.visual_net) {
            if net.contains(&LayerSpec::Softmax) {
                return Err(NnError::InvalidConfig("softmax is only allowed as the head's last layer".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct MergePlan {
    merge: Merge,
    x_dim: usize,
    y_dim: usize,
    out_dim: usize,
    offset: usize,
    len: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Plan {
    audio: Vec<LayerPlan>,
    visual: Vec<LayerPlan>,
    merge: MergePlan,
    head: LayerPlan,
    total: usize,
}

fn plan_subnet(specs: &[LayerSpec], input: Shape, offset: &mut usize) -> Result<Vec<LayerPlan>> {
    let mut shape = input;
    let mut out = Vec::with_capacity(specs.len());
    for &s in specs {
        let l = LayerPlan::new(s, shape, *offset)?;
        *offset += l.len;
        shape = l.output;
        out.push(l);
    }
    Ok(out)
}

impl Plan {
    fn new(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let mut offset = 0;
        let audio_in = Shape::new(1, cfg.audio_shape[0], cfg.audio_shape[1]);
        let image_in = Shape::new(1, cfg.image_shape[0], cfg.image_shape[1]);
        let audio = match &cfg.audio_net {
            Some(s) => plan_subnet(s, audio_in, &mut offset)?,
            None => Vec::new(),
        };
        let visual = match &cfg.visual_net {
            Some(s) => plan_subnet(s, image_in, &mut offset)?,
            None => Vec::new(),
        };
        let dim = |net: &[LayerPlan], input: Shape| net.last().map(|l| l.output.len()).unwrap_or(input.len());
        let x_dim = if cfg.uses_audio() { dim(&audio, audio_in) } else { 0 };
        let y_dim = if cfg.uses_image() { dim(&visual, image_in) } else { 0 };
        let (out_dim, len) = match cfg.merge {
            Merge::None => (x_dim + y_dim, 0),
            Merge::Concat => (x_dim + y_dim, 0),
            Merge::Mfb { k, out } => {
                if k == 0 || out == 0 {
                    return Err(NnError::InvalidConfig("MFB factor and output must be positive".into()));
                }
                (out, (x_dim + y_dim) * k * out)
            }
        };
        let merge = MergePlan {
            merge: cfg.merge,
            x_dim,
            y_dim,
            out_dim,
            offset,
            len,
        };
        offset += len;
        let head = LayerPlan::new(LayerSpec::Dense { units: cfg.num_classes }, Shape::flat(out_dim), offset)?;
        offset += head.len;
        Ok(Plan {
            audio,
            visual,
            merge,
            head,
            total: offset,
        })
    }
}

/// Inputs for one example.
#[derive(Debug, Clone, Copy)]
pub struct Input<'a, T> {
    pub audio: Option<&'a [T]>,
    pub image: Option<&'a [T]>,
}

impl<'a, T> Input<'a, T> {
    pub fn audio(audio: &'a [T]) -> Self {
        Input { audio: Some(audio), image: None }
    }

    pub fn audio_visual(audio: &'a [T], image: &'a [T]) -> Self {
        Input {
            audio: Some(audio),
            image: Some(image),
        }
    }
}

/// Every intermediate activation of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    /// Input followed by each layer's output.
    pub audio: Vec<Vec<T>>,
    pub visual: Vec<Vec<T>>,
    pub fused: Vec<T>,
    pub logits: Vec<T>,
    pub probs: Vec<T>,
}

/// Gradients with respect to the inputs.
#[derive(Debug, Clone, Default)]
pub struct InputGrad<T> {
    pub audio: Option<Vec<T>>,
    pub image: Option<Vec<T>>,
}

/// Network parameters stored in one flat vector, laid out in declaration
/// order: audio subnet, visual subnet, merge factors, head.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    config: ModelConfig,
    plan: Plan,
    pub params: Vec<T>,
}

impl<T: Scalar> Network<T> {
    /// Seeded uniform fan-in initialization.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let plan = Plan::new(&config)?;
        let mut rng = crate::seed::child_rng(seed, 0x1417);
        let mut params = Vec::with_capacity(plan.total);
        for l in plan.audio.iter().chain(&plan.visual) {
            params.extend(l.init(&mut rng));
        }
        if let Merge::Mfb { .. } = plan.merge.merge {
            use rand::Rng;
            for dim in [plan.merge.x_dim, plan.merge.y_dim] {
                let limit = (3.0 / dim as f64).sqrt();
                let cols = plan.merge.out_dim * match plan.merge.merge {
                    Merge::Mfb { k, .. } => k,
                    _ => unreachable!(),
                };
                params.extend((0..dim * cols).map(|_| rng.random_range(-limit..limit)));
            }
        }
        params.extend(plan.head.init(&mut rng));
        debug_assert_eq!(params.len(), plan.total);
        Ok(Network {
            config,
            plan,
            params: params.into_iter().map(|v| T::from_f64(v).expect("init fits")).collect(),
        })
    }

    /// All-zero parameters.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        let plan = Plan::new(&config)?;
        let params = vec![T::zero(); plan.total];
        Ok(Network { config, plan, params })
    }

    pub fn from_params(config: ModelConfig, params: Vec<T>) -> Result<Self> {
        let plan = Plan::new(&config)?;
        if params.len() != plan.total {
            return Err(NnError::ShapeMismatch {
                expected: plan.total,
                found: params.len(),
            });
        }
        Ok(Network { config, plan, params })
    }

    pub fn cast<U: Scalar>(&self) -> Network<U> {
        Network {
            config: self.config.clone(),
            plan: self.plan.clone(),
            params: self.params.iter().map(|v| U::from(*v).expect("finite parameter")).collect(),
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn num_params(&self) -> usize {
        self.plan.total
    }

    pub fn num_classes(&self) -> usize {
        self.config.num_classes
    }

    /// `(name, range)` of each parameter block, for per-layer diagnostics.
    pub fn param_blocks(&self) -> Vec<(String, std::ops::Range<usize>)> {
        let mut out = Vec::new();
        for (branch, layers) in [("audio", &self.plan.audio), ("visual", &self.plan.visual)] {
            for (i, l) in layers.iter().enumerate() {
                if l.len > 0 {
                    out.push((format!("{branch}[{i}] {:?}", l.spec), l.offset..l.offset + l.len));
                }
            }
        }
        let m = &self.plan.merge;
        if m.len > 0 {
            let half = m.x_dim * m.len / (m.x_dim + m.y_dim);
            out.push(("mfb U".into(), m.offset..m.offset + half));
            out.push(("mfb V".into(), m.offset + half..m.offset + m.len));
        }
        let h = &self.plan.head;
        out.push(("head".into(), h.offset..h.offset + h.len));
        out
    }

    fn check_input(&self, input: &Input<'_, T>) -> Result<()> {
        let cfg = &self.config;
        match (cfg.uses_audio(), input.audio) {
            (true, None) => return Err(NnError::MissingModality("audio")),
            (true, Some(a)) if a.len() != cfg.audio_shape[0] * cfg.audio_shape[1] => {
                return Err(NnError::ShapeMismatch {
                    expected: cfg.audio_shape[0] * cfg.audio_shape[1],
                    found: a.len(),
                })
            }
            _ => {}
        }
        match (cfg.uses_image(), input.image) {
            (true, None) => return Err(NnError::MissingModality("image")),
            (true, Some(a)) if a.len() != cfg.image_shape[0] * cfg.image_shape[1] => {
                return Err(NnError::ShapeMismatch {
                    expected: cfg.image_shape[0] * cfg.image_shape[1],
                    found: a.len(),
                })
            }
            _ => {}
        }
        Ok(())
    }

    fn run_subnet(&self, layers: &[LayerPlan], x: &[T]) -> Vec<Vec<T>> {
        let mut acts = Vec::with_capacity(layers.len() + 1);
        acts.push(x.to_vec());
        for l in layers {
            let mut y = Vec::new();
            l.forward(&self.params, acts.last().expect("input present"), &mut y);
            acts.push(y);
        }
        acts
    }

    pub fn forward_trace(&self, input: &Input<'_, T>) -> Result<Trace<T>> {
        self.check_input(input)?;
        let audio = match (self.config.uses_audio(), input.audio) {
            (true, Some(a)) => self.run_subnet(&self.plan.audio, a),
            _ => Vec::new(),
        };
        let visual = match (self.config.uses_image(), input.image) {
            (true, Some(a)) => self.run_subnet(&self.plan.visual, a),
            _ => Vec::new(),
        };
        let xa: &[T] = audio.last().map(|v| v.as_slice()).unwrap_or(&[]);
        let xv: &[T] = visual.last().map(|v| v.as_slice()).unwrap_or(&[]);
        let m = &self.plan.merge;
        let fused = match m.merge {
            Merge::None | Merge::Concat => concat_fuse(xa, xv),
            Merge::Mfb { k, out } => {
                let (u, v) = self.mfb_factors();
                let (a, b) = mfb_project(u, v, xa, xv, k * out);
                mfb_pool(&a, &b, k, out)
            }
        };
        let mut logits = Vec::new();
        self.plan.head.forward(&self.params, &fused, &mut logits);
        let probs = softmax(&logits);
        Ok(Trace {
            audio,
            visual,
            fused,
            logits,
            probs,
        })
    }

    pub fn forward(&self, input: &Input<'_, T>) -> Result<Vec<T>> {
        Ok(self.forward_trace(input)?.probs)
    }

    pub fn predict(&self, input: &Input<'_, T>) -> Result<usize> {
        let p = self.forward(input)?;
        Ok(argmax(&p))
    }

    fn mfb_factors(&self) -> (&[T], &[T]) {
        let m = &self.plan.merge;
        let split = m.offset + m.x_dim * m.len / (m.x_dim + m.y_dim);
        (&self.params[m.offset..split], &self.params[split..m.offset + m.len])
    }

    fn backprop_subnet(&self, layers: &[LayerPlan], acts: &[Vec<T>], mut d: Vec<T>, grads: &mut [T]) -> Vec<T> {
        let mut dx = Vec::new();
        for (i, l) in layers.iter().enumerate().rev() {
            l.backward(&self.params, &acts[i], &acts[i + 1], &d, &mut dx, grads);
            std::mem::swap(&mut d, &mut dx);
        }
        d
    }

    /// Backpropagate `dlogits` (gradient of the objective with respect to the
    /// pre-softmax logits). Parameter gradients are added into `grads`.
    pub fn backward(&self, trace: &Trace<T>, dlogits: &[T], grads: &mut [T]) -> InputGrad<T> {
        assert_eq!(grads.len(), self.plan.total, "gradient buffer length");
        let mut dfused = Vec::new();
        let head_out = &trace.logits;
        self.plan.head.backward(&self.params, &trace.fused, head_out, dlogits, &mut dfused, grads);
        let m = &self.plan.merge;
        let (da, dv) = match m.merge {
            Merge::None | Merge::Concat => {
                let (a, b) = dfused.split_at(m.x_dim);
                (a.to_vec(), b.to_vec())
            }
            Merge::Mfb { k, out } => {
                let (u, v) = self.mfb_factors();
                let xa = trace.audio.last().expect("audio activations");
                let xv = trace.visual.last().expect("visual activations");
                let split = m.x_dim * m.len / (m.x_dim + m.y_dim);
                let (gu, gv) = grads[m.offset..m.offset + m.len].split_at_mut(split);
                let mut dx = vec![T::zero(); m.x_dim];
                let mut dy = vec![T::zero(); m.y_dim];
                mfb_backward(u, v, xa, xv, k, out, &dfused, gu, gv, &mut dx, &mut dy);
                (dx, dy)
            }
        };
        let mut g = InputGrad::default();
        if self.config.uses_audio() {
            g.audio = Some(self.backprop_subnet(&self.plan.audio, &trace.audio, da, grads));
        }
        if self.config.uses_image() {
            g.image = Some(self.backprop_subnet(&self.plan.visual, &trace.visual, dv, grads));
        }
        g
    }
}

pub fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ModelConfig {
        ModelConfig {
            audio_net: Some(vec![LayerSpec::Conv2d { filters: 1, kernel: 2, stride: 1 }, LayerSpec::Relu]),
            visual_net: None,
            audio_shape: [2, 3],
            image_shape: [2, 2],
            merge: Merge::None,
            num_classes: 2,
        }
    }

    #[test]
    fn zero_model_is_uniform() {
        let net = Network::<f64>::zeros(ModelConfig::echo_cnn_a(6)).unwrap();
        let x = vec![0.3; 62 * 25];
        let p = net.forward(&Input::audio(&x)).unwrap();
        assert!(p.iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-12));
    }

    #[test]
    fn hand_computed_tiny_model() {
        // Conv weights [1, 0; 0, -1], bias 0.5, ReLU; head rows [1, 1] and [-1, 0]
        // with biases [0, 0.25].
        let cfg = tiny_config();
        let params = vec![1.0, 0.0, 0.0, -1.0, 0.5, 1.0, 1.0, -1.0, 0.0, 0.0, 0.25];
        let net = Network::from_params(cfg, params).unwrap();
        let x = [1.0, 2.0, 4.0, 0.5, 1.0, 1.0];
        // conv: (1-1+0.5, 2-1+0.5) = (0.5, 1.5); ReLU keeps both.
        let l0 = 0.5 + 1.5;
        let l1 = -0.5 + 0.25;
        let e0 = f64::exp(l0);
        let e1 = f64::exp(l1);
        let p = net.forward(&Input::audio(&x)).unwrap();
        assert!((p[0] - e0 / (e0 + e1)).abs() < 1e-12);
        assert!((p[1] - e1 / (e0 + e1)).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one_and_errors() {
        let net = Network::<f32>::new(ModelConfig::echo_cnn_av(3, Merge::mfb()), 1).unwrap();
        let a = vec![0.5f32; 62 * 25];
        let img = vec![0.25f32; 64 * 25];
        let p = net.forward(&Input::audio_visual(&a, &img)).unwrap();
        assert!((p.iter().sum::<f32>() - 1.0).abs() < 1e-6);
        assert!(matches!(net.forward(&Input::audio(&a)), Err(NnError::MissingModality("image"))));
        assert!(matches!(
            net.forward(&Input::audio_visual(&a[..10], &img)),
            Err(NnError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn invalid_configs() {
        let mut c = ModelConfig::echo_cnn_a(1);
        assert!(c.validate().is_err());
        c.num_classes = 2;
        c.merge = Merge::Concat;
        assert!(c.validate().is_err());
        let mut s = ModelConfig::echo_cnn_a(2);
        s.audio_net.as_mut().unwrap().push(LayerSpec::Softmax);
        assert!(s.validate().is_err());
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let a = Network::<f32>::new(ModelConfig::echo_cnn_a(6), 3).unwrap();
        let b = Network::<f32>::new(ModelConfig::echo_cnn_a(6), 3).unwrap();
        let c = Network::<f32>::new(ModelConfig::echo_cnn_a(6), 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params, c.params);
    }
}
