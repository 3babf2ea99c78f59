use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use echorec_core::dataset::{
    evaluate, load_samples, split, DatasetManifest, Knn, LinearSvm, Metrics, Partitions, Predictor, SplitSpec,
    SvmConfig, Task,
};
use echorec_core::dsp::{features, frame_split, mel_spectrogram, MelFilterbank, StftConfig, Waveform};
use echorec_core::nn::{
    activation_maximization, predict_sample, train as train_model, Checkpoint, Merge, ModelConfig, Modality,
    Network, Sample, TrainConfig,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::exit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Audio-only network.
    A,
    /// Audio-visual network, concatenation merge.
    AvConcat,
    /// Audio-visual network, factorized bilinear merge.
    AvMfb,
}

impl ModelKind {
    pub fn config(self, classes: usize) -> ModelConfig {
        match self {
            ModelKind::A => ModelConfig::echo_cnn_a(classes),
            ModelKind::AvConcat => ModelConfig::echo_cnn_av(classes, Merge::Concat),
            ModelKind::AvMfb => ModelConfig::echo_cnn_av(classes, Merge::mfb()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Knn,
    Svm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Part {
    Train,
    Validation,
    Test,
}

impl Part {
    fn name(self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Validation => "validation",
            Part::Test => "test",
        }
    }

    fn indices(self, p: &Partitions) -> &[usize] {
        match self {
            Part::Train => &p.train,
            Part::Validation => &p.validation,
            Part::Test => &p.test,
        }
    }
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse().map_err(|e: echorec_core::DatasetError| e.to_string())
}

fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    DatasetManifest::load(path)
        .with_context(|| format!("loading manifest {}", path.display()))
        .map_err(exit::usage_from)
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path)
        .with_context(|| format!("loading checkpoint {}", path.display()))
        .map_err(exit::usage_from)
}

/// Held-out sources default to the ones the manifest was generated with.
fn partitions(run: &RunConfig, manifest: &DatasetManifest) -> Result<Partitions> {
    let mut base = SplitSpec {
        seed: run.seed(),
        ..SplitSpec::default()
    };
    if !manifest.header.held_out_sources.is_empty() {
        base.held_out_sources = manifest.header.held_out_sources.clone();
    }
    let spec = run.section("split", base).map_err(exit::usage_from)?;
    Ok(split(manifest, &spec)?)
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Dataset manifest (file or generation directory).
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_parser = parse_task, default_value = "depth")]
    task: Task,
    #[arg(long, value_enum, default_value = "a")]
    model: ModelKind,
    /// Output checkpoint.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
}

pub fn train(run: &RunConfig, args: TrainArgs) -> Result<()> {
    let manifest = load_manifest(&args.manifest)?;
    let parts = partitions(run, &manifest)?;
    let classes = args.task.class_names(&manifest);
    let model = run
        .section("model", args.model.config(classes.len()))
        .map_err(exit::usage_from)?;
    let mut cfg = run
        .section(
            "train",
            TrainConfig {
                seed: run.seed(),
                ..TrainConfig::default()
            },
        )
        .map_err(exit::usage_from)?;
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(b) = args.batch_size {
        cfg.batch_size = b;
    }
    if let Some(lr) = args.lr {
        cfg.optimizer.lr = lr;
    }
    let data = load_samples(&manifest, &parts.train, args.task, model.uses_image())?;
    let mut ck = train_model(model, &data, &cfg)?;
    ck.meta.class_names = classes;
    ck.meta.task = Some(args.task.as_str().to_string());
    ck.save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let loss = ck.meta.history.train_loss.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} on {} examples ({} parameters, {} epochs), final loss {loss:.4}",
        args.task,
        data.len(),
        ck.params.len(),
        cfg.epochs
    );
    println!("checkpoint {}", args.out.display());
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Trained checkpoint; its task is used unless `--task` is given.
    #[arg(long, conflicts_with = "baseline", required_unless_present = "baseline")]
    checkpoint: Option<PathBuf>,
    /// Fit a baseline on the training partition instead.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    #[arg(long, value_parser = parse_task)]
    task: Option<Task>,
    /// Neighbours for the kNN baseline.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Partitions to evaluate.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "validation,test")]
    splits: Vec<Part>,
    /// Directory for text, CSV and JSON-lines reports.
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct MetricRecord<'a> {
    model: &'a str,
    split: &'a str,
    #[serde(flatten)]
    metrics: &'a Metrics,
}

#[derive(Serialize)]
struct PredictionRecord<'a> {
    model: &'a str,
    task: &'a str,
    split: &'a str,
    id: &'a str,
    label: usize,
    predicted: usize,
}

pub fn eval(run: &RunConfig, args: EvalArgs) -> Result<()> {
    let manifest = load_manifest(&args.manifest)?;
    let parts = partitions(run, &manifest)?;
    let (predictor, name, task, with_image): (Box<dyn Predictor>, String, Task, bool) =
        match (&args.checkpoint, args.baseline) {
            (Some(p), _) => {
                let ck = load_checkpoint(p)?;
                let task = match (args.task, ck.meta.task.as_deref()) {
                    (Some(t), _) => t,
                    (None, Some(t)) => parse_task(t).map_err(exit::usage)?,
                    (None, None) => return Err(exit::usage("checkpoint has no task; pass --task")),
                };
                let expected = task.class_names(&manifest).len();
                if ck.model.num_classes != expected {
                    return Err(exit::usage(format!(
                        "checkpoint predicts {} classes, task {task} has {expected}",
                        ck.model.num_classes
                    )));
                }
                let image = ck.model.uses_image();
                let stem = p.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
                (Box::new(ck.network()?), stem, task, image)
            }
            (None, Some(b)) => {
                let task = args.task.ok_or_else(|| exit::usage("--task is required for baselines"))?;
                let train = load_samples(&manifest, &parts.train, task, false)?;
                let labels: Vec<usize> = train.iter().map(|s| s.label).collect();
                let points: Vec<Vec<f32>> = train.into_iter().map(|s| s.audio.expect("audio loaded")).collect();
                let classes = task.class_names(&manifest).len();
                let p: Box<dyn Predictor> = match b {
                    Baseline::Knn => Box::new(Knn::fit(points, labels, args.k)?),
                    Baseline::Svm => {
                        let refs: Vec<&[f32]> = points.iter().map(|p| p.as_slice()).collect();
                        let cfg = run
                            .section(
                                "svm",
                                SvmConfig {
                                    seed: run.seed(),
                                    ..SvmConfig::default()
                                },
                            )
                            .map_err(exit::usage_from)?;
                        Box::new(LinearSvm::train(&refs, &labels, classes, &cfg)?)
                    }
                };
                let name = match b {
                    Baseline::Knn => "knn",
                    Baseline::Svm => "svm",
                };
                (p, name.to_string(), task, false)
            }
            (None, None) => unreachable!("clap requires one of --checkpoint and --baseline"),
        };

    let classes = task.class_names(&manifest);
    let mut metric_lines = String::new();
    let mut prediction_lines = String::new();
    for part in &args.splits {
        let idx = part.indices(&parts);
        if idx.is_empty() {
            println!("{name} {task} {}: no examples", part.name());
            continue;
        }
        let samples = load_samples(&manifest, idx, task, with_image)?;
        let (metrics, predicted) = evaluate(predictor.as_ref(), &samples, task, classes.clone())?;
        let title = format!("{name} {task} ({})", part.name());
        print!("{}", metrics.to_text(&title));
        let record = MetricRecord {
            model: &name,
            split: part.name(),
            metrics: &metrics,
        };
        writeln!(metric_lines, "{}", serde_json::to_string(&record)?)?;
        for ((&i, s), &p) in idx.iter().zip(&samples).zip(&predicted) {
            let rec = PredictionRecord {
                model: &name,
                task: task.as_str(),
                split: part.name(),
                id: &manifest.examples[i].id,
                label: s.label,
                predicted: p,
            };
            writeln!(prediction_lines, "{}", serde_json::to_string(&rec)?)?;
        }
        if let Some(dir) = &args.report_dir {
            std::fs::create_dir_all(dir)?;
            let stem = format!("{name}_{task}_{}", part.name());
            std::fs::write(dir.join(format!("{stem}.txt")), metrics.to_text(&title))?;
            std::fs::write(dir.join(format!("{stem}.csv")), metrics.to_csv())?;
        }
    }
    if let Some(dir) = &args.report_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("metrics_{name}_{task}.jsonl")), metric_lines)?;
        std::fs::write(dir.join(format!("predictions_{name}_{task}.jsonl")), prediction_lines)?;
        println!("reports in {}", dir.display());
    }
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct InferArgs {
    /// One checkpoint per task; repeat for open/closed, depth and material.
    #[arg(long, required = true)]
    checkpoint: Vec<PathBuf>,
    /// Recording to classify; split into 1 s frames.
    #[arg(long)]
    wav: PathBuf,
    /// Proxy image grid for audio-visual checkpoints.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Write records here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ClassPrediction {
    class: String,
    index: usize,
    probability: f64,
}

/// Field names follow the classification records read by `enhance`, so a
/// run with all three tasks can be fed to it directly.
#[derive(Debug, Serialize)]
struct FrameRecord {
    frame_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    depth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    material: Option<String>,
    predictions: BTreeMap<String, ClassPrediction>,
}

pub fn infer(_run: &RunConfig, args: InferArgs) -> Result<()> {
    let mut models = Vec::new();
    for p in &args.checkpoint {
        let ck = load_checkpoint(p)?;
        let task = match ck.meta.task.as_deref() {
            Some(t) => parse_task(t).map_err(exit::usage)?,
            None => return Err(exit::usage(format!("checkpoint {} has no task", p.display()))),
        };
        if models.iter().any(|(t, _, _)| *t == task) {
            return Err(exit::usage(format!("two checkpoints for task {task}")));
        }
        let names = if ck.meta.class_names.len() == ck.model.num_classes {
            ck.meta.class_names.clone()
        } else {
            (0..ck.model.num_classes).map(|i| i.to_string()).collect()
        };
        models.push((task, ck.network()?, names));
    }
    let image = match &args.image {
        Some(p) => Some(features::read_grid(p).with_context(|| format!("reading {}", p.display()))?.2),
        None => None,
    };
    if image.is_none() && models.iter().any(|(_, n, _)| n.config().uses_image()) {
        return Err(exit::usage("an audio-visual checkpoint needs --image"));
    }
    let wav = Waveform::read_wav(&args.wav)
        .with_context(|| format!("reading {}", args.wav.display()))
        .map_err(exit::usage_from)?;
    let frames = frame_split(&wav)?;
    let stem = args.wav.file_stem().map_or("frame".into(), |s| s.to_string_lossy().into_owned());
    let cfg = StftConfig::default();
    let fb = MelFilterbank::default_bank();
    let mut out = String::new();
    for (k, frame) in frames.iter().enumerate() {
        let spec = mel_spectrogram(frame, &cfg, &fb)?;
        let sample = Sample {
            audio: Some(spec.grid.iter().map(|&v| v as f32).collect()),
            image: image.clone(),
            label: 0,
        };
        let mut rec = FrameRecord {
            frame_id: format!("{stem}:{k}"),
            state: None,
            probability: None,
            depth: None,
            material: None,
            predictions: BTreeMap::new(),
        };
        for (task, net, names) in &models {
            let probs = predict_sample(net, &sample)?;
            let index = echorec_core::nn::argmax(&probs);
            let probability = f64::from(probs[index]);
            let class = names[index].clone();
            match task {
                Task::OpenClosed => {
                    rec.state = Some(class.clone());
                    rec.probability = Some(probability);
                }
                Task::Depth => rec.depth = class.parse().ok(),
                Task::Material => {
                    rec.material = Some(match class.as_str() {
                        "glass" | "mirror" => class.clone(),
                        _ => "other".to_string(),
                    })
                }
            }
            rec.predictions.insert(
                task.as_str().to_string(),
                ClassPrediction {
                    class,
                    index,
                    probability,
                },
            );
        }
        writeln!(out, "{}", serde_json::to_string(&rec)?)?;
    }
    match &args.out {
        Some(p) => std::fs::write(p, out).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Audio,
    Image,
}

#[derive(Debug, clap::Args)]
pub struct ActmaxArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Class index or class name.
    #[arg(long)]
    class: String,
    /// Output grid (feature file).
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "audio")]
    input: InputKind,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
}

pub fn actmax(_run: &RunConfig, args: ActmaxArgs) -> Result<()> {
    let ck = load_checkpoint(&args.checkpoint)?;
    let class = match args.class.parse::<usize>() {
        Ok(i) => i,
        Err(_) => ck
            .meta
            .class_names
            .iter()
            .position(|n| *n == args.class)
            .ok_or_else(|| exit::usage(format!("unknown class `{}`", args.class)))?,
    };
    let net: Network<f64> = ck.network()?.cast();
    let (modality, [rows, cols]) = match args.input {
        InputKind::Audio => (Modality::Audio, ck.model.audio_shape),
        InputKind::Image => (Modality::Image, ck.model.image_shape),
    };
    let uses = match modality {
        Modality::Audio => ck.model.uses_audio(),
        Modality::Image => ck.model.uses_image(),
    };
    if !uses {
        bail!(exit::usage(format!("checkpoint has no {:?} input", args.input).to_lowercase()));
    }
    let r = activation_maximization(&net, class, args.iters, args.step, modality)?;
    features::write_grid(&args.out, rows, cols, &r.input)?;
    let first = r.logit_trace.first().copied().unwrap_or(f64::NAN);
    let last = r.logit_trace.last().copied().unwrap_or(f64::NAN);
    let name = ck.meta.class_names.get(class).cloned().unwrap_or_else(|| class.to_string());
    println!(
        "class {name}: logit {first:.4} -> {last:.4} over {} accepted steps",
        r.logit_trace.len().saturating_sub(1)
    );
    println!("grid {}", args.out.display());
    Ok(())
}
