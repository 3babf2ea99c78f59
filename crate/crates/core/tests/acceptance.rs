//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero
//! exit if any criterion fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use echorec_core::acoustics::scene::Scene;
use echorec_core::acoustics::{
    sabine_rt60, synthesize_ir_with, total_absorption, ImpulseResponse, MaterialSpec, RoomBuilder,
    SourceReceiver, SynthesisOptions, UnitSystem, Wall, NUM_BANDS,
};
use echorec_core::dataset::{
    evaluate, generate_dataset, load_samples, split, DatasetManifest, Knn, Partitions, SplitSpec, SweepConfig, Task,
    MANIFEST_FILE,
};
use echorec_core::dsp::{freq_coef, time_coef};
use echorec_core::mesh::{convex_hull_planar, enhance, load_classifications, load_obj, write_obj, EnhanceConfig};
use echorec_core::nn::gradcheck::check_parameters;
use echorec_core::nn::{train, Checkpoint, LayerSpec, Merge, ModelConfig, Network, Sample, TrainConfig};
use echorec_core::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn sabine() -> Outcome {
    let t = Instant::now();
    let scene = Scene::load(repo("configs/bathroom.toml"))?;
    let model = scene.absorption_model();
    let a = total_absorption(&model, 2, UnitSystem::Imperial)?;
    let rt = sabine_rt60(&model, 2, UnitSystem::Imperial)?;
    let took = t.elapsed();
    let pass = (a - 69.23).abs() < 0.005 && (rt - 0.94).abs() <= 0.005 && took < Duration::from_millis(1);
    Ok((pass, format!("a = {a:.4} sabins, T = {rt:.4} s, {took:?}")))
}

fn stft_constants() -> Outcome {
    let (f, t) = (freq_coef(1), time_coef(1));
    let pass = f == 44100.0 / 2048.0 && t == 512.0 / 44100.0 && (f * 10.0).round() == 215.0 && (t * 1e3).round() == 12.0;
    Ok((pass, format!("freq_coef(1) = {f:.3} Hz, time_coef(1) = {:.2} ms", t * 1e3)))
}

fn gradient_config(merge: Merge) -> ModelConfig {
    let sub = || {
        vec![
            LayerSpec::Conv2d { filters: 3, kernel: 3, stride: 1 },
            LayerSpec::Relu,
            LayerSpec::MaxPool { window: 2 },
            LayerSpec::Conv2d { filters: 2, kernel: 2, stride: 2 },
            LayerSpec::Relu,
            LayerSpec::Dense { units: 6 },
            LayerSpec::FeatureNorm,
        ]
    };
    ModelConfig {
        audio_net: Some(sub()),
        visual_net: (merge != Merge::None).then(sub),
        audio_shape: [11, 9],
        image_shape: [10, 9],
        merge,
        num_classes: 3,
    }
}

fn gradients() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for merge in [Merge::None, Merge::Concat, Merge::Mfb { k: 3, out: 4 }] {
        let cfg = gradient_config(merge);
        for seed in 0..5u64 {
            let net = Network::<f64>::new(cfg.clone(), seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let data: Vec<Sample> = (0..4)
                .map(|i| Sample {
                    audio: Some((0..99).map(|_| rng.random_range(0.0f32..1.0)).collect()),
                    image: cfg.uses_image().then(|| (0..90).map(|_| rng.random_range(0.0f32..1.0)).collect()),
                    label: i % 3,
                })
                .collect();
            let batch: Vec<&Sample> = data.iter().collect();
            for (_, err) in check_parameters(&net, &batch, 1e-5, 40)? {
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    let took = t.elapsed();
    let pass = worst < 1e-4 && took < Duration::from_secs(60);
    Ok((pass, format!("{checked} blocks, worst relative error {worst:.2e}, {took:?}")))
}

/// Independent mirror-lattice enumeration: image coordinate and per-wall hit
/// counts from the lattice index alone, energy `prod (1 - alpha)^hits / d^2`.
fn lattice_taps(
    dims: [f64; 3],
    alpha: &[[f64; NUM_BANDS]; 6],
    src: [f64; 3],
    mic: [f64; 3],
    c: f64,
) -> Vec<(f64, [f64; NUM_BANDS])> {
    let mut out = Vec::new();
    for nx in -3i32..=3 {
        for ny in -3i32..=3 {
            for nz in -3i32..=3 {
                let n = [nx, ny, nz];
                if n.iter().map(|v| v.abs()).sum::<i32>() > 3 {
                    continue;
                }
                let mut gain = [1.0; NUM_BANDS];
                let mut d2 = 0.0;
                for a in 0..3 {
                    let k = n[a];
                    let pos = if k % 2 == 0 {
                        k as f64 * dims[a] + src[a]
                    } else {
                        (k + 1) as f64 * dims[a] - src[a]
                    };
                    d2 += (pos - mic[a]).powi(2);
                    let (hi, lo) = if k >= 0 { ((k + 1) / 2, k / 2) } else { ((-k) / 2, (1 - k) / 2) };
                    for (max, hits) in [(true, hi), (false, lo)] {
                        let w = Wall::from_axis(a, max).index();
                        for b in 0..NUM_BANDS {
                            gain[b] *= (1.0 - alpha[w][b]).powi(hits);
                        }
                    }
                }
                out.push((d2.sqrt() / c, gain.map(|g| g / d2)));
            }
        }
    }
    out
}

struct OracleRoom {
    dims: [f64; 3],
    alpha: [[f64; NUM_BANDS]; 6],
    src: [f64; 3],
    mic: [f64; 3],
}

fn oracle_rooms() -> Vec<OracleRoom> {
    let ramp = |lo: f64, hi: f64| std::array::from_fn(|b| lo + (hi - lo) * b as f64 / (NUM_BANDS - 1) as f64);
    vec![
        OracleRoom {
            dims: [5.0, 4.0, 3.0],
            alpha: [ramp(0.02, 0.1), ramp(0.05, 0.3), ramp(0.1, 0.2), ramp(0.01, 0.05), ramp(0.3, 0.6), ramp(0.05, 0.05)],
            src: [1.2, 1.5, 1.4],
            mic: [3.7, 2.2, 1.6],
        },
        OracleRoom {
            dims: [3.0, 3.0, 3.0],
            alpha: [[0.2; NUM_BANDS]; 6],
            src: [1.5, 1.5, 1.5],
            mic: [1.0, 1.5, 1.5],
        },
        OracleRoom {
            dims: [7.3, 2.1, 4.4],
            alpha: [ramp(0.6, 0.1), ramp(0.0, 0.0), ramp(0.15, 0.9), ramp(0.4, 0.4), ramp(0.02, 0.07), ramp(0.25, 0.5)],
            src: [0.4, 0.3, 4.0],
            mic: [6.9, 1.8, 0.2],
        },
    ]
}

fn simulate_oracle_room(r: &OracleRoom) -> Result<ImpulseResponse, Box<dyn std::error::Error>> {
    let mut b = RoomBuilder::new(r.dims);
    for w in Wall::ALL {
        let name = format!("m{}", w.index());
        b = b
            .material(MaterialSpec::new(&name, r.alpha[w.index()], 0.0, false)?)
            .wall(w, &name, false);
    }
    let room = b.build()?;
    let sr = SourceReceiver::new(Point3::from(r.src), Point3::from(r.mic));
    let opts = SynthesisOptions {
        order: 3,
        rt60_tail: false,
        ..SynthesisOptions::default()
    };
    Ok(synthesize_ir_with(&room, &sr, &opts)?.0)
}

fn image_source_oracle() -> (Outcome, Vec<ImpulseResponse>) {
    let t = Instant::now();
    let mut irs = Vec::new();
    let mut notes = Vec::new();
    let mut pass = true;
    for (i, r) in oracle_rooms().iter().enumerate() {
        let ir = match simulate_oracle_room(r) {
            Ok(ir) => ir,
            Err(e) => return (Err(e), irs),
        };
        let fs = ir.sample_rate as f64;
        let oracle = lattice_taps(r.dims, &r.alpha, r.src, r.mic, 343.0);
        let mut used = vec![false; ir.taps.len()];
        let mut matched = 0;
        for (delay, energy) in &oracle {
            let hit = ir.taps.iter().enumerate().position(|(j, tap)| {
                !used[j]
                    && ((tap.delay - delay) * fs).abs() < 1.0
                    && tap.intensity.iter().zip(energy).all(|(a, b)| (a - b).abs() <= 1e-9 * b.max(1e-12))
            });
            if let Some(j) = hit {
                used[j] = true;
                matched += 1;
            }
        }
        let ok = matched == oracle.len() && ir.taps.len() == oracle.len();
        pass &= ok;
        notes.push(format!("room {} {matched}/{} taps", i + 1, oracle.len()));
        irs.push(ir);
    }
    let took = t.elapsed();
    pass &= took < Duration::from_secs(10);
    (Ok((pass, format!("{}, {took:?}", notes.join(", ")))), irs)
}

fn golden_obj() -> (Outcome, Option<String>) {
    let run = || -> Result<(bool, String, String), Box<dyn std::error::Error>> {
        let t = Instant::now();
        let wall = load_obj(fixture("wall_with_window.obj"))?;
        let golden = load_obj(fixture("wall_with_window_glass_2m.obj"))?;
        let glass = load_classifications(fixture("classification_glass_2m.jsonl"))?;
        let open = load_classifications(fixture("classification_open.jsonl"))?;
        let cfg = EnhanceConfig::default();
        let (out, _) = enhance(&wall, &glass, &cfg)?;
        let topology = out.faces == golden.faces && out.face_material == golden.face_material;
        let coords = out.vertices.len() == golden.vertices.len()
            && out.vertices.iter().zip(&golden.vertices).all(|(p, q)| (p - q).norm() <= 1e-6);
        let (unchanged, _) = enhance(&wall, &open, &cfg)?;
        let (again, _) = enhance(&out, &glass, &cfg)?;
        let took = t.elapsed();
        let idempotent = again == out;
        let pass = topology && coords && unchanged == wall && idempotent && took < Duration::from_secs(1);
        let detail = format!(
            "topology {topology}, coordinates {coords}, open unchanged {}, idempotent {idempotent}, {took:?}",
            unchanged == wall
        );
        Ok((pass, detail, write_obj(&out)))
    };
    match run() {
        Ok((pass, detail, obj)) => (Ok((pass, detail)), Some(obj)),
        Err(e) => (Err(e), None),
    }
}

fn hull_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agree = 0;
    let mut total = 0;
    while total < 100 {
        let n = rng.random_range(3..=50);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)]).collect();
        let mut edges = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                let left = i != j
                    && (0..n).filter(|&k| k != i && k != j).all(|k| {
                        let (a, b, c) = (pts[i], pts[j], pts[k]);
                        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) > 0.0
                    });
                if left {
                    edges.insert((i, j));
                }
            }
        }
        if edges.len() < 3 {
            continue;
        }
        total += 1;
        let e1 = Vector3::new(rng.random_range(-1.0..1.0), 1.0, rng.random_range(-1.0..1.0)).normalize();
        let e2 = e1.cross(&Vector3::new(0.3, -0.2, 1.0)).normalize();
        let origin = Vector3::new(1.0, -2.0, 0.5);
        let lifted: Vec<Point3> = pts.iter().map(|&[x, y]| Point3::from(origin + e1 * x + e2 * y)).collect();
        let hull = convex_hull_planar(&lifted, &e1.cross(&e2))?;
        let got: BTreeSet<(usize, usize)> = (0..hull.len()).map(|k| (hull[k], hull[(k + 1) % hull.len()])).collect();
        agree += usize::from(got == edges);
    }
    let took = t.elapsed();
    Ok((agree == total && took < Duration::from_secs(5), format!("{agree}/{total} point sets, {took:?}")))
}

struct Learning {
    val: f64,
    test: f64,
    knn_test: f64,
    open_closed_test: f64,
    material_test: f64,
    concat_test: f64,
    mfb_test: f64,
    run_time: Duration,
    manifest: Vec<u8>,
    checkpoint: Vec<u8>,
}

fn held_out_split(m: &DatasetManifest) -> Result<Partitions, Box<dyn std::error::Error>> {
    Ok(split(
        m,
        &SplitSpec {
            held_out_sources: m.header.held_out_sources.clone(),
            ..SplitSpec::default()
        },
    )?)
}

fn accuracy(
    m: &DatasetManifest,
    ck: &Checkpoint,
    idx: &[usize],
    task: Task,
) -> Result<f64, Box<dyn std::error::Error>> {
    let samples = load_samples(m, idx, task, ck.model.uses_image())?;
    Ok(evaluate(&ck.network()?, &samples, task, task.class_names(m))?.0.accuracy)
}

/// Generates the default sweep and trains CNN-A on depth.
fn depth_run(dir: &Path) -> Result<(DatasetManifest, Partitions, Checkpoint), Box<dyn std::error::Error>> {
    let (m, summary) = generate_dataset(&SweepConfig::default(), dir)?;
    if summary.failures > 0 {
        return Err(format!("{} sweep cells failed", summary.failures).into());
    }
    let parts = held_out_split(&m)?;
    let data = load_samples(&m, &parts.train, Task::Depth, false)?;
    let ck = train(ModelConfig::echo_cnn_a(m.header.depths.len()), &data, &TrainConfig::default())?;
    Ok((m, parts, ck))
}

fn learning() -> Result<Learning, Box<dyn std::error::Error>> {
    let t = Instant::now();
    let dir = scratch("acceptance_sweep");
    let (m, parts, ck) = depth_run(&dir)?;
    let val = accuracy(&m, &ck, &parts.validation, Task::Depth)?;
    let test = accuracy(&m, &ck, &parts.test, Task::Depth)?;
    let train_set = load_samples(&m, &parts.train, Task::Depth, false)?;
    let labels = train_set.iter().map(|s| s.label).collect();
    let knn = Knn::fit(train_set.into_iter().map(|s| s.audio.unwrap()).collect(), labels, 3)?;
    let test_set = load_samples(&m, &parts.test, Task::Depth, false)?;
    let knn_test = evaluate(&knn, &test_set, Task::Depth, Task::Depth.class_names(&m))?.0.accuracy;
    let run_time = t.elapsed();

    let fit = |task: Task, model: ModelConfig| -> Result<f64, Box<dyn std::error::Error>> {
        let data = load_samples(&m, &parts.train, task, model.uses_image())?;
        let ck = train(model, &data, &TrainConfig::default())?;
        accuracy(&m, &ck, &parts.test, task)
    };
    let open_closed_test = fit(Task::OpenClosed, ModelConfig::echo_cnn_a(2))?;
    // Fusion is compared on material: the proxy images carry material and
    // state but nothing about depth.
    let classes = m.header.materials.len();
    let material_test = fit(Task::Material, ModelConfig::echo_cnn_a(classes))?;
    let concat_test = fit(Task::Material, ModelConfig::echo_cnn_av(classes, Merge::Concat))?;
    let mfb_test = fit(Task::Material, ModelConfig::echo_cnn_av(classes, Merge::mfb()))?;

    Ok(Learning {
        val,
        test,
        knn_test,
        open_closed_test,
        material_test,
        concat_test,
        mfb_test,
        run_time,
        manifest: std::fs::read(dir.join(MANIFEST_FILE))?,
        checkpoint: ck.to_bytes()?,
    })
}

fn determinism(
    irs: &[ImpulseResponse],
    obj: Option<&str>,
    learning: Option<&Learning>,
) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let rerun: Vec<ImpulseResponse> = oracle_rooms().iter().map(simulate_oracle_room).collect::<Result<_, _>>()?;
    let taps_same = !irs.is_empty() && serde_json::to_vec(&rerun)? == serde_json::to_vec(irs)?;
    pass &= taps_same;
    notes.push(format!("taps {}", if taps_same { "identical" } else { "differ" }));

    let (_, obj_again) = golden_obj();
    let obj_same = obj.is_some() && obj_again.as_deref() == obj;
    pass &= obj_same;
    notes.push(format!("OBJ {}", if obj_same { "identical" } else { "differs" }));

    match learning {
        Some(first) => {
            let dir = scratch("acceptance_sweep_rerun");
            let (_, _, ck) = depth_run(&dir)?;
            let manifest_same = std::fs::read(dir.join(MANIFEST_FILE))? == first.manifest;
            let checkpoint_same = ck.to_bytes()? == first.checkpoint;
            pass &= manifest_same && checkpoint_same;
            notes.push(format!(
                "manifest {}, checkpoint {}",
                if manifest_same { "identical" } else { "differs" },
                if checkpoint_same { "identical" } else { "differs" }
            ));
        }
        None => {
            pass = false;
            notes.push("learning run unavailable".into());
        }
    }
    Ok((pass, notes.join(", ")))
}

fn report(results: &mut Vec<bool>, id: usize, name: &str, outcome: Outcome) {
    let (pass, detail) = match outcome {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    println!("criterion {id:>2} {:<4} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    results.push(pass);
}

fn main() {
    let mut results = Vec::new();
    report(&mut results, 1, "Sabine worked example", sabine());
    report(&mut results, 2, "STFT constants", stft_constants());
    report(&mut results, 3, "gradient checks", gradients());
    let (outcome, irs) = image_source_oracle();
    report(&mut results, 4, "image-source oracle", outcome);

    let learned = learning();
    let (c5, c6, c7, learned) = match learned {
        Ok(l) => {
            let c5 = Ok((
                l.val >= 0.95 && l.test >= 0.70 && l.test >= l.knn_test + 0.05 && l.run_time < Duration::from_secs(600),
                format!(
                    "validation {:.3} (need 0.95), held-out {:.3} (need 0.70), kNN held-out {:.3} (need CNN >= kNN + 0.05), {:.0?}",
                    l.val, l.test, l.knn_test, l.run_time
                ),
            ));
            let c6 = Ok((
                l.open_closed_test >= 0.95,
                format!("held-out {:.3} (need 0.95)", l.open_closed_test),
            ));
            let c7 = Ok((
                l.concat_test >= l.material_test && l.mfb_test >= l.material_test,
                format!(
                    "held-out material: A {:.3}, AV concat {:.3}, AV MFB {:.3}",
                    l.material_test, l.concat_test, l.mfb_test
                ),
            ));
            (c5, c6, c7, Some(l))
        }
        Err(e) => {
            let msg = e.to_string();
            (Err(msg.clone().into()), Err(msg.clone().into()), Err(msg.into()), None)
        }
    };
    report(&mut results, 5, "synthetic depth learning", c5);
    report(&mut results, 6, "open/closed", c6);
    report(&mut results, 7, "fusion ordering", c7);

    let (outcome, obj) = golden_obj();
    report(&mut results, 8, "golden OBJ", outcome);
    report(&mut results, 9, "convex hull oracle", hull_oracle());
    report(
        &mut results,
        10,
        "determinism",
        determinism(&irs, obj.as_deref(), learned.as_ref()),
    );

    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
