use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use echorec_bench::{points, pose, pulse, room, wall};
use echorec_core::acoustics::{image_sources_up_to, render_echo, synthesize_ir};
use echorec_core::dsp::{mel_spectrogram, MelFilterbank, SourceKind, StftConfig};
use echorec_core::mesh::{convex_hull_2d, enhance, CameraPose, EchoClassification, EnhanceConfig, SurfaceMaterial};
use echorec_core::nn::{Input, Merge, ModelConfig, Network};
use echorec_core::{Point3, SurfaceState, Vector3};

fn acoustics(c: &mut Criterion) {
    let room = room();
    let sr = pose();
    let mut g = c.benchmark_group("acoustics");
    g.bench_function("image_sources_order3", |b| {
        b.iter(|| image_sources_up_to(&room, black_box(&sr.source_pos), 3))
    });
    g.bench_function("synthesize_ir_order3", |b| {
        b.iter(|| synthesize_ir(&room, black_box(&sr), 3, true, 1).unwrap())
    });
    let (ir, _) = synthesize_ir(&room, &sr, 3, true, 1).unwrap();
    let x = pulse(SourceKind::Pink);
    g.sample_size(20);
    g.bench_function("render_echo", |b| {
        b.iter(|| render_echo(&ir, black_box(&x), &room, SurfaceState::Closed, 3).unwrap())
    });
    g.finish();
}

fn dsp(c: &mut Criterion) {
    let x = pulse(SourceKind::Chirp);
    let cfg = StftConfig::default();
    let fb = MelFilterbank::default_bank();
    c.bench_function("dsp/mel_spectrogram_1s", |b| {
        b.iter(|| mel_spectrogram(black_box(&x), &cfg, &fb).unwrap())
    });
}

fn nn(c: &mut Criterion) {
    let mut g = c.benchmark_group("nn");
    let audio = vec![0.5f32; 62 * 25];
    let image = vec![0.5f32; 64 * 25];
    for (name, cfg) in [
        ("echo_cnn_a", ModelConfig::echo_cnn_a(6)),
        ("echo_cnn_av_mfb", ModelConfig::echo_cnn_av(6, Merge::mfb())),
    ] {
        let net = Network::<f32>::new(cfg, 0).unwrap();
        let input = Input {
            audio: Some(&audio),
            image: net.config().uses_image().then_some(image.as_slice()),
        };
        g.bench_function(format!("{name}/forward"), |b| b.iter(|| net.forward(black_box(&input)).unwrap()));
        g.bench_function(format!("{name}/forward_backward"), |b| {
            b.iter_batched(
                || vec![0.0f32; net.num_params()],
                |mut grads| {
                    let trace = net.forward_trace(&input).unwrap();
                    let mut d = trace.probs.clone();
                    d[0] -= 1.0;
                    net.backward(&trace, &d, &mut grads);
                    grads
                },
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

fn mesh(c: &mut Criterion) {
    let mut g = c.benchmark_group("mesh");
    let pts = points(50, 3);
    g.bench_function("convex_hull_50", |b| b.iter(|| convex_hull_2d(black_box(&pts)).unwrap()));
    let mesh = wall();
    let cs = [EchoClassification {
        frame_id: "f0".into(),
        pose: CameraPose {
            position: Point3::origin(),
            forward: Vector3::z(),
            up: Vector3::y(),
        },
        state: SurfaceState::Closed,
        probability: 0.9,
        depth: 2.0,
        material: SurfaceMaterial::Glass,
    }];
    let cfg = EnhanceConfig::default();
    g.bench_function("enhance_wall", |b| b.iter(|| enhance(black_box(&mesh), &cs, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, acoustics, dsp, nn, mesh);
criterion_main!(benches);
