//! Shared inputs for the benchmarks.

use echorec_core::acoustics::scene::Scene;
use echorec_core::dataset::DEFAULT_SCENE_TOML;
use echorec_core::dsp::{generate_source, PulseSpec, SourceKind, Waveform};
use echorec_core::mesh::{parse_obj, TriMesh};
use echorec_core::{Point3, ShoeboxRoom, SourceReceiver};
use rand::Rng;

pub const WALL_OBJ: &str = include_str!("../../core/tests/fixtures/wall_with_window.obj");

pub fn room() -> ShoeboxRoom {
    Scene::from_toml_str(DEFAULT_SCENE_TOML).expect("default scene parses").room
}

/// Emitter just inside the window wall, listener 2 m into the room.
pub fn pose() -> SourceReceiver {
    SourceReceiver {
        source_pos: Point3::new(0.1, 1.6, 1.35),
        receiver_pos: Point3::new(2.1, 1.6, 1.35),
        vertical_offset: SourceReceiver::DEFAULT_VERTICAL_OFFSET,
    }
}

pub fn pulse(kind: SourceKind) -> Waveform {
    generate_source(&PulseSpec::new(kind), 7).expect("pulse")
}

pub fn wall() -> TriMesh {
    parse_obj(WALL_OBJ).expect("fixture parses")
}

pub fn points(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = echorec_core::seed::rng(seed);
    (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect()
}
