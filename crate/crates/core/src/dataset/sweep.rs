use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::image::synth_image;
use super::manifest::{
    CellFailure, DatasetManifest, LabeledExample, ManifestHeader, ReflectionEnergy, Split,
    MANIFEST_FILE, SCHEMA_VERSION,
};
use super::{DatasetError, Result};
use crate::acoustics::scene::Scene;
use crate::acoustics::{
    render_echo, synthesize_ir_with, ShoeboxRoom, SourceReceiver, SurfaceState, SynthesisOptions,
};
use crate::dsp::{
    features, frame_split, generate_source, mel_spectrogram, MelFilterbank, PulseSpec, SourceKind,
    StftConfig,
};
use crate::geometry::{Point3, Vector3};
use crate::nn::model::{IMAGE_COLS, IMAGE_ROWS};
use crate::seed::derive;

/// Room used when a sweep lists no scene file: 4 x 3.2 x 2.7 m with one
/// exterior window on the `x_min` wall.
pub const DEFAULT_SCENE_TOML: &str = r#"
# Furnished room: carpeted floor, acoustic-tile ceiling, painted walls and a
# window in the x_min wall facing a quiet street.
[room]
units = "m"
dims = [4.0, 3.2, 2.7]
exterior_noise_db = -65.0

[[material]]
name = "painted"
absorption = [0.10, 0.08, 0.06, 0.05, 0.05, 0.05, 0.06, 0.07, 0.08]

[[material]]
name = "carpet"
absorption = [0.05, 0.10, 0.25, 0.45, 0.60, 0.65, 0.65, 0.65, 0.65]

[[material]]
name = "acoustic_tile"
absorption = [0.30, 0.45, 0.65, 0.75, 0.80, 0.80, 0.80, 0.80, 0.80]

[[material]]
name = "glass"
absorption = [0.35, 0.25, 0.18, 0.12, 0.07, 0.04, 0.03, 0.03, 0.03]
is_reflector = true

[[material]]
name = "mirror"
absorption = [0.12, 0.10, 0.06, 0.04, 0.03, 0.02, 0.02, 0.02, 0.02]
is_reflector = true

[[wall]]
side = "z_min"
material = "carpet"

[[wall]]
side = "z_max"
material = "acoustic_tile"

[[wall]]
side = "x_min"
material = "painted"

[[wall.opening]]
label = "window"
rect = [1.0, 0.8, 2.2, 1.9]
material = "glass"
state = "closed"
exterior = true
"#;

/// Smallest echo round-trip spacing between adjacent depth classes.
pub const MIN_DEPTH_SPACING_S: f64 = 0.0029;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub id: String,
    /// Scene TOML; `None` uses [`DEFAULT_SCENE_TOML`].
    #[serde(default)]
    pub file: Option<PathBuf>,
}

/// Cartesian sweep over scenes, depths, materials, states, sources and
/// noise seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub scenes: Vec<SceneSpec>,
    /// Listener distance from the target surface, metres.
    pub depths: Vec<f64>,
    pub materials: Vec<String>,
    pub states: Vec<SurfaceState>,
    pub sources: Vec<SourceKind>,
    /// Sources whose examples are marked `test`.
    pub held_out_sources: Vec<SourceKind>,
    pub noise_seeds: usize,
    /// Gain applied to the excitation before rendering, to avoid clipping.
    pub excitation_gain: f64,
    pub order: usize,
    pub rt60_tail: bool,
    /// Panel label of the surface whose material and state are swept.
    pub target_label: String,
    /// Emitter distance in front of the target surface, metres.
    pub source_offset: f64,
    pub vertical_offset: f64,
    pub write_images: bool,
    pub write_wav: bool,
    /// Skip the depth-spacing sanity check (e.g. for a 1 ft grid).
    pub allow_fine_depth_grid: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let mut sources = SourceKind::training_palette();
        sources.extend(SourceKind::held_out_palette());
        SweepConfig {
            seed: 0,
            scenes: vec![SceneSpec {
                id: "room".into(),
                file: None,
            }],
            depths: (1..=6).map(|k| 0.5 * k as f64).collect(),
            materials: vec!["glass".into(), "mirror".into()],
            states: vec![SurfaceState::Open, SurfaceState::Closed],
            sources,
            held_out_sources: SourceKind::held_out_palette(),
            noise_seeds: 6,
            excitation_gain: 0.2,
            order: 3,
            rt60_tail: true,
            target_label: "window".into(),
            source_offset: 0.1,
            vertical_offset: SourceReceiver::DEFAULT_VERTICAL_OFFSET,
            write_images: true,
            write_wav: false,
            allow_fine_depth_grid: false,
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| DatasetError::InvalidConfig(e.to_string()))
    }

    /// Load a TOML sweep; relative scene paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for s in &mut cfg.scenes {
            if let Some(f) = &mut s.file {
                if f.is_relative() {
                    *f = dir.join(&*f);
                }
            }
        }
        Ok(cfg)
    }

    pub fn cell_count(&self) -> usize {
        self.scenes.len()
            * self.depths.len()
            * self.materials.len()
            * self.states.len()
            * self.sources.len()
            * self.noise_seeds
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DatasetError::InvalidConfig(m.to_string()));
        if self.scenes.is_empty() {
            return bad("at least one scene is required");
        }
        if self.depths.len() < 2 {
            return bad("at least two depth classes are required");
        }
        if self.depths.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return bad("depths must be positive");
        }
        if self.depths.windows(2).any(|w| w[1] <= w[0]) {
            return bad("depths must be strictly increasing");
        }
        if self.materials.is_empty() || self.states.is_empty() || self.sources.is_empty() {
            return bad("materials, states and sources must be non-empty");
        }
        if self.noise_seeds == 0 {
            return bad("noise_seeds must be at least 1");
        }
        if !(self.excitation_gain > 0.0 && self.excitation_gain <= 1.0) {
            return bad("excitation_gain must be in (0, 1]");
        }
        if !(self.source_offset > 0.0) {
            return bad("source_offset must be positive");
        }
        if self.depths[0] <= self.source_offset {
            return bad("every depth must exceed source_offset");
        }
        for h in &self.held_out_sources {
            if !self.sources.contains(h) {
                return Err(DatasetError::InvalidConfig(format!("held-out source {h} is not swept")));
            }
        }
        if self.held_out_sources.len() == self.sources.len() {
            return bad("every source is held out; nothing left to train on");
        }
        Ok(())
    }

    /// Round-trip echo delay spacing between the two closest depth classes.
    pub fn min_round_trip_spacing(&self, speed_of_sound: f64) -> f64 {
        self.depths
            .windows(2)
            .map(|w| 2.0 * (w[1] - w[0]) / speed_of_sound)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Scene with the sweep geometry resolved.
struct PreparedScene {
    id: String,
    room: ShoeboxRoom,
    /// Centre of the target surface.
    anchor: Point3,
    /// Unit normal pointing into the room.
    normal: Vector3,
}

fn prepare_scene(spec: &SceneSpec, label: &str) -> Result<(PreparedScene, String)> {
    let text = match &spec.file {
        Some(f) => std::fs::read_to_string(f)?,
        None => DEFAULT_SCENE_TOML.to_string(),
    };
    let scene = Scene::from_toml_str(&text)?;
    let room = scene.room;
    let panels: Vec<usize> = room.panels_labeled(label).collect();
    let Some(&first) = panels.first() else {
        return Err(DatasetError::InvalidConfig(format!(
            "scene `{}` has no panel labelled `{label}`",
            spec.id
        )));
    };
    let wall = room.panels()[first].wall;
    let mut sum = Vector3::zeros();
    let mut area = 0.0;
    for &p in &panels {
        let panel = &room.panels()[p];
        if panel.wall != wall {
            return Err(DatasetError::InvalidConfig(format!("`{label}` panels span several walls")));
        }
        let c: Vector3 = panel.corners(room.dims()).iter().map(|q| q.coords).sum::<Vector3>() / 4.0;
        sum += c * panel.area();
        area += panel.area();
    }
    Ok((
        PreparedScene {
            id: spec.id.clone(),
            room,
            anchor: Point3::from(sum / area),
            normal: wall.inward_normal(),
        },
        text,
    ))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    scene: usize,
    depth: usize,
    material: usize,
    state: usize,
    source: usize,
    noise: usize,
}

fn cells(cfg: &SweepConfig) -> Vec<Cell> {
    let mut out = Vec::with_capacity(cfg.cell_count());
    for scene in 0..cfg.scenes.len() {
        for depth in 0..cfg.depths.len() {
            for material in 0..cfg.materials.len() {
                for state in 0..cfg.states.len() {
                    for source in 0..cfg.sources.len() {
                        for noise in 0..cfg.noise_seeds {
                            out.push(Cell { scene, depth, material, state, source, noise });
                        }
                    }
                }
            }
        }
    }
    out
}

fn describe(cfg: &SweepConfig, c: &Cell) -> String {
    format!(
        "{} depth={} material={} state={:?} source={} noise={}",
        cfg.scenes[c.scene].id,
        cfg.depths[c.depth],
        cfg.materials[c.material],
        cfg.states[c.state],
        cfg.sources[c.source],
        c.noise
    )
}

/// Emitter in front of the target surface, listener at `depth` along its
/// normal with the microphone `vertical_offset` above.
pub fn sweep_positions(anchor: &Point3, normal: &Vector3, depth: f64, cfg: &SweepConfig) -> SourceReceiver {
    SourceReceiver {
        source_pos: anchor + normal * cfg.source_offset,
        receiver_pos: anchor + normal * depth,
        vertical_offset: cfg.vertical_offset,
    }
}

struct Shared<'a> {
    cfg: &'a SweepConfig,
    scenes: &'a [PreparedScene],
    stft: StftConfig,
    bank: MelFilterbank,
    out_dir: &'a Path,
}

fn run_cell(sh: &Shared, index: usize, c: &Cell) -> Result<LabeledExample> {
    let cfg = sh.cfg;
    let scene = &sh.scenes[c.scene];
    let material = &cfg.materials[c.material];
    let state = cfg.states[c.state];
    let source = cfg.sources[c.source];
    let depth = cfg.depths[c.depth];
    let seed = derive(cfg.seed, index as u64);

    let room = scene
        .room
        .with_labeled_material(&cfg.target_label, material)?
        .with_labeled_state(&cfg.target_label, state)?;
    let sr = sweep_positions(&scene.anchor, &scene.normal, depth, cfg);
    let (ir, _) = synthesize_ir_with(
        &room,
        &sr,
        &SynthesisOptions {
            order: cfg.order,
            rt60_tail: cfg.rt60_tail,
            seed: derive(seed, 1),
            ..SynthesisOptions::default()
        },
    )?;
    let excitation = generate_source(&PulseSpec::new(source), derive(seed, 2))?.scaled(cfg.excitation_gain);
    let recording = render_echo(&ir, &excitation, &room, state, derive(seed, 3))?.quantize_pcm16();
    let frame = frame_split(&recording)?
        .into_iter()
        .next()
        .ok_or_else(|| DatasetError::InvalidConfig("recording shorter than one frame".into()))?;
    let id = format!("{index:06}");
    let spec = mel_spectrogram(&frame, &sh.stft, &sh.bank)?;

    let features = format!("features/{id}.ecf");
    features::write_spectrogram(sh.out_dir.join(&features), &spec)?;
    let image = if cfg.write_images {
        let rel = format!("images/{id}.ecf");
        let img = synth_image(material, state, derive(seed, 4))?;
        features::write_grid(sh.out_dir.join(&rel), IMAGE_ROWS, IMAGE_COLS, &img)?;
        Some(rel)
    } else {
        None
    };
    let wav = if cfg.write_wav {
        let rel = format!("wav/{id}.wav");
        frame.write_wav(sh.out_dir.join(&rel))?;
        Some(rel)
    } else {
        None
    };
    let by_kind = ir.energy_by_kind();
    let sum = |k: usize| by_kind[k].iter().sum::<f64>();

    Ok(LabeledExample {
        id,
        scene: scene.id.clone(),
        depth,
        depth_class: c.depth,
        material: material.clone(),
        material_class: c.material,
        state,
        source,
        noise_index: c.noise,
        seed,
        split: if cfg.held_out_sources.contains(&source) { Split::Test } else { Split::Train },
        features,
        image,
        wav,
        reflection: Some(ReflectionEnergy {
            direct: sum(0),
            early: sum(1),
            late: sum(2),
            total: ir.total_energy(),
        }),
    })
}

/// Summary of a generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSummary {
    pub cells: usize,
    pub examples: usize,
    pub failures: usize,
}

/// Run the sweep into `out_dir`: feature files, optional proxy images and
/// WAVs, and `manifest.jsonl`. Cells run in parallel; the manifest lists
/// them in sweep order. A failing cell is recorded and skipped.
pub fn generate_dataset(cfg: &SweepConfig, out_dir: impl AsRef<Path>) -> Result<(DatasetManifest, GenerationSummary)> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref();
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(cfg)?);
    let mut scenes = Vec::new();
    for s in &cfg.scenes {
        let (p, text) = prepare_scene(s, &cfg.target_label)?;
        hasher.update(text.as_bytes());
        if !cfg.allow_fine_depth_grid {
            let spacing = cfg.min_round_trip_spacing(p.room.speed_of_sound());
            if spacing < MIN_DEPTH_SPACING_S {
                return Err(DatasetError::Sanity(format!(
                    "adjacent depth classes differ by {:.2} ms of echo delay, below {:.1} ms",
                    spacing * 1e3,
                    MIN_DEPTH_SPACING_S * 1e3
                )));
            }
        }
        scenes.push(p);
    }
    for dir in ["features", "images", "wav"] {
        let needed = match dir {
            "images" => cfg.write_images,
            "wav" => cfg.write_wav,
            _ => true,
        };
        if needed {
            std::fs::create_dir_all(out_dir.join(dir))?;
        }
    }

    let stft = StftConfig::default();
    let bank = MelFilterbank::default_bank();
    let shared = Shared {
        cfg,
        scenes: &scenes,
        stft,
        bank,
        out_dir,
    };
    let all = cells(cfg);
    let results: Vec<Result<LabeledExample>> = all
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_cell(&shared, i, c))
        .collect();

    let mut examples = Vec::new();
    let mut failures = Vec::new();
    for (i, (r, c)) in results.into_iter().zip(&all).enumerate() {
        match r {
            Ok(e) => examples.push(e),
            Err(e) => {
                log::warn!("cell {i} failed: {e}");
                failures.push(CellFailure {
                    cell: i,
                    description: describe(cfg, c),
                    error: e.to_string(),
                });
            }
        }
    }
    let manifest = DatasetManifest {
        header: ManifestHeader {
            schema_version: SCHEMA_VERSION,
            config_hash: hex::encode(hasher.finalize()),
            seed: cfg.seed,
            scenes: cfg.scenes.iter().map(|s| s.id.clone()).collect(),
            depths: cfg.depths.clone(),
            materials: cfg.materials.clone(),
            states: cfg.states.clone(),
            sources: cfg.sources.clone(),
            held_out_sources: cfg.held_out_sources.clone(),
        },
        examples,
        failures,
        root: out_dir.to_path_buf(),
    };
    manifest.save(out_dir.join(MANIFEST_FILE))?;
    let summary = GenerationSummary {
        cells: all.len(),
        examples: manifest.examples.len(),
        failures: manifest.failures.len(),
    };
    Ok((manifest, summary))
}

/// Per-example reflection energies from the manifest.
pub fn export_reflection_labels(manifest: &DatasetManifest) -> Result<Vec<(String, ReflectionEnergy)>> {
    manifest
        .examples
        .iter()
        .map(|e| {
            let r = e.reflection.ok_or_else(|| DatasetError::MissingIr(e.id.clone()))?;
            let sum = r.direct + r.early + r.late;
            if (sum - r.total).abs() > 1e-9 * r.total.max(1.0) {
                return Err(DatasetError::Sanity(format!(
                    "example {}: kind energies sum to {sum}, total is {}",
                    e.id, r.total
                )));
            }
            Ok((e.id.clone(), r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = SweepConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.cell_count(), 6 * 2 * 2 * 14 * 6);
        assert!(cfg.min_round_trip_spacing(343.0) >= MIN_DEPTH_SPACING_S);
        let (scene, _) = prepare_scene(&cfg.scenes[0], "window").unwrap();
        assert_eq!(scene.normal, Vector3::x());
        assert!((scene.anchor - Point3::new(0.0, 1.6, 1.35)).norm() < 1e-12);
        for &d in &cfg.depths {
            sweep_positions(&scene.anchor, &scene.normal, d, &cfg).validate(&scene.room).unwrap();
        }
    }

    #[test]
    fn config_errors() {
        let mut cfg = SweepConfig::default();
        cfg.depths = vec![1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = SweepConfig::default();
        cfg.held_out_sources = cfg.sources.clone();
        assert!(cfg.validate().is_err());
        assert!(SweepConfig::from_toml_str("bogus = 1").is_err());
        let cfg = SweepConfig::from_toml_str("depths = [0.5, 1.0]\nsources = [\"tone440\", \"chirp\"]\nheld_out_sources = [\"chirp\"]").unwrap();
        assert_eq!(cfg.cell_count(), 2 * 2 * 2 * 2 * 6);
    }

    #[test]
    fn foot_grid_needs_opt_in() {
        let ft = 0.3048;
        let cfg = SweepConfig {
            depths: vec![ft, 2.0 * ft, 3.0 * ft],
            source_offset: 0.1,
            ..SweepConfig::default()
        };
        assert!(cfg.min_round_trip_spacing(343.0) < MIN_DEPTH_SPACING_S);
    }
}
