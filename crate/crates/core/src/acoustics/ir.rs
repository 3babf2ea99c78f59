use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bands::NUM_BANDS;
use super::image_source::{image_sources_up_to, trace_reflections};
use super::room::{ShoeboxRoom, SourceReceiver, SurfaceState};
use super::sabine::{sabine_rt60, total_absorption, UnitSystem};
use super::{AcousticsError, Result, DEFAULT_SAMPLE_RATE};

/// Early reflections end this long after the direct arrival.
pub const DEFAULT_EARLY_WINDOW_S: f64 = 0.050;

// 60 dB of energy decay: ln(10^6).
const DECAY_60DB: f64 = 13.815_510_557_964_274;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TapKind {
    Direct,
    Early,
    Late,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TapOrigin {
    /// Deterministic image-source path.
    Specular,
    /// Sample of the seeded reverberant tail.
    Diffuse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    /// Arrival time, seconds.
    pub delay: f64,
    /// Energy per octave band.
    pub intensity: [f64; NUM_BANDS],
    /// Reflection count per room material; empty means no reflections.
    pub bounce_counts: Vec<u32>,
    pub kind: TapKind,
    pub origin: TapOrigin,
}

impl Tap {
    pub fn total_energy(&self) -> f64 {
        self.intensity.iter().sum()
    }

    pub fn bounces_on(&self, material: usize) -> u32 {
        self.bounce_counts.get(material).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    /// Sorted by delay; the first tap is the unique direct arrival.
    pub taps: Vec<Tap>,
    pub sample_rate: u32,
    pub duration: f64,
}

impl ImpulseResponse {
    pub fn direct(&self) -> &Tap {
        &self.taps[0]
    }

    /// Single tap of unit energy at `delay` in every band.
    pub fn unit_tap(delay: f64, sample_rate: u32, duration: f64) -> Self {
        ImpulseResponse {
            taps: vec![Tap {
                delay,
                intensity: [1.0; NUM_BANDS],
                bounce_counts: Vec::new(),
                kind: TapKind::Direct,
                origin: TapOrigin::Specular,
            }],
            sample_rate,
            duration,
        }
    }

    /// Per-band energy summed by tap kind, as `[direct, early, late]`.
    pub fn energy_by_kind(&self) -> [[f64; NUM_BANDS]; 3] {
        let mut out = [[0.0; NUM_BANDS]; 3];
        for t in &self.taps {
            let slot = match t.kind {
                TapKind::Direct => 0,
                TapKind::Early => 1,
                TapKind::Late => 2,
            };
            for b in 0..NUM_BANDS {
                out[slot][b] += t.intensity[b];
            }
        }
        out
    }

    pub fn total_energy(&self) -> f64 {
        self.taps.iter().map(Tap::total_energy).sum()
    }

    pub fn specular_energy(&self) -> f64 {
        self.taps
            .iter()
            .filter(|t| t.origin == TapOrigin::Specular)
            .map(Tap::total_energy)
            .sum()
    }
}

/// Intensity-weighted mean reflection count per (band, material):
/// `w[f][m] = sum_j I_jf d_jm / sum_j I_jf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialWeightMatrix {
    pub materials: Vec<String>,
    /// `weights[band][material]`.
    pub weights: Vec<Vec<f64>>,
}

impl MaterialWeightMatrix {
    pub fn from_taps<'a>(taps: impl IntoIterator<Item = &'a Tap>, materials: Vec<String>) -> Self {
        let m = materials.len();
        let mut num = vec![vec![0.0; m]; NUM_BANDS];
        let mut den = [0.0; NUM_BANDS];
        for t in taps {
            for b in 0..NUM_BANDS {
                let i = t.intensity[b];
                den[b] += i;
                for (mi, &d) in t.bounce_counts.iter().enumerate().take(m) {
                    num[b][mi] += i * d as f64;
                }
            }
        }
        for b in 0..NUM_BANDS {
            for v in num[b].iter_mut() {
                *v = if den[b] > 0.0 { *v / den[b] } else { 0.0 };
            }
        }
        MaterialWeightMatrix {
            materials,
            weights: num,
        }
    }

    pub fn get(&self, band: usize, material: usize) -> f64 {
        self.weights[band][material]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    pub order: usize,
    pub rt60_tail: bool,
    pub seed: u64,
    pub sample_rate: u32,
    pub duration: f64,
    pub early_window: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            order: 3,
            rt60_tail: true,
            seed: 0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            duration: 1.0,
            early_window: DEFAULT_EARLY_WINDOW_S,
        }
    }
}

/// Image-source impulse response with optional reverberant tail, plus the
/// material weight matrix over its specular paths.
pub fn synthesize_ir(
    room: &ShoeboxRoom,
    sr: &SourceReceiver,
    order: usize,
    rt60_tail: bool,
    seed: u64,
) -> Result<(ImpulseResponse, MaterialWeightMatrix)> {
    synthesize_ir_with(
        room,
        sr,
        &SynthesisOptions {
            order,
            rt60_tail,
            seed,
            ..SynthesisOptions::default()
        },
    )
}

pub fn synthesize_ir_with(
    room: &ShoeboxRoom,
    sr: &SourceReceiver,
    opts: &SynthesisOptions,
) -> Result<(ImpulseResponse, MaterialWeightMatrix)> {
    if opts.order < 1 {
        return Err(AcousticsError::InvalidArgument("order must be at least 1".into()));
    }
    sr.validate(room)?;
    let mic = sr.microphone();
    let c = room.speed_of_sound();
    let n_mat = room.materials().len();

    let mut taps = Vec::new();
    for image in image_sources_up_to(room, &sr.source_pos, opts.order)? {
        let reflections = trace_reflections(room, &image, &mic);
        let mut gain = [1.0; NUM_BANDS];
        let mut counts = vec![0u32; n_mat];
        let mut open = false;
        for r in &reflections {
            let panel = &room.panels()[r.panel];
            if panel.state == SurfaceState::Open {
                open = true;
                break;
            }
            let alpha = &room.materials()[panel.material].absorption;
            for b in 0..NUM_BANDS {
                gain[b] *= 1.0 - alpha[b];
            }
            counts[panel.material] += 1;
        }
        if open {
            continue;
        }
        let d = (image.position - mic).norm();
        let spreading = 1.0 / (d * d);
        let intensity = gain.map(|g| g * spreading);
        let direct = image.order() == 0;
        if !direct && intensity.iter().all(|&i| i == 0.0) {
            continue;
        }
        taps.push(Tap {
            delay: d / c,
            intensity,
            bounce_counts: if direct { Vec::new() } else { counts },
            kind: if direct { TapKind::Direct } else { TapKind::Early },
            origin: TapOrigin::Specular,
        });
    }
    // The direct path is the strictly shortest one.
    taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
    let t_direct = taps[0].delay;
    for t in taps.iter_mut().skip(1) {
        if t.delay - t_direct > opts.early_window {
            t.kind = TapKind::Late;
        }
    }

    let names = room.materials().iter().map(|m| m.name.clone()).collect();
    let weights = MaterialWeightMatrix::from_taps(taps.iter(), names);

    if opts.rt60_tail {
        let tail = diffuse_tail(room, t_direct, opts)?;
        taps.extend(tail);
        taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
    }

    Ok((
        ImpulseResponse {
            taps,
            sample_rate: opts.sample_rate,
            duration: opts.duration,
        },
        weights,
    ))
}

/// Seeded noise tail from `t_direct + early_window` to the IR duration.
///
/// Its energy-time curve decays 60 dB per Sabine RT60 in each band. The level
/// is set so the full curve integrates to the statistical reverberant energy
/// `16*pi*(1 - abar) / (S * abar)`, in the same units as the `1/d^2` direct term.
fn diffuse_tail(room: &ShoeboxRoom, t_direct: f64, opts: &SynthesisOptions) -> Result<Vec<Tap>> {
    let s = room.surface_area();
    let mut level = [0.0; NUM_BANDS];
    let mut rate = [0.0; NUM_BANDS];
    for b in 0..NUM_BANDS {
        let a = total_absorption(room, b, UnitSystem::Metric)?;
        let t60 = sabine_rt60(room, b, UnitSystem::Metric)?;
        let abar = (a / s).min(1.0);
        let reverberant = 16.0 * std::f64::consts::PI * (1.0 - abar) / (s * abar);
        rate[b] = DECAY_60DB / t60;
        level[b] = reverberant * rate[b];
    }
    let sr = opts.sample_rate as f64;
    let start = ((t_direct + opts.early_window) * sr).ceil() as usize;
    let end = (opts.duration * sr).floor() as usize;
    let mut rng = crate::seed::child_rng(opts.seed, 0x7A11);
    let mut taps = Vec::with_capacity(end.saturating_sub(start));
    for n in start..end {
        let t = n as f64 / sr;
        let mut intensity = [0.0; NUM_BANDS];
        for b in 0..NUM_BANDS {
            let g: f64 = StandardNormal.sample(&mut rng);
            intensity[b] = level[b] * (-(t - t_direct) * rate[b]).exp() / sr * g * g;
        }
        if intensity.iter().all(|&i| i == 0.0) {
            continue;
        }
        taps.push(Tap {
            delay: t,
            intensity,
            bounce_counts: Vec::new(),
            kind: TapKind::Late,
            origin: TapOrigin::Diffuse,
        });
    }
    Ok(taps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::{MaterialSpec, RoomBuilder, Wall};
    use crate::geometry::Point3;

    fn open_box() -> ShoeboxRoom {
        let mut b = RoomBuilder::new([6.0, 6.0, 6.0]).material(MaterialSpec::uniform("air", 0.0).unwrap());
        for w in Wall::ALL {
            b = b.wall(w, "air", true);
        }
        for w in Wall::ALL {
            b = b.opening(
                w,
                Some("open"),
                crate::acoustics::Rect::new(0.0, 0.0, 6.0, 6.0),
                "air",
                SurfaceState::Open,
                true,
            );
        }
        b.build().unwrap()
    }

    #[test]
    fn free_field_single_direct_tap() {
        let room = open_box();
        let sr = SourceReceiver::new(Point3::new(3.0, 3.0, 3.0), Point3::new(4.0, 3.0, 3.0));
        let (ir, w) = synthesize_ir(&room, &sr, 3, false, 0).unwrap();
        assert_eq!(ir.taps.len(), 1);
        assert_eq!(ir.taps[0].kind, TapKind::Direct);
        assert!((ir.taps[0].delay - 1.0 / 343.0).abs() < 1e-12);
        assert!((ir.taps[0].delay * 1e3 - 2.915).abs() < 1e-3);
        assert!(w.weights.iter().flatten().all(|&x| x == 0.0));
        // A lossless tail request in an all-open room is fine: no reverberant energy.
        let (tail_ir, _) = synthesize_ir(&room, &sr, 3, true, 0).unwrap();
        assert_eq!(tail_ir.taps.len(), 1);
    }

    #[test]
    fn single_bounce_weight_is_one() {
        let taps = vec![Tap {
            delay: 0.01,
            intensity: [0.3; NUM_BANDS],
            bounce_counts: vec![0, 1],
            kind: TapKind::Early,
            origin: TapOrigin::Specular,
        }];
        let w = MaterialWeightMatrix::from_taps(taps.iter(), vec!["a".into(), "b".into()]);
        for b in 0..NUM_BANDS {
            assert_eq!(w.get(b, 1), 1.0);
            assert_eq!(w.get(b, 0), 0.0);
        }
    }

    #[test]
    fn two_path_weight_hand_value() {
        let mk = |i: f64, counts: Vec<u32>| Tap {
            delay: 0.0,
            intensity: [i; NUM_BANDS],
            bounce_counts: counts,
            kind: TapKind::Early,
            origin: TapOrigin::Specular,
        };
        let taps = [mk(0.25, vec![2, 0]), mk(0.75, vec![1, 3])];
        let w = MaterialWeightMatrix::from_taps(taps.iter(), vec!["a".into(), "b".into()]);
        assert!((w.get(0, 0) - (0.25 * 2.0 + 0.75 * 1.0)).abs() < 1e-12);
        assert!((w.get(8, 1) - 0.75 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn lossless_tail_is_zero_absorption() {
        let room = ShoeboxRoom::uniform([3.0, 3.0, 3.0], MaterialSpec::uniform("hard", 0.0).unwrap()).unwrap();
        let sr = SourceReceiver::stacked(Point3::new(1.0, 1.0, 1.0));
        assert!(synthesize_ir(&room, &sr, 2, false, 0).is_ok());
        assert!(matches!(
            synthesize_ir(&room, &sr, 2, true, 0),
            Err(AcousticsError::ZeroAbsorption)
        ));
    }

    #[test]
    fn labels_and_ordering() {
        let room = ShoeboxRoom::uniform([5.0, 4.0, 3.0], MaterialSpec::uniform("m", 0.3).unwrap()).unwrap();
        let sr = SourceReceiver::stacked(Point3::new(1.2, 1.5, 1.1));
        let (ir, _) = synthesize_ir(&room, &sr, 3, true, 9).unwrap();
        assert!(ir.taps.windows(2).all(|w| w[0].delay <= w[1].delay));
        assert_eq!(ir.taps.iter().filter(|t| t.kind == TapKind::Direct).count(), 1);
        assert_eq!(ir.taps[0].kind, TapKind::Direct);
        let t0 = ir.taps[0].delay;
        for t in &ir.taps[1..] {
            assert!(t.delay > t0);
            let late = t.delay - t0 > DEFAULT_EARLY_WINDOW_S;
            assert_eq!(t.kind == TapKind::Late, late);
            assert!(t.intensity.iter().all(|&i| i >= 0.0));
        }
        let (again, _) = synthesize_ir(&room, &sr, 3, true, 9).unwrap();
        assert_eq!(ir, again);
    }
}
