use std::path::PathBuf;

use anyhow::{Context, Result};
use echorec_core::acoustics::scene::{LengthUnit, Scene};
use echorec_core::acoustics::{sabine_rt60, total_absorption, UnitSystem, BAND_CENTERS_HZ, FT3_PER_M3};

use crate::config::RunConfig;
use crate::exit;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scene file; its `[inventory]` survey is used when present.
    #[arg(long)]
    scene: PathBuf,
    /// Octave band index (0 = 63 Hz, 2 = 250 Hz).
    #[arg(long, default_value_t = 2)]
    band: usize,
}

pub fn run(_run: &RunConfig, args: Args) -> Result<()> {
    let scene = Scene::load(&args.scene)
        .with_context(|| format!("loading scene {}", args.scene.display()))
        .map_err(exit::usage_from)?;
    let model = scene.absorption_model();
    let (units, area_unit, volume) = match scene.units {
        LengthUnit::Feet => (UnitSystem::Imperial, "sabins", format!("{:.2} ft^3", model.volume_m3() * FT3_PER_M3)),
        LengthUnit::Meters => (UnitSystem::Metric, "metric sabins", format!("{:.3} m^3", model.volume_m3())),
    };
    let band = BAND_CENTERS_HZ
        .get(args.band)
        .ok_or_else(|| exit::usage(format!("band {} out of range (0..{})", args.band, BAND_CENTERS_HZ.len())))?;
    let a = total_absorption(&model, args.band, units)?;
    let t = sabine_rt60(&model, args.band, units)?;
    println!("band {band} Hz");
    println!("volume {volume}");
    println!("total absorption {a:.2} {area_unit}");
    println!("RT60 {t:.2} s");
    Ok(())
}
