use std::path::PathBuf;

use anyhow::{Context, Result};
use echorec_core::dataset::{generate_dataset, SweepConfig, MANIFEST_FILE};

use crate::config::RunConfig;
use crate::exit;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Sweep configuration (TOML). The built-in default sweep if omitted.
    #[arg(long, value_name = "FILE")]
    sweep: Option<PathBuf>,
    /// Output directory for the manifest and feature files.
    #[arg(long, short)]
    out: PathBuf,
}

pub fn run(run: &RunConfig, args: Args) -> Result<()> {
    let base = match &args.sweep {
        Some(p) => SweepConfig::load(p)
            .with_context(|| format!("loading sweep {}", p.display()))
            .map_err(exit::usage_from)?,
        None => SweepConfig::default(),
    };
    let mut cfg = run.section("sweep", base).map_err(exit::usage_from)?;
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    let (manifest, summary) = generate_dataset(&cfg, &args.out)?;
    println!(
        "{} cells, {} examples, {} failures",
        summary.cells, summary.examples, summary.failures
    );
    for (c, n) in manifest.header.depths.iter().zip(manifest.depth_counts()) {
        println!("  depth {c:.2} m: {n}");
    }
    println!("manifest {}", args.out.join(MANIFEST_FILE).display());
    for f in &manifest.failures {
        eprintln!("cell {} ({}): {}", f.cell, f.description, f.error);
    }
    if summary.failures > 0 {
        return Err(exit::Partial(format!("{} of {} cells failed", summary.failures, summary.cells)).into());
    }
    Ok(())
}
