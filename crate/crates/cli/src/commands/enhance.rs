use std::path::PathBuf;

use anyhow::{Context, Result};
use echorec_core::mesh::{enhance, load_classifications, load_obj, save_obj, write_mtl, EnhanceConfig, Outcome};

use crate::config::RunConfig;
use crate::exit;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Input mesh (OBJ).
    #[arg(long)]
    obj: PathBuf,
    /// Echo classifications, one JSON record per line.
    #[arg(long)]
    classifications: PathBuf,
    /// Output mesh (OBJ).
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the material library next to the output mesh.
    #[arg(long)]
    mtl: Option<PathBuf>,
    #[arg(long)]
    overlap_epsilon: Option<f64>,
    #[arg(long)]
    depth_band: Option<f64>,
    /// Fill with the raw boundary loop instead of its convex hull.
    #[arg(long)]
    no_simplify: bool,
}

pub fn run(run: &RunConfig, args: Args) -> Result<()> {
    let mesh = load_obj(&args.obj)
        .with_context(|| format!("reading {}", args.obj.display()))
        .map_err(exit::usage_from)?;
    let cs = load_classifications(&args.classifications)
        .with_context(|| format!("reading {}", args.classifications.display()))
        .map_err(exit::usage_from)?;
    let mut cfg = run.section("enhance", EnhanceConfig::default()).map_err(exit::usage_from)?;
    if let Some(e) = args.overlap_epsilon {
        cfg.overlap_epsilon = e;
    }
    if let Some(b) = args.depth_band {
        cfg.depth_band = b;
    }
    if args.no_simplify {
        cfg.simplify_geometry = false;
    }
    let (out, report) = enhance(&mesh, &cs, &cfg)?;
    save_obj(&out, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(p) = &args.mtl {
        std::fs::write(p, write_mtl()).with_context(|| format!("writing {}", p.display()))?;
    }
    for (c, o) in cs.iter().zip(&report.outcomes) {
        let what = match o {
            Outcome::Filled { loop_len, material } => format!("filled {loop_len}-vertex hole as {material}"),
            Outcome::Guarded => "skipped (open or non-reflective)".to_string(),
            Outcome::NoDiscontinuity => "no hole in depth band".to_string(),
            Outcome::Overlap { iou } => format!("skipped (overlap IoU {iou:.2})"),
            Outcome::Failed(e) => format!("failed: {e}"),
        };
        println!("{}: {what}", c.frame_id);
    }
    println!(
        "{} faces -> {} faces, {} filled",
        mesh.faces.len(),
        out.faces.len(),
        report.filled()
    );
    let failed = report.failures();
    if failed > 0 {
        return Err(exit::Partial(format!("{failed} classifications failed")).into());
    }
    Ok(())
}
