use std::fs;
use std::path::{Path, PathBuf};

use odikit::augment::{synthesize_dataset, AugmentConfig, MANIFEST_FILE};
use odikit::degradation::{erp_downsample, fisheye_downsample, DegradationConfig};
use odikit::geometry::{FisheyeParams, Hemisphere, PerspectiveParams, ProjectionSpec};
use odikit::io::{read_image, write_png};
use odikit::metrics::MetricSet;
use odikit::modulation::{build_cd, offset_net_forward, offsets_heatmap, BlockWeights, ConditionMaps};
use odikit::resample::{warp, OutOfBounds, SampleSpec};
use odikit::ImageGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::report::{MetricReport, PairReport, PairSpec};
use crate::{
    check_output, AugmentArgs, BlockKind, CondmapArgs, DownsampleArgs, DownsampleMode, Failure,
    HemisphereArg, InitWeightsArgs, LensArgs, MetricArgs, OffsetsVizArgs, ProjectArgs, ProjectionKind,
};

type CmdResult = Result<(), Failure>;

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

pub fn downsample(args: DownsampleArgs, overwrite: bool) -> CmdResult {
    if ![2, 4, 8, 16].contains(&args.scale) {
        return Err(Failure::invalid(format!("--scale must be one of 2, 4, 8, 16 (got {})", args.scale)));
    }
    check_output(&args.output, overwrite)?;
    let hr = read_image(&args.input)?;
    if hr.width() != 2 * hr.height() {
        return Err(Failure::invalid(format!(
            "{} is {}x{}; an ERP needs width = 2 x height",
            args.input.display(),
            hr.height(),
            hr.width()
        )));
    }
    if hr.height() % args.scale != 0 {
        return Err(Failure::invalid(format!(
            "scale {} does not divide the ERP height {}",
            args.scale,
            hr.height()
        )));
    }
    let lr = match args.mode {
        DownsampleMode::Erp => erp_downsample(&hr, args.scale)?,
        DownsampleMode::Fisheye => {
            let cfg = DegradationConfig {
                scale: args.scale,
                pad_aperture: args.pad_aperture.to_radians(),
                fisheye_resolution: args.fisheye_resolution,
            };
            fisheye_downsample(&hr, &cfg)?
        }
    };
    write_png(&args.output, &lr, args.deep)?;
    Ok(())
}

pub fn augment(args: AugmentArgs, overwrite: bool) -> CmdResult {
    check_output(&args.out.join(MANIFEST_FILE), overwrite)?;
    let cfg = AugmentConfig {
        fov: args.fov.to_radians(),
        window: args.window,
        stride: args.stride,
        min_patch: args.min_patch,
        erp_canvas: args.canvas_height,
        ..AugmentConfig::default()
    };
    let report = synthesize_dataset(&args.source, &cfg, &args.out, args.deep)?;
    for (path, reason) in &report.failures {
        eprintln!("warning: skipped {}: {reason}", path.display());
    }
    eprintln!(
        "wrote {} patches from {} images ({} skipped)",
        report.records.len(),
        report.sources,
        report.failures.len()
    );
    if report.sources > 0 && report.records.is_empty() {
        return Err(Failure::invalid("no patches were produced"));
    }
    Ok(())
}

fn score(reference: &ImageGrid, candidate: &ImageGrid, per_channel: bool) -> odikit::Result<(MetricSet, Option<Vec<MetricSet>>)> {
    if !per_channel || reference.channels() != candidate.channels() {
        return Ok((MetricSet::evaluate(reference, candidate)?, None));
    }
    let sets = (0..reference.channels())
        .map(|c| MetricSet::evaluate(&reference.channel(c), &candidate.channel(c)))
        .collect::<odikit::Result<Vec<_>>>()?;
    let mean = MetricSet::mean(&sets).expect("at least one channel");
    Ok((mean, Some(sets)))
}

pub fn metric(args: MetricArgs, overwrite: bool) -> CmdResult {
    let pairs: Vec<(PathBuf, PathBuf)> = match (&args.pairs, args.reference, args.candidate) {
        (Some(list), _, _) => {
            let text = fs::read_to_string(list).map_err(|e| Failure::io(format!("{}: {e}", list.display())))?;
            let specs: Vec<PairSpec> = serde_json::from_str(&text)
                .map_err(|e| Failure::invalid(format!("{}: {e}", list.display())))?;
            specs.into_iter().map(PairSpec::paths).collect()
        }
        (None, Some(r), Some(c)) => vec![(r, c)],
        _ => return Err(Failure::invalid("give REFERENCE and CANDIDATE, or --pairs")),
    };
    if let Some(out) = &args.output {
        check_output(out, overwrite)?;
    }
    let per_channel = args.per_channel;
    let results: Vec<odikit::Result<PairReport>> = pairs
        .into_par_iter()
        .map(|(reference, candidate)| {
            let a = read_image(&reference)?;
            let b = read_image(&candidate)?;
            let (metrics, channels) = score(&a, &b, per_channel)?;
            Ok(PairReport {
                reference,
                candidate,
                metrics,
                channels,
            })
        })
        .collect();
    let pairs = results.into_iter().collect::<odikit::Result<Vec<_>>>()?;
    let sets: Vec<MetricSet> = pairs.iter().map(|p| p.metrics).collect();
    let report = MetricReport {
        mean: MetricSet::mean(&sets),
        pairs,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::invalid(e.to_string()))? + "\n";
    match &args.output {
        Some(out) => write_text(out, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn lens_spec(kind: ProjectionKind, lens: &LensArgs, height: usize, width: usize) -> ProjectionSpec {
    match kind {
        ProjectionKind::Erp => ProjectionSpec::erp(height),
        ProjectionKind::Fisheye => {
            let hemisphere = match lens.hemisphere {
                HemisphereArg::North => Hemisphere::North,
                HemisphereArg::South => Hemisphere::South,
            };
            let params = FisheyeParams::horizontal(lens.aperture.to_radians())
                .with_shift(lens.delta_theta.to_radians(), lens.delta_phi.to_radians())
                .with_hemisphere(hemisphere);
            ProjectionSpec::fisheye(height, params)
        }
        ProjectionKind::Perspective => ProjectionSpec::perspective(
            height,
            width,
            PerspectiveParams::new(lens.fov.to_radians(), lens.theta.to_radians(), lens.phi.to_radians()),
        ),
    }
}

pub fn project(args: ProjectArgs, overwrite: bool) -> CmdResult {
    if args.from != ProjectionKind::Erp && args.to != ProjectionKind::Erp {
        return Err(Failure::invalid("one side of the conversion must be erp"));
    }
    check_output(&args.output, overwrite)?;
    let src = read_image(&args.input)?;
    let src_spec = lens_spec(args.from, &args.lens, src.height(), src.width());
    if (src_spec.height, src_spec.width) != (src.height(), src.width()) {
        return Err(Failure::invalid(format!(
            "{} is {}x{}, which does not fit a {:?} raster",
            args.input.display(),
            src.height(),
            src.width(),
            args.from
        )));
    }
    let height = args.height.unwrap_or(src.height());
    let width = args.width.unwrap_or(height);
    let dst_spec = lens_spec(args.to, &args.lens, height, width);
    let oob = if args.from == ProjectionKind::Erp {
        OutOfBounds::WrapLongitude
    } else {
        OutOfBounds::ClampEdge
    };
    let (out, _) = warp(&src, &src_spec, &dst_spec, SampleSpec::bicubic(oob))?;
    write_png(&args.output, &out, args.deep)?;
    Ok(())
}

pub fn condmap(args: CondmapArgs, overwrite: bool) -> CmdResult {
    if args.height == 0 || args.width == 0 {
        return Err(Failure::invalid("--height and --width must be positive"));
    }
    check_output(&args.output, overwrite)?;
    let cd = build_cd(args.height, args.width);
    let img = ImageGrid::from_fn(args.height, args.width, 1, |m, n, _| cd.get(0, m, n));
    write_png(&args.output, &img, args.deep)?;
    Ok(())
}

pub fn offsets_viz(args: OffsetsVizArgs, overwrite: bool) -> CmdResult {
    if args.height == 0 || args.width == 0 {
        return Err(Failure::invalid("--height and --width must be positive"));
    }
    check_output(&args.output, overwrite)?;
    if let Some(p) = &args.points {
        check_output(p, overwrite)?;
    }
    let weights = BlockWeights::load(&args.weights)?;
    let field = match args.block {
        BlockKind::Daab => {
            let cond = ConditionMaps::new(args.height, args.width, args.window)?.stacked()?;
            offset_net_forward(&cond, &weights.daab.offset)?
        }
        BlockKind::Dacb => offset_net_forward(&build_cd(args.height, args.width), &weights.dacb.offset)?,
    };
    let heatmap = offsets_heatmap(&field, args.tap, args.stride)?;
    write_png(&args.output, &heatmap.image, false)?;
    let max = heatmap.points.iter().map(|p| p.magnitude).fold(0.0, f64::max);
    eprintln!("{} points, largest displacement {max:.4} px", heatmap.points.len());
    if let Some(path) = &args.points {
        let points: Vec<serde_json::Value> = heatmap
            .points
            .iter()
            .map(|p| {
                serde_json::json!({
                    "reference": [p.reference.0, p.reference.1],
                    "displaced": [p.displaced.0, p.displaced.1],
                    "magnitude": p.magnitude,
                })
            })
            .collect();
        let text = serde_json::to_string_pretty(&points).map_err(|e| Failure::invalid(e.to_string()))? + "\n";
        write_text(path, &text)?;
    }
    Ok(())
}

pub fn init_weights(args: InitWeightsArgs, overwrite: bool) -> CmdResult {
    if args.channels == 0 || args.hidden == 0 || args.out_channels == Some(0) {
        return Err(Failure::invalid("--channels, --out-channels and --hidden must be positive"));
    }
    if !args.zero && !(args.range.is_finite() && args.range > 0.0) {
        return Err(Failure::invalid("--range must be a positive number"));
    }
    check_output(&args.output, overwrite)?;
    check_output(&args.output.with_extension("bin"), overwrite)?;
    let out_channels = args.out_channels.unwrap_or(args.channels);
    let weights = if args.zero {
        BlockWeights::zeros(args.channels, out_channels, args.hidden)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let range = args.range;
        BlockWeights::from_generator(args.channels, out_channels, args.hidden, &mut || {
            rng.gen_range(-range..=range)
        })
    };
    weights.save(&args.output)?;
    Ok(())
}
