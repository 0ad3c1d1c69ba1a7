use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

#[derive(Debug, Parser)]
#[command(name = "odikit", version, about = "Omnidirectional image projection, degradation and evaluation tools")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "ODIKIT_THREADS")]
    threads: Option<usize>,

    /// Replace existing output files instead of failing.
    #[arg(long, global = true)]
    overwrite: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Downscale an ERP panorama, either directly or through the fisheye domain.
    Downsample(DownsampleArgs),
    /// Synthesize pseudo-ERP patches from a directory of plain images.
    Augment(AugmentArgs),
    /// Compute PSNR, SSIM, WS-PSNR and WS-SSIM.
    Metric(MetricArgs),
    /// Reproject an image between ERP, fisheye and perspective views.
    Project(ProjectArgs),
    /// Write the latitude condition map as a grayscale PNG.
    Condmap(CondmapArgs),
    /// Render the offsets predicted by a block's offset network.
    OffsetsViz(OffsetsVizArgs),
    /// Write a fresh set of block weights.
    InitWeights(InitWeightsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DownsampleMode {
    Erp,
    Fisheye,
}

#[derive(Debug, Args)]
struct DownsampleArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = DownsampleMode::Fisheye)]
    mode: DownsampleMode,
    /// One of 2, 4, 8, 16.
    #[arg(long, default_value_t = 2)]
    scale: usize,
    /// Aperture of the padded fisheye disks, degrees.
    #[arg(long, default_value_t = 200.0)]
    pad_aperture: f64,
    /// Fisheye disk diameter in pixels; defaults to the ERP height.
    #[arg(long)]
    fisheye_resolution: Option<usize>,
    /// Write 16-bit PNG.
    #[arg(long)]
    deep: bool,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    /// Directory of PNG/JPEG images.
    #[arg(long)]
    source: PathBuf,
    /// Output directory for patches and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Perspective field of view, degrees.
    #[arg(long, default_value_t = 90.0)]
    fov: f64,
    /// Window side in pixels; defaults to the sub-image width.
    #[arg(long)]
    window: Option<usize>,
    /// Window stride in pixels; defaults to the window side.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, default_value_t = 256)]
    min_patch: usize,
    /// Height of the working ERP canvas.
    #[arg(long, default_value_t = 1024)]
    canvas_height: usize,
    #[arg(long)]
    deep: bool,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Reference image (with CANDIDATE), or omit and use --pairs.
    reference: Option<PathBuf>,
    candidate: Option<PathBuf>,
    /// JSON list of pairs: `[["ref.png", "cand.png"], ...]` or
    /// `[{"reference": ..., "candidate": ...}, ...]`.
    #[arg(long, conflicts_with_all = ["reference", "candidate"])]
    pairs: Option<PathBuf>,
    /// Score every channel separately; headline figures become channel means.
    #[arg(long)]
    per_channel: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProjectionKind {
    Erp,
    Fisheye,
    Perspective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HemisphereArg {
    North,
    South,
}

/// Lens parameters; they describe the non-ERP side of the conversion.
#[derive(Debug, Args)]
struct LensArgs {
    /// Perspective field of view, degrees.
    #[arg(long, default_value_t = 90.0)]
    fov: f64,
    /// Perspective view longitude, degrees.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Perspective view latitude, degrees.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Fisheye aperture, degrees.
    #[arg(long, default_value_t = 180.0)]
    aperture: f64,
    /// Fisheye longitude shift, degrees.
    #[arg(long, default_value_t = 0.0)]
    delta_theta: f64,
    /// Fisheye latitude shift, degrees.
    #[arg(long, default_value_t = 0.0)]
    delta_phi: f64,
    #[arg(long, value_enum, default_value_t = HemisphereArg::North)]
    hemisphere: HemisphereArg,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = ProjectionKind::Erp)]
    from: ProjectionKind,
    #[arg(long, value_enum)]
    to: ProjectionKind,
    #[command(flatten)]
    lens: LensArgs,
    /// Output width; ERP outputs always use twice the height.
    #[arg(long)]
    width: Option<usize>,
    /// Output height; defaults to the input height.
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    deep: bool,
}

#[derive(Debug, Args)]
struct CondmapArgs {
    output: PathBuf,
    #[arg(long)]
    height: usize,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    deep: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BlockKind {
    Daab,
    Dacb,
}

#[derive(Debug, Args)]
struct OffsetsVizArgs {
    /// Weight sidecar JSON written by `init-weights`.
    #[arg(long)]
    weights: PathBuf,
    output: PathBuf,
    /// Feature map height.
    #[arg(long)]
    height: usize,
    /// Feature map width.
    #[arg(long)]
    width: usize,
    /// Attention window side (DAAB only).
    #[arg(long, default_value_t = 8)]
    window: usize,
    /// Draw every STRIDE-th pixel.
    #[arg(long, default_value_t = 4)]
    stride: usize,
    #[arg(long, value_enum, default_value_t = BlockKind::Daab)]
    block: BlockKind,
    /// Kernel tap to draw, 0..9 for DACB (row-major), 0 for DAAB.
    #[arg(long, default_value_t = 0)]
    tap: usize,
    /// Also write the sampled points as JSON.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InitWeightsArgs {
    /// Output sidecar path; the blob goes next to it with a `.bin` extension.
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// All-zero weights.
    #[arg(long)]
    zero: bool,
    /// Feature channels.
    #[arg(long, default_value_t = 16)]
    channels: usize,
    /// DACB output channels; defaults to the feature channels.
    #[arg(long)]
    out_channels: Option<usize>,
    /// Offset network width.
    #[arg(long, default_value_t = odikit::modulation::DEFAULT_HIDDEN)]
    hidden: usize,
    /// Parameters are drawn uniformly from [-range, range].
    #[arg(long, default_value_t = 0.1)]
    range: f32,
}

/// A failed command: exit code 1 for invalid input, 2 for I/O.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<odikit::Error> for Failure {
    fn from(e: odikit::Error) -> Self {
        if e.is_io() {
            Failure::io(e.to_string())
        } else {
            Failure::invalid(e.to_string())
        }
    }
}

pub fn check_output(path: &Path, overwrite: bool) -> Result<(), Failure> {
    if !overwrite && path.exists() {
        return Err(Failure::invalid(format!(
            "{} exists; pass --overwrite to replace it",
            path.display()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let overwrite = cli.overwrite;
    let result = match cli.command {
        Command::Downsample(a) => commands::downsample(a, overwrite),
        Command::Augment(a) => commands::augment(a, overwrite),
        Command::Metric(a) => commands::metric(a, overwrite),
        Command::Project(a) => commands::project(a, overwrite),
        Command::Condmap(a) => commands::condmap(a, overwrite),
        Command::OffsetsViz(a) => commands::offsets_viz(a, overwrite),
        Command::InitWeights(a) => commands::init_weights(a, overwrite),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
