use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "pareidolia", version, about = "Models and measurements of face pareidolia")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Suppress warnings on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    /// Where to write the run metadata (default: `<output>.meta.json`).
    #[arg(long, global = true, value_name = "PATH")]
    pub meta: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write Gaussian-envelope noise images as 8-bit PGM.
    GenNoise(GenNoise),
    /// Evaluate a model curve in closed form.
    ModelCurve(ModelCurve),
    /// Monte Carlo estimates and the toy detector curve.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Average Precision of detections against annotations.
    EvalAp(EvalAp),
    /// Attribute statistics of an annotation file.
    Stats(Stats),
    /// Mean face crop, raw and histogram-equalized.
    AvgFace(AvgFace),
    /// Counting-experiment analysis.
    #[command(subcommand)]
    Psycho(Psycho),
}

/// `a:b:n` or a comma-separated list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Grid {
    Range { lo: f64, hi: f64, n: usize },
    List(Vec<f64>),
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |t: &str| -> Result<f64, String> {
        t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        }
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("bad point count {:?}", parts[2]))?;
        if n == 0 {
            return Err("point count must be >= 1".into());
        }
        Ok(Grid::Range {
            lo: num(parts[0])?,
            hi: num(parts[1])?,
            n,
        })
    } else {
        let v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        Ok(Grid::List(v))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenNoise {
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[arg(long)]
    pub width: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gaussian,
    Feature,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelCurve {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Gaussian: detection tolerance.
    #[arg(long, default_value_t = 10.0)]
    pub gamma: f64,
    /// Gaussian: number of modes.
    #[arg(long, default_value_t = 64)]
    pub modes: usize,
    /// Gaussian: template amplitude, `a_i = amplitude / i`.
    #[arg(long, default_value_t = 200.0)]
    pub amplitude: f64,
    /// Gaussian: generating std at zero frequency.
    #[arg(long, default_value_t = 10.0)]
    pub s0: f64,
    /// Gaussian: widths as lo:hi:n (log-spaced) or a list.
    #[arg(long, value_parser = parse_grid, default_value = "0.25:64:25")]
    pub widths: Grid,
    /// Feature: number of regions.
    #[arg(long, default_value_t = 4)]
    pub regions: u32,
    /// Feature: region area.
    #[arg(long, default_value_t = 1.0)]
    pub area: f64,
    /// Feature: rates as lo:hi:n (linear) or a list.
    #[arg(long, value_parser = parse_grid, default_value = "0:2:201")]
    pub lambdas: Grid,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Simulate {
    /// Monte Carlo estimate of the per-mode match density.
    ModeDensity(SimModeDensity),
    /// Monte Carlo estimate of the feature-model detection probability.
    Feature(SimFeature),
    /// Mean toy-detector detections per noise width.
    DetectCurve(SimDetectCurve),
}

#[derive(Debug, Args, Serialize)]
pub struct SimModeDensity {
    /// Template coefficient.
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimFeature {
    #[arg(long, default_value_t = 4)]
    pub regions: u32,
    #[arg(long, default_value_t = 1.0)]
    pub area: f64,
    /// Rates as lo:hi:n (linear) or a list.
    #[arg(long, value_parser = parse_grid, default_value = "0.1,0.25,0.5")]
    pub lambdas: Grid,
    #[arg(long, default_value_t = 10_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimDetectCurve {
    /// Widths as lo:hi:n (log-spaced) or a list; defaults to the 9-level grid.
    #[arg(long, value_parser = parse_grid)]
    pub widths: Option<Grid>,
    /// Images per width (`--trials` is an alias).
    #[arg(long, alias = "trials", default_value_t = 100)]
    pub per_width: usize,
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    /// Detector score threshold in (0, 1).
    #[arg(long, default_value_t = 0.75)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalAp {
    /// Ground-truth annotations (JSON lines).
    #[arg(long)]
    pub gt: PathBuf,
    /// Detections (JSON lines).
    #[arg(long)]
    pub dets: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,
    /// Restrict ground truth to `attribute=value`.
    #[arg(long)]
    pub subset: Option<String>,
    /// Optional JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Stats {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AvgFace {
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory holding the images named by `image_id`.
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    /// Restrict to boxes with `attribute=value`.
    #[arg(long)]
    pub subset: Option<String>,
    /// Raw mean (`.ppm` for PPM, PNG otherwise).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub equalized: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Psycho {
    /// Drop too-fast and break trials.
    Clean(PsychoIo),
    /// Population response curve.
    Curve(PsychoCurve),
    /// Population response-time curve (band is one SD).
    Rt(PsychoIo),
    /// Per-group curves and pairwise differences.
    Groups(PsychoGroups),
    /// Fit the Gaussian model to the population curve.
    Fit(PsychoFit),
    /// Generate a synthetic trial log.
    Synth(PsychoSynth),
}

#[derive(Debug, Args, Serialize)]
pub struct PsychoIo {
    #[arg(long)]
    pub trials: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BandArg {
    Ci95,
    Sd,
}

#[derive(Debug, Args, Serialize)]
pub struct PsychoCurve {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: PsychoIo,
    #[arg(long, value_enum, default_value = "ci95")]
    pub band: BandArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorArg {
    Group,
    Gender,
}

#[derive(Debug, Args, Serialize)]
pub struct PsychoGroups {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: PsychoIo,
    #[arg(long, value_enum, default_value = "group")]
    pub by: FactorArg,
    #[arg(long, value_enum, default_value = "ci95")]
    pub band: BandArg,
}

#[derive(Debug, Args, Serialize)]
pub struct PsychoFit {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: PsychoIo,
    /// Tolerance grid as lo:hi:n (linear) or a list.
    #[arg(long, value_parser = parse_grid, default_value = "1:20:20")]
    pub gamma_grid: Grid,
    #[arg(long, default_value_t = 1)]
    pub modes: usize,
    #[arg(long, default_value_t = 10.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 10.0)]
    pub s0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignArg {
    Appendix,
}

#[derive(Debug, Args, Serialize)]
pub struct PsychoSynth {
    #[arg(long, value_enum, default_value = "appendix")]
    pub design: DesignArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
