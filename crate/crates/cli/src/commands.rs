use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use pareidolia::curve::fmt_f64;
use pareidolia::evalkit::{
    average_face, average_precision_subset, dataset_stats, read_annotations, read_detections,
    SubsetFilter,
};
use pareidolia::feature_model::{feature_curve, lin_space, template_detect_prob, FeatureModelParams};
use pareidolia::gaussian_model::{
    curve_over_widths, log_space, mode_match_density, GaussianCurveConfig, GaussianDetectionParams,
};
use pareidolia::montecarlo::{default_bank, detection_curve, DetectionCurveConfig};
use pareidolia::montecarlo::{mc_feature_detect, mc_mode_density, McConfig};
use pareidolia::psycho::{
    clean_trials, compare_groups, fit_gaussian_model, population_curve, read_trials, rt_curve,
    synthesize_trials, write_trials, Band, DropReason, GroupFactor, SynthDesign,
};
use pareidolia::raster::Rgb8;
use pareidolia::rng::child_seed;
use pareidolia::stimuli::{gen_batch, quantize, NoiseSpec, DEFAULT_WIDTHS};
use pareidolia::{Curve, CurvePoint, Execution};

use crate::args::*;
use crate::output::{sidecar_path, Run};
use crate::svg::{render_svg, SvgOptions};
use crate::UsageError;

struct Ctx<'a> {
    cli: &'a Cli,
}

impl Ctx<'_> {
    fn warn(&self, msg: &str) {
        if !self.cli.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn finish(&self, run: Run, primary: &Path) -> Result<()> {
        let path = self.cli.meta.clone().unwrap_or_else(|| sidecar_path(primary));
        run.finish(&path)
    }

    fn svg(&self, run: &mut Run, curve: &Curve, path: Option<&PathBuf>, opts: SvgOptions) -> Result<()> {
        let Some(path) = path else { return Ok(()) };
        let svg = render_svg(curve, &opts)?;
        for w in &svg.warnings {
            self.warn(w);
        }
        run.write(path, svg.document.as_bytes())
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn resolve(grid: &Grid, log: bool) -> Result<Vec<f64>> {
    Ok(match *grid {
        Grid::Range { lo, hi, n } if log => log_space(lo, hi, n)?,
        Grid::Range { lo, hi, n } => lin_space(lo, hi, n)?,
        Grid::List(ref v) => v.clone(),
    })
}

fn curve_csv(curve: &Curve, x: &str, y: &str) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    curve.write_csv(&mut buf, x, y)?;
    Ok(buf)
}

fn subset(spec: &Option<String>) -> Result<Option<SubsetFilter>> {
    spec.as_deref().map(SubsetFilter::parse).transpose().map_err(Into::into)
}

fn band(b: BandArg) -> Band {
    match b {
        BandArg::Ci95 => Band::Ci95,
        BandArg::Sd => Band::StdDev,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let ctx = Ctx { cli };
    match &cli.command {
        Command::GenNoise(a) => gen_noise(&ctx, a),
        Command::ModelCurve(a) => model_curve(&ctx, a),
        Command::Simulate(Simulate::ModeDensity(a)) => sim_mode_density(&ctx, a),
        Command::Simulate(Simulate::Feature(a)) => sim_feature(&ctx, a),
        Command::Simulate(Simulate::DetectCurve(a)) => sim_detect_curve(&ctx, a),
        Command::EvalAp(a) => eval_ap(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::AvgFace(a) => avg_face(&ctx, a),
        Command::Psycho(p) => match p {
            Psycho::Clean(a) => psycho_clean(&ctx, a),
            Psycho::Curve(a) => psycho_curve(&ctx, a),
            Psycho::Rt(a) => psycho_rt(&ctx, a),
            Psycho::Groups(a) => psycho_groups(&ctx, a),
            Psycho::Fit(a) => psycho_fit(&ctx, a),
            Psycho::Synth(a) => psycho_synth(&ctx, a),
        },
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    index: usize,
    seed: u64,
}

#[derive(Serialize)]
struct Manifest {
    size: usize,
    width: f64,
    seed: u64,
    count: usize,
    files: Vec<ManifestEntry>,
}

fn gen_noise(ctx: &Ctx, a: &GenNoise) -> Result<()> {
    let mut run = Run::new("gen-noise");
    run.seed = Some(a.seed);
    run.params(a)?;
    let spec = NoiseSpec::new(a.size, a.width, a.seed)?;
    if a.count == 0 {
        return Err(UsageError("--count must be >= 1".into()).into());
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let images = gen_batch(&spec, a.count)?;
    let mut files = Vec::with_capacity(images.len());
    for (k, img) in images.iter().enumerate() {
        let name = format!("noise_w{}_s{}_{}.pgm", a.width, a.seed, k);
        run.write(&a.out.join(&name), &quantize(img)?.to_pgm())?;
        files.push(ManifestEntry {
            file: name,
            index: k,
            seed: spec.child(k).seed,
        });
    }
    let manifest = Manifest {
        size: a.size,
        width: a.width,
        seed: a.seed,
        count: a.count,
        files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    run.write(&a.out.join("manifest.json"), &bytes)?;
    ctx.finish(run, &a.out)
}

fn model_curve(ctx: &Ctx, a: &ModelCurve) -> Result<()> {
    let mut run = Run::new("model-curve");
    run.params(a)?;
    let (curve, x, y) = match a.model {
        ModelKind::Gaussian => {
            let widths = resolve(&a.widths, true)?;
            let cfg = GaussianCurveConfig {
                modes: a.modes,
                amplitude: a.amplitude,
                s0: a.s0,
            };
            let ln = curve_over_widths(&widths, &cfg, &GaussianDetectionParams::new(a.gamma)?)?;
            let log10 = Curve::new(
                ln.points()
                    .iter()
                    .map(|p| CurvePoint::new(p.x, p.y / std::f64::consts::LN_10))
                    .collect(),
            )?;
            (log10, "width", "log10_density")
        }
        ModelKind::Feature => {
            let lambdas = resolve(&a.lambdas, false)?;
            (feature_curve(&lambdas, a.regions, a.area)?, "lambda", "probability")
        }
    };
    run.write(&a.out, &curve_csv(&curve, x, y)?)?;
    let opts = SvgOptions {
        x_label: x.into(),
        y_label: y.into(),
        log_x: a.model == ModelKind::Gaussian,
        log_y: false,
    };
    ctx.svg(&mut run, &curve, a.svg.as_ref(), opts)?;
    ctx.finish(run, &a.out)
}

fn sim_mode_density(ctx: &Ctx, a: &SimModeDensity) -> Result<()> {
    let mut run = Run::new("simulate mode-density");
    run.seed = Some(a.seed);
    run.params(a)?;
    let est = mc_mode_density(a.a, a.sigma, a.gamma, &McConfig::new(a.trials, a.seed))?;
    let exact = mode_match_density(a.a, a.sigma, a.gamma)?;
    let csv = format!(
        "a,sigma,gamma,mc_mean,mc_std_error,closed_form,trials,seed\n{},{},{},{},{},{},{},{}\n",
        fmt_f64(a.a),
        fmt_f64(a.sigma),
        fmt_f64(a.gamma),
        fmt_f64(est.mean),
        fmt_f64(est.std_error),
        fmt_f64(exact),
        est.trials,
        est.seed
    );
    run.write(&a.out, csv.as_bytes())?;
    ctx.finish(run, &a.out)
}

fn sim_feature(ctx: &Ctx, a: &SimFeature) -> Result<()> {
    let mut run = Run::new("simulate feature");
    run.seed = Some(a.seed);
    run.params(a)?;
    let lambdas = resolve(&a.lambdas, false)?;
    let mut csv = String::from("lambda,mc_mean,mc_std_error,closed_form,trials,seed\n");
    for (i, &l) in lambdas.iter().enumerate() {
        let params = FeatureModelParams::new(l, a.regions, a.area)?;
        let est = mc_feature_detect(&params, &McConfig::new(a.trials, child_seed(a.seed, i as u64)))?;
        let exact = template_detect_prob(&params)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(l),
            fmt_f64(est.mean),
            fmt_f64(est.std_error),
            fmt_f64(exact),
            est.trials,
            est.seed
        ));
    }
    run.write(&a.out, csv.as_bytes())?;
    ctx.finish(run, &a.out)
}

fn sim_detect_curve(ctx: &Ctx, a: &SimDetectCurve) -> Result<()> {
    let mut run = Run::new("simulate detect-curve");
    run.seed = Some(a.seed);
    let widths = match &a.widths {
        Some(g) => resolve(g, true)?,
        None => DEFAULT_WIDTHS.to_vec(),
    };
    let cfg = DetectionCurveConfig {
        widths,
        per_width: a.per_width,
        size: a.size,
        threshold: a.threshold,
        seed: a.seed,
    };
    run.params(&cfg)?;
    let curve = detection_curve(&cfg, &default_bank())?;
    run.write(&a.out, &curve_csv(&curve, "width", "mean_detections")?)?;
    let opts = SvgOptions {
        x_label: "width".into(),
        y_label: "mean detections".into(),
        log_x: true,
        log_y: false,
    };
    ctx.svg(&mut run, &curve, a.svg.as_ref(), opts)?;
    ctx.finish(run, &a.out)
}

fn eval_ap(ctx: &Ctx, a: &EvalAp) -> Result<()> {
    let mut run = Run::new("eval-ap");
    run.params(a)?;
    let filter = subset(&a.subset)?;
    let gts = read_annotations(open(&a.gt)?, &a.gt.display().to_string())?;
    let dets = read_detections(open(&a.dets)?, &a.dets.display().to_string())?;
    let report = average_precision_subset(&dets, &gts, a.iou, |b| {
        filter.as_ref().is_none_or(|f| f.matches(b))
    })?;
    if report.no_ground_truth {
        ctx.warn("no ground-truth boxes; every detection is a false positive");
    }
    println!("AP {:.4}", report.ap);
    if let Some(out) = &a.out {
        let mut bytes = serde_json::to_vec_pretty(&report)?;
        bytes.push(b'\n');
        run.write(out, &bytes)?;
    }
    let primary = a.out.clone().unwrap_or_else(|| {
        let mut p = a.dets.clone().into_os_string();
        p.push(".eval-ap");
        PathBuf::from(p)
    });
    ctx.finish(run, &primary)
}

fn stats(ctx: &Ctx, a: &Stats) -> Result<()> {
    let mut run = Run::new("stats");
    run.params(a)?;
    let gts = read_annotations(open(&a.gt)?, &a.gt.display().to_string())?;
    let report = dataset_stats(&gts)?;
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    run.write(&a.out, &bytes)?;
    println!("images {} faces {}", report.images, report.faces);
    ctx.finish(run, &a.out)
}

const IMAGE_EXTENSIONS: [&str; 7] = ["png", "jpg", "jpeg", "ppm", "pgm", "pnm", "bmp"];

fn find_image(dir: &Path, id: &str) -> Option<PathBuf> {
    let direct = dir.join(id);
    if direct.is_file() {
        return Some(direct);
    }
    IMAGE_EXTENSIONS
        .iter()
        .map(|ext| dir.join(format!("{id}.{ext}")))
        .find(|p| p.is_file())
}

fn avg_face(ctx: &Ctx, a: &AvgFace) -> Result<()> {
    let mut run = Run::new("avg-face");
    run.params(a)?;
    let filter = subset(&a.subset)?;
    let gts = read_annotations(open(&a.gt)?, &a.gt.display().to_string())?;
    let mut images: Vec<(Rgb8, Vec<pareidolia::evalkit::BBox>)> = Vec::new();
    for rec in &gts {
        let boxes: Vec<_> = rec
            .boxes
            .iter()
            .filter(|b| filter.as_ref().is_none_or(|f| f.matches(b)))
            .map(|b| b.bbox)
            .collect();
        if boxes.is_empty() {
            continue;
        }
        match find_image(&a.images, &rec.image_id) {
            Some(p) => images.push((Rgb8::load(&p)?, boxes)),
            None => ctx.warn(&format!("no image found for {:?}; skipped", rec.image_id)),
        }
    }
    let crops: Vec<_> = images
        .iter()
        .flat_map(|(img, boxes)| boxes.iter().map(move |b| (img, *b)))
        .collect();
    if crops.is_empty() {
        anyhow::bail!("no face crops available");
    }
    let face = average_face(&crops, a.size)?;
    run.write(&a.out, &face.raw_rgb8().encode_for_path(&a.out)?)?;
    if let Some(eq) = &a.equalized {
        run.write(eq, &face.equalized.encode_for_path(eq)?)?;
    }
    println!("averaged {} crops", crops.len());
    ctx.finish(run, &a.out)
}

fn load_trials(path: &Path) -> Result<Vec<pareidolia::psycho::TrialRecord>> {
    Ok(read_trials(open(path)?, &path.display().to_string())?)
}

fn psycho_clean(ctx: &Ctx, a: &PsychoIo) -> Result<()> {
    let mut run = Run::new("psycho clean");
    run.params(a)?;
    let out = clean_trials(&load_trials(&a.trials)?);
    let fast = out.dropped.iter().filter(|(_, r)| *r == DropReason::TooFast).count();
    let breaks = out.dropped.len() - fast;
    let mut buf = Vec::new();
    write_trials(&mut buf, &out.kept)?;
    run.write(&a.out, &buf)?;
    println!("kept {} dropped {} (too-fast {fast}, break {breaks})", out.kept.len(), out.dropped.len());
    ctx.finish(run, &a.out)
}

fn psycho_curve(ctx: &Ctx, a: &PsychoCurve) -> Result<()> {
    let mut run = Run::new("psycho curve");
    run.params(a)?;
    let pop = population_curve(&load_trials(&a.io.trials)?, band(a.band))?;
    for w in &pop.warnings {
        ctx.warn(w);
    }
    run.write(&a.io.out, &curve_csv(&pop.curve, "width", "mean_response")?)?;
    let opts = SvgOptions {
        x_label: "width".into(),
        y_label: "faces reported".into(),
        log_x: true,
        log_y: false,
    };
    ctx.svg(&mut run, &pop.curve, a.io.svg.as_ref(), opts)?;
    ctx.finish(run, &a.io.out)
}

fn psycho_rt(ctx: &Ctx, a: &PsychoIo) -> Result<()> {
    let mut run = Run::new("psycho rt");
    run.params(a)?;
    let pop = rt_curve(&load_trials(&a.trials)?)?;
    for w in &pop.warnings {
        ctx.warn(w);
    }
    run.write(&a.out, &curve_csv(&pop.curve, "width", "mean_rt_ms")?)?;
    let opts = SvgOptions {
        x_label: "width".into(),
        y_label: "response time (ms)".into(),
        log_x: true,
        log_y: false,
    };
    ctx.svg(&mut run, &pop.curve, a.svg.as_ref(), opts)?;
    ctx.finish(run, &a.out)
}

fn psycho_groups(ctx: &Ctx, a: &PsychoGroups) -> Result<()> {
    let mut run = Run::new("psycho groups");
    run.params(a)?;
    let factor = match a.by {
        FactorArg::Group => GroupFactor::Group,
        FactorArg::Gender => GroupFactor::Gender,
    };
    let cmp = compare_groups(&load_trials(&a.io.trials)?, factor, band(a.band))?;
    let mut csv = String::from("label,n_subjects,flagged,width,mean_response,ci_half_width\n");
    for g in &cmp.curves {
        if g.flagged {
            ctx.warn(&format!("group {:?} has fewer than 2 subjects", g.label));
        }
        for p in g.curve.points() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                g.label,
                g.n_subjects,
                g.flagged,
                fmt_f64(p.x),
                fmt_f64(p.y),
                p.ci_half_width.map(fmt_f64).unwrap_or_default()
            ));
        }
    }
    run.write(&a.io.out, csv.as_bytes())?;
    for d in &cmp.differences {
        println!(
            "width {} {} vs {}: |diff| {:.4} pooled sd {:.4}",
            d.width, d.group_a, d.group_b, d.abs_difference, d.pooled_sd
        );
    }
    ctx.finish(run, &a.io.out)
}

fn psycho_fit(ctx: &Ctx, a: &PsychoFit) -> Result<()> {
    let mut run = Run::new("psycho fit");
    run.params(a)?;
    let pop = population_curve(&load_trials(&a.io.trials)?, Band::Ci95)?;
    let grid = resolve(&a.gamma_grid, false)?;
    let cfg = GaussianCurveConfig {
        modes: a.modes,
        amplitude: a.amplitude,
        s0: a.s0,
    };
    let fit = fit_gaussian_model(&pop.curve, &grid, &cfg, Execution::default())?;
    for g in fit.skipped() {
        ctx.warn(&format!("model underflows at gamma {g}; skipped"));
    }
    let mut csv = String::from("gamma,rss,scale\n");
    for g in &fit.grid {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(g.gamma),
            g.rss.map(fmt_f64).unwrap_or_default(),
            g.scale.map(fmt_f64).unwrap_or_default()
        ));
    }
    run.write(&a.io.out, csv.as_bytes())?;
    println!("gamma {} scale {:.6e} rss {:.6e}", fit.gamma_hat, fit.scale_hat, fit.rss);
    let opts = SvgOptions {
        x_label: "width".into(),
        y_label: "faces reported".into(),
        log_x: true,
        log_y: false,
    };
    ctx.svg(&mut run, &pop.curve, a.io.svg.as_ref(), opts)?;
    ctx.finish(run, &a.io.out)
}

fn psycho_synth(ctx: &Ctx, a: &PsychoSynth) -> Result<()> {
    let mut run = Run::new("psycho synth");
    run.seed = Some(a.seed);
    let design = match a.design {
        DesignArg::Appendix => SynthDesign::appendix(),
    };
    run.params(serde_json::json!({ "args": a, "design": design }))?;
    let trials = synthesize_trials(&design, a.seed)?;
    let mut buf = Vec::new();
    write_trials(&mut buf, &trials)?;
    run.write(&a.out, &buf)?;
    ctx.finish(run, &a.out)
}
