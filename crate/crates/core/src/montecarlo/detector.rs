//! Normalized cross-correlation face detector.
//!
//! A bank of schematic faces (two dark disks over a dark bar on a light
//! ground) is correlated against an 8-bit image at every valid offset. The
//! correlation `r ∈ [-1, 1]` maps to a score `(r + 1) / 2`; candidates above
//! the threshold go through greedy non-maximum suppression at IoU > 0.3.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{Curve, CurvePoint};
use crate::error::{Error, Result};
use crate::evalkit::{iou, BBox};
use crate::exec::Execution;
use crate::fft2d::Fft2d;
use crate::raster::Gray8;
use crate::rng::child_seed;
use crate::stimuli::{gen_noise, quantize, NoiseSpec};

/// Boxes overlapping a kept detection by more than this are suppressed.
pub const NMS_IOU: f64 = 0.3;

/// Side lengths of the default bank's faces, in pixels.
pub const DEFAULT_SCALES: [usize; 3] = [12, 16, 20];

/// Windows whose summed squared deviation falls below this are treated as flat.
const FLAT_WINDOW: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub width: usize,
    pub height: usize,
    /// Zero-mean, unit-norm weights, row-major.
    pub weights: Vec<f64>,
}

impl Template {
    pub fn from_values(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::Shape(format!(
                "template of {}x{} with {} values",
                width,
                height,
                values.len()
            )));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
        let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::param("template has no contrast"));
        }
        Ok(Self {
            width,
            height,
            weights: centered.into_iter().map(|v| v / norm).collect(),
        })
    }

    pub fn from_raster(r: &Gray8) -> Result<Self> {
        let v: Vec<f64> = r.data.iter().map(|&p| p as f64).collect();
        Template::from_values(r.width, r.height, &v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateBank {
    templates: Vec<Template>,
}

impl TemplateBank {
    pub fn new(templates: Vec<Template>) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::param("template bank is empty"));
        }
        Ok(Self { templates })
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }
}

/// Face schematic of side `size`: light ground (255), dark (0) eyes of
/// radius `0.15·size` centred at `(0.3, 0.35)` and `(0.7, 0.35)` of the side,
/// and a dark mouth bar spanning `x ∈ [0.3, 0.7)`, `y ∈ [0.68, 0.83)`.
pub fn face_schematic(size: usize) -> Gray8 {
    let s = size as f64;
    let mut r = Gray8::filled(size, size, 255);
    let radius2 = (0.15 * s).powi(2);
    for y in 0..size {
        for x in 0..size {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let eye = [0.3, 0.7]
                .iter()
                .any(|cx| (px - cx * s).powi(2) + (py - 0.35 * s).powi(2) <= radius2);
            let mouth = py >= 0.68 * s && py < 0.83 * s && px >= 0.3 * s && px < 0.7 * s;
            if eye || mouth {
                r.set(x, y, 0);
            }
        }
    }
    r
}

pub fn default_bank() -> TemplateBank {
    let templates = DEFAULT_SCALES
        .iter()
        .map(|&s| Template::from_raster(&face_schematic(s)).expect("schematic has contrast"))
        .collect();
    TemplateBank { templates }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f64,
    /// Index of the matching template in the bank.
    pub template: usize,
}

/// Bank transformed for one image size; reusable across images.
struct Scanner<'a> {
    bank: &'a TemplateBank,
    plan: Fft2d,
    spectra: Vec<Vec<Complex64>>,
}

impl<'a> Scanner<'a> {
    fn new(bank: &'a TemplateBank, width: usize, height: usize) -> Result<Self> {
        for t in bank.templates() {
            if t.width >= width || t.height >= height {
                return Err(Error::Shape(format!(
                    "template {}x{} is not smaller than image {}x{}",
                    t.width, t.height, width, height
                )));
            }
        }
        let plan = Fft2d::new(height, width);
        let spectra = bank
            .templates()
            .iter()
            .map(|t| {
                let mut buf = vec![Complex64::new(0.0, 0.0); width * height];
                for y in 0..t.height {
                    for x in 0..t.width {
                        buf[y * width + x] = Complex64::new(t.weights[y * t.width + x], 0.0);
                    }
                }
                plan.forward(&mut buf);
                buf
            })
            .collect();
        Ok(Self {
            bank,
            plan,
            spectra,
        })
    }

    fn scan(&self, img: &Gray8, threshold: f64) -> Vec<Detection> {
        let (w, h) = (img.width, img.height);
        let mean = img.data.iter().map(|&p| p as f64).sum::<f64>() / img.data.len() as f64;
        let mut spectrum: Vec<Complex64> = img
            .data
            .iter()
            .map(|&p| Complex64::new(p as f64 - mean, 0.0))
            .collect();
        self.plan.forward(&mut spectrum);
        let integral = Integral::new(img);

        let mut candidates = Vec::new();
        let mut corr = vec![Complex64::new(0.0, 0.0); w * h];
        for (ti, (t, tf)) in self.bank.templates().iter().zip(&self.spectra).enumerate() {
            for ((c, a), b) in corr.iter_mut().zip(&spectrum).zip(tf) {
                *c = a * b.conj();
            }
            self.plan.inverse(&mut corr);
            let n = (t.width * t.height) as f64;
            for y in 0..=(h - t.height) {
                for x in 0..=(w - t.width) {
                    let (s, s2) = integral.window(x, y, t.width, t.height);
                    let ss = s2 - s * s / n;
                    if ss < FLAT_WINDOW {
                        continue;
                    }
                    let r = (corr[y * w + x].re / ss.sqrt()).clamp(-1.0, 1.0);
                    let score = (r + 1.0) / 2.0;
                    if score > threshold {
                        candidates.push(Detection {
                            bbox: BBox::new_unchecked(
                                x as f64,
                                y as f64,
                                (x + t.width) as f64,
                                (y + t.height) as f64,
                            ),
                            score,
                            template: ti,
                        });
                    }
                }
            }
        }
        non_max_suppression(candidates)
    }
}

/// Summed-area tables of pixel values and their squares.
struct Integral {
    stride: usize,
    sum: Vec<f64>,
    sum2: Vec<f64>,
}

impl Integral {
    fn new(img: &Gray8) -> Self {
        let stride = img.width + 1;
        let mut sum = vec![0.0; stride * (img.height + 1)];
        let mut sum2 = vec![0.0; stride * (img.height + 1)];
        for y in 0..img.height {
            let (mut row, mut row2) = (0.0, 0.0);
            for x in 0..img.width {
                let v = img.get(x, y) as f64;
                row += v;
                row2 += v * v;
                sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + row;
                sum2[(y + 1) * stride + x + 1] = sum2[y * stride + x + 1] + row2;
            }
        }
        Self { stride, sum, sum2 }
    }

    fn window(&self, x: usize, y: usize, w: usize, h: usize) -> (f64, f64) {
        let at = |t: &[f64], xx: usize, yy: usize| t[yy * self.stride + xx];
        let rect = |t: &[f64]| at(t, x + w, y + h) - at(t, x, y + h) - at(t, x + w, y) + at(t, x, y);
        (rect(&self.sum), rect(&self.sum2))
    }
}

fn non_max_suppression(mut candidates: Vec<Detection>) -> Vec<Detection> {
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.bbox.y_min.total_cmp(&b.bbox.y_min))
            .then(a.bbox.x_min.total_cmp(&b.bbox.x_min))
            .then(a.template.cmp(&b.template))
    });
    let mut kept: Vec<Detection> = Vec::new();
    for c in candidates {
        if kept.iter().all(|k| iou(&k.bbox, &c.bbox) <= NMS_IOU) {
            kept.push(c);
        }
    }
    kept
}

/// Detections with score above `threshold`, by descending score then
/// row-major position.
pub fn scan_detect(img: &Gray8, bank: &TemplateBank, threshold: f64) -> Result<Vec<Detection>> {
    check_threshold(threshold)?;
    Ok(Scanner::new(bank, img.width, img.height)?.scan(img, threshold))
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionCurveConfig {
    /// Strictly increasing envelope widths.
    pub widths: Vec<f64>,
    pub per_width: usize,
    pub size: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for DetectionCurveConfig {
    fn default() -> Self {
        Self {
            widths: crate::stimuli::DEFAULT_WIDTHS.to_vec(),
            per_width: 100,
            size: 256,
            threshold: 0.75,
            seed: 0,
        }
    }
}

pub fn detection_curve(cfg: &DetectionCurveConfig, bank: &TemplateBank) -> Result<Curve> {
    detection_curve_with(cfg, bank, Execution::default())
}

/// Mean detection count per width over freshly generated stimuli.
///
/// Width `i` uses the batch seeded by `child_seed(cfg.seed, i)`, image `k`
/// of that batch its `k`-th child. The interval is `1.96 · sd / √n`, zero
/// for a single image.
pub fn detection_curve_with(
    cfg: &DetectionCurveConfig,
    bank: &TemplateBank,
    exec: Execution,
) -> Result<Curve> {
    check_threshold(cfg.threshold)?;
    if cfg.widths.is_empty() {
        return Err(Error::param("need at least one width"));
    }
    if cfg.per_width == 0 {
        return Err(Error::param("need at least one image per width"));
    }
    let specs = cfg
        .widths
        .iter()
        .enumerate()
        .map(|(i, &w)| NoiseSpec::new(cfg.size, w, child_seed(cfg.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let scanner = Scanner::new(bank, cfg.size, cfg.size)?;
    let per = cfg.per_width;
    let counts = exec.map(specs.len() * per, |job| -> Result<f64> {
        let img = gen_noise(&specs[job / per].child(job % per))?;
        Ok(scanner.scan(&quantize(&img)?, cfg.threshold).len() as f64)
    });
    let counts = counts.into_iter().collect::<Result<Vec<_>>>()?;
    let points = cfg
        .widths
        .iter()
        .zip(counts.chunks(per))
        .map(|(&w, c)| {
            let n = c.len() as f64;
            let mean = c.iter().sum::<f64>() / n;
            let ci = if c.len() > 1 {
                let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                1.96 * var.sqrt() / n.sqrt()
            } else {
                0.0
            };
            CurvePoint::with_ci(w, mean, ci)
        })
        .collect();
    Curve::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn embed(ground: u8, size: usize, patches: &[(usize, usize, &Gray8)]) -> Gray8 {
        let mut img = Gray8::filled(size, size, ground);
        for &(x0, y0, p) in patches {
            for y in 0..p.height {
                for x in 0..p.width {
                    img.set(x0 + x, y0 + y, p.get(x, y));
                }
            }
        }
        img
    }

    #[test]
    fn schematic_templates_are_normalized() {
        for t in default_bank().templates() {
            let sum: f64 = t.weights.iter().sum();
            let norm: f64 = t.weights.iter().map(|w| w * w).sum();
            assert!(sum.abs() < 1e-12);
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_face_is_found_once() {
        let bank = default_bank();
        let face = face_schematic(16);
        let img = embed(255, 64, &[(21, 17, &face)]);
        let dets = scan_detect(&img, &bank, 0.75).unwrap();
        assert_eq!(dets.len(), 1, "{dets:?}");
        assert_eq!((dets[0].bbox.x_min, dets[0].bbox.y_min), (21.0, 17.0));
        assert_eq!(dets[0].template, 1);
        assert!(dets[0].score > 0.99);
    }

    #[test]
    fn flat_image_has_no_detections() {
        let img = Gray8::filled(48, 48, 90);
        assert!(scan_detect(&img, &default_bank(), 0.55).unwrap().is_empty());
    }

    #[test]
    fn two_disjoint_faces_survive_suppression() {
        let face = face_schematic(12);
        let img = embed(255, 80, &[(5, 6, &face), (50, 40, &face)]);
        let dets = scan_detect(&img, &default_bank(), 0.75).unwrap();
        assert_eq!(dets.len(), 2, "{dets:?}");
        let mut pos: Vec<(f64, f64)> = dets.iter().map(|d| (d.bbox.x_min, d.bbox.y_min)).collect();
        pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pos, vec![(5.0, 6.0), (50.0, 40.0)]);
    }

    #[test]
    fn top_detection_follows_translation() {
        let face = face_schematic(20);
        let bank = default_bank();
        let base = scan_detect(&embed(255, 72, &[(10, 10, &face)]), &bank, 0.75).unwrap()[0];
        for k in 0..10usize {
            let (dx, dy) = ((k * 7) % 31, (k * 13) % 29);
            let dets = scan_detect(&embed(255, 72, &[(10 + dx, 10 + dy, &face)]), &bank, 0.75).unwrap();
            assert_eq!(dets[0].bbox.x_min, base.bbox.x_min + dx as f64);
            assert_eq!(dets[0].bbox.y_min, base.bbox.y_min + dy as f64);
        }
    }

    #[test]
    fn oversized_template_is_shape_error() {
        let img = Gray8::filled(16, 16, 0);
        assert!(matches!(scan_detect(&img, &default_bank(), 0.75), Err(Error::Shape(_))));
    }

    #[test]
    fn rejects_threshold_outside_unit_interval() {
        let img = Gray8::filled(64, 64, 0);
        assert!(scan_detect(&img, &default_bank(), 1.0).is_err());
        assert!(scan_detect(&img, &default_bank(), 0.0).is_err());
    }

    #[test]
    fn matches_direct_correlation() {
        // Brute-force NCC at every offset of a small noise image.
        let img = quantize(&gen_noise(&NoiseSpec::new(40, 6.0, 3).unwrap()).unwrap()).unwrap();
        let t = Template::from_raster(&face_schematic(12)).unwrap();
        let bank = TemplateBank::new(vec![t.clone()]).unwrap();
        let dets = scan_detect(&img, &bank, 0.6).unwrap();
        let mut brute = Vec::new();
        for y in 0..=(40 - 12) {
            for x in 0..=(40 - 12) {
                let win: Vec<f64> = (0..144).map(|i| img.get(x + i % 12, y + i / 12) as f64).collect();
                let m = win.iter().sum::<f64>() / 144.0;
                let norm = win.iter().map(|v| (v - m).powi(2)).sum::<f64>().sqrt();
                let r: f64 = win.iter().zip(&t.weights).map(|(v, w)| (v - m) * w).sum::<f64>() / norm;
                brute.push(((r + 1.0) / 2.0, x, y));
            }
        }
        for d in &dets {
            let (s, _, _) = brute
                .iter()
                .find(|(_, x, y)| *x as f64 == d.bbox.x_min && *y as f64 == d.bbox.y_min)
                .unwrap();
            assert!((s - d.score).abs() < 1e-9);
        }
        let best = brute.iter().map(|b| b.0).fold(0.0, f64::max);
        if best > 0.6 {
            assert!((dets[0].score - best).abs() < 1e-9);
        }
    }

    #[test]
    fn unattainable_threshold_gives_zero_curve() {
        let cfg = DetectionCurveConfig {
            widths: vec![2.0, 8.0],
            per_width: 3,
            size: 64,
            threshold: 1.0 - 1e-12,
            seed: 1,
        };
        let c = detection_curve(&cfg, &default_bank()).unwrap();
        assert!(c.ys().iter().all(|&y| y == 0.0));
    }

    #[test]
    fn single_image_per_width_has_zero_interval() {
        let cfg = DetectionCurveConfig {
            widths: vec![4.0, 16.0],
            per_width: 1,
            size: 64,
            threshold: 0.7,
            seed: 2,
        };
        let c = detection_curve(&cfg, &default_bank()).unwrap();
        assert!(c.points().iter().all(|p| p.ci_half_width == Some(0.0)));
    }

    #[test]
    fn raising_threshold_never_adds_detections() {
        let base = DetectionCurveConfig {
            widths: vec![4.0, 16.0, 32.0],
            per_width: 4,
            size: 96,
            threshold: 0.65,
            seed: 5,
        };
        let low = detection_curve(&base, &default_bank()).unwrap();
        let high = detection_curve(
            &DetectionCurveConfig {
                threshold: 0.72,
                ..base.clone()
            },
            &default_bank(),
        )
        .unwrap();
        for (l, h) in low.points().iter().zip(high.points()) {
            assert!(h.y <= l.y);
            assert!(l.y.is_finite() && l.y >= 0.0);
        }
    }
}
