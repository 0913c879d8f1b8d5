//! Band-limited random images.
//!
//! An image is drawn as i.i.d. standard-normal pixels, transformed to the
//! Fourier domain, multiplied by the centred Gaussian envelope
//! `G(u, v) = exp(-(u² + v²) / (2 w²))` over signed integer frequencies
//! `u, v ∈ [-size/2, size/2)`, and transformed back. The real part of the
//! inverse transform is the image. Expected power at radius `f` is therefore
//! proportional to `exp(-f² / w²)`.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fft2d::{signed_frequency, Fft2d};
use crate::raster::Gray8;
use crate::rng::{child_seed, stream};

/// Filter widths of the nine-level complexity schedule, `2^(level - 2)`.
pub const DEFAULT_WIDTHS: [f64; 9] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Pixels per side.
    pub size: usize,
    /// Standard deviation of the frequency envelope, in frequency-grid units.
    pub width: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(size: usize, width: f64, seed: u64) -> Result<Self> {
        let spec = Self { size, width, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::param(format!("noise size must be >= 2, got {}", self.size)));
        }
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(Error::param(format!(
                "envelope width must be positive and finite, got {}",
                self.width
            )));
        }
        Ok(())
    }

    /// Spec of image `index` in a batch generated from this one.
    pub fn child(&self, index: usize) -> NoiseSpec {
        NoiseSpec {
            seed: child_seed(self.seed, index as u64),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseImage {
    pub size: usize,
    /// Row-major `size × size` grid.
    pub pixels: Vec<f64>,
    pub spec: NoiseSpec,
}

impl NoiseImage {
    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.pixels.iter().map(|p| (p - m) * (p - m)).sum();
        (ss / self.pixels.len() as f64).sqrt()
    }
}

/// Envelope value at DFT indices `(row, col)` of a `size × size` grid.
#[inline]
pub fn envelope(row: usize, col: usize, size: usize, width: f64) -> f64 {
    let u = signed_frequency(col, size);
    let v = signed_frequency(row, size);
    (-(u * u + v * v) / (2.0 * width * width)).exp()
}

struct Synthesis {
    pixels: Vec<f64>,
    /// max |imaginary part| of the inverse transform.
    max_imag: f64,
}

fn synthesize(spec: &NoiseSpec, plan: &Fft2d) -> Synthesis {
    let n = spec.size;
    let mut rng = stream(spec.seed);
    let mut field: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();
    plan.forward(&mut field);
    for row in 0..n {
        for col in 0..n {
            field[row * n + col] *= envelope(row, col, n, spec.width);
        }
    }
    plan.inverse(&mut field);
    let max_imag = field.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    Synthesis {
        pixels: field.into_iter().map(|z| z.re).collect(),
        max_imag,
    }
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Generates one noise image. Deterministic in `(size, width, seed)`.
pub fn gen_noise(spec: &NoiseSpec) -> Result<NoiseImage> {
    spec.validate()?;
    let plan = Fft2d::new(spec.size, spec.size);
    Ok(gen_with_plan(spec, &plan))
}

fn gen_with_plan(spec: &NoiseSpec, plan: &Fft2d) -> NoiseImage {
    let s = synthesize(spec, plan);
    debug_assert!(
        s.max_imag <= 1e-9 * rms(&s.pixels).max(f64::MIN_POSITIVE),
        "imaginary residue {} too large",
        s.max_imag
    );
    NoiseImage {
        size: spec.size,
        pixels: s.pixels,
        spec: *spec,
    }
}

/// Ratio of the largest discarded imaginary component to the image RMS.
pub fn imaginary_residue(spec: &NoiseSpec) -> Result<f64> {
    spec.validate()?;
    let s = synthesize(spec, &Fft2d::new(spec.size, spec.size));
    Ok(s.max_imag / rms(&s.pixels))
}

/// `count` images; image `k` is `gen_noise(spec.child(k))`.
pub fn gen_batch(spec: &NoiseSpec, count: usize) -> Result<Vec<NoiseImage>> {
    gen_batch_with(spec, count, Execution::default())
}

pub fn gen_batch_with(spec: &NoiseSpec, count: usize, exec: Execution) -> Result<Vec<NoiseImage>> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::param("batch count must be >= 1"));
    }
    let plan = Fft2d::new(spec.size, spec.size);
    Ok(exec.map(count, |k| gen_with_plan(&spec.child(k), &plan)))
}

/// Affine map of `[min, max]` onto `[0, 255]` with round-half-up.
pub fn quantize(img: &NoiseImage) -> Result<Gray8> {
    quantize_values(&img.pixels, img.size, img.size)
}

pub fn quantize_values(values: &[f64], width: usize, height: usize) -> Result<Gray8> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) || !(hi - lo).is_finite() {
        return Err(Error::DegenerateRange);
    }
    let scale = 255.0 / (hi - lo);
    let data = values
        .iter()
        .map(|&v| ((v - lo) * scale + 0.5).floor().clamp(0.0, 255.0) as u8)
        .collect();
    Gray8::new(width, height, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBin {
    /// Mean radius of the frequencies in the bin, cycles/image.
    pub frequency: f64,
    /// Mean of `|F(u,v)|² / N²` over the bin.
    pub mean_power: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    /// Nonempty bins only, by increasing frequency.
    pub radial_bins: Vec<RadialBin>,
}

impl PowerSpectrum {
    /// Power-weighted mean radius.
    pub fn centroid(&self) -> f64 {
        let (num, den) = self.radial_bins.iter().fold((0.0, 0.0), |(n, d), b| {
            let w = b.mean_power * b.count as f64;
            (n + w * b.frequency, d + w)
        });
        num / den
    }

    /// Bin-wise mean of spectra computed with the same size and bin count.
    pub fn average(spectra: &[PowerSpectrum]) -> Result<PowerSpectrum> {
        let first = spectra
            .first()
            .ok_or_else(|| Error::param("no spectra to average"))?;
        let mut bins = first.radial_bins.clone();
        for s in &spectra[1..] {
            if s.radial_bins.len() != bins.len() {
                return Err(Error::Shape("spectra have different binning".into()));
            }
            for (acc, b) in bins.iter_mut().zip(&s.radial_bins) {
                if acc.count != b.count {
                    return Err(Error::Shape("spectra have different binning".into()));
                }
                acc.mean_power += b.mean_power;
            }
        }
        let k = spectra.len() as f64;
        for b in &mut bins {
            b.mean_power /= k;
        }
        Ok(PowerSpectrum { radial_bins: bins })
    }
}

/// Radially binned power spectrum, DC excluded.
///
/// Bins split `(0, r_max]` uniformly, where `r_max = √2 · size/2` is the
/// corner radius of the signed frequency grid.
pub fn radial_spectrum(img: &NoiseImage, n_bins: usize) -> Result<PowerSpectrum> {
    if n_bins < 2 {
        return Err(Error::param("radial spectrum needs at least 2 bins"));
    }
    let n = img.size;
    if img.pixels.len() != n * n {
        return Err(Error::Shape("pixel grid is not size x size".into()));
    }
    let plan = Fft2d::new(n, n);
    let mut f: Vec<Complex64> = img.pixels.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    plan.forward(&mut f);

    let r_max = std::f64::consts::SQRT_2 * (n as f64 / 2.0);
    let norm = (n * n) as f64;
    let mut sum_r = vec![0.0; n_bins];
    let mut sum_p = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    for row in 0..n {
        let v = signed_frequency(row, n);
        for col in 0..n {
            if row == 0 && col == 0 {
                continue;
            }
            let u = signed_frequency(col, n);
            let r = (u * u + v * v).sqrt();
            let b = ((r / r_max * n_bins as f64) as usize).min(n_bins - 1);
            sum_r[b] += r;
            sum_p[b] += f[row * n + col].norm_sqr() / norm;
            count[b] += 1;
        }
    }
    let radial_bins = (0..n_bins)
        .filter(|&b| count[b] > 0)
        .map(|b| RadialBin {
            frequency: sum_r[b] / count[b] as f64,
            mean_power: sum_p[b] / count[b] as f64,
            count: count[b],
        })
        .collect();
    Ok(PowerSpectrum { radial_bins })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_from(size: usize, pixels: Vec<f64>) -> NoiseImage {
        NoiseImage {
            size,
            pixels,
            spec: NoiseSpec {
                size,
                width: 1.0,
                seed: 0,
            },
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(NoiseSpec::new(1, 1.0, 0).is_err());
        assert!(NoiseSpec::new(8, 0.0, 0).is_err());
        assert!(NoiseSpec::new(8, -2.0, 0).is_err());
        assert!(NoiseSpec::new(8, f64::NAN, 0).is_err());
        assert!(gen_batch(&NoiseSpec::new(8, 1.0, 0).unwrap(), 0).is_err());
    }

    #[test]
    fn vanishing_width_passes_only_dc() {
        let img = gen_noise(&NoiseSpec::new(64, 1e-6, 3).unwrap()).unwrap();
        let dc = img.mean().abs();
        assert!(dc > 0.0);
        assert!(img.std_dev() / dc < 1e-3);
    }

    #[test]
    fn deterministic() {
        let spec = NoiseSpec::new(32, 4.0, 11).unwrap();
        let a = gen_noise(&spec).unwrap();
        let b = gen_noise(&spec).unwrap();
        assert!(a.pixels.iter().zip(&b.pixels).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn batch_of_one_is_child_zero() {
        let spec = NoiseSpec::new(16, 2.0, 99).unwrap();
        let batch = gen_batch(&spec, 1).unwrap();
        let direct = gen_noise(&spec.child(0)).unwrap();
        assert_eq!(batch[0], direct);
    }

    #[test]
    fn batch_members_do_not_depend_on_batch_size() {
        let spec = NoiseSpec::new(16, 2.0, 5).unwrap();
        let small = gen_batch(&spec, 2).unwrap();
        let large = gen_batch(&spec, 5).unwrap();
        assert_eq!(small[..], large[..2]);
        assert_ne!(large[0].pixels, large[1].pixels);
    }

    #[test]
    fn output_is_real() {
        for width in [0.5, 4.0, 1e9] {
            let r = imaginary_residue(&NoiseSpec::new(64, width, 1).unwrap()).unwrap();
            assert!(r < 1e-9, "width {width}: residue {r}");
        }
    }

    #[test]
    fn quantize_endpoints_and_midpoint() {
        let img = image_from(2, vec![-1.0, 0.0, 1.0, 1.0]);
        let q = quantize(&img).unwrap();
        assert_eq!(q.data, vec![0, 128, 255, 255]);
    }

    #[test]
    fn quantize_constant_is_degenerate() {
        let img = image_from(2, vec![0.5; 4]);
        assert!(matches!(quantize(&img), Err(Error::DegenerateRange)));
    }

    #[test]
    fn quantize_hits_both_ends_and_is_idempotent() {
        let batch = gen_batch(&NoiseSpec::new(32, 3.0, 8).unwrap(), 20).unwrap();
        for img in &batch {
            let q = quantize(img).unwrap();
            assert_eq!(*q.data.iter().min().unwrap(), 0);
            assert_eq!(*q.data.iter().max().unwrap(), 255);
            let lifted: Vec<f64> = q.data.iter().map(|&v| v as f64).collect();
            let again = quantize_values(&lifted, 32, 32).unwrap();
            assert_eq!(again, q);
        }
    }

    #[test]
    fn constant_image_has_no_ac_power() {
        let img = image_from(16, vec![3.0; 256]);
        let s = radial_spectrum(&img, 8).unwrap();
        assert!(s.radial_bins.iter().all(|b| b.mean_power < 1e-20));
    }

    #[test]
    fn sinusoid_power_lands_in_one_bin() {
        let n = 32;
        let (u, v) = (3.0, 4.0); // radius 5
        let pixels: Vec<f64> = (0..n * n)
            .map(|i| {
                let (r, c) = ((i / n) as f64, (i % n) as f64);
                (2.0 * std::f64::consts::PI * (u * c + v * r) / n as f64).cos()
            })
            .collect();
        let s = radial_spectrum(&image_from(n, pixels), 16).unwrap();
        let total: f64 = s.radial_bins.iter().map(|b| b.mean_power * b.count as f64).sum();
        let hit = s
            .radial_bins
            .iter()
            .find(|b| b.mean_power * b.count as f64 > 1e-9 * total)
            .unwrap();
        assert!((hit.mean_power * hit.count as f64 - total).abs() < 1e-9 * total);
        assert!(s.radial_bins.iter().filter(|b| b.mean_power > 1e-12).count() == 1);
        assert!(hit.frequency > 4.0 && hit.frequency < 6.0);
    }

    #[test]
    fn rejects_too_few_bins() {
        assert!(radial_spectrum(&image_from(4, vec![0.0; 16]), 1).is_err());
    }
}
