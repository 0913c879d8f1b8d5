//! Gaussian mode model.
//!
//! A random image is a set of independent modes, mode `i` carrying a
//! zero-mean Gaussian coefficient of standard deviation `σᵢ`. A template is a
//! vector of target coefficients `aᵢ`, and the observer accepts a mode when
//! it lies near its target with Gaussian tolerance `γ`. Marginalising over the
//! random coefficient gives the match density
//!
//! ```text
//! P(aᵢ) = (2π(γ² + σᵢ²))^(-1/2) · exp(-aᵢ² / (2(σᵢ² + γ²)))
//! ```
//!
//! and the template density is the product over modes, evaluated here in log
//! space. Mode `i` is identified with radial frequency `i` cycles/image, so a
//! noise image of envelope width `w` has `σᵢ = s0 · exp(-i² / (2w²))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::{Curve, CurvePoint};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Per-mode generating standard deviations, mode `i = 1..=M` at index `i-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub sigmas: Vec<f64>,
}

impl ModeSpectrum {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::param("mode spectrum needs at least one mode"));
        }
        if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::param(format!("generating std must be >= 0, got {s}")));
        }
        Ok(Self { sigmas })
    }

    /// Modes of a noise image filtered with envelope `width`.
    pub fn from_envelope(modes: usize, width: f64, s0: f64) -> Result<Self> {
        let sigmas = (1..=modes)
            .map(|i| envelope_sigma(i as f64, width, s0))
            .collect::<Result<Vec<_>>>()?;
        ModeSpectrum::new(sigmas)
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSpectrum {
    pub coeffs: Vec<f64>,
}

impl TemplateSpectrum {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(a) = coeffs.iter().find(|a| !a.is_finite()) {
            return Err(Error::param(format!("template coefficient {a} is not finite")));
        }
        Ok(Self { coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Detection tolerance, uniform across modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDetectionParams {
    pub gamma: f64,
}

impl GaussianDetectionParams {
    pub fn new(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { gamma })
    }
}

/// Everything except the tolerance that defines a probability-vs-width curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianCurveConfig {
    /// Number of modes `M`.
    pub modes: usize,
    /// Amplitude of the `1/f` template, `aᵢ = amplitude / i`.
    pub amplitude: f64,
    /// Generating std at DC.
    pub s0: f64,
}

impl Default for GaussianCurveConfig {
    fn default() -> Self {
        Self {
            modes: 64,
            amplitude: 200.0,
            s0: 10.0,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param(format!("tolerance gamma must be > 0, got {gamma}")));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("generating std must be >= 0, got {sigma}")));
    }
    Ok(())
}

#[inline]
fn log_density_unchecked(a: f64, sigma: f64, gamma: f64) -> f64 {
    let var = sigma * sigma + gamma * gamma;
    -0.5 * (2.0 * PI * var).ln() - a * a / (2.0 * var)
}

/// Density of finding target value `a` on a mode of generating std `sigma`.
pub fn mode_match_density(a: f64, sigma: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_sigma(sigma)?;
    let var = sigma * sigma + gamma * gamma;
    Ok((2.0 * PI * var).sqrt().recip() * (-a * a / (2.0 * var)).exp())
}

/// Natural log of [`mode_match_density`], computed without the exponential.
pub fn log_mode_match_density(a: f64, sigma: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_sigma(sigma)?;
    Ok(log_density_unchecked(a, sigma, gamma))
}

/// `Σᵢ ln P(aᵢ)` over all modes.
pub fn log_pareidolia_density(
    template: &TemplateSpectrum,
    modes: &ModeSpectrum,
    params: &GaussianDetectionParams,
) -> Result<f64> {
    check_gamma(params.gamma)?;
    if template.len() != modes.len() {
        return Err(Error::Shape(format!(
            "template has {} coefficients but spectrum has {} modes",
            template.len(),
            modes.len()
        )));
    }
    if modes.is_empty() {
        return Err(Error::param("need at least one mode"));
    }
    Ok(template
        .coeffs
        .iter()
        .zip(&modes.sigmas)
        .map(|(&a, &s)| log_density_unchecked(a, s, params.gamma))
        .sum())
}

/// Generating std of radial mode `f` under envelope `width`.
pub fn envelope_sigma(f: f64, width: f64, s0: f64) -> Result<f64> {
    for (name, v) in [("frequency", f), ("width", width), ("s0", s0)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::param(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(s0 * (-f * f / (2.0 * width * width)).exp())
}

/// `1/f` template: `aᵢ = amplitude / i` for `i = 1..=modes`.
pub fn template_one_over_f(modes: usize, amplitude: f64) -> Result<TemplateSpectrum> {
    if modes == 0 {
        return Err(Error::param("template needs at least one mode"));
    }
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::param(format!("amplitude must be > 0, got {amplitude}")));
    }
    TemplateSpectrum::new((1..=modes).map(|i| amplitude / i as f64).collect())
}

/// Natural-log template density at each envelope width.
pub fn curve_over_widths(
    widths: &[f64],
    cfg: &GaussianCurveConfig,
    params: &GaussianDetectionParams,
) -> Result<Curve> {
    curve_over_widths_with(widths, cfg, params, Execution::default())
}

pub fn curve_over_widths_with(
    widths: &[f64],
    cfg: &GaussianCurveConfig,
    params: &GaussianDetectionParams,
    exec: Execution,
) -> Result<Curve> {
    if widths.is_empty() {
        return Err(Error::param("need at least one width"));
    }
    let template = template_one_over_f(cfg.modes, cfg.amplitude)?;
    let ys = exec.map_slice(widths, |&w| {
        let modes = ModeSpectrum::from_envelope(cfg.modes, w, cfg.s0)?;
        log_pareidolia_density(&template, &modes, params)
    });
    let points = widths
        .iter()
        .zip(ys)
        .map(|(&x, y)| y.map(|y| CurvePoint::new(x, y)))
        .collect::<Result<Vec<_>>>()?;
    Curve::new(points)
}

/// Point of maximal `y`; ties go to the smaller `x`.
pub fn peak_of_curve(curve: &Curve) -> Result<(f64, f64)> {
    let mut best: Option<&CurvePoint> = None;
    for p in curve.points() {
        if best.is_none_or(|b| p.y > b.y) {
            best = Some(p);
        }
    }
    best.map(|p| (p.x, p.y))
        .ok_or_else(|| Error::param("peak of an empty curve"))
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || n == 0 {
        return Err(Error::param(format!("bad log grid {lo}:{hi}:{n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn standard_normal_at_zero() {
        let d = mode_match_density(0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(d, 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_tolerance_and_sigma() {
        assert!(mode_match_density(0.0, 1.0, 0.0).is_err());
        assert!(mode_match_density(0.0, 1.0, -1.0).is_err());
        assert!(mode_match_density(0.0, -1.0, 1.0).is_err());
        assert!(GaussianDetectionParams::new(0.0).is_err());
    }

    #[test]
    fn single_mode_log_density() {
        let t = TemplateSpectrum::new(vec![0.7]).unwrap();
        let m = ModeSpectrum::new(vec![1.3]).unwrap();
        let p = GaussianDetectionParams::new(0.9).unwrap();
        let direct = mode_match_density(0.7, 1.3, 0.9).unwrap().ln();
        assert_relative_eq!(
            log_pareidolia_density(&t, &m, &p).unwrap(),
            direct,
            max_relative = 1e-14
        );
    }

    #[test]
    fn ten_identical_modes() {
        let t = TemplateSpectrum::new(vec![0.0; 10]).unwrap();
        let m = ModeSpectrum::new(vec![0.0; 10]).unwrap();
        let p = GaussianDetectionParams::new(1.0).unwrap();
        let v = log_pareidolia_density(&t, &m, &p).unwrap();
        assert_relative_eq!(v, 10.0 * (1.0 / (2.0 * PI).sqrt()).ln(), max_relative = 1e-14);
        assert!((v - -9.1894).abs() < 1e-4);
    }

    #[test]
    fn length_mismatch_is_shape_error() {
        let t = TemplateSpectrum::new(vec![1.0, 2.0]).unwrap();
        let m = ModeSpectrum::new(vec![1.0]).unwrap();
        let p = GaussianDetectionParams::new(1.0).unwrap();
        assert!(matches!(log_pareidolia_density(&t, &m, &p), Err(Error::Shape(_))));
    }

    #[test]
    fn envelope_values() {
        assert_relative_eq!(envelope_sigma(1e-9, 2.0, 3.0).unwrap(), 3.0, max_relative = 1e-12);
        assert_relative_eq!(
            envelope_sigma(4.0, 4.0, 2.0).unwrap(),
            2.0 * (-0.5f64).exp(),
            max_relative = 1e-15
        );
        let s: Vec<f64> = (1..20).map(|f| envelope_sigma(f as f64, 5.0, 1.0).unwrap()).collect();
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert!(envelope_sigma(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn one_over_f_template() {
        assert_eq!(template_one_over_f(1, 2.0).unwrap().coeffs, vec![2.0]);
        let t = template_one_over_f(4, 1.0).unwrap();
        assert_eq!(t.coeffs, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        let t = template_one_over_f(50, 7.5).unwrap();
        for (i, a) in t.coeffs.iter().enumerate() {
            assert_relative_eq!(a * (i + 1) as f64, 7.5, max_relative = 1e-15);
        }
    }

    #[test]
    fn single_width_curve_is_direct_call() {
        let cfg = GaussianCurveConfig::default();
        let p = GaussianDetectionParams::new(10.0).unwrap();
        let c = curve_over_widths(&[3.0], &cfg, &p).unwrap();
        let t = template_one_over_f(cfg.modes, cfg.amplitude).unwrap();
        let m = ModeSpectrum::from_envelope(cfg.modes, 3.0, cfg.s0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.points()[0].y, log_pareidolia_density(&t, &m, &p).unwrap());
    }

    fn argmax(c: &Curve) -> usize {
        let (x, _) = peak_of_curve(c).unwrap();
        c.xs().iter().position(|&v| v == x).unwrap()
    }

    #[test]
    fn default_curve_has_interior_peak_that_shifts_with_tolerance() {
        let widths = log_space(0.25, 64.0, 25).unwrap();
        let cfg = GaussianCurveConfig::default();
        let loose = curve_over_widths(&widths, &cfg, &GaussianDetectionParams::new(10.0).unwrap())
            .unwrap();
        let strict = curve_over_widths(&widths, &cfg, &GaussianDetectionParams::new(3.0).unwrap())
            .unwrap();
        let (i, j) = (argmax(&loose), argmax(&strict));
        assert!(i > 0 && i < widths.len() - 1);
        assert!(j > i);
        assert!(peak_of_curve(&strict).unwrap().1 < peak_of_curve(&loose).unwrap().1);
    }

    #[test]
    fn interior_peak_across_generating_scales() {
        let widths = log_space(0.25, 64.0, 25).unwrap();
        let p = GaussianDetectionParams::new(10.0).unwrap();
        for s0 in [1.0, 10.0, 100.0] {
            let cfg = GaussianCurveConfig {
                s0,
                ..Default::default()
            };
            let k = argmax(&curve_over_widths(&widths, &cfg, &p).unwrap());
            assert!(k > 0 && k < widths.len() - 1, "s0={s0}: argmax at {k}");
        }
    }

    #[test]
    fn peak_of_curve_cases() {
        let single = Curve::new(vec![CurvePoint::new(3.0, 7.0)]).unwrap();
        assert_eq!(peak_of_curve(&single).unwrap(), (3.0, 7.0));
        let inc = Curve::new((0..5).map(|i| CurvePoint::new(i as f64, i as f64)).collect())
            .unwrap();
        assert_eq!(peak_of_curve(&inc).unwrap(), (4.0, 4.0));
        let tie = Curve::new(vec![
            CurvePoint::new(1.0, 0.0),
            CurvePoint::new(2.0, 5.0),
            CurvePoint::new(3.0, 5.0),
        ])
        .unwrap();
        assert_eq!(peak_of_curve(&tie).unwrap(), (2.0, 5.0));
        assert!(peak_of_curve(&Curve::new(vec![]).unwrap()).is_err());
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(0.25, 64.0, 9).unwrap();
        assert_eq!(g[0], 0.25);
        assert_eq!(g[8], 64.0);
        assert_relative_eq!(g[4], 4.0, max_relative = 1e-12);
    }

    // Simpson's rule on a fine grid; independent of the closed form's algebra.
    fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for k in 1..n {
            let x = lo + k as f64 * h;
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    proptest! {
        #[test]
        fn even_in_target(a in -50.0f64..50.0, s in 0.0f64..20.0, g in 0.01f64..20.0) {
            prop_assert_eq!(
                mode_match_density(a, s, g).unwrap(),
                mode_match_density(-a, s, g).unwrap()
            );
        }

        #[test]
        fn integrates_to_one(s in 0.0f64..10.0, g in 0.05f64..10.0) {
            let sd = (s * s + g * g).sqrt();
            let total = simpson(|a| mode_match_density(a, s, g).unwrap(), -10.0 * sd, 10.0 * sd, 4000);
            prop_assert!((total - 1.0).abs() < 1e-6);
        }

        #[test]
        fn equals_convolved_normal(a in -20.0f64..20.0, s in 0.0f64..10.0, g in 0.05f64..10.0) {
            let sd = (s * s + g * g).sqrt();
            let z = a / sd;
            let normal = (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt());
            let d = mode_match_density(a, s, g).unwrap();
            prop_assert!((d - normal).abs() <= 1e-12 * normal.max(1e-300));
        }

        #[test]
        fn additive_over_blocks(
            pairs in prop::collection::vec((-5.0f64..5.0, 0.0f64..5.0), 2..40),
            split in 1usize..39,
            g in 0.1f64..5.0,
        ) {
            let split = split.min(pairs.len() - 1);
            let (a, s): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
            let p = GaussianDetectionParams::new(g).unwrap();
            let whole = log_pareidolia_density(
                &TemplateSpectrum::new(a.clone()).unwrap(),
                &ModeSpectrum::new(s.clone()).unwrap(),
                &p,
            ).unwrap();
            let left = log_pareidolia_density(
                &TemplateSpectrum::new(a[..split].to_vec()).unwrap(),
                &ModeSpectrum::new(s[..split].to_vec()).unwrap(),
                &p,
            ).unwrap();
            let right = log_pareidolia_density(
                &TemplateSpectrum::new(a[split..].to_vec()).unwrap(),
                &ModeSpectrum::new(s[split..].to_vec()).unwrap(),
                &p,
            ).unwrap();
            let scale = whole.abs().max(left.abs() + right.abs()).max(1.0);
            prop_assert!((whole - (left + right)).abs() <= 1e-12 * scale);
        }
    }
}
