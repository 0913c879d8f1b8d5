//! Poisson feature model.
//!
//! A template has `M` regions of area `B`. Each of `M` feature types occurs
//! as an independent homogeneous Poisson process of rate `λ`. Detection
//! requires, in every region, exactly one feature of that region's type and
//! none of the other `M - 1` types:
//!
//! ```text
//! P(detect) = [λB·e^(-λB) · (e^(-λB))^(M-1)]^M = (λB)^M · e^(-λB·M²)
//! ```
//!
//! which is maximised at `λ* = 1 / (B·M)`.

use serde::{Deserialize, Serialize};

use crate::curve::{Curve, CurvePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureModelParams {
    /// Feature rate per unit area.
    pub lambda: f64,
    /// Number of template regions `M`, one feature type each.
    pub regions: u32,
    /// Area `B` of every region.
    pub area: f64,
}

impl FeatureModelParams {
    pub fn new(lambda: f64, regions: u32, area: f64) -> Result<Self> {
        let p = Self {
            lambda,
            regions,
            area,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::param(format!("rate must be >= 0, got {}", self.lambda)));
        }
        if self.regions == 0 {
            return Err(Error::param("need at least one region"));
        }
        check_area(self.area)
    }

    /// Expected feature count of one type in one region.
    pub fn intensity(&self) -> f64 {
        self.lambda * self.area
    }
}

fn check_area(area: f64) -> Result<()> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::param(format!("region area must be > 0, got {area}")));
    }
    Ok(())
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Probability of `n` events of a rate-`lambda` process over `area`.
/// `0⁰ = 1`, so `n = 0` at zero rate gives 1.
pub fn poisson_pmf(n: u64, lambda: f64, area: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("rate must be >= 0, got {lambda}")));
    }
    check_area(area)?;
    let mu = lambda * area;
    if mu == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if n == 0 {
        return Ok((-mu).exp());
    }
    Ok((n as f64 * mu.ln() - ln_factorial(n) - mu).exp())
}

/// `(λB)^M · exp(-λB·M²)`.
pub fn template_detect_prob(params: &FeatureModelParams) -> Result<f64> {
    params.validate()?;
    let x = params.intensity();
    let m = params.regions as f64;
    Ok(x.powi(params.regions as i32) * (-x * m * m).exp())
}

pub fn feature_curve(lambdas: &[f64], regions: u32, area: f64) -> Result<Curve> {
    if lambdas.is_empty() {
        return Err(Error::param("need at least one rate"));
    }
    let points = lambdas
        .iter()
        .map(|&l| {
            template_detect_prob(&FeatureModelParams::new(l, regions, area)?)
                .map(|p| CurvePoint::new(l, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Curve::new(points)
}

/// Analytic maximiser `λ* = 1/(B·M)` and the probability there.
pub fn peak_rate(regions: u32, area: f64) -> Result<(f64, f64)> {
    if regions == 0 {
        return Err(Error::param("need at least one region"));
    }
    check_area(area)?;
    let lambda = 1.0 / (area * regions as f64);
    let p = template_detect_prob(&FeatureModelParams::new(lambda, regions, area)?)?;
    Ok((lambda, p))
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi >= lo) || n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param(format!("bad linear grid {lo}:{hi}:{n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect())
}
