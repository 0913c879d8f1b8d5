//! Stochastic oracles for the closed-form models, and the toy detector.
//!
//! Trials are split into fixed-size blocks. Block `k` draws from the stream
//! keyed by `child_seed(seed, k)` and its partial statistics are merged in
//! block order, so estimates are bit-identical for any thread count.

mod detector;

pub use detector::{
    default_bank, detection_curve, detection_curve_with, face_schematic, scan_detect, Detection,
    DetectionCurveConfig, Template, TemplateBank,
};

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::feature_model::FeatureModelParams;
use crate::rng::{child_seed, stream};

/// Trials per independently seeded block.
pub const BLOCK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean - target| <= k · std_error`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub execution: Execution,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn blocks(&self) -> usize {
        self.trials.div_ceil(BLOCK_TRIALS) as usize
    }

    fn block_len(&self, k: usize) -> u64 {
        let start = k as u64 * BLOCK_TRIALS;
        BLOCK_TRIALS.min(self.trials - start)
    }

    fn block_rng(&self, k: usize) -> ChaCha8Rng {
        stream(child_seed(self.seed, k as u64))
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * (other.n as f64 / n as f64),
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64),
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Likelihood-averaging estimate of the mode match density
/// `E_{y ~ N(0, σ²)}[N(a; y, γ²)]`.
pub fn mc_mode_density(a: f64, sigma: f64, gamma: f64, cfg: &McConfig) -> Result<McEstimate> {
    mode_density_impl(a, sigma, gamma, cfg, false)
}

/// Same estimator with every sample negated (`y → -y`). At `-a` it
/// reproduces [`mc_mode_density`] at `a` exactly.
pub fn mc_mode_density_mirrored(
    a: f64,
    sigma: f64,
    gamma: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    mode_density_impl(a, sigma, gamma, cfg, true)
}

fn mode_density_impl(
    a: f64,
    sigma: f64,
    gamma: f64,
    cfg: &McConfig,
    mirror: bool,
) -> Result<McEstimate> {
    if cfg.trials < 100 {
        return Err(Error::param("mode density estimate needs >= 100 trials"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param(format!("tolerance gamma must be > 0, got {gamma}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("generating std must be >= 0, got {sigma}")));
    }
    let var = gamma * gamma;
    let norm = (2.0 * PI * var).sqrt().recip();
    let sign = if mirror { -1.0 } else { 1.0 };
    let parts = cfg.execution.map(cfg.blocks(), |k| {
        let mut rng = cfg.block_rng(k);
        let mut m = Moments::default();
        for _ in 0..cfg.block_len(k) {
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = sign * sigma * z;
            let d = a - y;
            m.push(norm * (-d * d / (2.0 * var)).exp());
        }
        m
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(McEstimate {
        mean: m.mean,
        std_error: m.std_error(),
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

/// Poisson sampling by CDF inversion, for the small rates used here.
struct PoissonInversion {
    mu: f64,
    p0: f64,
}

impl PoissonInversion {
    fn new(mu: f64) -> Self {
        Self { mu, p0: (-mu).exp() }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.random();
        let mut n = 0u64;
        let mut p = self.p0;
        let mut cdf = p;
        while u >= cdf {
            n += 1;
            p *= self.mu / n as f64;
            cdf += p;
            if p == 0.0 && cdf < 1.0 {
                // u landed in the floating-point tail; remaining mass is nil.
                break;
            }
        }
        n
    }
}

/// Brute-force probability that every region holds exactly one feature of
/// its own type and no feature of any other type.
///
/// Each trial draws the `M × M` counts `n[i][j]` (region `i`, type `j`) in
/// row-major order and stops at the first count that rules out detection;
/// the counts not drawn cannot change the outcome.
pub fn mc_feature_detect(params: &FeatureModelParams, cfg: &McConfig) -> Result<McEstimate> {
    params.validate()?;
    if cfg.trials < 1000 {
        return Err(Error::param("feature detection estimate needs >= 1000 trials"));
    }
    let sampler = PoissonInversion::new(params.intensity());
    let m = params.regions as usize;
    let hits: u64 = cfg
        .execution
        .map(cfg.blocks(), |k| {
            let mut rng = cfg.block_rng(k);
            let mut hits = 0u64;
            'trial: for _ in 0..cfg.block_len(k) {
                for i in 0..m {
                    for j in 0..m {
                        let want = u64::from(i == j);
                        if sampler.sample(&mut rng) != want {
                            continue 'trial;
                        }
                    }
                }
                hits += 1;
            }
            hits
        })
        .into_iter()
        .sum();
    let n = cfg.trials as f64;
    let p = hits as f64 / n;
    Ok(McEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        trials: cfg.trials,
        seed: cfg.seed,
    })
}
