//! Grid search over the tolerance `γ` with a closed-form linear scale.

use serde::Serialize;

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gaussian_model::{curve_over_widths_with, GaussianCurveConfig, GaussianDetectionParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub gamma: f64,
    /// `None` when the model underflows at every width for this `γ`.
    pub rss: Option<f64>,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub gamma_hat: f64,
    pub scale_hat: f64,
    pub rss: f64,
    pub grid: Vec<GridEntry>,
}

impl FitResult {
    pub fn skipped(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.iter().filter(|g| g.rss.is_none()).map(|g| g.gamma)
    }
}

/// Fits `y(w) ≈ K · exp(log_density_γ(w))` for each `γ` in the grid.
///
/// `K = max(0, Σ y·p / Σ p²)`; the winner minimises the residual sum of
/// squares, ties going to the smaller `γ`. Predictions are rescaled by their
/// largest value before solving so that tiny densities do not underflow.
pub fn fit_gaussian_model(
    curve: &Curve,
    gamma_grid: &[f64],
    cfg: &GaussianCurveConfig,
    exec: Execution,
) -> Result<FitResult> {
    if curve.len() < 3 {
        return Err(Error::param("fitting needs at least 3 curve points"));
    }
    if gamma_grid.is_empty() {
        return Err(Error::param("empty tolerance grid"));
    }
    let widths = curve.xs();
    let ys = curve.ys();
    let entries = exec.map_slice(gamma_grid, |&gamma| -> Result<GridEntry> {
        let params = GaussianDetectionParams::new(gamma)?;
        let logs = curve_over_widths_with(&widths, cfg, &params, Execution::Sequential)?.ys();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() || top.exp() == 0.0 {
            return Ok(GridEntry {
                gamma,
                rss: None,
                scale: None,
            });
        }
        let q: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let qq: f64 = q.iter().map(|v| v * v).sum();
        let yq: f64 = ys.iter().zip(&q).map(|(y, v)| y * v).sum();
        let k_scaled = (yq / qq).max(0.0);
        let rss = ys
            .iter()
            .zip(&q)
            .map(|(y, v)| (y - k_scaled * v).powi(2))
            .sum();
        Ok(GridEntry {
            gamma,
            rss: Some(rss),
            scale: Some(k_scaled * (-top).exp()),
        })
    });
    let grid = entries.into_iter().collect::<Result<Vec<_>>>()?;

    let best = grid
        .iter()
        .filter_map(|g| Some((g.gamma, g.rss?, g.scale?)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .ok_or_else(|| Error::Undefined("model underflows for every tolerance".into()))?;
    Ok(FitResult {
        gamma_hat: best.0,
        scale_hat: best.2,
        rss: best.1,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurvePoint;
    use crate::stimuli::DEFAULT_WIDTHS;

    fn cfg() -> GaussianCurveConfig {
        GaussianCurveConfig {
            modes: 1,
            amplitude: 10.0,
            s0: 10.0,
        }
    }

    fn model_curve(gamma: f64, k: f64) -> Curve {
        let c = curve_over_widths_with(
            &DEFAULT_WIDTHS,
            &cfg(),
            &GaussianDetectionParams::new(gamma).unwrap(),
            Execution::Sequential,
        )
        .unwrap();
        Curve::new(c.points().iter().map(|p| CurvePoint::new(p.x, k * p.y.exp())).collect()).unwrap()
    }

    fn grid() -> Vec<f64> {
        (1..=20).map(f64::from).collect()
    }

    #[test]
    fn recovers_noiseless_parameters() {
        let fit = fit_gaussian_model(&model_curve(6.0, 5.0), &grid(), &cfg(), Execution::default()).unwrap();
        assert_eq!(fit.gamma_hat, 6.0);
        assert!((fit.scale_hat - 5.0).abs() < 1e-9);
        assert!(fit.rss < 1e-18);
    }

    #[test]
    fn scale_is_linear_in_data() {
        let c = model_curve(4.0, 2.0);
        let doubled = Curve::new(c.points().iter().map(|p| CurvePoint::new(p.x, 2.0 * p.y)).collect()).unwrap();
        let a = fit_gaussian_model(&c, &grid(), &cfg(), Execution::default()).unwrap();
        let b = fit_gaussian_model(&doubled, &grid(), &cfg(), Execution::default()).unwrap();
        assert_eq!(a.gamma_hat, b.gamma_hat);
        assert!((b.scale_hat - 2.0 * a.scale_hat).abs() <= 1e-12 * b.scale_hat);
    }

    #[test]
    fn reported_rss_matches_recomputation() {
        let c = Curve::new(
            DEFAULT_WIDTHS
                .iter()
                .enumerate()
                .map(|(i, &w)| CurvePoint::new(w, [0.5, 0.9, 1.4, 2.2, 2.9, 3.1, 3.4, 2.7, 1.6][i]))
                .collect(),
        )
        .unwrap();
        let fit = fit_gaussian_model(&c, &grid(), &cfg(), Execution::default()).unwrap();
        let params = GaussianDetectionParams::new(fit.gamma_hat).unwrap();
        let model = curve_over_widths_with(&c.xs(), &cfg(), &params, Execution::Sequential).unwrap();
        let rss: f64 = c
            .ys()
            .iter()
            .zip(model.ys())
            .map(|(y, l)| (y - fit.scale_hat * l.exp()).powi(2))
            .sum();
        assert!((rss - fit.rss).abs() <= 1e-12 * fit.rss.max(1.0));
    }

    #[test]
    fn ties_go_to_smaller_gamma() {
        let c = model_curve(6.0, 5.0);
        let fit = fit_gaussian_model(&c, &[6.0, 6.0, 5.0, 7.0], &cfg(), Execution::default()).unwrap();
        assert_eq!(fit.gamma_hat, 6.0);
        let flat = Curve::new(DEFAULT_WIDTHS.iter().map(|&w| CurvePoint::new(w, 0.0)).collect()).unwrap();
        let fit = fit_gaussian_model(&flat, &[3.0, 1.0, 2.0], &cfg(), Execution::default()).unwrap();
        assert_eq!(fit.gamma_hat, 1.0);
        assert_eq!(fit.scale_hat, 0.0);
    }

    #[test]
    fn preconditions() {
        let short = Curve::new(vec![CurvePoint::new(1.0, 1.0), CurvePoint::new(2.0, 1.0)]).unwrap();
        assert!(fit_gaussian_model(&short, &grid(), &cfg(), Execution::default()).is_err());
        assert!(fit_gaussian_model(&model_curve(6.0, 1.0), &[], &cfg(), Execution::default()).is_err());
    }
}
