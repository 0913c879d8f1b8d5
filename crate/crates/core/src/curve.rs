//! The `(x, y, ci)` series shared by model curves, simulations and
//! psychophysics aggregates, with a lossless CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    pub ci_half_width: Option<f64>,
}

impl CurvePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            ci_half_width: None,
        }
    }

    pub fn with_ci(x: f64, y: f64, ci_half_width: f64) -> Self {
        Self {
            x,
            y,
            ci_half_width: Some(ci_half_width),
        }
    }
}

/// A series with strictly increasing `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    points: Vec<CurvePoint>,
}

impl Curve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[0].x < w[1].x) {
                return Err(Error::param(format!(
                    "curve x values must be strictly increasing ({} then {})",
                    w[0].x, w[1].x
                )));
            }
        }
        if let Some(p) = points
            .iter()
            .find(|p| p.ci_half_width.is_some_and(|c| c.is_nan() || c < 0.0))
        {
            return Err(Error::param(format!("negative ci half-width at x={}", p.x)));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }

    pub fn has_ci(&self) -> bool {
        self.points.iter().any(|p| p.ci_half_width.is_some())
    }

    /// Writes `x_name,y_name[,ci_half_width]` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W, x_name: &str, y_name: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let with_ci = self.has_ci();
        if with_ci {
            w.write_record([x_name, y_name, "ci_half_width"])?;
        } else {
            w.write_record([x_name, y_name])?;
        }
        for p in &self.points {
            let mut row = vec![fmt_f64(p.x), fmt_f64(p.y)];
            if with_ci {
                row.push(p.ci_half_width.map(fmt_f64).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Reads a curve written by [`Curve::write_csv`]; column names are ignored.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut points = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<Option<f64>> {
                match rec.get(k).map(str::trim) {
                    None | Some("") => Ok(None),
                    Some(s) => s.parse::<f64>().map(Some).map_err(|e| Error::Ingest {
                        source_name: "curve csv".into(),
                        line: i + 2,
                        message: format!("column {k}: {e}"),
                    }),
                }
            };
            let missing = || Error::Ingest {
                source_name: "curve csv".into(),
                line: i + 2,
                message: "expected at least two columns".into(),
            };
            let x = field(0)?.ok_or_else(missing)?;
            let y = field(1)?.ok_or_else(missing)?;
            points.push(CurvePoint {
                x,
                y,
                ci_half_width: field(2)?,
            });
        }
        Curve::new(points)
    }
}

/// 17 significant digits in scientific notation; parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
