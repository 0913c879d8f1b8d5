//! Pixelwise mean of box crops, resampled to a common square size.

use super::bbox::BBox;
use super::histeq::hist_equalize;
use crate::error::{Error, Result};
use crate::raster::{Gray8, Rgb8};

#[derive(Debug, Clone, PartialEq)]
pub struct AverageFace {
    pub size: usize,
    /// Interleaved RGB means in `[0, 255]`, row-major.
    pub raw: Vec<f64>,
    /// Per-channel histogram-equalized rendering of the rounded mean.
    pub equalized: Rgb8,
}

impl AverageFace {
    /// The raw mean rounded half-up to 8 bits.
    pub fn raw_rgb8(&self) -> Rgb8 {
        Rgb8 {
            width: self.size,
            height: self.size,
            data: self.raw.iter().map(|&v| to_u8(v)).collect(),
        }
    }
}

fn to_u8(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Bilinear resample of `bbox` in `img` onto an `out × out` grid.
///
/// Output pixel `(i, j)` samples the source at
/// `x = x_min + (j + 0.5)·w/out - 0.5`, `y = y_min + (i + 0.5)·h/out - 0.5`,
/// clamping to the image border.
pub fn resize_crop(img: &Rgb8, bbox: &BBox, out: usize) -> Vec<f64> {
    let sx = bbox.width() / out as f64;
    let sy = bbox.height() / out as f64;
    let max_x = (img.width - 1) as f64;
    let max_y = (img.height - 1) as f64;
    let px = |x: usize, y: usize, c: usize| img.data[3 * (y * img.width + x) + c] as f64;
    let mut res = Vec::with_capacity(3 * out * out);
    for i in 0..out {
        let y = (bbox.y_min + (i as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
        let (y0, fy) = (y.floor() as usize, y - y.floor());
        let y1 = (y0 + 1).min(img.height - 1);
        for j in 0..out {
            let x = (bbox.x_min + (j as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
            let (x0, fx) = (x.floor() as usize, x - x.floor());
            let x1 = (x0 + 1).min(img.width - 1);
            for c in 0..3 {
                let top = px(x0, y0, c) * (1.0 - fx) + px(x1, y0, c) * fx;
                let bottom = px(x0, y1, c) * (1.0 - fx) + px(x1, y1, c) * fx;
                res.push(top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    res
}

/// Mean of all crops, plus its per-channel equalized rendering.
pub fn average_face(crops: &[(&Rgb8, BBox)], out_size: usize) -> Result<AverageFace> {
    if crops.is_empty() {
        return Err(Error::param("average face needs at least one crop"));
    }
    if out_size < 8 {
        return Err(Error::param(format!("output size must be >= 8, got {out_size}")));
    }
    let mut sum = vec![0.0; 3 * out_size * out_size];
    for (img, bbox) in crops {
        for (s, v) in sum.iter_mut().zip(resize_crop(img, bbox, out_size)) {
            *s += v;
        }
    }
    let n = crops.len() as f64;
    let raw: Vec<f64> = sum.into_iter().map(|s| s / n).collect();

    let channel = |c: usize| Gray8 {
        width: out_size,
        height: out_size,
        data: raw.iter().skip(c).step_by(3).map(|&v| to_u8(v)).collect(),
    };
    let equalized = Rgb8::from_channels(
        &hist_equalize(&channel(0)),
        &hist_equalize(&channel(1)),
        &hist_equalize(&channel(2)),
    )?;
    Ok(AverageFace {
        size: out_size,
        raw,
        equalized,
    })
}
