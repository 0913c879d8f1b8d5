use crate::raster::Gray8;

/// Histogram equalization on 256 levels.
///
/// `out(v) = round(255 · (cdf(v) - cdf_min) / (1 - cdf_min))`, where
/// `cdf_min` is the cumulative frequency of the darkest occupied level.
/// A single-level image maps entirely to 0. Evaluated in integer arithmetic,
/// rounding halves up.
pub fn hist_equalize(channel: &Gray8) -> Gray8 {
    let mut hist = [0u64; 256];
    for &p in &channel.data {
        hist[p as usize] += 1;
    }
    let total: u64 = hist.iter().sum();
    let first = hist.iter().position(|&c| c > 0).unwrap_or(0);
    let cum_min = hist[first];
    let den = total - cum_min;

    let mut lut = [0u8; 256];
    let mut cum = 0u64;
    for (v, &c) in hist.iter().enumerate() {
        cum += c;
        if den > 0 && v >= first {
            let num = (cum - cum_min) * 255;
            lut[v] = ((2 * num + den) / (2 * den)) as u8;
        }
    }
    Gray8 {
        width: channel.width,
        height: channel.height,
        data: channel.data.iter().map(|&p| lut[p as usize]).collect(),
    }
}
