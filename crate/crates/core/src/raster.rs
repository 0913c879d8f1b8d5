//! 8-bit rasters and their file formats.
//!
//! Binary PGM (`P5`) and PPM (`P6`) are written by hand and are the
//! byte-exact reference formats; PNG goes through the `image` crate.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Gray8 {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("raster must be nonempty"));
        }
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "{}x{} raster needs {} bytes, got {}",
                width,
                height,
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }
}

/// Interleaved RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb8 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Rgb8 {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("raster must be nonempty"));
        }
        if data.len() != 3 * width * height {
            return Err(Error::Shape(format!(
                "{}x{} RGB raster needs {} bytes, got {}",
                width,
                height,
                3 * width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn channel(&self, c: usize) -> Gray8 {
        Gray8 {
            width: self.width,
            height: self.height,
            data: self.data.iter().skip(c).step_by(3).copied().collect(),
        }
    }

    pub fn from_channels(r: &Gray8, g: &Gray8, b: &Gray8) -> Result<Self> {
        if (r.width, r.height) != (g.width, g.height) || (r.width, r.height) != (b.width, b.height)
        {
            return Err(Error::Shape("channel sizes differ".into()));
        }
        let mut data = Vec::with_capacity(3 * r.data.len());
        for i in 0..r.data.len() {
            data.extend_from_slice(&[r.data[i], g.data[i], b.data[i]]);
        }
        Rgb8::new(r.width, r.height, data)
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    /// Loads any format the `image` crate understands, converted to RGB.
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path)?.to_rgb8();
        let (w, h) = img.dimensions();
        Rgb8::new(w as usize, h as usize, img.into_raw())
    }

    /// Encodes as PPM for a `.ppm` extension and PNG otherwise.
    pub fn encode_for_path(&self, path: &Path) -> Result<Vec<u8>> {
        if has_extension(path, "ppm") {
            return Ok(self.to_ppm());
        }
        let buf = image::RgbImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
            .ok_or_else(|| Error::Shape("raster buffer size".into()))?;
        let mut out = std::io::Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)?;
        Ok(out.into_inner())
    }
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}
