use std::io::{self, Read, Write};

use rand::Rng;

use crate::error::{invalid, Result};
use crate::rng::seeded;

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        let n = u64::from(width) * u64::from(height);
        if n == 0 {
            return Err(invalid("image", "width and height must be positive"));
        }
        if pixels.len() as u64 != n {
            return Err(invalid("image", format!("{} pixels for a {width}x{height} image", pixels.len())));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Deterministic test picture: smooth shading, a few discs and mild
    /// texture, so every bitplane carries information.
    pub fn synthetic(width: u32, height: u32, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        let (w, h) = (f64::from(width.max(1)), f64::from(height.max(1)));
        let discs: Vec<(f64, f64, f64, f64)> = (0..5)
            .map(|_| {
                (
                    rng.random::<f64>() * w,
                    rng.random::<f64>() * h,
                    (0.05 + 0.2 * rng.random::<f64>()) * w.min(h),
                    rng.random_range(-90.0..90.0),
                )
            })
            .collect();
        let mut pixels = Vec::with_capacity((width as usize) * (height as usize));
        for y in 0..height {
            for x in 0..width {
                let (fx, fy) = (f64::from(x), f64::from(y));
                let mut v = 40.0 + 150.0 * (fx / w) * (0.5 + 0.5 * fy / h);
                v += 20.0 * (fx * 0.15).sin() * (fy * 0.11).cos();
                for &(cx, cy, r, dv) in &discs {
                    if (fx - cx).powi(2) + (fy - cy).powi(2) < r * r {
                        v += dv;
                    }
                }
                v += rng.random_range(-6.0..6.0);
                pixels.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
        Self::new(width, height, pixels)
    }

    /// Reads the raw format: width and height as little-endian `u32`,
    /// then `width·height` pixel bytes.
    pub fn read_from<R: Read>(mut r: R) -> io::Result<Self> {
        let mut header = [0u8; 8];
        r.read_exact(&mut header)?;
        let width = u32::from_le_bytes(header[..4].try_into().expect("4 bytes"));
        let height = u32::from_le_bytes(header[4..].try_into().expect("4 bytes"));
        let mut pixels = vec![0u8; (width as usize) * (height as usize)];
        r.read_exact(&mut pixels)?;
        Self::new(width, height, pixels).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.height.to_le_bytes())?;
        w.write_all(&self.pixels)
    }
}

/// Mean squared pixel error.
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(invalid("image", "dimensions differ"));
    }
    let sum: f64 = a.pixels.iter().zip(&b.pixels).map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2)).sum();
    Ok(sum / a.pixels.len() as f64)
}

/// `10·log₁₀(255²/MSE)`; `+∞` for identical images.
pub fn psnr(original: &GrayImage, received: &GrayImage) -> Result<f64> {
    let e = mse(original, received)?;
    Ok(if e == 0.0 { f64::INFINITY } else { 10.0 * (255.0f64 * 255.0 / e).log10() })
}
