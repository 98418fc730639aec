use num_complex::Complex64;

use crate::error::{invalid, Result};

/// A 4-bit symbol label `b₁b₂b₃b₄`, with `b₁` the most significant bit.
///
/// `b₁b₂` are the high-priority bits and select the quadrant; `b₃b₄` are
/// the low-priority bits and select the point inside it.
pub type Word = u8;

pub const HP_MASK: Word = 0b1100;
pub const LP_MASK: Word = 0b0011;

/// Gray-coded 16-point hierarchical QAM.
///
/// Per axis the points sit at `±α·d₂` and `±(α+2)·d₂`. The in-phase axis
/// carries `(b₂, b₄)` and the quadrature axis `(b₁, b₃)`; in each pair the
/// first bit picks the sign and the second the ring (1 = inner). Reading an
/// axis from left to right gives the labels 00, 01, 11, 10.
#[derive(Debug, Clone, PartialEq)]
pub struct HqamConstellation {
    alpha: f64,
    power: f64,
    d1: f64,
    d2: f64,
    points: [Complex64; 16],
}

impl HqamConstellation {
    pub fn new(alpha: f64, power: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("{alpha} must be finite and > 0")));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(invalid("power", format!("{power} must be finite and > 0")));
        }
        let d2 = (power / (2.0 * (alpha + 1.0).powi(2) + 2.0)).sqrt();
        let d1 = alpha * d2;
        let coord = |sign: u8, inner: u8| {
            let magnitude = if inner == 1 { alpha } else { alpha + 2.0 } * d2;
            if sign == 1 {
                magnitude
            } else {
                -magnitude
            }
        };
        let points = std::array::from_fn(|w| {
            let bit = |k: u32| ((w >> (3 - k)) & 1) as u8;
            Complex64::new(coord(bit(1), bit(3)), coord(bit(0), bit(2)))
        });
        Ok(Self { alpha, power, d1, d2, points })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Half the minimum distance between quadrants.
    pub fn d1(&self) -> f64 {
        self.d1
    }

    /// Half the minimum distance inside a quadrant.
    pub fn d2(&self) -> f64 {
        self.d2
    }

    /// Points indexed by their label.
    pub fn points(&self) -> &[Complex64; 16] {
        &self.points
    }

    pub fn modulate(&self, word: Word) -> Complex64 {
        self.points[usize::from(word & 0x0f)]
    }

    /// Label of the point closest to `x`, lowest label on ties.
    pub fn nearest(&self, x: Complex64) -> Word {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, p) in self.points.iter().enumerate() {
            let d = (x - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best as Word
    }
}

/// Free-function form of [`HqamConstellation::new`].
pub fn build_constellation(alpha: f64, power: f64) -> Result<HqamConstellation> {
    HqamConstellation::new(alpha, power)
}

/// Free-function form of [`HqamConstellation::modulate`].
pub fn modulate(c: &HqamConstellation, word: Word) -> Complex64 {
    c.modulate(word)
}
