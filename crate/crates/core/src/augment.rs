//! Weak (random flips) and strong (Gaussian blur) views of a sample grid.

use rand::Rng;

use crate::dataset::Grid;
use crate::error::{Error, Result};

pub const BLUR_SIGMA: f64 = 1.0;

/// Normalized 3x3 Gaussian kernel, row-major.
pub fn gaussian_kernel3(sigma: f64) -> [f64; 9] {
    let mut k = [0.0; 9];
    for dy in -1i32..=1 {
        for dx in -1i32..=1 {
            let r2 = (dx * dx + dy * dy) as f64;
            k[((dy + 1) * 3 + dx + 1) as usize] = (-r2 / (2.0 * sigma * sigma)).exp();
        }
    }
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FlipDraw {
    pub horizontal: bool,
    pub vertical: bool,
}

impl FlipDraw {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let horizontal = rng.random_bool(0.5);
        let vertical = rng.random_bool(0.5);
        Self { horizontal, vertical }
    }
}

/// A sample's two views and the draws that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub weak: Grid,
    pub strong: Grid,
    pub flips: FlipDraw,
    /// Only the sigma=1 3x3 kernel exists today.
    pub kernel_id: u8,
}

impl AugmentedPair {
    pub fn replay(x: &Grid, flips: FlipDraw) -> Result<Self> {
        Ok(Self {
            weak: apply_flips(x, flips),
            strong: strong_augment(x)?,
            flips,
            kernel_id: 0,
        })
    }
}

pub fn augment_pair<R: Rng + ?Sized>(x: &Grid, rng: &mut R) -> Result<AugmentedPair> {
    AugmentedPair::replay(x, FlipDraw::sample(rng))
}

pub fn apply_flips(x: &Grid, flips: FlipDraw) -> Grid {
    let (h, w) = (x.height(), x.width());
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        let src_r = if flips.vertical { h - 1 - r } else { r };
        for c in 0..w {
            let src_c = if flips.horizontal { w - 1 - c } else { c };
            out[r * w + c] = x.get(src_r, src_c);
        }
    }
    Grid::new(h, w, out).expect("flip preserves shape")
}

/// Horizontal flip with probability 1/2, then vertical flip with probability 1/2.
pub fn weak_augment<R: Rng + ?Sized>(x: &Grid, rng: &mut R) -> Grid {
    apply_flips(x, FlipDraw::sample(rng))
}

/// 3x3 Gaussian blur with edge-inclusive reflect padding (`d c b a | a b c d`).
///
/// Every pixel's weights sum to one, so the total intensity is preserved for
/// any image, not only ones with constant borders.
pub fn strong_augment(x: &Grid) -> Result<Grid> {
    let (h, w) = (x.height(), x.width());
    if h < 3 || w < 3 {
        return Err(Error::domain(format!(
            "{h}x{w} grid is smaller than the 3x3 blur kernel"
        )));
    }
    let k = gaussian_kernel3(BLUR_SIGMA);
    let reflect = |i: isize, n: usize| -> usize {
        if i < 0 {
            (-i - 1) as usize
        } else if i as usize >= n {
            2 * n - 1 - i as usize
        } else {
            i as usize
        }
    };
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for dy in -1isize..=1 {
                let rr = reflect(r as isize + dy, h);
                for dx in -1isize..=1 {
                    let cc = reflect(c as isize + dx, w);
                    acc += k[((dy + 1) * 3 + dx + 1) as usize] * x.get(rr, cc);
                }
            }
            out[r * w + c] = acc;
        }
    }
    Grid::new(h, w, out)
}
