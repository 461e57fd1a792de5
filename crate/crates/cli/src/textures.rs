//! Synthetic texture families for the image pipeline.
//!
//! Both families are a linear intensity ramp in a random direction with
//! faint Gaussian noise; the second additionally replaces a fraction of the
//! pixels by pure black or white.

use epm_core::sampling::seeded_rng;
use epm_core::GrayImage;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::TextureConfig;
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TextureFamily {
    Gradient,
    SaltPepper,
}

impl TextureFamily {
    pub const ALL: [TextureFamily; 2] = [TextureFamily::Gradient, TextureFamily::SaltPepper];

    pub fn name(self) -> &'static str {
        match self {
            TextureFamily::Gradient => "gradient",
            TextureFamily::SaltPepper => "salt_pepper",
        }
    }
}

/// A square image with intensities in `[0, 1]`.
pub fn generate_texture(family: TextureFamily, cfg: &TextureConfig, seed: u64) -> CliResult<GrayImage> {
    let n = cfg.image_size;
    let mut rng = seeded_rng(seed);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (c, s) = (theta.cos(), theta.sin());
    let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| CliError::Config(e.to_string()))?;

    // Project onto the direction and rescale so the ramp spans [0, 1].
    let proj: Vec<f64> = (0..n * n).map(|i| c * (i % n) as f64 + s * (i / n) as f64).collect();
    let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let mut pixels: Vec<f64> = proj
        .iter()
        .map(|p| ((p - lo) / span + noise.sample(&mut rng)).clamp(0.0, 1.0))
        .collect();

    if family == TextureFamily::SaltPepper {
        for v in &mut pixels {
            if rng.random::<f64>() < cfg.impulse_fraction {
                *v = if rng.random::<bool>() { 1.0 } else { 0.0 };
            }
        }
    }
    Ok(GrayImage::new(n, n, pixels)?)
}

/// Rescales `[0, 1]` intensities onto an 8-bit scale for storage.
pub fn to_byte_scale(img: &GrayImage) -> CliResult<GrayImage> {
    Ok(GrayImage::new(
        img.width(),
        img.height(),
        img.pixels().iter().map(|v| v * 255.0).collect(),
    )?)
}
