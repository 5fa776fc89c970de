use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the beam sector, radians.
pub const SECTOR_HALF_WIDTH: f64 = PI / 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UraConfig {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths.
    #[serde(default = "half_wavelength")]
    pub spacing: f64,
    pub codebook_size: usize,
}

fn half_wavelength() -> f64 {
    0.5
}

impl UraConfig {
    pub fn new(rows: usize, cols: usize, codebook_size: usize) -> Self {
        Self { rows, cols, spacing: 0.5, codebook_size }
    }

    /// Default transmit array: 8×8 elements, 16 beams.
    pub fn default_tx() -> Self {
        Self::new(8, 8, 16)
    }

    /// Default receive array: 4×4 elements, 8 beams.
    pub fn default_rx() -> Self {
        Self::new(4, 4, 8)
    }

    pub fn n_elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter("array needs at least one element".into()));
        }
        if self.codebook_size == 0 {
            return Err(Error::InvalidParameter("codebook_size must be at least 1".into()));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("element spacing {} must be positive", self.spacing)));
        }
        Ok(())
    }

    /// Unnormalized response (unit-modulus entries) to a plane wave at azimuth
    /// `theta` relative to boresight, with elevation fixed at broadside.
    ///
    /// Elements are indexed row-major; columns lie along the horizontal axis so
    /// rows only repeat the horizontal phase progression.
    pub fn steering(&self, theta: f64) -> Vec<Complex64> {
        let phase = 2.0 * PI * self.spacing * theta.sin();
        (0..self.rows).flat_map(|_| (0..self.cols).map(move |c| Complex64::from_polar(1.0, phase * c as f64))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    /// Steering azimuth relative to boresight, radians.
    pub azimuth: f64,
    pub weights: Vec<Complex64>,
}

impl Beam {
    /// Complex amplitude gain `wᴴ a(θ)` toward azimuth `theta`.
    pub fn response(&self, array: &UraConfig, theta: f64) -> Complex64 {
        self.weights.iter().zip(array.steering(theta)).map(|(w, a)| w.conj() * a).sum()
    }
}

/// Azimuths of a `size`-beam codebook, uniform over the sector.
pub fn codebook_azimuths(size: usize) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..size).map(|k| -SECTOR_HALF_WIDTH + 2.0 * SECTOR_HALF_WIDTH * k as f64 / (size - 1) as f64).collect(),
    }
}

pub fn beam_codebook(cfg: &UraConfig) -> Result<Vec<Beam>> {
    cfg.validate()?;
    let norm = (cfg.n_elements() as f64).sqrt();
    Ok(codebook_azimuths(cfg.codebook_size)
        .into_iter()
        .map(|azimuth| Beam { azimuth, weights: cfg.steering(azimuth).into_iter().map(|a| a / norm).collect() })
        .collect())
}
