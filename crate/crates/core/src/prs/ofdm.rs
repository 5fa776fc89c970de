use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{PrsConfig, ResourceGrid};
use crate::error::{Error, Result};

/// CP-OFDM modulator/demodulator with unitary transforms.
///
/// Subcarrier `k` of `n_sc` maps to FFT bin `k − n_sc/2` (mod `fft_size`), so
/// the occupied band is centred on DC.
pub struct OfdmModem {
    fft_size: usize,
    cp_len: usize,
    n_subcarriers: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl OfdmModem {
    pub fn new(cfg: &PrsConfig) -> Result<Self> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            fft_size: cfg.fft_size,
            cp_len: cfg.cp_len,
            n_subcarriers: cfg.n_subcarriers(),
            forward: planner.plan_fft_forward(cfg.fft_size),
            inverse: planner.plan_fft_inverse(cfg.fft_size),
        })
    }

    fn bin(&self, k: usize) -> usize {
        (k as isize - (self.n_subcarriers / 2) as isize).rem_euclid(self.fft_size as isize) as usize
    }

    /// Baseband frequency of subcarrier `k` in units of the subcarrier spacing.
    pub fn subcarrier_index(&self, k: usize) -> isize {
        k as isize - (self.n_subcarriers / 2) as isize
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_len
    }

    pub fn modulate(&self, grid: &ResourceGrid) -> Result<Vec<Complex64>> {
        if grid.n_subcarriers != self.n_subcarriers {
            return Err(Error::InvalidParameter(format!(
                "grid has {} subcarriers, modem expects {}",
                grid.n_subcarriers, self.n_subcarriers
            )));
        }
        let scale = 1.0 / (self.fft_size as f64).sqrt();
        let mut out = Vec::with_capacity(grid.n_symbols * self.symbol_len());
        let mut buf = vec![Complex64::default(); self.fft_size];
        for s in 0..grid.n_symbols {
            buf.fill(Complex64::default());
            for (k, &v) in grid.symbol(s).iter().enumerate() {
                buf[self.bin(k)] = v;
            }
            self.inverse.process(&mut buf);
            out.extend(buf[self.fft_size - self.cp_len..].iter().map(|v| v * scale));
            out.extend(buf.iter().map(|v| v * scale));
        }
        Ok(out)
    }

    pub fn demodulate(&self, samples: &[Complex64]) -> Result<ResourceGrid> {
        let len = self.symbol_len();
        if !samples.len().is_multiple_of(len) {
            return Err(Error::InvalidParameter(format!(
                "{} samples is not a whole number of {len}-sample symbols",
                samples.len()
            )));
        }
        let n_symbols = samples.len() / len;
        let scale = 1.0 / (self.fft_size as f64).sqrt();
        let mut grid = ResourceGrid::zeros(n_symbols, self.n_subcarriers);
        let mut buf = vec![Complex64::default(); self.fft_size];
        for s in 0..n_symbols {
            buf.copy_from_slice(&samples[s * len + self.cp_len..(s + 1) * len]);
            self.forward.process(&mut buf);
            for (k, v) in grid.symbol_mut(s).iter_mut().enumerate() {
                *v = buf[self.bin(k)] * scale;
            }
        }
        Ok(grid)
    }
}

/// Modulate a grid with a one-off modem.
pub fn ofdm_modulate(grid: &ResourceGrid, cfg: &PrsConfig) -> Result<Vec<Complex64>> {
    OfdmModem::new(cfg)?.modulate(grid)
}
