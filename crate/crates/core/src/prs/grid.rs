use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Allowed `(comb size, symbol count)` pairs.
const VALID_PATTERNS: [(usize, &[usize]); 4] = [(2, &[2, 4, 6, 12]), (4, &[4, 12]), (6, &[6, 12]), (12, &[12])];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrsConfig {
    pub carrier_hz: f64,
    pub scs_hz: f64,
    pub n_prb: usize,
    pub comb_size: usize,
    pub n_symbols: usize,
    pub fft_size: usize,
    pub cp_len: usize,
    pub cell_id: u32,
}

impl Default for PrsConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 28e9,
            scs_hz: 120e3,
            n_prb: 56,
            comb_size: 12,
            n_symbols: 12,
            fft_size: 1024,
            cp_len: 72,
            cell_id: 0,
        }
    }
}

impl PrsConfig {
    pub fn n_subcarriers(&self) -> usize {
        12 * self.n_prb
    }

    pub fn sample_rate(&self) -> f64 {
        self.fft_size as f64 * self.scs_hz
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_len
    }

    pub fn wavelength(&self) -> f64 {
        crate::measurement::SPEED_OF_LIGHT / self.carrier_hz
    }

    /// First occupied subcarrier of symbol `s`; offsets stagger by symbol index.
    pub fn comb_offset(&self, symbol: usize) -> usize {
        symbol % self.comb_size
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(24..=272).contains(&self.n_prb) {
            return bad(format!("PRS bandwidth must span 24..=272 PRBs, got {}", self.n_prb));
        }
        match VALID_PATTERNS.iter().find(|(c, _)| *c == self.comb_size) {
            None => return bad(format!("comb size {} not in {{2, 4, 6, 12}}", self.comb_size)),
            Some((_, symbols)) if !symbols.contains(&self.n_symbols) => {
                return bad(format!("comb-{} PRS cannot span {} symbols", self.comb_size, self.n_symbols))
            }
            Some(_) => {}
        }
        if self.fft_size < self.n_subcarriers() {
            return bad(format!("fft_size {} < {} subcarriers", self.fft_size, self.n_subcarriers()));
        }
        if self.cp_len >= self.fft_size {
            return bad("cyclic prefix must be shorter than the FFT".into());
        }
        if !(self.carrier_hz > 0.0 && self.scs_hz > 0.0) {
            return bad("carrier and subcarrier spacing must be positive".into());
        }
        Ok(())
    }
}

/// Frequency-time resource grid, `n_symbols` rows of `n_subcarriers` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub n_symbols: usize,
    pub n_subcarriers: usize,
    pub data: Vec<Complex64>,
}

impl ResourceGrid {
    pub fn zeros(n_symbols: usize, n_subcarriers: usize) -> Self {
        Self { n_symbols, n_subcarriers, data: vec![Complex64::default(); n_symbols * n_subcarriers] }
    }

    pub fn symbol(&self, s: usize) -> &[Complex64] {
        &self.data[s * self.n_subcarriers..(s + 1) * self.n_subcarriers]
    }

    pub fn symbol_mut(&mut self, s: usize) -> &mut [Complex64] {
        let n = self.n_subcarriers;
        &mut self.data[s * n..(s + 1) * n]
    }

    pub fn occupied(&self) -> usize {
        self.data.iter().filter(|v| v.norm_sqr() > 0.0).count()
    }
}

/// Comb-patterned PRS grid with pseudo-random unit-magnitude QPSK keyed by cell id.
pub fn gen_prs_grid(cfg: &PrsConfig) -> Result<ResourceGrid> {
    cfg.validate()?;
    // domain tag keeps PRS streams apart from trial seeds
    let mut rng = rng_from_seed(0x5052_5300_0000_0000 ^ u64::from(cfg.cell_id));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut grid = ResourceGrid::zeros(cfg.n_symbols, cfg.n_subcarriers());
    for s in 0..cfg.n_symbols {
        let offset = cfg.comb_offset(s);
        for v in grid.symbol_mut(s).iter_mut().skip(offset).step_by(cfg.comb_size) {
            let bits: u8 = rng.random_range(0..4);
            let re = if bits & 1 == 0 { h } else { -h };
            let im = if bits & 2 == 0 { h } else { -h };
            *v = Complex64::new(re, im);
        }
    }
    Ok(grid)
}
