use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::beam::{beam_codebook, Beam, UraConfig};
use super::channel::{build_paths, relative_azimuth, ChannelConfig, PathSet};
use super::grid::{gen_prs_grid, PrsConfig};
use super::ofdm::OfdmModem;
use crate::error::{Error, Result};
use crate::measurement::{Backend, ToaSet, SPEED_OF_LIGHT};
use crate::rng::rng_from_seed;
use crate::scenario::{distance, BsId, Scenario};

/// Extra correlation lags searched past the longest in-bounds path.
const SEARCH_GUARD: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignalConfig {
    pub prs: PrsConfig,
    pub tx: UraConfig,
    pub rx: UraConfig,
    pub reflection_coefficient: f64,
    /// First-peak threshold as a fraction of the global correlation maximum.
    pub peak_threshold: f64,
    /// Complex white noise power per sample; `None` is noiseless.
    pub noise_power: Option<f64>,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            prs: PrsConfig::default(),
            tx: UraConfig::default_tx(),
            rx: UraConfig::default_rx(),
            reflection_coefficient: 0.3,
            peak_threshold: 0.5,
            noise_power: None,
        }
    }
}

impl SignalConfig {
    pub fn validate(&self) -> Result<()> {
        self.prs.validate()?;
        self.tx.validate()?;
        self.rx.validate()?;
        if !(self.peak_threshold > 0.0 && self.peak_threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!("peak_threshold {} not in (0, 1]", self.peak_threshold)));
        }
        if !(self.reflection_coefficient >= 0.0 && self.reflection_coefficient.is_finite()) {
            return Err(Error::InvalidParameter("reflection coefficient must be non-negative".into()));
        }
        if let Some(n) = self.noise_power {
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::InvalidParameter(format!("noise power {n} must be positive")));
            }
        }
        Ok(())
    }

    pub fn channel(&self) -> ChannelConfig {
        ChannelConfig { carrier_hz: self.prs.carrier_hz, reflection_coefficient: self.reflection_coefficient }
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.prs.sample_rate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMeasurement {
    pub tx_beam: usize,
    pub rx_beam: usize,
    /// Mean received power per sample, linear.
    pub power: f64,
    /// Integer-lag first-peak ToA; `None` when the pair is below the noise floor.
    pub toa_raw_s: Option<f64>,
    /// First-peak ToA after parabolic refinement.
    pub toa_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSweepReport {
    pub bs_id: BsId,
    pub sample_rate: f64,
    pub pairs: Vec<PairMeasurement>,
    pub best_pair: usize,
    pub selected_toa_s: f64,
    pub selected_toa_raw_s: f64,
}

impl BeamSweepReport {
    pub fn best(&self) -> &PairMeasurement {
        &self.pairs[self.best_pair]
    }

    /// Best pair has maximal power and the selected ToAs are the pair minima.
    pub fn is_consistent(&self) -> bool {
        let best = self.best().power;
        let min_of = |f: fn(&PairMeasurement) -> Option<f64>| self.pairs.iter().filter_map(f).min_by(f64::total_cmp);
        self.pairs.iter().all(|p| p.power <= best)
            && min_of(|p| p.toa_s) == Some(self.selected_toa_s)
            && min_of(|p| p.toa_raw_s) == Some(self.selected_toa_raw_s)
    }
}

/// Modulated PRS burst of one cell, held in the frequency domain for correlation.
pub struct PrsWaveform {
    pub samples: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    sample_rate: f64,
}

impl PrsWaveform {
    pub fn new(cfg: &PrsConfig) -> Result<Self> {
        let samples = OfdmModem::new(cfg)?.modulate(&gen_prs_grid(cfg)?)?;
        let mut spectrum = samples.clone();
        FftPlanner::new().plan_fft_forward(spectrum.len()).process(&mut spectrum);
        Ok(Self { samples, spectrum, sample_rate: cfg.sample_rate() })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Signed baseband frequency of DFT bin `k`, Hz.
    fn bin_hz(&self, k: usize) -> f64 {
        let n = self.len();
        let signed = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
        signed * self.sample_rate / n as f64
    }
}

fn beam_gain(beam: &Beam, array: &UraConfig, theta: f64) -> Complex64 {
    beam.response(array, theta)
}

fn first_peak(mag: &[f64], threshold: f64) -> Option<(usize, f64)> {
    // mag[0] and mag[last] are guard lags either side of the search window
    let global = mag[1..mag.len() - 1].iter().copied().fold(0.0, f64::max);
    if global <= 0.0 {
        return None;
    }
    (1..mag.len() - 1).find(|&i| mag[i] >= threshold * global && mag[i] >= mag[i - 1] && mag[i] >= mag[i + 1]).map(
        |i| {
            let (a, b, c) = (mag[i - 1], mag[i], mag[i + 1]);
            let den = a - 2.0 * b + c;
            let delta = if den < 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
            (i - 1, delta)
        },
    )
}

/// Beam-swept correlation ToA for one base station using a prebuilt waveform.
pub fn sweep_with_waveform<R: Rng + ?Sized>(
    bs: BsId,
    scenario: &Scenario,
    cfg: &SignalConfig,
    waveform: &PrsWaveform,
    rng: &mut R,
) -> Result<BeamSweepReport> {
    cfg.validate()?;
    let station = scenario.bs(bs)?;
    let paths = build_paths(bs, scenario, &cfg.channel())?;
    let tx_book = beam_codebook(&cfg.tx)?;
    let rx_book = beam_codebook(&cfg.rx)?;
    let len = waveform.len();
    let fs = waveform.sample_rate;
    let bounds = scenario.bounds;
    let diagonal = distance(
        crate::scenario::Point2::new(bounds.min_x, bounds.min_y),
        crate::scenario::Point2::new(bounds.max_x, bounds.max_y),
    );
    let window = ((2.0 * diagonal / SPEED_OF_LIGHT * fs).ceil() as usize + SEARCH_GUARD).min(len / 2);

    let power_spectrum: Vec<f64> = waveform.spectrum.iter().map(|s| s.norm_sqr()).collect();
    let planner_inverse = FftPlanner::new().plan_fft_inverse(len);
    let norm = 1.0 / len as f64;
    // lag index i covers lag i − 1, so lags −1 ..= window
    let lag = |i: usize| (i as isize - 1).rem_euclid(len as isize) as usize;

    let path_xc: Vec<Vec<Complex64>> = paths
        .paths
        .iter()
        .map(|p| {
            let mut z: Vec<Complex64> = (0..len)
                .map(|k| Complex64::from_polar(power_spectrum[k], -2.0 * PI * waveform.bin_hz(k) * p.delay_s))
                .collect();
            planner_inverse.process(&mut z);
            (0..window + 2).map(|i| z[lag(i)] * norm).collect()
        })
        .collect();
    let n_paths = paths.len();
    let mut gram = vec![Complex64::default(); n_paths * n_paths];
    for p in 0..n_paths {
        for q in p..n_paths {
            let dt = paths.paths[p].delay_s - paths.paths[q].delay_s;
            let g: Complex64 = (0..len)
                .map(|k| Complex64::from_polar(power_spectrum[k], -2.0 * PI * waveform.bin_hz(k) * dt))
                .sum::<Complex64>()
                * norm
                * norm;
            gram[p * n_paths + q] = g;
            gram[q * n_paths + p] = g.conj();
        }
    }

    let tx_gains =
        beam_gains(&tx_book, &cfg.tx, &paths, |p| relative_azimuth(p.departure_az, station.position, bounds.center()));
    let rx_gains =
        beam_gains(&rx_book, &cfg.rx, &paths, |p| relative_azimuth(p.arrival_az, scenario.ue, station.position));

    let noise = cfg.noise_power.unwrap_or(0.0);
    let mut pairs = Vec::with_capacity(tx_book.len() * rx_book.len());
    let mut mag = vec![0.0; window + 2];
    for (ti, tg) in tx_gains.iter().enumerate() {
        for (ri, rg) in rx_gains.iter().enumerate() {
            let c: Vec<Complex64> = (0..n_paths).map(|p| paths.paths[p].gain * tg[p] * rg[p]).collect();
            let signal: f64 = (0..n_paths)
                .flat_map(|p| (0..n_paths).map(move |q| (p, q)))
                .map(|(p, q)| (c[p] * c[q].conj() * gram[p * n_paths + q]).re)
                .sum::<f64>()
                .max(0.0);
            let detectable = if cfg.noise_power.is_some() { signal >= noise } else { signal > 0.0 };
            let mut toa_raw_s = None;
            let mut toa_s = None;
            if detectable {
                let mut xc: Vec<Complex64> =
                    (0..window + 2).map(|i| (0..n_paths).map(|p| c[p] * path_xc[p][i]).sum()).collect();
                if cfg.noise_power.is_some() {
                    add_noise_correlation(&mut xc, waveform, noise, rng, &*planner_inverse, &lag);
                }
                for (m, v) in mag.iter_mut().zip(&xc) {
                    *m = v.norm();
                }
                if let Some((l, delta)) = first_peak(&mag, cfg.peak_threshold) {
                    toa_raw_s = Some(l as f64 / fs);
                    toa_s = Some((l as f64 + delta) / fs);
                }
            }
            pairs.push(PairMeasurement { tx_beam: ti, rx_beam: ri, power: signal + noise, toa_raw_s, toa_s });
        }
    }

    let selected = |f: fn(&PairMeasurement) -> Option<f64>| pairs.iter().filter_map(f).min_by(f64::total_cmp);
    let (Some(selected_toa_s), Some(selected_toa_raw_s)) = (selected(|p| p.toa_s), selected(|p| p.toa_raw_s)) else {
        return Err(Error::DetectionFailure(bs));
    };
    let best_pair = (0..pairs.len()).max_by(|&a, &b| pairs[a].power.total_cmp(&pairs[b].power)).unwrap_or(0);
    Ok(BeamSweepReport { bs_id: bs, sample_rate: fs, pairs, best_pair, selected_toa_s, selected_toa_raw_s })
}

fn beam_gains(
    book: &[Beam],
    array: &UraConfig,
    paths: &PathSet,
    angle: impl Fn(&super::channel::Path) -> f64,
) -> Vec<Vec<Complex64>> {
    book.iter().map(|b| paths.paths.iter().map(|p| beam_gain(b, array, angle(p))).collect()).collect()
}

fn add_noise_correlation<R: Rng + ?Sized>(
    xc: &mut [Complex64],
    waveform: &PrsWaveform,
    noise_power: f64,
    rng: &mut R,
    inverse: &dyn rustfft::Fft<f64>,
    lag: &impl Fn(usize) -> usize,
) {
    let len = waveform.len();
    // DFT of white noise with per-sample power σ² has per-bin power Lσ²
    let sd = (len as f64 * noise_power / 2.0).sqrt();
    let mut z: Vec<Complex64> = waveform
        .spectrum
        .iter()
        .map(|s| {
            let n = Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * sd;
            n * s.conj()
        })
        .collect();
    inverse.process(&mut z);
    for (i, v) in xc.iter_mut().enumerate() {
        *v += z[lag(i)] / len as f64;
    }
}

/// Beam-swept correlation ToA for one base station.
pub fn sweep_and_estimate_toa(bs: BsId, scenario: &Scenario, cfg: &SignalConfig, seed: u64) -> Result<BeamSweepReport> {
    let station = scenario.bs(bs)?;
    let waveform = PrsWaveform::new(&PrsConfig { cell_id: station.cell_id, ..cfg.prs.clone() })?;
    sweep_with_waveform(bs, scenario, cfg, &waveform, &mut rng_from_seed(seed))
}

/// Signal-level ToA for every station; stations that fail detection are left out.
pub fn simulate_toa_signal(scenario: &Scenario, cfg: &SignalConfig, seed: u64) -> Result<ToaSet> {
    cfg.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut waveforms: HashMap<u32, PrsWaveform> = HashMap::new();
    let mut toas = ToaSet::new(Backend::Signal);
    for bs in &scenario.bss {
        let waveform = match waveforms.entry(bs.cell_id) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(PrsWaveform::new(&PrsConfig { cell_id: bs.cell_id, ..cfg.prs.clone() })?),
        };
        match sweep_with_waveform(bs.id, scenario, cfg, waveform, &mut rng) {
            Ok(report) => toas.insert(bs.id, report.selected_toa_s),
            Err(Error::DetectionFailure(id)) => log::debug!("station {id} not detected"),
            Err(e) => return Err(e),
        }
    }
    Ok(toas)
}
