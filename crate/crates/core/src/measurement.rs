//! ToA observations and reference-relative TDOA range differences.

use std::collections::BTreeMap;
use std::io::Write;

use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scenario::{distance, BsId, Point2, Scenario};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Geometric ranges plus Gaussian noise and an NLOS excess-delay law.
    Abstract,
    /// Beam-swept PRS waveform through a multipath channel.
    Signal,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "abstract" => Ok(Self::Abstract),
            "signal" => Ok(Self::Signal),
            other => Err(Error::InvalidParameter(format!("unknown backend `{other}`"))),
        }
    }
}

/// Per-station arrival times in seconds.
///
/// A station whose PRS could not be detected has no entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ToaSet {
    pub backend: Backend,
    toas: BTreeMap<BsId, f64>,
}

impl ToaSet {
    pub fn new(backend: Backend) -> Self {
        Self { backend, toas: BTreeMap::new() }
    }

    pub fn insert(&mut self, id: BsId, toa_s: f64) {
        self.toas.insert(id, toa_s);
    }

    pub fn toa(&self, id: BsId) -> Result<f64> {
        self.toas.get(&id).copied().ok_or(Error::UnknownBs(id))
    }

    /// `c·t` for station `id`, meters.
    pub fn range(&self, id: BsId) -> Result<f64> {
        self.toa(id).map(|t| SPEED_OF_LIGHT * t)
    }

    pub fn contains(&self, id: BsId) -> bool {
        self.toas.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.toas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.toas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BsId, f64)> + '_ {
        self.toas.iter().map(|(&id, &t)| (id, t))
    }

    /// Stable 64-bit fingerprint of the exact bit patterns held.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for (id, t) in self.iter() {
            eat(&id.0.to_le_bytes());
            eat(&t.to_bits().to_le_bytes());
        }
        h
    }

    /// Debug export, one `bs_id,toa_s` row per station.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bs_id", "toa_s"])?;
        for (id, t) in self.iter() {
            w.write_record([id.to_string(), format!("{t:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the LOS ranging error, meters. Zero gives the
    /// noiseless limit.
    pub sigma_tdoa: f64,
    /// Mean of the exponential NLOS excess range, meters.
    pub nlos_bias_mean: f64,
}

impl NoiseModel {
    pub const INDOOR: NoiseModel = NoiseModel { sigma_tdoa: 0.3, nlos_bias_mean: 2.0 };
    pub const OUTDOOR: NoiseModel = NoiseModel { sigma_tdoa: 0.3, nlos_bias_mean: 5.0 };

    pub fn new(sigma_tdoa: f64, nlos_bias_mean: f64) -> Result<Self> {
        let m = Self { sigma_tdoa, nlos_bias_mean };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_tdoa >= 0.0 && self.sigma_tdoa.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma_tdoa must be >= 0, got {}", self.sigma_tdoa)));
        }
        if !(self.nlos_bias_mean >= 0.0 && self.nlos_bias_mean.is_finite()) {
            return Err(Error::InvalidParameter(format!("nlos_bias_mean must be >= 0, got {}", self.nlos_bias_mean)));
        }
        Ok(())
    }
}

/// Draw one ToA per station: `c·t = d + n` for LOS links and `c·t = d + n + b`
/// for NLOS links, with `n ~ N(0, σ²)` and `b ~ Exp(mean)` independent.
pub fn simulate_toa_abstract(scenario: &Scenario, noise: &NoiseModel, seed: u64) -> Result<ToaSet> {
    noise.validate()?;
    let mut rng = rng_from_seed(seed);
    let gauss = Normal::new(0.0, noise.sigma_tdoa).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let bias = if noise.nlos_bias_mean > 0.0 {
        Some(Exp::new(1.0 / noise.nlos_bias_mean).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let mut set = ToaSet::new(Backend::Abstract);
    for bs in &scenario.bss {
        let d = distance(bs.position, scenario.ue);
        // Draw the Gaussian term first for every station so LOS flags do not
        // shift the noise stream of later stations.
        let n = gauss.sample(&mut rng);
        let b = match (&bias, bs.los) {
            (Some(law), false) => law.sample(&mut rng),
            _ => 0.0,
        };
        set.insert(bs.id, (d + n + b) / SPEED_OF_LIGHT);
    }
    Ok(set)
}

/// Range differences `r_i = c·(t_i − t_ref)` relative to a reference station.
#[derive(Debug, Clone, PartialEq)]
pub struct TdoaVector {
    pub reference_id: BsId,
    pub entries: Vec<(BsId, f64)>,
}

impl TdoaVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = BsId> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// Resolve station ids to positions.
    pub fn system(&self, scenario: &Scenario) -> Result<TdoaSystem> {
        let reference = scenario.position(self.reference_id)?;
        let mut anchors = Vec::with_capacity(self.entries.len());
        let mut ranges = Vec::with_capacity(self.entries.len());
        for &(id, r) in &self.entries {
            anchors.push(scenario.position(id)?);
            ranges.push(r);
        }
        Ok(TdoaSystem { reference, anchors, ranges })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bs_id", "range_diff_m"])?;
        for (id, r) in &self.entries {
            w.write_record([id.to_string(), format!("{r:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Form the TDOA vector for `used_ids` against `reference_id`.
///
/// Entries follow the order of `used_ids` with the reference skipped.
pub fn tdoa_from_toa(toas: &ToaSet, reference_id: BsId, used_ids: &[BsId]) -> Result<TdoaVector> {
    if used_ids.len() < 2 {
        return Err(Error::InsufficientGeometry { required: 2, got: used_ids.len() });
    }
    if !used_ids.contains(&reference_id) {
        return Err(Error::InvalidParameter(format!("reference {reference_id} is not among the used stations")));
    }
    let t_ref = toas.toa(reference_id)?;
    let mut seen = Vec::with_capacity(used_ids.len());
    let mut entries = Vec::with_capacity(used_ids.len() - 1);
    for &id in used_ids {
        if seen.contains(&id) {
            return Err(Error::InvalidParameter(format!("station {id} listed twice")));
        }
        seen.push(id);
        if id == reference_id {
            continue;
        }
        entries.push((id, SPEED_OF_LIGHT * (toas.toa(id)? - t_ref)));
    }
    Ok(TdoaVector { reference_id, entries })
}

/// TDOA measurements with station ids resolved to positions.
#[derive(Debug, Clone, PartialEq)]
pub struct TdoaSystem {
    pub reference: Point2,
    pub anchors: Vec<Point2>,
    /// Measured range difference for each anchor, meters.
    pub ranges: Vec<f64>,
}

impl TdoaSystem {
    /// Noise-free system for a UE at `truth`.
    pub fn exact(reference: Point2, anchors: Vec<Point2>, truth: Point2) -> Self {
        let d_ref = distance(reference, truth);
        let ranges = anchors.iter().map(|&a| distance(a, truth) - d_ref).collect();
        Self { reference, anchors, ranges }
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Reference first, then anchors.
    pub fn positions(&self) -> Vec<Point2> {
        std::iter::once(self.reference).chain(self.anchors.iter().copied()).collect()
    }

    pub(crate) fn check_regular(&self, x: Point2) -> Result<()> {
        if std::iter::once(&self.reference).chain(&self.anchors).any(|&p| distance(p, x) == 0.0) {
            return Err(Error::Singular(x));
        }
        Ok(())
    }

    /// Model range differences `d_i(x) − d_ref(x)`.
    pub fn model(&self, x: Point2) -> Result<Vec<f64>> {
        self.check_regular(x)?;
        let d_ref = distance(self.reference, x);
        Ok(self.anchors.iter().map(|&a| distance(a, x) - d_ref).collect())
    }

    /// Residuals `r_i − (d_i(x) − d_ref(x))`.
    pub fn residuals(&self, x: Point2) -> Result<Vec<f64>> {
        Ok(self.model(x)?.into_iter().zip(&self.ranges).map(|(f, r)| r - f).collect())
    }
}

/// Residual vector of `tdoa` evaluated at candidate position `x`.
pub fn range_residual_model(x: Point2, tdoa: &TdoaVector, scenario: &Scenario) -> Result<Vec<f64>> {
    tdoa.system(scenario)?.residuals(x)
}
