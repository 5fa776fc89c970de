//! Deployment geometry: base stations, the UE, scatterers and per-link LOS state.
//!
//! Base-station ids are always contiguous from 1 and ordered by distance to the
//! UE, so id 1 is the nearest station. Both generators enforce this.

mod generate;
mod geometry;
mod io;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use generate::{gen_ioo, gen_umi, IooParams, UmiParams, IOO_HALL, IOO_SITES};
pub use geometry::{centroid, distance, Point2, Rect};

use crate::error::{Error, Result};

/// One-based base-station identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BsId(pub u32);

impl fmt::Display for BsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: BsId,
    pub position: Point2,
    /// Physical cell identity; seeds the PRS sequence.
    pub cell_id: u32,
    pub los: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Umi,
    Ioo,
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "umi" => Ok(Self::Umi),
            "ioo" => Ok(Self::Ioo),
            other => Err(Error::InvalidParameter(format!("unknown scenario kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub bounds: Rect,
    pub ue: Point2,
    #[serde(rename = "bs")]
    pub bss: Vec<BaseStation>,
    #[serde(rename = "scatterer", default)]
    pub scatterers: Vec<Point2>,
}

impl Scenario {
    /// Build a scenario from raw stations, renumbering ids by UE distance.
    ///
    /// Incoming ids are ignored; ties in distance keep the incoming order.
    pub fn new(bounds: Rect, ue: Point2, stations: Vec<BaseStation>, scatterers: Vec<Point2>) -> Self {
        let mut bss = stations;
        // stable sort keeps the incoming order on ties
        bss.sort_by(|a, b| distance(a.position, ue).total_cmp(&distance(b.position, ue)));
        for (k, bs) in bss.iter_mut().enumerate() {
            bs.id = BsId(k as u32 + 1);
        }
        Self { bounds, ue, bss, scatterers }
    }

    pub fn len(&self) -> usize {
        self.bss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bss.is_empty()
    }

    pub fn bs(&self, id: BsId) -> Result<&BaseStation> {
        // ids are contiguous, but a hand-edited file may break that; fall back to a scan
        let idx = id.0 as usize;
        match self.bss.get(idx.wrapping_sub(1)) {
            Some(bs) if bs.id == id => Ok(bs),
            _ => self.bss.iter().find(|b| b.id == id).ok_or(Error::UnknownBs(id)),
        }
    }

    pub fn position(&self, id: BsId) -> Result<Point2> {
        self.bs(id).map(|b| b.position)
    }

    pub fn is_los(&self, id: BsId) -> Result<bool> {
        self.bs(id).map(|b| b.los)
    }

    /// True distance from the UE to station `id`.
    pub fn true_distance(&self, id: BsId) -> Result<f64> {
        self.position(id).map(|p| distance(p, self.ue))
    }

    pub fn ids(&self) -> impl Iterator<Item = BsId> + '_ {
        self.bss.iter().map(|b| b.id)
    }

    pub fn los_ids(&self) -> Vec<BsId> {
        self.bss.iter().filter(|b| b.los).map(|b| b.id).collect()
    }

    pub fn nlos_ids(&self) -> Vec<BsId> {
        self.bss.iter().filter(|b| !b.los).map(|b| b.id).collect()
    }

    pub fn n_los(&self) -> usize {
        self.bss.iter().filter(|b| b.los).count()
    }

    /// Check structural invariants: contiguous ids in distance order, finite
    /// coordinates, everything inside the bounds.
    pub fn validate(&self) -> Result<()> {
        if !self.bounds.is_valid() {
            return Err(Error::InvalidParameter("scenario bounds are not a valid rectangle".into()));
        }
        let inside = |p: Point2, what: &str| {
            if p.is_finite() && self.bounds.contains(p) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} at {p} lies outside the bounds")))
            }
        };
        inside(self.ue, "UE")?;
        for s in &self.scatterers {
            inside(*s, "scatterer")?;
        }
        let mut last = 0.0;
        for (k, bs) in self.bss.iter().enumerate() {
            if bs.id != BsId(k as u32 + 1) {
                return Err(Error::InvalidParameter(format!(
                    "base station ids must be contiguous from 1, found {} at position {}",
                    bs.id,
                    k + 1
                )));
            }
            inside(bs.position, "base station")?;
            let d = distance(bs.position, self.ue);
            if d < last {
                return Err(Error::InvalidParameter(format!("base station {} is out of distance order", bs.id)));
            }
            last = d;
        }
        Ok(())
    }
}
