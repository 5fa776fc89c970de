//! Base-station selection: the GDOP-ranked strategy and the distance and
//! random baselines.
//!
//! GDOP strategy:
//! 1. fix an initial position from the LOS stations;
//! 2. score every LOS station by the GDOP of the LOS set with that station as
//!    reference, evaluated at the initial fix, and sort ascending;
//! 3. score and sort the NLOS stations the same way, within the NLOS set;
//! 4. take LOS stations first, then NLOS, until `n` are chosen;
//! 5. the first chosen station is the reference.
//!
//! Only stations with a ToA in the supplied [`ToaSet`] are candidates.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gdop::{per_reference_scores, GdopScore};
use crate::measurement::{tdoa_from_toa, ToaSet};
use crate::rng::rng_from_seed;
use crate::scenario::{centroid, BsId, Point2, Rect, Scenario};
use crate::solver::{solve_with_restarts, SolverConfig};

/// Minimum number of stations for an unambiguous 2-D TDOA fix.
pub const MIN_FIX_STATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Gdop,
    Distance,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Gdop, Strategy::Distance, Strategy::Random];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Gdop => "gdop",
            Strategy::Distance => "distance",
            Strategy::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gdop" => Ok(Strategy::Gdop),
            "distance" => Ok(Strategy::Distance),
            "random" => Ok(Strategy::Random),
            other => Err(Error::InvalidParameter(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub ordered_ids: Vec<BsId>,
    pub reference_id: BsId,
    pub strategy: Strategy,
    /// GDOP scores aligned with `ordered_ids` (GDOP strategy only).
    pub scores: Option<Vec<GdopScore>>,
    /// Initial fix the GDOP scores were evaluated at (GDOP strategy only).
    pub initial_estimate: Option<Point2>,
}

impl SelectionResult {
    /// `trial,strategy,ids,reference,scores` with `;`-joined lists.
    pub fn csv_record(&self, trial: usize) -> [String; 5] {
        let ids = self.ordered_ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(";");
        let scores = self
            .scores
            .as_ref()
            .map(|s| s.iter().map(|g| format!("{:.6}", g.value)).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        [trial.to_string(), self.strategy.to_string(), ids, self.reference_id.to_string(), scores]
    }
}

/// Restart offsets of a quarter of the deployment extent in each diagonal direction.
pub fn quarter_bounds_offsets(bounds: &Rect) -> [Point2; 4] {
    let (qx, qy) = (0.25 * bounds.width(), 0.25 * bounds.height());
    [Point2::new(qx, qy), Point2::new(-qx, qy), Point2::new(qx, -qy), Point2::new(-qx, -qy)]
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("must select at least {min} stations, got {n}")));
    }
    Ok(())
}

/// Candidates in id (= distance) order, split by LOS state.
fn partitions(scenario: &Scenario, available: impl Fn(BsId) -> bool) -> (Vec<BsId>, Vec<BsId>) {
    scenario.bss.iter().filter(|b| available(b.id)).map(|b| (b.id, b.los)).fold(
        (Vec::new(), Vec::new()),
        |(mut los, mut nlos), (id, is_los)| {
            if is_los {
                los.push(id)
            } else {
                nlos.push(id)
            }
            (los, nlos)
        },
    )
}

fn positions(scenario: &Scenario, ids: &[BsId]) -> Result<Vec<Point2>> {
    ids.iter().map(|&id| scenario.position(id)).collect()
}

/// Initial LS fix from the LOS stations, topped up with the nearest NLOS
/// stations when fewer than four LOS stations exist.
fn initial_fix(
    scenario: &Scenario,
    toas: &ToaSet,
    los: &[BsId],
    nlos: &[BsId],
    solver: &SolverConfig,
) -> Result<Point2> {
    let mut used: Vec<BsId> = los.to_vec();
    used.extend(nlos.iter().take(MIN_FIX_STATIONS.saturating_sub(los.len())));
    let fallback = centroid(&positions(scenario, &used)?).ok_or(Error::EmptyInput)?;
    if used.len() < MIN_FIX_STATIONS {
        return Err(Error::InsufficientGeometry { required: MIN_FIX_STATIONS, got: used.len() });
    }
    let system = tdoa_from_toa(toas, los[0], &used)?.system(scenario)?;
    let offsets = quarter_bounds_offsets(&scenario.bounds);
    match solve_with_restarts(&system, fallback, &offsets, solver) {
        Ok(r) => Ok(r.estimate.x_hat),
        Err(e) => {
            log::debug!("initial fix failed ({e}); scoring at the centroid");
            Ok(fallback)
        }
    }
}

/// Ascending score, then ascending distance, then id. `+∞` sorts last.
fn rank(scenario: &Scenario, mut scores: Vec<GdopScore>) -> Vec<GdopScore> {
    let dist = |id: BsId| scenario.true_distance(id).unwrap_or(f64::INFINITY);
    scores.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| dist(a.bs_id).total_cmp(&dist(b.bs_id)))
            .then_with(|| a.bs_id.cmp(&b.bs_id))
    });
    scores
}

/// GDOP-ranked selection of `n` stations.
pub fn select_gdop(scenario: &Scenario, toas: &ToaSet, n: usize, solver: &SolverConfig) -> Result<SelectionResult> {
    check_n(n, MIN_FIX_STATIONS)?;
    let (los, nlos) = partitions(scenario, |id| toas.contains(id));
    if los.is_empty() {
        return Err(Error::NoLos);
    }
    let x0 = initial_fix(scenario, toas, &los, &nlos, solver)?;
    let ranked_los = rank(scenario, per_reference_scores(&los, scenario, x0));
    let ranked_nlos = rank(scenario, per_reference_scores(&nlos, scenario, x0));
    let chosen: Vec<GdopScore> = ranked_los.into_iter().chain(ranked_nlos).take(n).collect();
    Ok(SelectionResult {
        ordered_ids: chosen.iter().map(|s| s.bs_id).collect(),
        reference_id: chosen[0].bs_id,
        strategy: Strategy::Gdop,
        scores: Some(chosen),
        initial_estimate: Some(x0),
    })
}

/// Nearest LOS stations first, then nearest NLOS; reference is the nearest LOS.
pub fn select_distance(scenario: &Scenario, n: usize) -> Result<SelectionResult> {
    let all: Vec<BsId> = scenario.ids().collect();
    select_distance_among(scenario, &all, n)
}

pub fn select_distance_among(scenario: &Scenario, candidates: &[BsId], n: usize) -> Result<SelectionResult> {
    check_n(n, MIN_FIX_STATIONS)?;
    let (los, nlos) = partitions(scenario, |id| candidates.contains(&id));
    if los.is_empty() {
        return Err(Error::NoLos);
    }
    // ids ascend with distance, so the partitions are already distance-sorted
    let ordered_ids: Vec<BsId> = los.into_iter().chain(nlos).take(n).collect();
    Ok(SelectionResult {
        reference_id: ordered_ids[0],
        ordered_ids,
        strategy: Strategy::Distance,
        scores: None,
        initial_estimate: None,
    })
}

/// Uniform sample of `n` stations; the one nearest the UE is the reference
/// and comes first, the rest follow in distance order.
pub fn select_random(scenario: &Scenario, n: usize, seed: u64) -> Result<SelectionResult> {
    let all: Vec<BsId> = scenario.ids().collect();
    select_random_among(scenario, &all, n, seed)
}

pub fn select_random_among(scenario: &Scenario, candidates: &[BsId], n: usize, seed: u64) -> Result<SelectionResult> {
    check_n(n, 1)?;
    let pool: Vec<BsId> = scenario.ids().filter(|id| candidates.contains(id)).collect();
    if pool.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rng = rng_from_seed(seed);
    let mut ordered_ids: Vec<BsId> =
        sample(&mut rng, pool.len(), n.min(pool.len())).into_iter().map(|k| pool[k]).collect();
    let dist = |id: &BsId| scenario.true_distance(*id).unwrap_or(f64::INFINITY);
    ordered_ids.sort_by(|a, b| dist(a).total_cmp(&dist(b)).then(a.cmp(b)));
    Ok(SelectionResult {
        reference_id: ordered_ids[0],
        ordered_ids,
        strategy: Strategy::Random,
        scores: None,
        initial_estimate: None,
    })
}

/// Total order used to sort stations by `(LOS first, distance)`.
pub fn los_then_distance(scenario: &Scenario, a: BsId, b: BsId) -> Ordering {
    let key = |id: BsId| (!scenario.is_los(id).unwrap_or(false), scenario.true_distance(id).unwrap_or(f64::INFINITY));
    let (ka, kb) = (key(a), key(b));
    ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.cmp(&b))
}
