use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{BaseStation, BsId, Point2, Rect, Scenario};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Indoor open-office hall, 120 m × 50 m.
pub const IOO_HALL: Rect = Rect::sized(120.0, 50.0);

/// Fixed indoor open-office sites: a 6 × 2 grid with 20 m pitch.
pub const IOO_SITES: [Point2; 12] = {
    const XS: [f64; 6] = [10.0, 30.0, 50.0, 70.0, 90.0, 110.0];
    let mut out = [Point2::new(0.0, 0.0); 12];
    let mut i = 0;
    while i < 6 {
        out[i] = Point2::new(XS[i], 15.0);
        out[i + 6] = Point2::new(XS[i], 35.0);
        i += 1;
    }
    out
};

#[derive(Debug, Clone, PartialEq)]
pub struct UmiParams {
    pub m: usize,
    /// Minimum separation between any two stations along each axis.
    pub min_spacing: f64,
    pub bounds: Rect,
    pub n_scatterers: usize,
    pub n_los: usize,
}

impl Default for UmiParams {
    fn default() -> Self {
        Self { m: 7, min_spacing: 100.0, bounds: Rect::sized(1000.0, 1000.0), n_scatterers: 5, n_los: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IooParams {
    pub n_scatterers: usize,
    pub n_los: usize,
}

impl Default for IooParams {
    fn default() -> Self {
        Self { n_scatterers: 5, n_los: 6 }
    }
}

/// Draw `m` coordinates in `[lo, hi]` with pairwise gaps of at least `gap`.
///
/// Uniform over the admissible set: sort `m` draws from the shrunken interval
/// `[lo, hi - (m-1)·gap]` and push the k-th one up by `k·gap`.
fn spaced_axis<R: Rng>(rng: &mut R, m: usize, lo: f64, hi: f64, gap: f64) -> Option<Vec<f64>> {
    let slack = (hi - lo) - gap * (m.saturating_sub(1)) as f64;
    if slack < 0.0 {
        return None;
    }
    let mut v: Vec<f64> = (0..m).map(|_| lo + slack * rng.random::<f64>()).collect();
    v.sort_by(f64::total_cmp);
    for (k, c) in v.iter_mut().enumerate() {
        *c = (*c + gap * k as f64).min(hi);
    }
    Some(v)
}

fn uniform_in<R: Rng>(rng: &mut R, bounds: &Rect) -> Point2 {
    Point2::new(
        bounds.min_x + bounds.width() * rng.random::<f64>(),
        bounds.min_y + bounds.height() * rng.random::<f64>(),
    )
}

fn check_n_los(n_los: usize, m: usize) -> Result<()> {
    if n_los == 0 || n_los > m {
        return Err(Error::InvalidParameter(format!("n_los must be in 1..={m}, got {n_los}")));
    }
    Ok(())
}

fn finish<R: Rng>(rng: &mut R, bounds: Rect, sites: Vec<Point2>, n_scatterers: usize, n_los: usize) -> Scenario {
    let ue = uniform_in(rng, &bounds);
    let scatterers = (0..n_scatterers).map(|_| uniform_in(rng, &bounds)).collect();
    let mut los = vec![false; sites.len()];
    for i in sample(rng, sites.len(), n_los) {
        los[i] = true;
    }
    let stations = sites
        .into_iter()
        .zip(los)
        .enumerate()
        .map(|(k, (position, los))| BaseStation { id: BsId(0), position, cell_id: k as u32, los })
        .collect();
    Scenario::new(bounds, ue, stations, scatterers)
}

/// Urban-microcell layout: `m` stations at random sites that keep at least
/// `min_spacing` apart along both the x and the y axis.
pub fn gen_umi(seed: u64, params: &UmiParams) -> Result<Scenario> {
    let UmiParams { m, min_spacing, bounds, n_scatterers, n_los } = *params;
    if m < 4 {
        return Err(Error::InsufficientGeometry { required: 4, got: m });
    }
    check_n_los(n_los, m)?;
    if !bounds.is_valid() || min_spacing.is_nan() || min_spacing < 0.0 {
        return Err(Error::InvalidParameter("invalid bounds or spacing".into()));
    }
    let mut rng = rng_from_seed(seed);
    let placement_failed = || Error::PlacementFailed { requested: m, spacing: min_spacing };
    let xs = spaced_axis(&mut rng, m, bounds.min_x, bounds.max_x, min_spacing).ok_or_else(placement_failed)?;
    let mut ys = spaced_axis(&mut rng, m, bounds.min_y, bounds.max_y, min_spacing).ok_or_else(placement_failed)?;
    ys.shuffle(&mut rng);
    let sites = xs.into_iter().zip(ys).map(|(x, y)| Point2::new(x, y)).collect();
    Ok(finish(&mut rng, bounds, sites, n_scatterers, n_los))
}

/// Indoor open-office layout: the twelve fixed [`IOO_SITES`] in [`IOO_HALL`].
pub fn gen_ioo(seed: u64, params: &IooParams) -> Result<Scenario> {
    check_n_los(params.n_los, IOO_SITES.len())?;
    let mut rng = rng_from_seed(seed);
    Ok(finish(&mut rng, IOO_HALL, IOO_SITES.to_vec(), params.n_scatterers, params.n_los))
}
