//! Linearized TDOA geometry: design matrix and (weighted) GDOP.
//!
//! Row `i` of the design matrix holds the partial derivatives of the `i`-th
//! measurement error `r_i − d_i(x) + d_ref(x)` at the linearization point,
//! which is the difference of two unit vectors:
//!
//! ```text
//! [α_i, β_i] = (v_i − x0)/‖v_i − x0‖ − (v_ref − x0)/‖v_ref − x0‖
//! ```
//!
//! GDOP is `sqrt(tr((AᵀWA)⁻¹))`. `W` defaults to identity, which treats the
//! TDOA errors as independent with equal variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{distance, BsId, Point2, Scenario};

/// Largest accepted condition number of `AᵀWA`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    /// `(α_i, β_i)` per non-reference station, in input order.
    pub rows: Vec<[f64; 2]>,
    pub linearization_point: Point2,
    /// Index of the reference station in the position list the matrix was built from.
    pub reference_index: usize,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }
}

fn unit_toward(p: Point2, from: Point2) -> Result<Point2> {
    let d = distance(p, from);
    if d == 0.0 {
        return Err(Error::Singular(from));
    }
    Ok((p - from) * (1.0 / d))
}

/// Build the `(M−1) × 2` TDOA design matrix at `x0`.
pub fn design_matrix(positions: &[Point2], reference_index: usize, x0: Point2) -> Result<DesignMatrix> {
    if positions.len() < 3 {
        return Err(Error::InsufficientGeometry { required: 3, got: positions.len() });
    }
    let reference = *positions
        .get(reference_index)
        .ok_or_else(|| Error::InvalidParameter(format!("reference index {reference_index} out of range")))?;
    let u_ref = unit_toward(reference, x0)?;
    let rows = positions
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != reference_index)
        .map(|(_, &p)| unit_toward(p, x0).map(|u| [u.x - u_ref.x, u.y - u_ref.y]))
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignMatrix { rows, linearization_point: x0, reference_index })
}

/// Weight matrix `W` applied to the TDOA errors.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum Weights {
    /// `W = I`: independent, equal-variance TDOA errors.
    #[default]
    Identity,
    /// Explicit symmetric `(M−1) × (M−1)` matrix, row-major.
    Matrix(Vec<Vec<f64>>),
}

impl Weights {
    /// Inverse covariance of TDOAs that share one reference ToA with i.i.d.
    /// ToA errors: `Σ = I + 11ᵀ`, so `W = I − 11ᵀ/(n+1)`.
    pub fn shared_reference(n: usize) -> Self {
        let off = -1.0 / (n as f64 + 1.0);
        Weights::Matrix((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 + off } else { off }).collect()).collect())
    }
}

/// Normal matrix `AᵀWA` as `[n11, n12, n22]`.
fn normal_matrix(a: &DesignMatrix, w: &Weights) -> Result<[f64; 3]> {
    let rows = &a.rows;
    match w {
        Weights::Identity => {
            Ok(rows.iter().fold([0.0; 3], |[s11, s12, s22], [ax, ay]| [s11 + ax * ax, s12 + ax * ay, s22 + ay * ay]))
        }
        Weights::Matrix(m) => {
            let n = rows.len();
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidParameter(format!("weight matrix must be {n}x{n}")));
            }
            let mut acc = [0.0; 3];
            for (i, wi) in m.iter().enumerate() {
                for (j, &wij) in wi.iter().enumerate() {
                    acc[0] += rows[i][0] * wij * rows[j][0];
                    acc[1] += rows[i][0] * wij * rows[j][1];
                    acc[2] += rows[i][1] * wij * rows[j][1];
                }
            }
            Ok(acc)
        }
    }
}

/// `(AᵀWA)⁻¹` in closed form, as `[c11, c12, c22]`.
pub fn position_covariance(a: &DesignMatrix, w: &Weights) -> Result<[f64; 3]> {
    let [n11, n12, n22] = normal_matrix(a, w)?;
    let det = n11 * n22 - n12 * n12;
    let half_trace = 0.5 * (n11 + n22);
    let spread = (half_trace * half_trace - det).max(0.0).sqrt();
    let (hi, lo) = (half_trace + spread, half_trace - spread);
    let well_posed = det > 0.0 && lo > 0.0 && hi / lo <= MAX_CONDITION;
    if !well_posed {
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        return Err(Error::DegenerateGeometry { condition });
    }
    Ok([n22 / det, -n12 / det, n11 / det])
}

/// `sqrt(tr((AᵀWA)⁻¹))`.
pub fn gdop(a: &DesignMatrix, w: &Weights) -> Result<f64> {
    let [c11, _, c22] = position_covariance(a, w)?;
    Ok((c11 + c22).sqrt())
}

/// GDOP of a station set evaluated with one candidate as reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdopScore {
    pub bs_id: BsId,
    /// `+∞` when undefined (fewer than three stations, degenerate or singular geometry).
    pub value: f64,
}

impl GdopScore {
    pub fn is_defined(&self) -> bool {
        self.value.is_finite()
    }
}

/// One score per station `j` in `bs_set`: GDOP at `x0` of the whole set with
/// `j` as reference. Never fails; undefined cases map to `+∞`.
pub fn per_reference_scores(bs_set: &[BsId], scenario: &Scenario, x0: Point2) -> Vec<GdopScore> {
    let positions: Option<Vec<Point2>> = bs_set.iter().map(|&id| scenario.position(id).ok()).collect();
    bs_set
        .iter()
        .enumerate()
        .map(|(k, &bs_id)| {
            let value = positions
                .as_deref()
                .and_then(|p| design_matrix(p, k, x0).ok())
                .and_then(|a| gdop(&a, &Weights::Identity).ok())
                .unwrap_or(f64::INFINITY);
            GdopScore { bs_id, value }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{BaseStation, Rect};
    use proptest::prelude::*;

    // sqrt(2/3), evaluated independently at 40 digits
    #[allow(clippy::excessive_precision)]
    const SQUARE_GDOP: f64 = 0.816_496_580_927_726_032_7;
    // 5-station asymmetric layout, evaluated independently at 40 digits
    #[allow(clippy::excessive_precision)]
    const ASYM_GDOP: f64 = 0.759_646_083_866_096_153_9;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn unit_circle_rows() {
        let bs = [p(1.0, 0.0), p(0.0, 1.0), p(-1.0, 0.0), p(0.0, -1.0)];
        let a = design_matrix(&bs, 0, p(0.0, 0.0)).unwrap();
        assert_eq!(a.rows, vec![[-1.0, 1.0], [-2.0, 0.0], [-1.0, -1.0]]);
    }

    #[test]
    fn translation_leaves_matrix_unchanged() {
        let bs = [p(1.0, 0.0), p(0.0, 1.0), p(-1.0, 0.0), p(0.0, -1.0)];
        let shift = p(500.0, 300.0);
        let moved: Vec<Point2> = bs.iter().map(|&b| b + shift).collect();
        let a = design_matrix(&bs, 0, p(0.0, 0.0)).unwrap();
        let b = design_matrix(&moved, 0, shift).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert!((ra[0] - rb[0]).abs() < 1e-12 && (ra[1] - rb[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_match_finite_differences() {
        let bs = [p(3.0, 41.0), p(57.0, -12.0), p(-20.0, -35.0), p(70.0, 66.0), p(-44.0, 10.0)];
        let x0 = p(5.5, 7.25);
        for reference in 0..bs.len() {
            let a = design_matrix(&bs, reference, x0).unwrap();
            let others: Vec<Point2> = (0..bs.len()).filter(|&k| k != reference).map(|k| bs[k]).collect();
            for (row, &v) in a.rows.iter().zip(&others) {
                // g(x) = r − d_i(x) + d_ref(x); r drops out of the derivative
                let g = |x: Point2| -distance(v, x) + distance(bs[reference], x);
                let h = 1e-5;
                let gx = (g(x0 + p(h, 0.0)) - g(x0 - p(h, 0.0))) / (2.0 * h);
                let gy = (g(x0 + p(0.0, h)) - g(x0 - p(0.0, h))) / (2.0 * h);
                assert!((row[0] - gx).abs() <= 1e-6 * row[0].abs().max(1e-3), "{row:?} {gx}");
                assert!((row[1] - gy).abs() <= 1e-6 * row[1].abs().max(1e-3), "{row:?} {gy}");
            }
        }
    }

    #[test]
    fn design_matrix_errors() {
        assert!(matches!(
            design_matrix(&[p(0.0, 0.0), p(1.0, 0.0)], 0, p(5.0, 5.0)),
            Err(Error::InsufficientGeometry { .. })
        ));
        assert!(matches!(
            design_matrix(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)], 0, p(1.0, 0.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn square_regression_constant() {
        let bs = [p(100.0, 0.0), p(0.0, 100.0), p(-100.0, 0.0), p(0.0, -100.0)];
        let a = design_matrix(&bs, 0, p(0.0, 0.0)).unwrap();
        let g = gdop(&a, &Weights::Identity).unwrap();
        assert!((g - SQUARE_GDOP).abs() < 1e-14, "{g}");
    }

    #[test]
    fn asymmetric_regression_constant() {
        let bs = [p(3.0, 41.0), p(57.0, -12.0), p(-20.0, -35.0), p(70.0, 66.0), p(-44.0, 10.0)];
        let a = design_matrix(&bs, 2, p(5.5, 7.25)).unwrap();
        let g = gdop(&a, &Weights::Identity).unwrap();
        assert!((g - ASYM_GDOP).abs() < 1e-13, "{g}");
    }

    #[test]
    fn collinear_is_degenerate() {
        let bs = [p(-50.0, 0.0), p(10.0, 0.0), p(80.0, 0.0), p(200.0, 0.0)];
        let a = design_matrix(&bs, 1, p(0.0, 0.0)).unwrap();
        assert!(matches!(gdop(&a, &Weights::Identity), Err(Error::DegenerateGeometry { .. })));
    }

    #[test]
    fn explicit_identity_matches_default() {
        let bs = [p(3.0, 41.0), p(57.0, -12.0), p(-20.0, -35.0), p(70.0, 66.0)];
        let a = design_matrix(&bs, 0, p(1.0, 2.0)).unwrap();
        let eye = Weights::Matrix((0..3).map(|i| (0..3).map(|j| f64::from(i == j)).collect()).collect());
        let g0 = gdop(&a, &Weights::Identity).unwrap();
        assert!((gdop(&a, &eye).unwrap() - g0).abs() < 1e-14);
        // the shared-reference weighting is a different, reference-invariant quantity
        let gs: Vec<f64> = (0..4)
            .map(|r| {
                let a = design_matrix(&bs, r, p(1.0, 2.0)).unwrap();
                gdop(&a, &Weights::shared_reference(3)).unwrap()
            })
            .collect();
        assert!(gs.iter().all(|g| (g - gs[0]).abs() < 1e-9), "{gs:?}");
        assert!(gdop(&a, &Weights::shared_reference(2)).is_err());
    }

    fn scenario_of(points: &[Point2], ue: Point2) -> Scenario {
        let stations = points
            .iter()
            .enumerate()
            .map(|(k, &position)| BaseStation { id: BsId(0), position, cell_id: k as u32, los: true })
            .collect();
        Scenario::new(Rect::new(-1e4, -1e4, 1e4, 1e4), ue, stations, vec![])
    }

    #[test]
    fn symmetric_square_scores_equal() {
        let s = scenario_of(&[p(100.0, 0.0), p(0.0, 100.0), p(-100.0, 0.0), p(0.0, -100.0)], p(0.0, 0.0));
        let ids: Vec<BsId> = s.ids().collect();
        let scores = per_reference_scores(&ids, &s, p(0.0, 0.0));
        assert_eq!(scores.len(), 4);
        for sc in &scores {
            assert!((sc.value - SQUARE_GDOP).abs() < 1e-12);
        }
    }

    #[test]
    fn two_member_set_is_undefined() {
        let s = scenario_of(&[p(100.0, 0.0), p(0.0, 100.0), p(-100.0, 0.0), p(0.0, -100.0)], p(0.0, 0.0));
        let scores = per_reference_scores(&[BsId(1), BsId(2)], &s, p(1.0, 1.0));
        assert!(scores.iter().all(|s| s.value == f64::INFINITY));
        assert!(per_reference_scores(&[BsId(1)], &s, p(1.0, 1.0))[0].value.is_infinite());
    }

    #[test]
    fn scores_match_individual_calls() {
        let pts = [p(3.0, 41.0), p(57.0, -12.0), p(-20.0, -35.0), p(70.0, 66.0)];
        let s = scenario_of(&pts, p(5.0, 5.0));
        let ids: Vec<BsId> = s.ids().collect();
        let x0 = p(4.0, 6.0);
        let scores = per_reference_scores(&ids, &s, x0);
        let positions: Vec<Point2> = ids.iter().map(|&i| s.position(i).unwrap()).collect();
        for (k, sc) in scores.iter().enumerate() {
            assert_eq!(sc.bs_id, ids[k]);
            let direct = gdop(&design_matrix(&positions, k, x0).unwrap(), &Weights::Identity).unwrap();
            assert_eq!(sc.value, direct);
        }
        // asymmetric layout: scores differ across references
        assert!(scores.iter().any(|s| (s.value - scores[0].value).abs() > 1e-6));
    }

    fn layout() -> impl Strategy<Value = (Vec<Point2>, Point2)> {
        (prop::collection::vec((-500.0..500.0f64, -500.0..500.0f64), 4..8), (-100.0..100.0f64, -100.0..100.0f64))
            .prop_map(|(v, (x, y))| (v.into_iter().map(|(a, b)| p(a, b)).collect(), p(x, y)))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn invariances((bs, x0) in layout(), shift in (-1e3..1e3f64, -1e3..1e3f64), angle in 0.0..std::f64::consts::TAU, scale in 0.01..100.0f64) {
            let a = design_matrix(&bs, 0, x0).unwrap();
            let Ok(g) = gdop(&a, &Weights::Identity) else { return Ok(()) };
            prop_assert!(a.rows.iter().flatten().all(|v| v.abs() <= 2.0 + 1e-12));
            let t = p(shift.0, shift.1);
            let moved: Vec<Point2> = bs.iter().map(|&b| b + t).collect();
            let gt = gdop(&design_matrix(&moved, 0, x0 + t).unwrap(), &Weights::Identity).unwrap();
            prop_assert!(rel(gt, g) < 1e-9);
            let rot: Vec<Point2> = bs.iter().map(|&b| b.rotate_about(x0, angle)).collect();
            let gr = gdop(&design_matrix(&rot, 0, x0).unwrap(), &Weights::Identity).unwrap();
            prop_assert!(rel(gr, g) < 1e-9);
            let sc: Vec<Point2> = bs.iter().map(|&b| x0 + (b - x0) * scale).collect();
            let gs = gdop(&design_matrix(&sc, 0, x0).unwrap(), &Weights::Identity).unwrap();
            prop_assert!(rel(gs, g) < 1e-9);
        }

        #[test]
        fn adding_a_station_never_hurts((bs, x0) in layout(), extra in (-500.0..500.0f64, -500.0..500.0f64)) {
            let a = design_matrix(&bs, 0, x0).unwrap();
            let Ok(g) = gdop(&a, &Weights::Identity) else { return Ok(()) };
            let mut more = bs.clone();
            more.push(p(extra.0, extra.1));
            let g2 = gdop(&design_matrix(&more, 0, x0).unwrap(), &Weights::Identity).unwrap();
            prop_assert!(g2 <= g * (1.0 + 1e-9));
        }
    }
}
