use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::SPEED_OF_LIGHT;
use crate::scenario::{distance, BsId, Point2, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub delay_s: f64,
    pub gain: Complex64,
    /// World-frame azimuth of the ray leaving the base station.
    pub departure_az: f64,
    /// World-frame azimuth from the UE back along the arriving ray.
    pub arrival_az: f64,
    pub los: bool,
}

impl Path {
    pub fn length_m(&self) -> f64 {
        self.delay_s * SPEED_OF_LIGHT
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn earliest_delay(&self) -> Option<f64> {
        self.paths.iter().map(|p| p.delay_s).min_by(f64::total_cmp)
    }

    pub fn has_los(&self) -> bool {
        self.paths.iter().any(|p| p.los)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub carrier_hz: f64,
    /// Linear amplitude factor applied once per scatterer bounce.
    pub reflection_coefficient: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { carrier_hz: 28e9, reflection_coefficient: 0.3 }
    }
}

fn free_space(length: f64, wavelength: f64) -> Complex64 {
    Complex64::from_polar(wavelength / (4.0 * PI * length), -2.0 * PI * length / wavelength)
}

/// Geometric multipath between base station `bs` and the UE.
pub fn build_paths(bs: BsId, scenario: &Scenario, cfg: &ChannelConfig) -> Result<PathSet> {
    let station = scenario.bs(bs)?;
    let tx = station.position;
    let rx = scenario.ue;
    let wavelength = SPEED_OF_LIGHT / cfg.carrier_hz;
    let mut paths = Vec::with_capacity(scenario.scatterers.len() + 1);
    if station.los {
        let d = distance(tx, rx);
        if d <= 0.0 {
            return Err(Error::Singular(rx));
        }
        paths.push(Path {
            delay_s: d / SPEED_OF_LIGHT,
            gain: free_space(d, wavelength),
            departure_az: (rx - tx).azimuth(),
            arrival_az: (tx - rx).azimuth(),
            los: true,
        });
    }
    for &s in &scenario.scatterers {
        let (d1, d2) = (distance(tx, s), distance(s, rx));
        if d1 <= 0.0 || d2 <= 0.0 {
            continue;
        }
        let length = d1 + d2;
        paths.push(Path {
            delay_s: length / SPEED_OF_LIGHT,
            gain: free_space(length, wavelength) * cfg.reflection_coefficient,
            departure_az: (s - tx).azimuth(),
            arrival_az: (s - rx).azimuth(),
            los: false,
        });
    }
    Ok(PathSet { paths })
}

/// Azimuth of `world_az` relative to a boresight pointing from `from` to `to`,
/// wrapped to (−π, π].
pub fn relative_azimuth(world_az: f64, from: Point2, to: Point2) -> f64 {
    let boresight = if to == from { 0.0 } else { (to - from).azimuth() };
    let mut a = (world_az - boresight) % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{BaseStation, Rect};

    fn scenario(bs: Point2, los: bool, scatterers: Vec<Point2>) -> Scenario {
        Scenario::new(
            Rect::sized(1000.0, 1000.0),
            Point2::new(0.0, 0.0),
            vec![BaseStation { id: BsId(1), position: bs, cell_id: 0, los }],
            scatterers,
        )
    }

    #[test]
    fn los_delay_is_exactly_one_microsecond() {
        let s = scenario(Point2::new(299.792458, 0.0), true, vec![]);
        let p = build_paths(BsId(1), &s, &ChannelConfig::default()).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p.paths[0].delay_s - 1e-6).abs() < 1e-18);
        assert!(p.paths[0].los);
    }

    #[test]
    fn nlos_has_only_longer_paths() {
        let bs = Point2::new(100.0, 50.0);
        let s = scenario(bs, false, vec![Point2::new(30.0, 80.0), Point2::new(-20.0, 10.0)]);
        let p = build_paths(BsId(1), &s, &ChannelConfig::default()).unwrap();
        assert!(!p.has_los());
        assert_eq!(p.len(), 2);
        assert!(p.earliest_delay().unwrap() > bs.norm() / SPEED_OF_LIGHT);
        assert!(p.paths.iter().all(|q| q.delay_s > 0.0));
    }

    #[test]
    fn gains_fall_with_length() {
        let scatterers: Vec<Point2> = (1..8).map(|i| Point2::new(10.0 * i as f64, 40.0 * i as f64)).collect();
        let s = scenario(Point2::new(150.0, 0.0), false, scatterers);
        let p = build_paths(BsId(1), &s, &ChannelConfig::default()).unwrap();
        for a in &p.paths {
            for b in &p.paths {
                if a.delay_s < b.delay_s {
                    assert!(a.gain.norm() > b.gain.norm());
                }
            }
        }
    }

    #[test]
    fn free_space_amplitude_and_phase() {
        let cfg = ChannelConfig::default();
        let lambda = SPEED_OF_LIGHT / cfg.carrier_hz;
        let s = scenario(Point2::new(0.0, 40.0), true, vec![Point2::new(30.0, 0.0)]);
        let p = build_paths(BsId(1), &s, &cfg).unwrap();
        assert!((p.paths[0].gain.norm() - lambda / (4.0 * PI * 40.0)).abs() < 1e-15);
        let want = 0.3 * lambda / (4.0 * PI * 80.0);
        assert!((p.paths[1].gain.norm() - want).abs() < 1e-15);
        let phase = (-2.0 * PI * 80.0 / lambda).rem_euclid(2.0 * PI);
        assert!((p.paths[1].gain.arg().rem_euclid(2.0 * PI) - phase).abs() < 1e-6);
        assert!((p.paths[0].departure_az + PI / 2.0).abs() < 1e-12);
        assert!((p.paths[0].arrival_az - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn relative_azimuth_wraps() {
        let o = Point2::new(0.0, 0.0);
        assert!((relative_azimuth(PI - 0.1, o, Point2::new(-1.0, 0.0)) + 0.1).abs() < 1e-12);
        assert!((relative_azimuth(0.2, o, Point2::new(1.0, 0.0)) - 0.2).abs() < 1e-12);
        assert!((relative_azimuth(-PI + 0.1, o, Point2::new(-1.0, 0.0)) - 0.1).abs() < 1e-12);
    }
}
