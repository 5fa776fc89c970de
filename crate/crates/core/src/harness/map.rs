use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gdop::{design_matrix, gdop, Weights};
use crate::scenario::{distance, Point2, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GdopCell {
    pub x: f64,
    pub y: f64,
    /// `inf` where the geometry is singular or degenerate.
    pub gdop: f64,
}

/// GDOP of all stations over a grid covering the scenario bounds, with the
/// station nearest each grid point as reference.
pub fn gdop_map(scenario: &Scenario, step: f64) -> Result<Vec<GdopCell>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid step {step} must be positive")));
    }
    let positions: Vec<Point2> = scenario.bss.iter().map(|b| b.position).collect();
    if positions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let b = scenario.bounds;
    let nx = (b.width() / step + 1e-9).floor() as usize + 1;
    let ny = (b.height() / step + 1e-9).floor() as usize + 1;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = Point2::new(b.min_x + i as f64 * step, b.min_y + j as f64 * step);
            let reference = (0..positions.len())
                .min_by(|&a, &c| distance(positions[a], p).total_cmp(&distance(positions[c], p)))
                .unwrap_or(0);
            let value = design_matrix(&positions, reference, p)
                .and_then(|a| gdop(&a, &Weights::Identity))
                .unwrap_or(f64::INFINITY);
            cells.push(GdopCell { x: p.x, y: p.y, gdop: value });
        }
    }
    Ok(cells)
}

pub fn write_gdop_map_csv<W: Write>(cells: &[GdopCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "gdop"])?;
    for c in cells {
        w.write_record([c.x.to_string(), c.y.to_string(), c.gdop.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
