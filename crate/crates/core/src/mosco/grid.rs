use crate::error::{Error, Result};
use crate::mesh::Point;

pub const DEFAULT_CELLS: usize = 128;

/// Midpoint sample lattice of the hold-all ball `D = B(0, R)`: a uniform
/// `cells x cells` grid on `[-R, R]²` clipped to `D`. Each kept cell carries
/// the exact area of its intersection with `D`, so the weights sum to `πR²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DGrid {
    radius: f64,
    cells: usize,
    points: Vec<Point>,
    weights: Vec<f64>,
}

/// `∫_0^x sqrt(R² - s²) ds`.
fn half_chord_primitive(x: f64, r: f64) -> f64 {
    let x = x.clamp(-r, r);
    0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
}

/// Exact area of `[x0, x1] x [y0, y1] ∩ B(0, r)`.
pub fn cell_disk_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    let a = x0.max(-r);
    let b = x1.min(r);
    if a >= b {
        return 0.0;
    }
    let mut breaks = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let c = (r * r - y * y).sqrt();
            for x in [-c, c] {
                if x > a && x < b {
                    breaks.push(x);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let chord = |x: f64| (r * r - x * x).max(0.0).sqrt();
    let mut area = 0.0;
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q <= p {
            continue;
        }
        let s = chord(0.5 * (p + q));
        let (hi_const, lo_const) = (y1 < s, y0 > -s);
        if y1.min(s) - y0.max(-s) <= 0.0 {
            continue;
        }
        let int_s = half_chord_primitive(q, r) - half_chord_primitive(p, r);
        let int_hi = if hi_const { y1 * (q - p) } else { int_s };
        let int_lo = if lo_const { y0 * (q - p) } else { -int_s };
        area += int_hi - int_lo;
    }
    area
}

impl DGrid {
    pub fn new(radius: f64, cells: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("hold-all radius must be positive, got {radius}")));
        }
        if cells == 0 {
            return Err(Error::invalid("grid needs at least one cell per side"));
        }
        let h = 2.0 * radius / cells as f64;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for j in 0..cells {
            let y0 = -radius + j as f64 * h;
            for i in 0..cells {
                let x0 = -radius + i as f64 * h;
                let w = cell_disk_area(x0, x0 + h, y0, y0 + h, radius);
                if w > 0.0 {
                    points.push([x0 + 0.5 * h, y0 + 0.5 * h]);
                    weights.push(w);
                }
            }
        }
        Ok(DGrid {
            radius,
            cells,
            points,
            weights,
        })
    }

    pub fn with_default_density(radius: f64) -> Result<Self> {
        Self::new(radius, DEFAULT_CELLS)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_disk_area() {
        for (r, n) in [(1.0, 128), (1.5, 37), (0.3, 5)] {
            let g = DGrid::new(r, n).unwrap();
            assert!((g.total_weight() - PI * r * r).abs() <= 1e-10, "{r} {n}");
            assert!(g.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn interior_cell_has_full_area() {
        assert!((cell_disk_area(0.0, 0.1, 0.0, 0.1, 1.0) - 0.01).abs() < 1e-16);
        assert_eq!(cell_disk_area(0.9, 1.0, 0.9, 1.0, 1.0), 0.0);
    }

    #[test]
    fn quarter_disk_by_one_cell() {
        let a = cell_disk_area(0.0, 1.0, 0.0, 1.0, 1.0);
        assert!((a - PI / 4.0).abs() < 1e-15);
        let a = cell_disk_area(-1.0, 0.0, -1.0, 1.0, 1.0);
        assert!((a - PI / 2.0).abs() < 1e-15);
    }
}
