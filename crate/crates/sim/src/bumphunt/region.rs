use std::f64::consts::{PI, TAU};

use tohm_core::rft::special::normal_cdf;
use tohm_core::{Error, Lattice, Result};

/// Search region Θ in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disc { cx: f64, cy: f64, radius: f64 },
}

/// Relative slack for boundary points, so grid points exactly on a disc
/// edge are kept.
const EDGE_TOL: f64 = 1e-12;

impl Region {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::Rectangle { x0, x1, y0, y1 } => [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1,
            Region::Disc { cx, cy, radius } => cx.is_finite() && cy.is_finite() && radius.is_finite() && radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("degenerate region {self:?}")))
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Region::Rectangle { x0, x1, y0, y1 } => {
                let (sx, sy) = (EDGE_TOL * (x1 - x0), EDGE_TOL * (y1 - y0));
                p[0] >= x0 - sx && p[0] <= x1 + sx && p[1] >= y0 - sy && p[1] <= y1 + sy
            }
            Region::Disc { cx, cy, radius } => {
                let d2 = (p[0] - cx).powi(2) + (p[1] - cy).powi(2);
                d2 <= radius * radius * (1.0 + EDGE_TOL)
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Rectangle { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            Region::Disc { radius, .. } => PI * radius * radius,
        }
    }

    pub fn centroid(&self) -> [f64; 2] {
        match *self {
            Region::Rectangle { x0, x1, y0, y1 } => [(x0 + x1) / 2.0, (y0 + y1) / 2.0],
            Region::Disc { cx, cy, .. } => [cx, cy],
        }
    }

    /// Axis-aligned bounding box `[x0, x1, y0, y1]`.
    pub fn bounds(&self) -> [f64; 4] {
        match *self {
            Region::Rectangle { x0, x1, y0, y1 } => [x0, x1, y0, y1],
            Region::Disc { cx, cy, radius } => [cx - radius, cx + radius, cy - radius, cy + radius],
        }
    }

    /// Square grid of the given spacing covering the region, masked to it.
    /// Rectangles start at their lower-left corner; discs are centred on
    /// their centre.
    pub fn lattice(&self, spacing: f64) -> Result<Lattice> {
        self.validate()?;
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        let axis = |lo: f64, n: usize| (0..n).map(|i| lo + i as f64 * spacing).collect::<Vec<f64>>();
        match *self {
            Region::Rectangle { x0, x1, y0, y1 } => {
                let nx = ((x1 - x0) / spacing * (1.0 + EDGE_TOL)).floor() as usize + 1;
                let ny = ((y1 - y0) / spacing * (1.0 + EDGE_TOL)).floor() as usize + 1;
                Lattice::full(vec![axis(x0, nx), axis(y0, ny)])
            }
            Region::Disc { cx, cy, radius } => {
                let k = (radius / spacing * (1.0 + EDGE_TOL)).floor() as usize;
                let n = 2 * k + 1;
                let half = k as f64 * spacing;
                Lattice::with_predicate(vec![axis(cx - half, n), axis(cy - half, n)], |p| self.contains([p[0], p[1]]))
            }
        }
    }

    /// k_θ: mass of N(θ, ν²I) inside the region.
    ///
    /// Rectangles factor into one-dimensional normal probabilities. For a
    /// disc and θ inside it the mass is the angular average of
    /// 1 − exp(−r(φ)²/(2ν²)), r(φ) the distance from θ to the edge in
    /// direction φ; the periodic integrand is summed by the trapezoid rule,
    /// doubling the node count until successive values agree to 1e-12.
    pub fn gaussian_mass(&self, theta: [f64; 2], nu: f64) -> f64 {
        match *self {
            Region::Rectangle { x0, x1, y0, y1 } => {
                let px = normal_cdf((x1 - theta[0]) / nu) - normal_cdf((x0 - theta[0]) / nu);
                let py = normal_cdf((y1 - theta[1]) / nu) - normal_cdf((y0 - theta[1]) / nu);
                px * py
            }
            Region::Disc { cx, cy, radius } => {
                let (px, py) = (theta[0] - cx, theta[1] - cy);
                let slack = (radius * radius - px * px - py * py).max(0.0);
                let f = |phi: f64| {
                    let b = px * phi.cos() + py * phi.sin();
                    let r = -b + (b * b + slack).sqrt();
                    -(-(r * r) / (2.0 * nu * nu)).exp_m1()
                };
                let mut n = 64usize;
                let mut sum: f64 = (0..n).map(|i| f(TAU * i as f64 / n as f64)).sum();
                let mut value = sum / n as f64;
                while n < (1 << 22) {
                    // refine on the midpoints
                    sum += (0..n).map(|i| f(TAU * (i as f64 + 0.5) / n as f64)).sum::<f64>();
                    n *= 2;
                    let next = sum / n as f64;
                    let done = (next - value).abs() <= 1e-12 * next.abs();
                    value = next;
                    if done {
                        break;
                    }
                }
                value
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_of_radius_30_has_2821_points() {
        let d = Region::Disc { cx: 195.0, cy: 28.0, radius: 30.0 };
        let l = d.lattice(1.0).unwrap();
        assert_eq!(l.len(), 2821);
        assert_eq!(l.shape(), &[61, 61]);
    }

    #[test]
    fn rectangle_grid_includes_far_edge() {
        let r = Region::Rectangle { x0: 0.0, x1: 6.0, y0: 0.0, y1: 3.0 };
        let l = r.lattice(0.25).unwrap();
        assert_eq!(l.shape(), &[25, 13]);
        assert!(!l.is_masked());
    }

    #[test]
    fn gaussian_mass_limits() {
        let d = Region::Disc { cx: 0.0, cy: 0.0, radius: 10.0 };
        // centred: 1 − exp(−R²/(2ν²))
        let expect = 1.0 - (-(100.0f64) / (2.0 * 9.0)).exp();
        assert!((d.gaussian_mass([0.0, 0.0], 3.0) - expect).abs() < 1e-14);
        // deep inside with small ν: essentially 1
        assert!((d.gaussian_mass([3.0, -2.0], 0.5) - 1.0).abs() < 1e-12);
        // on the edge the boundary is locally a line: about one half
        assert!((d.gaussian_mass([10.0, 0.0], 0.01) - 0.5).abs() < 1e-3);
        let r = Region::Rectangle { x0: 0.0, x1: 4.0, y0: 0.0, y1: 4.0 };
        assert!((r.gaussian_mass([0.0, 0.0], 0.5) - 0.25).abs() < 1e-8);
        assert!((r.gaussian_mass([2.0, 2.0], 0.5) - (1.0 - 2.0 * normal_cdf(-4.0f64)).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn disc_mass_matches_grid_quadrature() {
        let d = Region::Disc { cx: 1.0, cy: 2.0, radius: 1.5 };
        let (theta, nu) = ([1.9, 2.5], 0.6);
        let h = 0.002;
        let mut acc = 0.0;
        let mut x = -0.5 + h / 2.0;
        while x < 2.5 {
            let mut y = 0.5 + h / 2.0;
            while y < 3.5 {
                if d.contains([x, y]) {
                    let q = ((x - theta[0]).powi(2) + (y - theta[1]).powi(2)) / (nu * nu);
                    acc += (-0.5 * q).exp() / (TAU * nu * nu) * h * h;
                }
                y += h;
            }
            x += h;
        }
        assert!((d.gaussian_mass(theta, nu) - acc).abs() < 1e-4, "{} vs {acc}", d.gaussian_mass(theta, nu));
    }
}
