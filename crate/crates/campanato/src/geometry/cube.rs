//! Dyadic and general (off-grid) cubes.

use serde::{Deserialize, Serialize};

use super::point::{Point, Rect};

/// A semi-open cube from the fixed dyadic grid:
/// `[ix * 2^level, (ix+1) * 2^level) x [iy * 2^level, (iy+1) * 2^level)`.
///
/// The side length `2^level` is represented exactly; two cubes of the same
/// level are disjoint or identical by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub ix: i64,
    pub iy: i64,
}

impl DyadicCube {
    pub fn new(level: i32, ix: i64, iy: i64) -> Self {
        DyadicCube { level, ix, iy }
    }

    /// Exact side length `2^level`.
    pub fn side(&self) -> f64 {
        exp2i(self.level)
    }

    pub fn diam(&self) -> f64 {
        self.side() * std::f64::consts::SQRT_2
    }

    pub fn area(&self) -> f64 {
        let s = self.side();
        s * s
    }

    pub fn center(&self) -> Point {
        let s = self.side();
        Point::new((self.ix as f64 + 0.5) * s, (self.iy as f64 + 0.5) * s)
    }

    pub fn rect(&self) -> Rect {
        let s = self.side();
        Rect::new(
            self.ix as f64 * s,
            self.iy as f64 * s,
            (self.ix + 1) as f64 * s,
            (self.iy + 1) as f64 * s,
        )
    }

    /// Semi-open membership test.
    pub fn contains(&self, p: Point) -> bool {
        let r = self.rect();
        p.x >= r.x0 && p.x < r.x1 && p.y >= r.y0 && p.y < r.y1
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube::new(self.level + 1, self.ix.div_euclid(2), self.iy.div_euclid(2))
    }

    pub fn children(&self) -> [DyadicCube; 4] {
        let l = self.level - 1;
        let (ix, iy) = (2 * self.ix, 2 * self.iy);
        [
            DyadicCube::new(l, ix, iy),
            DyadicCube::new(l, ix + 1, iy),
            DyadicCube::new(l, ix, iy + 1),
            DyadicCube::new(l, ix + 1, iy + 1),
        ]
    }

    /// The dilation `s * Q`: same center, side `s * 2^level`. Leaves the grid.
    pub fn dilate(&self, s: f64) -> GeneralCube {
        GeneralCube::new(self.center(), s * self.side())
    }

    pub fn as_general(&self) -> GeneralCube {
        GeneralCube::new(self.center(), self.side())
    }

    /// Closures intersect (faces or corners touch, or the cubes overlap).
    /// Exact in integer arithmetic for levels within `i128` range of each other.
    pub fn touches(&self, other: &DyadicCube) -> bool {
        let lmin = self.level.min(other.level);
        let shift_a = (self.level - lmin) as u32;
        let shift_b = (other.level - lmin) as u32;
        if shift_a >= 90 || shift_b >= 90 {
            return false; // scales too disparate to touch in any covering we build
        }
        let ax0 = (self.ix as i128) << shift_a;
        let ax1 = ((self.ix + 1) as i128) << shift_a;
        let ay0 = (self.iy as i128) << shift_a;
        let ay1 = ((self.iy + 1) as i128) << shift_a;
        let bx0 = (other.ix as i128) << shift_b;
        let bx1 = ((other.ix + 1) as i128) << shift_b;
        let by0 = (other.iy as i128) << shift_b;
        let by1 = ((other.iy + 1) as i128) << shift_b;
        ax0 <= bx1 && bx0 <= ax1 && ay0 <= by1 && by0 <= ay1
    }

    /// Interiors overlap. For grid cubes this means one contains the other.
    pub fn interiors_overlap(&self, other: &DyadicCube) -> bool {
        let lmin = self.level.min(other.level);
        let shift_a = (self.level - lmin) as u32;
        let shift_b = (other.level - lmin) as u32;
        if shift_a >= 90 || shift_b >= 90 {
            return false;
        }
        let ax0 = (self.ix as i128) << shift_a;
        let ax1 = ((self.ix + 1) as i128) << shift_a;
        let ay0 = (self.iy as i128) << shift_a;
        let ay1 = ((self.iy + 1) as i128) << shift_a;
        let bx0 = (other.ix as i128) << shift_b;
        let bx1 = ((other.ix + 1) as i128) << shift_b;
        let by0 = (other.iy as i128) << shift_b;
        let by1 = ((other.iy + 1) as i128) << shift_b;
        ax0 < bx1 && bx0 < ax1 && ay0 < by1 && by0 < ay1
    }

}

/// Exact power of two for moderate exponents.
pub fn exp2i(level: i32) -> f64 {
    f64::powi(2.0, level)
}

/// A cube with arbitrary center and side (`sQ` dilations leave the dyadic grid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralCube {
    pub center: Point,
    pub side: f64,
}

impl GeneralCube {
    pub fn new(center: Point, side: f64) -> Self {
        assert!(side > 0.0, "cube side must be positive");
        GeneralCube { center, side }
    }

    pub fn rect(&self) -> Rect {
        Rect::from_center(self.center, 0.5 * self.side, 0.5 * self.side)
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn diam(&self) -> f64 {
        self.side * std::f64::consts::SQRT_2
    }

    pub fn dilate(&self, s: f64) -> GeneralCube {
        assert!(s > 0.0, "dilation factor must be positive");
        GeneralCube::new(self.center, s * self.side)
    }

    pub fn contains(&self, p: Point) -> bool {
        (p.x - self.center.x).abs() <= 0.5 * self.side
            && (p.y - self.center.y).abs() <= 0.5 * self.side
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_is_exact_power_of_two() {
        let q = DyadicCube::new(-12, 5, -3);
        assert_eq!(q.side(), 2.0f64.powi(-12));
        assert_eq!(q.rect().width(), 2.0f64.powi(-12));
    }

    #[test]
    fn dilation_examples() {
        let unit = DyadicCube::new(0, 0, 0);
        let same = unit.dilate(1.0);
        assert_eq!(same.side, 1.0);
        assert_eq!(same.center, unit.center());
        let double = unit.dilate(2.0);
        assert_eq!(double.side, 2.0);
        assert_eq!(double.center, unit.center());
        // Q' = 9/8 Q
        let q_prime = unit.dilate(9.0 / 8.0);
        assert!((q_prime.side - 1.125).abs() < 1e-15);
    }

    #[test]
    fn touching_and_overlap() {
        let a = DyadicCube::new(0, 0, 0);
        let b = DyadicCube::new(0, 1, 0);
        let c = DyadicCube::new(-1, 2, 0); // child-scale cube right of a
        assert!(a.touches(&b));
        assert!(!a.interiors_overlap(&b));
        assert!(a.touches(&c));
        assert!(!a.interiors_overlap(&c));
        let inside = DyadicCube::new(-1, 0, 0);
        assert!(a.interiors_overlap(&inside));
        let far = DyadicCube::new(0, 3, 3);
        assert!(!a.touches(&far));
    }
}
