//! Planar points, vectors and axis-aligned rectangles.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ZERO: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product of two planar vectors.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    /// Rotate by +90 degrees (counterclockwise).
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, rhs: f64) -> Point {
        Point::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Closed axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Rect { x0, y0, x1, y1 }
    }

    pub fn from_center(center: Point, half_width: f64, half_height: f64) -> Self {
        Rect::new(
            center.x - half_width,
            center.y - half_height,
            center.x + half_width,
            center.y + half_height,
        )
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diag(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    /// Euclidean distance from the rectangle (as a set) to a point.
    pub fn dist_to_point(&self, p: Point) -> f64 {
        let dx = (self.x0 - p.x).max(0.0).max(p.x - self.x1);
        let dy = (self.y0 - p.y).max(0.0).max(p.y - self.y1);
        dx.hypot(dy)
    }

    /// Farthest distance from a point to the rectangle (max over corners).
    pub fn max_dist_to_point(&self, p: Point) -> f64 {
        self.corners()
            .iter()
            .map(|c| c.dist(p))
            .fold(0.0f64, f64::max)
    }

    /// Distance between this rectangle and a segment `[a, b]`, both as sets.
    pub fn dist_to_segment(&self, a: Point, b: Point) -> f64 {
        if self.segment_intersects(a, b) {
            return 0.0;
        }
        // Minimum over rect-edge/segment pairs and endpoint projections.
        let corners = self.corners();
        let mut best = f64::INFINITY;
        for i in 0..4 {
            let c0 = corners[i];
            let c1 = corners[(i + 1) % 4];
            best = best.min(segment_segment_dist(c0, c1, a, b));
        }
        best = best.min(self.dist_to_point(a));
        best = best.min(self.dist_to_point(b));
        best
    }

    pub fn segment_intersects(&self, a: Point, b: Point) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        let corners = self.corners();
        for i in 0..4 {
            if segments_intersect(corners[i], corners[(i + 1) % 4], a, b) {
                return true;
            }
        }
        false
    }

    pub fn dist_to_rect(&self, other: &Rect) -> f64 {
        let dx = (self.x0 - other.x1).max(0.0).max(other.x0 - self.x1);
        let dy = (self.y0 - other.y1).max(0.0).max(other.y0 - self.y1);
        dx.hypot(dy)
    }

    pub fn inflate(&self, factor: f64) -> Rect {
        let c = self.center();
        Rect::from_center(c, 0.5 * self.width() * factor, 0.5 * self.height() * factor)
    }
}

/// Distance from a point to a closed segment.
pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Nearest point of a closed segment to `p`.
pub fn project_to_segment(p: Point, a: Point, b: Point) -> Point {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab * t
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Proper or touching intersection of segments `[a,b]` and `[c,d]`.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| -> bool {
        orient(p, q, r) == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

/// Distance between two closed segments.
pub fn segment_segment_dist(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_point_distance() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(r.dist_to_point(Point::new(0.5, 0.5)), 0.0);
        assert_eq!(r.dist_to_point(Point::new(2.0, 0.5)), 1.0);
        let d = r.dist_to_point(Point::new(2.0, 2.0));
        assert!((d - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn segment_distances() {
        let d = segment_segment_dist(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
        );
        assert!((d - 1.0).abs() < 1e-15);
        assert_eq!(
            segment_segment_dist(
                Point::new(0.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ),
            0.0
        );
    }
}
