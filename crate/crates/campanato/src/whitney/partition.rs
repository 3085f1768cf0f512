//! Smooth partition of unity subordinate to an exterior Whitney covering:
//! per-cube bumps `b_Q` with `chi_{4/5 Q} <= b_Q <= chi_{5/4 Q}`, normalized
//! by their sum.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quad::{smooth_step, smooth_step_deriv};

use super::WhitneyCovering;

/// Bump support dilation.
const OUTER: f64 = 1.25;
/// Bump plateau dilation.
const INNER: f64 = 0.8;

pub struct PartitionOfUnity {
    pub covering: Arc<WhitneyCovering>,
    /// Recorded gradient constant: `|grad psi_Q| <= c_psi / side(Q)` on the
    /// verification samples.
    pub c_psi: f64,
}

/// 1-D bump factor in normalized cube coordinates `t = |x - c| / (side/2)`:
/// 1 for `t <= 4/5`, 0 for `t >= 5/4`.
fn bump1(t: f64) -> f64 {
    smooth_step((OUTER - t) / (OUTER - INNER))
}

fn bump1_deriv(t: f64) -> f64 {
    -smooth_step_deriv((OUTER - t) / (OUTER - INNER)) / (OUTER - INNER)
}

impl PartitionOfUnity {
    /// Raw bump of cube `i` at `p`.
    pub fn bump(&self, i: u32, p: Point) -> f64 {
        let q = &self.covering.cubes[i as usize];
        let c = q.center();
        let half = 0.5 * q.side();
        bump1((p.x - c.x).abs() / half) * bump1((p.y - c.y).abs() / half)
    }

    fn bump_grad(&self, i: u32, p: Point) -> Point {
        let q = &self.covering.cubes[i as usize];
        let c = q.center();
        let half = 0.5 * q.side();
        let tx = (p.x - c.x).abs() / half;
        let ty = (p.y - c.y).abs() / half;
        let bx = bump1(tx);
        let by = bump1(ty);
        let dbx = bump1_deriv(tx) * (p.x - c.x).signum() / half;
        let dby = bump1_deriv(ty) * (p.y - c.y).signum() / half;
        Point::new(dbx * by, bx * dby)
    }

    /// Indices with nonzero bump at `p`, with the common denominator.
    pub fn active(&self, p: Point) -> (Vec<(u32, f64)>, f64) {
        let mut denom = 0.0;
        let mut active = Vec::new();
        for i in self.covering.dilated_cubes_at(p, OUTER) {
            let b = self.bump(i, p);
            if b > 0.0 {
                denom += b;
                active.push((i, b));
            }
        }
        (active, denom)
    }

    /// `psi_Q(x)`: the normalized bump. Zero outside the covered region.
    pub fn psi(&self, i: u32, p: Point) -> f64 {
        let (active, denom) = self.active(p);
        if denom <= 0.0 {
            return 0.0;
        }
        active
            .iter()
            .find(|(j, _)| *j == i)
            .map(|(_, b)| b / denom)
            .unwrap_or(0.0)
    }

    /// Sum of all normalized bumps at `p` (1 on the covered region).
    pub fn sum(&self, p: Point) -> f64 {
        let (_, denom) = self.active(p);
        if denom > 0.0 {
            1.0
        } else {
            0.0
        }
    }

    pub fn denominator(&self, p: Point) -> f64 {
        self.active(p).1
    }

    /// `grad psi_Q(x)` by the quotient rule over the active bumps.
    pub fn psi_grad(&self, i: u32, p: Point) -> Point {
        let (active, denom) = self.active(p);
        if denom <= 0.0 {
            return Point::ZERO;
        }
        let mut grad_denom = Point::ZERO;
        let mut b_i = 0.0;
        for &(j, b) in &active {
            grad_denom = grad_denom + self.bump_grad(j, p);
            if j == i {
                b_i = b;
            }
        }
        if b_i == 0.0 && !self.covering.dilated_cubes_at(p, OUTER).contains(&i) {
            return Point::ZERO;
        }
        let grad_b_i = self.bump_grad(i, p);
        (grad_b_i * denom - grad_denom * b_i) * (1.0 / (denom * denom))
    }

    /// Evaluate `sum_i psi_i(p) * values[reflection(i)]`-style combinations:
    /// returns the active `(index, psi)` pairs.
    pub fn psis_at(&self, p: Point) -> Vec<(u32, f64)> {
        let (active, denom) = self.active(p);
        if denom <= 0.0 {
            return Vec::new();
        }
        active.into_iter().map(|(i, b)| (i, b / denom)).collect()
    }
}

/// Build the partition and verify the normalization on deterministic
/// samples inside covered cubes.
pub fn build_partition(covering: &Arc<WhitneyCovering>) -> Result<PartitionOfUnity> {
    if covering.is_empty() {
        return Err(Error::Geometry("empty covering".into()));
    }
    let pu = PartitionOfUnity {
        covering: covering.clone(),
        c_psi: 0.0,
    };
    // Denominator must stay away from zero well inside covered cubes.
    let mut c_psi = 0.0f64;
    for (idx, q) in covering.cubes.iter().enumerate().step_by(5) {
        let c = q.center();
        let h = q.side();
        for &(dx, dy) in &[
            (0.0, 0.0),
            (0.45, 0.0),
            (-0.45, 0.22),
            (0.31, -0.44),
            (-0.18, -0.37),
        ] {
            let p = Point::new(c.x + dx * h, c.y + dy * h);
            let denom = pu.denominator(p);
            if denom < 1e-12 {
                return Err(Error::PartitionGap { x: p.x, y: p.y });
            }
            let g = pu.psi_grad(idx as u32, p);
            c_psi = c_psi.max(g.norm() * h);
        }
    }
    Ok(PartitionOfUnity {
        covering: covering.clone(),
        c_psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::whitney::{build_whitney, Side};

    fn exterior_partition() -> PartitionOfUnity {
        let d = Arc::new(Domain::unit_square());
        let ext = Arc::new(build_whitney(&d, Side::Exterior, -6).unwrap());
        build_partition(&ext).unwrap()
    }

    #[test]
    fn partition_sums_to_one() {
        let pu = exterior_partition();
        let cov = pu.covering.clone();
        // Deterministic samples inside covered cubes.
        for (i, q) in cov.cubes.iter().enumerate().step_by(3) {
            let c = q.center();
            let h = q.side();
            for &(dx, dy) in &[(0.0, 0.0), (0.4, 0.3), (-0.45, -0.1)] {
                let p = Point::new(c.x + dx * h, c.y + dy * h);
                let psis = pu.psis_at(p);
                let total: f64 = psis.iter().map(|(_, v)| v).sum();
                assert!((total - 1.0).abs() < 1e-12, "sum {total} at cube {i}");
            }
        }
    }

    #[test]
    fn bump_support_bounds() {
        let pu = exterior_partition();
        let q = pu.covering.cubes[0];
        let c = q.center();
        let h = q.side();
        // psi = 1-ish at center when isolated; 0 outside 5/4 Q.
        assert!(pu.bump(0, c) == 1.0);
        let outside = Point::new(c.x + 0.63 * h, c.y);
        assert_eq!(pu.bump(0, outside), 0.0);
        let inside_plateau = Point::new(c.x + 0.39 * h, c.y + 0.39 * h);
        assert_eq!(pu.bump(0, inside_plateau), 1.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pu = exterior_partition();
        let q = pu.covering.cubes[10];
        let c = q.center();
        let h = q.side();
        let p = Point::new(c.x + 0.47 * h, c.y - 0.21 * h);
        let g = pu.psi_grad(10, p);
        let step = h * 1e-6;
        let fd = Point::new(
            (pu.psi(10, Point::new(p.x + step, p.y)) - pu.psi(10, Point::new(p.x - step, p.y)))
                / (2.0 * step),
            (pu.psi(10, Point::new(p.x, p.y + step)) - pu.psi(10, Point::new(p.x, p.y - step)))
                / (2.0 * step),
        );
        assert!((g - fd).norm() < 1e-4 * (1.0 + g.norm()), "{g:?} vs {fd:?}");
    }
}
