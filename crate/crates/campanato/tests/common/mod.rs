//! Shared oracles for the integration suites. These compute reference
//! values along algebraic routes independent of the library's quadtree and
//! boundary-integral paths.

#![allow(dead_code)]

use campanato::czkernel::Kernel;
use campanato::geometry::{Domain, Point};

/// Ray length from `y` to the boundary in direction `theta`, by dense
/// marching plus bisection; works for any star-shaped-from-`y` region.
pub fn ray_to_boundary(d: &Domain, y: Point, theta: f64, hi: f64) -> f64 {
    let dir = Point::new(theta.cos(), theta.sin());
    // March outward to bracket the first exit.
    let steps = 4096;
    let mut bracket = None;
    for i in 1..=steps {
        let t = hi * i as f64 / steps as f64;
        if !d.contains(y + dir * t) {
            bracket = Some((hi * (i - 1) as f64 / steps as f64, t));
            break;
        }
    }
    let (mut a, mut b) = bracket.unwrap_or((0.0, hi));
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if d.contains(y + dir * m) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Radial-logarithm oracle: for a region star-shaped about the interior
/// point `y`, the principal value
/// `T chi_D(y) = int_0^{2pi} Omega(-theta) ln R(theta) dtheta`
/// (the `ln r` term integrates to zero against the zero-mean symbol).
/// `cuts` lists angles of boundary corners for piecewise integration.
pub fn radial_log_oracle(d: &Domain, k: &Kernel, y: Point, n: usize, cuts: &[f64]) -> f64 {
    let reach = d.bounding_box().diag();
    let mut angles: Vec<f64> = cuts.to_vec();
    angles.sort_by(f64::total_cmp);
    let tau = 2.0 * std::f64::consts::PI;
    let mut total = 0.0;
    let m = angles.len().max(1);
    for piece in 0..m {
        let a = if angles.is_empty() { 0.0 } else { angles[piece] };
        let b = if angles.is_empty() {
            tau
        } else if piece + 1 < m {
            angles[piece + 1]
        } else {
            angles[0] + tau
        };
        // Composite Simpson per smooth piece.
        let steps = n.max(8) & !1;
        let h = (b - a) / steps as f64;
        let mut acc = 0.0;
        for i in 0..=steps {
            let t = a + h * i as f64;
            let r = ray_to_boundary(d, y, t, reach);
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            // Direction from y to x is theta; the kernel argument y - x
            // points the other way.
            acc += w * k.omega(t + std::f64::consts::PI) * r.ln();
        }
        total += acc * h / 3.0;
    }
    total
}

/// Corner angles of a polygon as seen from `y` (cut list for the oracle).
pub fn polygon_corner_angles(d: &Domain, y: Point) -> Vec<f64> {
    match d {
        Domain::Polygon(p) => p
            .vertices
            .iter()
            .map(|v| {
                let mut t = (*v - y).angle();
                if t < 0.0 {
                    t += 2.0 * std::f64::consts::PI;
                }
                t
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Rotation-paired Riemann sum for second-harmonic even kernels: grid
/// points are grouped in quadruples `{v, Rv, R^2v, R^3v}` about `y` (the
/// kernel flips sign under the quarter turn), so fully-interior quadruples
/// cancel exactly and only boundary-crossing ones contribute. Boundary
/// cells are refined with an `nsub x nsub` membership mask.
pub fn riemann_pv_oracle(d: &Domain, k: &Kernel, y: Point, h: f64, nsub: usize) -> f64 {
    let bbox = d.bounding_box();
    let reach = bbox
        .corners()
        .iter()
        .map(|c| c.dist(y))
        .fold(0.0f64, f64::max)
        + 2.0 * h;
    let n = (reach / h).ceil() as i64;
    let mut total = 0.0;
    // One quadrant of offsets; quarter-turn partners handled together.
    for j in 0..n {
        for i in 0..n {
            let v = Point::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let quad = [v, v.perp(), v.perp().perp(), v.perp().perp().perp()];
            let mut ins = [false; 4];
            let mut all = true;
            let mut any = false;
            for (t, off) in quad.iter().enumerate() {
                ins[t] = d.contains(y + *off);
                all &= ins[t];
                any |= ins[t];
            }
            if all || !any {
                continue; // exact cancellation or fully outside
            }
            for (t, off) in quad.iter().enumerate() {
                let p = y + *off;
                // Near-boundary cell: refine by membership subsampling.
                let near = d.dist_to_boundary_fast(p) < h;
                if near {
                    let mut frac = 0.0;
                    let sub = h / nsub as f64;
                    for sj in 0..nsub {
                        for si in 0..nsub {
                            let q = Point::new(
                                p.x - 0.5 * h + (si as f64 + 0.5) * sub,
                                p.y - 0.5 * h + (sj as f64 + 0.5) * sub,
                            );
                            if d.contains(q) {
                                frac += 1.0;
                            }
                        }
                    }
                    frac /= (nsub * nsub) as f64;
                    total += k.eval_unchecked(y - p) * h * h * frac;
                } else if ins[t] {
                    total += k.eval_unchecked(y - p) * h * h;
                }
            }
        }
    }
    total
}

/// Brute-force winding-number membership oracle for polygons.
pub fn winding_number_inside(vertices: &[Point], p: Point) -> bool {
    let mut angle = 0.0f64;
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i] - p;
        let b = vertices[(i + 1) % n] - p;
        angle += a.cross(b).atan2(a.dot(b));
    }
    angle.abs() > std::f64::consts::PI
}
