//! The composed pipelines: rasterized `(T chi_D) chi_D` fields, the T1
//! condition check under the smoothed modulus, Bloch decay profiles along
//! the inward normal, the restricted operator, and the necessity
//! demonstration via the radial extremal function.

use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

use crate::czkernel::{grad_tchi_boundary, pv_tchi, Kernel, PvParams, RHO_FLOOR};
use crate::error::{Error, Result};
use crate::extension::cube_mean;
use crate::geometry::{Domain, GeneralCube, Point, Rect, ScalarField};
use crate::moduli::{least_squares_slope, Modulus};
use crate::quadtree::{integrate_region, FnRegion};
use crate::seminorm::{campanato_seminorm, CubeSampler, OscillationReport};
use crate::whitney::{build_whitney, Side};

/// The extremal field `phi_tau = phi(. - tau)` with its radial gradient.
pub fn phi_field(m: &Modulus, tau: Point, support: Rect) -> ScalarField {
    let m1 = m.clone();
    let m2 = m.clone();
    ScalarField::new(support, move |p| m1.extremal_phi(p - tau))
        .with_gradient(move |p| m2.extremal_phi_gradient(p - tau))
}

/// Masked rasterization of `(T chi_D) chi_D`: principal values on a
/// `grid_n x grid_n` lattice restricted to the domain (points closer to the
/// boundary than `2^-10 diam` are collar-masked), bilinear interpolation in
/// between, zero outside, gradient by the boundary-integral formula.
pub fn tchi_field(d: &Arc<Domain>, k: &Kernel, grid_n: usize, tol: f64) -> Result<ScalarField> {
    if grid_n < 64 {
        return Err(Error::Domain(format!("grid_n must be >= 64, got {grid_n}")));
    }
    let bbox = d.bounding_box().inflate(1.02);
    let collar = d.diameter() * 2.0f64.powi(-10);
    let params = PvParams::with_tol(tol);
    let nodes: Vec<(usize, Point)> = (0..grid_n * grid_n)
        .map(|idx| {
            let (i, j) = (idx % grid_n, idx / grid_n);
            (
                idx,
                Point::new(
                    bbox.x0 + bbox.width() * i as f64 / (grid_n - 1) as f64,
                    bbox.y0 + bbox.height() * j as f64 / (grid_n - 1) as f64,
                ),
            )
        })
        .collect();
    let computed: Vec<(usize, std::result::Result<f64, Error>)> = nodes
        .par_iter()
        .map(|&(idx, p)| {
            if d.contains(p) && d.dist_to_boundary_fast(p) >= collar {
                (idx, pv_tchi(d, k, p, &params))
            } else {
                (idx, Ok(f64::NAN))
            }
        })
        .collect();
    let mut values = vec![f64::NAN; grid_n * grid_n];
    let mut failures = Vec::new();
    for (idx, r) in computed {
        match r {
            Ok(v) => values[idx] = v,
            Err(e) => failures.push((idx, e)),
        }
    }
    if !failures.is_empty() {
        let (_, first) = failures.swap_remove(0);
        return Err(match first {
            Error::Quadrature {
                context: _,
                achieved,
                error_bound,
            } => Error::Quadrature {
                context: format!("tchi_field: {} grid points failed", failures.len() + 1),
                achieved,
                error_bound,
            },
            other => other,
        });
    }
    let dd = d.clone();
    let raw = ScalarField::bilinear(bbox, grid_n, grid_n, values.clone());
    let values = Arc::new(values);
    let field = ScalarField::new(bbox, move |p| {
        if !dd.contains(p) {
            return 0.0;
        }
        let v = raw.eval(p);
        if v.is_finite() {
            return v;
        }
        // Collar fallback: nearest finite lattice value.
        let fx = ((p.x - bbox.x0) / bbox.width() * (grid_n - 1) as f64)
            .clamp(0.0, (grid_n - 1) as f64);
        let fy = ((p.y - bbox.y0) / bbox.height() * (grid_n - 1) as f64)
            .clamp(0.0, (grid_n - 1) as f64);
        let (ix, iy) = (fx.round() as i64, fy.round() as i64);
        for ring in 0..8i64 {
            let mut best = f64::NAN;
            let mut best_d = f64::INFINITY;
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs().max(dy.abs()) != ring {
                        continue;
                    }
                    let (gx, gy) = (ix + dx, iy + dy);
                    if gx < 0 || gy < 0 || gx >= grid_n as i64 || gy >= grid_n as i64 {
                        continue;
                    }
                    let v = values[gy as usize * grid_n + gx as usize];
                    if v.is_finite() {
                        let dist = ((fx - gx as f64).powi(2) + (fy - gy as f64).powi(2)).sqrt();
                        if dist < best_d {
                            best_d = dist;
                            best = v;
                        }
                    }
                }
            }
            if best.is_finite() {
                return best;
            }
        }
        0.0
    });
    let dd = d.clone();
    let kk = k.clone();
    Ok(field.with_gradient(move |p| {
        if dd.contains(p) && dd.dist_to_boundary_fast(p) >= RHO_FLOOR {
            grad_tchi_boundary(&dd, &kk, p, 1).unwrap_or(Point::ZERO)
        } else {
            Point::ZERO
        }
    }))
}

/// One row of a Bloch decay profile.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub delta: f64,
    pub grad_norm: f64,
    /// `|grad T chi_D(y_delta)| * delta / w(delta)`.
    pub ratio: f64,
}

/// Gradient decay along the inward normal from the domain's tangency
/// anchor: `y_delta = anchor + delta * inward`. For the graph-perturbed
/// disk the anchor is the origin (the graph tangency point).
pub fn bloch_profile(
    d: &Arc<Domain>,
    k: &Kernel,
    m: &Modulus,
    deltas: &[f64],
    refinement: u32,
) -> Result<Vec<ProfileRow>> {
    if !k.even {
        return Err(Error::Domain("bloch profile requires an even kernel".into()));
    }
    let (anchor, inward) = profile_anchor(d);
    let mut rows = Vec::new();
    for &delta in deltas {
        let y = anchor + inward * delta;
        if !d.contains(y) || d.dist_to_boundary_fast(y) < RHO_FLOOR {
            continue; // below the collar floor: skipped with notice
        }
        let g = grad_tchi_boundary(d, k, y, refinement)?;
        let ratio = g.norm() * delta / m.eval_clamped(delta);
        rows.push(ProfileRow {
            delta,
            grad_norm: g.norm(),
            ratio,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(rows)
}

/// The profile anchor point and inward normal per domain variant.
pub fn profile_anchor(d: &Domain) -> (Point, Point) {
    match d {
        Domain::GraphDisk(_) => (Point::ZERO, Point::new(0.0, 1.0)),
        Domain::Ball(b) => (
            Point::new(b.center.x, b.center.y - b.radius),
            Point::new(0.0, 1.0),
        ),
        Domain::Polygon(p) => {
            // Midpoint of the longest edge.
            let n = p.vertices.len();
            let mut best = 0usize;
            let mut best_len = 0.0;
            for i in 0..n {
                let len = p.vertices[i].dist(p.vertices[(i + 1) % n]);
                if len > best_len {
                    best_len = len;
                    best = i;
                }
            }
            let a = p.vertices[best];
            let b = p.vertices[(best + 1) % n];
            let mid = (a + b) * 0.5;
            let inward = (b - a).normalized().perp();
            (mid, inward)
        }
    }
}

/// Configuration of the T1 condition check; every threshold is pinned here.
#[derive(Debug, Clone, Serialize)]
pub struct T1Config {
    pub grid_n: usize,
    pub tol: f64,
    pub seed: u64,
    /// Verdict threshold for the sup oscillation ratio.
    pub sup_threshold: f64,
    /// Verdict floor for the fine-scale trend slope.
    pub trend_floor: f64,
    /// Sup ratios below this are treated as degenerate zeros.
    pub degenerate_floor: f64,
    pub min_level: i32,
    pub sample_n: usize,
    /// Cubes below this side measure interpolation, not the field; the
    /// sampler floor is fixed independently of `grid_n` so refinement
    /// studies compare like with like.
    pub min_cube_side: f64,
    pub n_random_cubes: usize,
    pub max_cubes: usize,
    pub profile_deltas: usize,
}

impl Default for T1Config {
    fn default() -> Self {
        T1Config {
            grid_n: 128,
            tol: 5e-4,
            seed: 0xC0FFEE,
            sup_threshold: 10.0,
            trend_floor: -0.1,
            degenerate_floor: 1e-6,
            min_level: -8,
            sample_n: 32,
            min_cube_side: 0.03125,
            n_random_cubes: 1000,
            max_cubes: 20_000,
            profile_deltas: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct T1Report {
    pub domain: String,
    pub kernel: String,
    pub modulus: Modulus,
    pub tilde: Modulus,
    pub oscillation: OscillationReport,
    pub profile: Vec<ProfileRow>,
    pub sup_ratio: f64,
    pub trend_slope: Option<f64>,
    pub verdict_pass: bool,
    pub config: T1Config,
}

/// Pure aggregation from the sub-report: the verdict is
/// `(sup <= threshold) and (trend >= floor or degenerate)`.
pub fn aggregate_verdict(
    osc: &OscillationReport,
    config: &T1Config,
) -> (f64, Option<f64>, bool) {
    let sup = osc.sup_ratio;
    let trend = osc.fine_scale_trend(config.degenerate_floor * 1e-3);
    let degenerate = sup <= config.degenerate_floor;
    let trend_ok = degenerate || trend.map(|s| s >= config.trend_floor).unwrap_or(false);
    (sup, trend, sup <= config.sup_threshold && trend_ok)
}

/// The T1 condition check: estimate the interior Campanato seminorm of
/// `(T chi_D) chi_D` under the smoothed modulus `w~` and attach a Bloch
/// profile. The desk-scale verdict is a bounded sup ratio with no upward
/// trend at the finest sampled scales.
pub fn t1_check(d: &Arc<Domain>, k: &Kernel, m: &Modulus, config: &T1Config) -> Result<T1Report> {
    let tilde = m.tilde()?;
    let field = tchi_field(d, k, config.grid_n, config.tol)?;
    let covering = build_whitney(d, Side::Interior, config.min_level)?;
    let sampler = CubeSampler::domain_anchored(
        d,
        &covering,
        config.seed,
        config.n_random_cubes,
        config.max_cubes,
    );
    let sampler = CubeSampler {
        cubes: sampler
            .cubes
            .into_iter()
            .filter(|c| c.side >= config.min_cube_side)
            .collect(),
        descriptor: format!("{} side>={}", sampler.descriptor, config.min_cube_side),
    };
    let oscillation =
        campanato_seminorm(&field, Some(d), &tilde, 1, &sampler, true, config.sample_n)?;
    let deltas: Vec<f64> = log_spaced(1e-4, 1e-1, config.profile_deltas);
    let profile = bloch_profile(d, k, m, &deltas, 1).unwrap_or_default();
    let (sup_ratio, trend_slope, verdict_pass) = aggregate_verdict(&oscillation, config);
    Ok(T1Report {
        domain: format!("{:?}", d.descriptor()),
        kernel: k.name.clone(),
        modulus: m.clone(),
        tilde,
        oscillation,
        profile,
        sup_ratio,
        trend_slope,
        verdict_pass,
        config: config.clone(),
    })
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The restricted operator applied to a field at an interior point:
/// `T_D f(y) = f(y) T chi_D(y) + int_D (f(x) - f(y)) K(y - x) dx`.
/// The oscillation integral is proper when `f` has Dini-type continuity at
/// `y`; rougher fields are rejected.
pub fn restricted_apply(
    d: &Arc<Domain>,
    k: &Kernel,
    f: &ScalarField,
    y: Point,
    tol: f64,
) -> Result<f64> {
    if !d.contains(y) {
        return Err(Error::Domain("restricted_apply probe must be interior".into()));
    }
    let rho = d.dist_to_boundary_fast(y);
    if rho < RHO_FLOOR {
        return Err(Error::Domain("probe too close to the boundary".into()));
    }
    let fy = f.eval(y);
    let constant_part = fy * pv_tchi(d, k, y, &PvParams::with_tol(tol * 0.25))?;

    // Pointwise roughness probe: oscillation on shrinking circles.
    let mut osc_pts = Vec::new();
    for j in 0..24 {
        let s = rho * 0.5 * 2.0f64.powi(-j);
        if s < 1e-12 {
            break;
        }
        let mut osc = 0.0f64;
        for a in 0..16 {
            let t = 2.0 * std::f64::consts::PI * a as f64 / 16.0;
            osc = osc.max((f.eval(y + Point::new(t.cos(), t.sin()) * s) - fy).abs());
        }
        if osc > 0.0 {
            osc_pts.push((s.ln(), osc.ln()));
        }
    }
    let omega_max = (0..1024)
        .map(|i| k.omega(2.0 * std::f64::consts::PI * i as f64 / 1024.0).abs())
        .fold(0.0f64, f64::max);
    let (eps, remainder) = if osc_pts.len() < 4 {
        // Locally constant field: no singular contribution at all.
        (rho * 0.25, 0.0)
    } else {
        let beta = least_squares_slope(&osc_pts);
        if beta < 0.05 {
            return Err(Error::Roughness(format!(
                "field oscillation decays like s^{beta:.3} at the probe; the \
                 oscillation integral does not converge"
            )));
        }
        // osc(s) ~ c s^beta; the remainder over B_eps is bounded by
        // 2 pi omega_max c eps^beta / beta.
        let c = osc_pts
            .iter()
            .map(|&(ls, lo)| (lo - beta * ls).exp())
            .fold(0.0f64, f64::max);
        let mut eps = rho * 0.25;
        let mut rem = 2.0 * std::f64::consts::PI * omega_max * c * eps.powf(beta) / beta;
        while rem > tol * 0.25 && eps > 1e-11 {
            eps *= 0.5;
            rem = 2.0 * std::f64::consts::PI * omega_max * c * eps.powf(beta) / beta;
        }
        (eps, rem)
    };

    let dm = d.sd_trust_margin();
    let region = FnRegion {
        sd: |p: Point| d.signed_distance_fast(p).max(eps - (p - y).norm()),
        contains: |p: Point| d.contains(p) && (p - y).norm() > eps,
        margin: move |p: Point| {
            if eps - (p - y).norm() >= d.signed_distance_fast(p) {
                0.0
            } else {
                dm
            }
        },
    };
    let g = |p: Point| (f.eval(p) - fy) * k.eval_unchecked(y - p);
    let res = integrate_region(
        &region,
        &g,
        d.bounding_box(),
        (tol * 0.5 - remainder).max(tol * 0.25),
        4_000_000,
        "restricted_apply oscillation integral",
    )?;
    Ok(constant_part + res.value)
}

/// One row of the necessity demonstration table.
#[derive(Debug, Clone, Serialize)]
pub struct NecessityRow {
    pub side: f64,
    /// `(phi_tau chi_D)_Q` over the cube centered at tau.
    pub phi_mean: f64,
    /// `int_side^1 w(t)/t dt`.
    pub dini_bound: f64,
    /// `phi_mean / dini_bound`.
    pub mean_ratio: f64,
    /// `(1/|Q|) int_Q |T chi_D - b_Q| / w~(side)`.
    pub tchi_oscillation_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessityTable {
    pub tau: Point,
    pub rows: Vec<NecessityRow>,
}

/// The necessity mechanism at desk scale: the extremal means obey the
/// lower bound `int_l^1 w/t` up to constants, so a bounded restricted
/// operator forces the smoothed-modulus oscillation of `T chi_D` seen in
/// the last column.
pub fn necessity_demo(
    d: &Arc<Domain>,
    m: &Modulus,
    tau: Point,
    scales: &[f64],
    tchi: &ScalarField,
    sample_n: usize,
) -> Result<NecessityTable> {
    let tilde = m.tilde()?;
    let support = d.bounding_box().inflate(1.5);
    let phi = phi_field(m, tau, support);
    let mut rows = Vec::new();
    for &side in scales {
        let cube = GeneralCube::new(tau, side);
        if !d.cube_inside(&cube, 2.0) {
            continue;
        }
        let phi_mean = cube_mean(&phi, &cube, 32)?;
        let dini_bound = m.dini_integral(side.clamp(1e-12, 1.0 - 1e-12))?;
        let sampler = CubeSampler::explicit(vec![cube]);
        let osc = campanato_seminorm(tchi, Some(d), &tilde, 1, &sampler, true, sample_n)?;
        rows.push(NecessityRow {
            side,
            phi_mean,
            dini_bound,
            mean_ratio: phi_mean / dini_bound.max(1e-300),
            tchi_oscillation_ratio: osc.sup_ratio,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(NecessityTable { tau, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spacing() {
        let v = log_spaced(1e-4, 1e-1, 4);
        assert_eq!(v.len(), 4);
        assert!((v[0] - 1e-4).abs() < 1e-12);
        assert!((v[3] - 1e-1).abs() < 1e-12);
        assert!((v[1] / v[0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn phi_field_gradient_consistent() {
        let m = Modulus::power(0.5).unwrap();
        let f = phi_field(&m, Point::new(0.3, 0.2), Rect::new(-2.0, -2.0, 2.0, 2.0));
        for &(x, y) in &[(0.5, 0.3), (0.1, 0.1), (0.9, 0.6)] {
            let p = Point::new(x, y);
            let g = f.gradient(p).unwrap();
            let fd = f.fd_gradient(p, 1e-7);
            assert!((g - fd).norm() < 1e-5 * (1.0 + g.norm()), "{g:?} vs {fd:?}");
        }
    }

    #[test]
    fn restricted_apply_linearity_on_constants() {
        let d = Arc::new(Domain::unit_ball());
        let k = Kernel::beurling_re();
        let support = d.bounding_box();
        let one = ScalarField::constant(support, 1.0);
        let c = ScalarField::constant(support, -2.5);
        let y = Point::new(0.2, 0.1);
        let tol = 1e-4;
        let t_one = restricted_apply(&d, &k, &one, y, tol).unwrap();
        let t_c = restricted_apply(&d, &k, &c, y, tol).unwrap();
        let pv = pv_tchi(&d, &k, y, &PvParams::with_tol(tol * 0.25)).unwrap();
        assert!((t_one - pv).abs() < 2.0 * tol, "{t_one} vs {pv}");
        assert!((t_c + 2.5 * pv).abs() < 2.0 * tol, "{t_c} vs {}", -2.5 * pv);
    }
}
