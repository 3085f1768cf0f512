//! Campanato (mean-oscillation) and weighted-Bloch seminorm estimators.
//!
//! The mean-oscillation seminorm over a cube family is estimated from an
//! `n x n` midpoint sample per cube with the exact discrete minimizer of the
//! `L^p` deviation (sample median for `p = 1`, sample mean for `p = 2`);
//! reported suprema are lower estimates of the true suprema by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Domain, GeneralCube, Point, ScalarField};
use crate::moduli::Modulus;
use crate::whitney::WhitneyCovering;

/// Smallest cube side the samplers emit.
pub const MIN_CUBE_SIDE: f64 = 9.5367431640625e-7; // 2^-20

/// Deterministic cube family for oscillation estimates.
#[derive(Debug, Clone)]
pub struct CubeSampler {
    pub cubes: Vec<GeneralCube>,
    pub descriptor: String,
}

impl CubeSampler {
    /// Whitney cubes, their 9/8 dilations, and seeded random cubes across
    /// dyadic scales.
    pub fn domain_anchored(
        domain: &Domain,
        covering: &WhitneyCovering,
        seed: u64,
        n_random: usize,
        max_cubes: usize,
    ) -> CubeSampler {
        let mut cubes: Vec<GeneralCube> = Vec::new();
        for q in &covering.cubes {
            cubes.push(q.as_general());
            cubes.push(q.dilate(9.0 / 8.0));
        }
        let bbox = domain.bounding_box();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut accepted = 0usize;
        for _ in 0..(n_random * 8) {
            if accepted >= n_random {
                break;
            }
            let k: i32 = rng.gen_range(0..=20);
            let side = 2.0f64.powi(-k).min(bbox.width().min(bbox.height()));
            let c = Point::new(
                rng.gen_range(bbox.x0..bbox.x1),
                rng.gen_range(bbox.y0..bbox.y1),
            );
            let cube = GeneralCube::new(c, side);
            if domain.cube_inside(&cube, 1.0) {
                cubes.push(cube);
                accepted += 1;
            }
        }
        CubeSampler {
            cubes: cap_cubes(cubes, max_cubes),
            descriptor: format!("domain-anchored(seed={seed},random={n_random})"),
        }
    }

    /// Full-space family for extension estimates: interior and exterior
    /// Whitney cubes, boundary-anchored cubes at dyadic scales, and seeded
    /// random cubes over the inflated scene box.
    pub fn full_space(
        domain: &Domain,
        coverings: &[&WhitneyCovering],
        seed: u64,
        n_random: usize,
        max_cubes: usize,
    ) -> CubeSampler {
        let mut cubes: Vec<GeneralCube> = Vec::new();
        for cov in coverings {
            for q in &cov.cubes {
                cubes.push(q.as_general());
            }
        }
        for node in domain.boundary_quadrature(2) {
            for k in 1..=10 {
                cubes.push(GeneralCube::new(node.point, 2.0f64.powi(-k)));
            }
        }
        let bbox = domain.bounding_box().inflate(1.6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n_random {
            let k: i32 = rng.gen_range(0..=12);
            let side = 2.0f64.powi(-k).min(bbox.width().min(bbox.height()));
            let c = Point::new(
                rng.gen_range(bbox.x0..bbox.x1),
                rng.gen_range(bbox.y0..bbox.y1),
            );
            cubes.push(GeneralCube::new(c, side));
        }
        CubeSampler {
            cubes: cap_cubes(cubes, max_cubes),
            descriptor: format!("full-space(seed={seed},random={n_random})"),
        }
    }

    /// An explicit cube list.
    pub fn explicit(cubes: Vec<GeneralCube>) -> CubeSampler {
        CubeSampler {
            cubes,
            descriptor: "explicit".into(),
        }
    }
}

fn cap_cubes(mut cubes: Vec<GeneralCube>, max_cubes: usize) -> Vec<GeneralCube> {
    cubes.sort_by(|a, b| {
        b.side
            .total_cmp(&a.side)
            .then(a.center.x.total_cmp(&b.center.x))
            .then(a.center.y.total_cmp(&b.center.y))
    });
    cubes.dedup_by(|a, b| a == b);
    if cubes.len() > max_cubes {
        let stride = cubes.len() as f64 / max_cubes as f64;
        let mut out = Vec::with_capacity(max_cubes);
        let mut pos = 0.0;
        while (pos as usize) < cubes.len() && out.len() < max_cubes {
            out.push(cubes[pos as usize]);
            pos += stride;
        }
        out
    } else {
        cubes
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeRecord {
    pub center: Point,
    pub side: f64,
    /// The optimal constant: sample median for p=1, mean for p=2.
    pub best_constant: f64,
    /// Discrete `L^p(Q, dx/|Q|)` deviation from the best constant.
    pub oscillation: f64,
    /// `oscillation / w(side)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OscillationReport {
    pub p: u8,
    pub grid_n: usize,
    pub interior: bool,
    pub sampler: String,
    pub sup_ratio: f64,
    pub records: Vec<CubeRecord>,
}

impl OscillationReport {
    /// Least-squares slope of `log ratio` against `log side` over the finest
    /// two dyadic generations present (the trend statistic).
    pub fn fine_scale_trend(&self, ratio_floor: f64) -> Option<f64> {
        let min_side = self
            .records
            .iter()
            .map(|r| r.side)
            .fold(f64::INFINITY, f64::min);
        if !min_side.is_finite() {
            return None;
        }
        let pts: Vec<(f64, f64)> = self
            .records
            .iter()
            .filter(|r| r.side <= 2.0 * min_side * (1.0 + 1e-9))
            .map(|r| (r.side.ln(), r.ratio.max(ratio_floor).ln()))
            .collect();
        if pts.len() < 2 || pts.iter().all(|p| p.0 == pts[0].0) {
            return None;
        }
        Some(crate::moduli::least_squares_slope(&pts))
    }
}

/// Estimate the Campanato seminorm of `f` under the modulus `m`.
///
/// With a domain and `interior = false` the family is restricted to cubes
/// `Q` inside the domain; with `interior = true` to cubes with `2Q` inside
/// (the interior variant). With `domain = None` the estimate runs over the
/// whole plane (every sampled cube is admissible).
pub fn campanato_seminorm(
    f: &ScalarField,
    domain: Option<&Domain>,
    m: &Modulus,
    p: u8,
    sampler: &CubeSampler,
    interior: bool,
    grid_n: usize,
) -> Result<OscillationReport> {
    if p != 1 && p != 2 {
        return Err(Error::Domain(format!("p must be 1 or 2, got {p}")));
    }
    let mut records = Vec::new();
    let mut sup_ratio = 0.0f64;
    let mut samples = vec![0.0f64; grid_n * grid_n];
    for cube in &sampler.cubes {
        if !admissible(domain, cube, interior) {
            continue;
        }
        let (osc, b) = oscillation(f, cube, grid_n, p, &mut samples)?;
        let wl = m.eval_clamped(cube.side);
        let ratio = osc / wl;
        sup_ratio = sup_ratio.max(ratio);
        records.push(CubeRecord {
            center: cube.center,
            side: cube.side,
            best_constant: b,
            oscillation: osc,
            ratio,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(OscillationReport {
        p,
        grid_n,
        interior,
        sampler: sampler.descriptor.clone(),
        sup_ratio,
        records,
    })
}

fn admissible(domain: Option<&Domain>, cube: &GeneralCube, interior: bool) -> bool {
    if !(MIN_CUBE_SIDE..=1.0).contains(&cube.side) {
        return false;
    }
    match domain {
        None => true,
        Some(d) => {
            let scale = if interior { 2.0 } else { 1.0 };
            d.cube_inside(cube, scale)
        }
    }
}

/// Discrete oscillation of `f` over the cube: `(L^p deviation, constant)`.
fn oscillation(
    f: &ScalarField,
    cube: &GeneralCube,
    n: usize,
    p: u8,
    samples: &mut Vec<f64>,
) -> Result<(f64, f64)> {
    samples.clear();
    let rect = cube.rect();
    let h = rect.width() / n as f64;
    for j in 0..n {
        for i in 0..n {
            let v = f.eval(Point::new(
                rect.x0 + (i as f64 + 0.5) * h,
                rect.y0 + (j as f64 + 0.5) * h,
            ));
            if !v.is_finite() {
                return Err(Error::Poisoned(format!(
                    "non-finite field sample in cube at ({}, {})",
                    cube.center.x, cube.center.y
                )));
            }
            samples.push(v);
        }
    }
    let count = samples.len();
    let b = match p {
        1 => {
            // Midpoint of the flat minimizer interval for even counts.
            let mid = count / 2;
            let (_, hi, _) = samples.select_nth_unstable_by(mid, f64::total_cmp);
            let hi = *hi;
            if count % 2 == 1 {
                hi
            } else {
                let (_, lo, _) = samples.select_nth_unstable_by(mid - 1, f64::total_cmp);
                0.5 * (*lo + hi)
            }
        }
        _ => samples.iter().sum::<f64>() / count as f64,
    };
    let osc = match p {
        1 => samples.iter().map(|v| (v - b).abs()).sum::<f64>() / count as f64,
        _ => (samples.iter().map(|v| (v - b) * (v - b)).sum::<f64>() / count as f64).sqrt(),
    };
    Ok((osc, b))
}

#[derive(Debug, Clone, Serialize)]
pub struct LpEquivalenceReport {
    /// Per-cube `(side, osc1, osc2)` on identical cubes and samples.
    pub rows: Vec<(f64, f64, f64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Compare the `L^1` and `L^2` oscillations on identical cubes. The ratio
/// `osc2/osc1` is at least 1 on every cube (power-mean inequality); the
/// reported max is the empirical equivalence constant.
pub fn lp_equivalence_check(
    f: &ScalarField,
    domain: Option<&Domain>,
    sampler: &CubeSampler,
    interior: bool,
    grid_n: usize,
) -> Result<LpEquivalenceReport> {
    let mut rows = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut buf = vec![0.0f64; grid_n * grid_n];
    for cube in &sampler.cubes {
        if !admissible(domain, cube, interior) {
            continue;
        }
        let (osc1, _) = oscillation(f, cube, grid_n, 1, &mut buf)?;
        let (osc2, _) = oscillation(f, cube, grid_n, 2, &mut buf)?;
        let ratio = if osc1 <= 1e-300 && osc2 <= 1e-300 {
            1.0 // both vanish: ratio 1 by convention
        } else {
            osc2 / osc1
        };
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        rows.push((cube.side, osc1, osc2));
    }
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(LpEquivalenceReport {
        rows,
        min_ratio,
        max_ratio,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlochRecord {
    pub point: Point,
    pub rho: f64,
    pub grad_norm: f64,
    /// `|grad f| rho / w(rho)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlochReport {
    pub sup_ratio: f64,
    pub records: Vec<BlochRecord>,
}

/// Deterministic Bloch probe set: normal-line sweeps from boundary anchors
/// at log-spaced depths, plus seeded random interior points.
pub fn bloch_probes(domain: &Domain, seed: u64, n_random: usize) -> Vec<Point> {
    let mut probes = Vec::new();
    let anchors = domain.boundary_quadrature(1);
    let stride = (anchors.len() / 12).max(1);
    for node in anchors.iter().step_by(stride) {
        for k in 0..10 {
            let delta = 2.0f64.powi(-(k + 2));
            let p = node.point - node.normal * delta;
            if domain.contains(p) && domain.dist_to_boundary_fast(p) > MIN_CUBE_SIDE {
                probes.push(p);
            }
        }
    }
    let bbox = domain.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    for _ in 0..(n_random * 10) {
        if accepted >= n_random {
            break;
        }
        let p = Point::new(
            rng.gen_range(bbox.x0..bbox.x1),
            rng.gen_range(bbox.y0..bbox.y1),
        );
        if domain.contains(p) && domain.dist_to_boundary_fast(p) > MIN_CUBE_SIDE {
            probes.push(p);
            accepted += 1;
        }
    }
    probes
}

/// Weighted Bloch seminorm estimate `sup |grad f(x)| rho(x) / w(rho(x))`
/// over the probes. The field must carry a gradient.
pub fn bloch_seminorm(
    f: &ScalarField,
    domain: &Domain,
    m: &Modulus,
    probes: &[Point],
) -> Result<BlochReport> {
    if !f.has_gradient() {
        return Err(Error::Capability(
            "bloch seminorm needs a field gradient".into(),
        ));
    }
    let mut records = Vec::new();
    let mut sup = 0.0f64;
    for &p in probes {
        if !domain.contains(p) {
            continue;
        }
        let rho = domain.signed_distance(p).abs();
        if rho < MIN_CUBE_SIDE || rho > 1.0 {
            continue;
        }
        let g = f.gradient(p)?.norm();
        let ratio = g * rho / m.eval_clamped(rho);
        sup = sup.max(ratio);
        records.push(BlochRecord {
            point: p,
            rho,
            grad_norm: g,
            ratio,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(BlochReport {
        sup_ratio: sup,
        records,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanGrowthRow {
    pub side: f64,
    pub mean_abs: f64,
    /// `int_side^1 w(t)/t dt`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanGrowthReport {
    pub rows: Vec<MeanGrowthRow>,
    /// Empirical constant: max ratio across cubes.
    pub c_emp: f64,
}

/// Check `|f_Q| <= C int_l^1 w(t)/t dt` across the given cubes, reporting
/// the empirical constant.
pub fn mean_growth_check(
    f: &ScalarField,
    m: &Modulus,
    cubes: &[GeneralCube],
    quad_n: usize,
) -> Result<MeanGrowthReport> {
    let mut rows = Vec::new();
    let mut c_emp = 0.0f64;
    for cube in cubes {
        let mean = crate::extension::cube_mean(f, cube, quad_n)?;
        let bound = m.dini_integral(cube.side.clamp(MIN_CUBE_SIDE, 1.0 - 1e-9))?;
        let ratio = mean.abs() / bound.max(1e-300);
        c_emp = c_emp.max(ratio);
        rows.push(MeanGrowthRow {
            side: cube.side,
            mean_abs: mean.abs(),
            bound,
            ratio,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(MeanGrowthReport { rows, c_emp })
}

/// Mean of `f` over the disk `B(center, r)` by polar midpoint quadrature.
pub fn disk_mean(f: &ScalarField, center: Point, r: f64, n: usize) -> f64 {
    let (nr, nt) = (n, 4 * n);
    let mut acc = 0.0;
    for i in 0..nr {
        let rad = r * (i as f64 + 0.5) / nr as f64;
        for j in 0..nt {
            let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / nt as f64;
            acc += f.eval(center + Point::new(t.cos(), t.sin()) * rad) * rad;
        }
    }
    // sum f r dr dtheta / (pi r^2)
    acc * (r / nr as f64) * (2.0 * std::f64::consts::PI / nt as f64)
        / (std::f64::consts::PI * r * r)
}

/// `int_{B(center,2R)} |f - c| dy` with `c` the mean over the same disk,
/// then the harmonic gradient bound `|grad f(center)| <= (1/pi) R^-3 I`
/// (divergence-theorem estimate for harmonic functions). Returns
/// `(grad_norm, bound_value)`.
pub fn harmonic_gradient_bound(
    f: &ScalarField,
    center: Point,
    r: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let grad = f.gradient(center)?.norm();
    let c = disk_mean(f, center, 2.0 * r, n);
    let (nr, nt) = (n, 4 * n);
    let mut acc = 0.0;
    for i in 0..nr {
        let rad = 2.0 * r * (i as f64 + 0.5) / nr as f64;
        for j in 0..nt {
            let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / nt as f64;
            acc += (f.eval(center + Point::new(t.cos(), t.sin()) * rad) - c).abs() * rad;
        }
    }
    let integral = acc * (2.0 * r / nr as f64) * (2.0 * std::f64::consts::PI / nt as f64);
    // Component bound: |d_i f| <= (1/pi) R^-3 int; the norm gains sqrt(2).
    let bound = std::f64::consts::SQRT_2 / std::f64::consts::PI * integral / (r * r * r);
    Ok((grad, bound))
}

/// Piecewise-constant test field: one seeded value per Whitney cube, scaled
/// by `w(side)`. A concrete rough member of the Campanato class.
pub fn whitney_noise_field(
    covering: &Arc<WhitneyCovering>,
    m: &Modulus,
    seed: u64,
) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = covering
        .cubes
        .iter()
        .map(|q| rng.gen_range(-1.0..1.0) * m.eval_clamped(q.side()))
        .collect();
    let cov = covering.clone();
    let support = covering.domain.bounding_box();
    ScalarField::new(support, move |p| match cov.cube_at(p) {
        Some(i) => values[i as usize],
        None => 0.0,
    })
}

/// `ln(1/rho)` on a ball with its closed-form gradient: the canonical
/// unbounded member of BMO-type classes.
pub fn log_distance_field(domain: &Arc<Domain>) -> Result<ScalarField> {
    let (center, radius) = match domain.as_ref() {
        Domain::Ball(b) => (b.center, b.radius),
        _ => {
            return Err(Error::Capability(
                "log-distance fixture needs a ball domain".into(),
            ))
        }
    };
    let d = domain.clone();
    let f = ScalarField::new(domain.bounding_box(), move |p| {
        let rho = d.signed_distance(p).abs().max(1e-300);
        (1.0 / rho).ln()
    });
    Ok(f.with_gradient(move |p| {
        let r = (p - center).norm();
        if r == 0.0 {
            return Point::ZERO;
        }
        let rho = (radius - r).max(1e-300);
        (p - center) * (1.0 / (r * rho))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::whitney::{build_whitney, Side};

    #[test]
    fn constant_field_zero_seminorm() {
        let d = Domain::unit_square();
        let dd = Arc::new(d.clone());
        let cov = build_whitney(&dd, Side::Interior, -5).unwrap();
        let f = ScalarField::constant(d.bounding_box(), 7.5);
        let sampler = CubeSampler::domain_anchored(&d, &cov, 42, 100, 3000);
        for m in [Modulus::constant(), Modulus::power(0.5).unwrap()] {
            for p in [1u8, 2u8] {
                let rep = campanato_seminorm(&f, Some(&d), &m, p, &sampler, false, 16).unwrap();
                assert_eq!(rep.sup_ratio, 0.0);
            }
        }
    }

    #[test]
    fn linear_field_brute_force_inf() {
        // f = x1 on the unit square with a near-1 power modulus: the discrete
        // median minimizes L1; cross-check one cube against a brute-force
        // scan over constants.
        let d = Domain::unit_square();
        let f = ScalarField::coordinate(d.bounding_box(), 0);
        let cube = GeneralCube::new(Point::new(0.5, 0.5), 0.5);
        let mut buf = Vec::new();
        let (osc, b) = oscillation(&f, &cube, 32, 1, &mut buf).unwrap();
        // Brute-force the constant on a fine grid.
        let mut best = f64::INFINITY;
        for k in 0..=1000 {
            let cand = 0.25 + 0.5 * k as f64 / 1000.0;
            let rect = cube.rect();
            let h = rect.width() / 32.0;
            let mut acc = 0.0;
            for j in 0..32 {
                for i in 0..32 {
                    let x = rect.x0 + (i as f64 + 0.5) * h;
                    let _ = j;
                    acc += (x - cand).abs();
                }
            }
            best = best.min(acc / (32.0 * 32.0));
        }
        assert!((osc - best).abs() <= 1e-6, "median osc {osc} vs brute {best}");
        assert!((b - 0.5).abs() < 1e-9);
    }

    #[test]
    fn osc2_dominates_osc1() {
        let d = Domain::unit_square();
        let dd = Arc::new(d.clone());
        let cov = build_whitney(&dd, Side::Interior, -4).unwrap();
        let m = Modulus::constant();
        let noise = whitney_noise_field(&Arc::new(cov), &m, 7);
        let cov2 = build_whitney(&dd, Side::Interior, -4).unwrap();
        let sampler = CubeSampler::domain_anchored(&d, &cov2, 3, 200, 2000);
        let rep = lp_equivalence_check(&noise, Some(&d), &sampler, false, 16).unwrap();
        assert!(rep.min_ratio >= 1.0 - 1e-12, "min {}", rep.min_ratio);
    }

    #[test]
    fn bloch_log_distance_is_constant_one() {
        let d = Arc::new(Domain::unit_ball());
        let f = log_distance_field(&d).unwrap();
        let m = Modulus::constant();
        let probes = bloch_probes(&d, 11, 100);
        let rep = bloch_seminorm(&f, &d, &m, &probes).unwrap();
        // |grad f| rho = 1 identically.
        for r in &rep.records {
            assert!((r.ratio - 1.0).abs() < 1e-9, "ratio {}", r.ratio);
        }
        assert!((rep.sup_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_required() {
        let d = Domain::unit_ball();
        let f = ScalarField::new(d.bounding_box(), |p| p.x);
        let m = Modulus::constant();
        let err = bloch_seminorm(&f, &d, &m, &[Point::ZERO]);
        assert!(matches!(err, Err(Error::Capability(_))));
    }

    #[test]
    fn harmonic_bound_on_quadratic() {
        // f = x^2 - y^2 is harmonic; check the gradient bound at a few
        // centers and radii.
        let support = Rect::new(-2.0, -2.0, 2.0, 2.0);
        let f = ScalarField::new(support, |p| p.x * p.x - p.y * p.y)
            .with_gradient(|p| Point::new(2.0 * p.x, -2.0 * p.y));
        for &(cx, cy, r) in &[(0.3, 0.1, 0.2), (-0.4, 0.25, 0.15), (0.0, 0.6, 0.3)] {
            let (grad, bound) = harmonic_gradient_bound(&f, Point::new(cx, cy), r, 64).unwrap();
            assert!(
                grad <= bound * 1.05,
                "grad {grad} vs bound {bound} at ({cx},{cy})"
            );
        }
    }
}
