//! Homogeneous Calderon-Zygmund kernels `K(x) = Omega(x/|x|)/|x|^2` with
//! zero spherical mean, principal-value evaluation of `T chi_D` by exact
//! annulus cancellation, and the boundary-integral gradient formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::quad::{GL8_NODES, GL8_WEIGHTS};
use crate::quadtree::{integrate_region, FnRegion, QuadResult};

/// Collar floor: principal-value probes must keep this distance from the
/// boundary.
pub const RHO_FLOOR: f64 = 9.5367431640625e-7; // 2^-20

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum KernelKind {
    /// `Omega(theta) = -cos(2 theta)/pi` (real part of `-1/(pi z^2)`).
    BeurlingRe,
    /// `Omega(theta) = -sin(2 theta)/pi`.
    BeurlingIm,
    /// `Omega = x_i x_j / |x|^2 - delta_ij / 2`.
    RieszSecond { i: usize, j: usize },
    /// Angle-sampled user kernel on a uniform grid over `[0, 2 pi)`,
    /// projected to zero spherical mean at construction.
    Custom { samples: Vec<f64> },
}

/// A smooth homogeneous kernel of degree -2 in the plane.
#[derive(Debug, Clone, Serialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub even: bool,
    pub name: String,
    /// Magnitude of the zero-mean projection applied to a custom kernel.
    pub projection_magnitude: f64,
    /// Discrete Lipschitz bound of the angular samples (custom kernels).
    pub lipschitz_bound: f64,
}

impl Kernel {
    pub fn beurling_re() -> Kernel {
        Kernel {
            kind: KernelKind::BeurlingRe,
            even: true,
            name: "beurling_re".into(),
            projection_magnitude: 0.0,
            lipschitz_bound: 2.0 / std::f64::consts::PI,
        }
    }

    pub fn beurling_im() -> Kernel {
        Kernel {
            kind: KernelKind::BeurlingIm,
            even: true,
            name: "beurling_im".into(),
            projection_magnitude: 0.0,
            lipschitz_bound: 2.0 / std::f64::consts::PI,
        }
    }

    pub fn riesz_second(i: usize, j: usize) -> Result<Kernel> {
        if i > 1 || j > 1 {
            return Err(Error::Domain(format!("riesz indices ({i},{j}) not in 0..2")));
        }
        Ok(Kernel {
            kind: KernelKind::RieszSecond { i, j },
            even: true,
            name: format!("riesz_second_{}{}", i + 1, j + 1),
            projection_magnitude: 0.0,
            lipschitz_bound: 1.0,
        })
    }

    /// A user kernel from angular samples (at least 256 nodes). The samples
    /// are projected to zero mean; the projection magnitude is recorded.
    pub fn custom(samples: Vec<f64>, name: &str) -> Result<Kernel> {
        if samples.len() < 256 {
            return Err(Error::Domain(format!(
                "custom kernel needs >= 256 angular samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Poisoned("non-finite kernel sample".into()));
        }
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let samples: Vec<f64> = samples.iter().map(|v| v - mean).collect();
        let dtheta = 2.0 * std::f64::consts::PI / n as f64;
        let mut lip = 0.0f64;
        for k in 0..n {
            lip = lip.max((samples[(k + 1) % n] - samples[k]).abs() / dtheta);
        }
        let even = n % 2 == 0
            && (0..n / 2).all(|k| (samples[k] - samples[k + n / 2]).abs() <= 1e-12);
        Ok(Kernel {
            kind: KernelKind::Custom { samples },
            even,
            name: name.into(),
            projection_magnitude: mean.abs(),
            lipschitz_bound: lip,
        })
    }

    pub fn from_kind(kind: KernelKind) -> Result<Kernel> {
        match kind {
            KernelKind::BeurlingRe => Ok(Kernel::beurling_re()),
            KernelKind::BeurlingIm => Ok(Kernel::beurling_im()),
            KernelKind::RieszSecond { i, j } => Kernel::riesz_second(i, j),
            KernelKind::Custom { samples } => Kernel::custom(samples, "custom"),
        }
    }

    /// The angular symbol at a direction angle.
    pub fn omega(&self, theta: f64) -> f64 {
        match &self.kind {
            KernelKind::BeurlingRe => -(2.0 * theta).cos() / std::f64::consts::PI,
            KernelKind::BeurlingIm => -(2.0 * theta).sin() / std::f64::consts::PI,
            KernelKind::RieszSecond { i, j } => {
                let dir = [theta.cos(), theta.sin()];
                let delta = if i == j { 0.5 } else { 0.0 };
                dir[*i] * dir[*j] - delta
            }
            KernelKind::Custom { samples } => {
                let n = samples.len();
                let tau = 2.0 * std::f64::consts::PI;
                let mut t = theta % tau;
                if t < 0.0 {
                    t += tau;
                }
                let pos = t / tau * n as f64;
                let k = (pos as usize).min(n - 1);
                let frac = pos - k as f64;
                let a = samples[k];
                let b = samples[(k + 1) % n];
                a + (b - a) * frac
            }
        }
    }

    /// `K(x) = Omega(x/|x|)/|x|^2`; errors on `x = 0`.
    pub fn eval(&self, x: Point) -> Result<f64> {
        if x.norm_sq() == 0.0 {
            return Err(Error::Domain("kernel evaluated at the singularity".into()));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the zero check; `x` must be nonzero.
    #[inline]
    pub fn eval_unchecked(&self, x: Point) -> f64 {
        let r2 = x.norm_sq();
        match &self.kind {
            // cos 2t = (dx^2-dy^2)/r^2, sin 2t = 2 dx dy / r^2: rational forms.
            KernelKind::BeurlingRe => {
                -(x.x * x.x - x.y * x.y) / (std::f64::consts::PI * r2 * r2)
            }
            KernelKind::BeurlingIm => -(2.0 * x.x * x.y) / (std::f64::consts::PI * r2 * r2),
            KernelKind::RieszSecond { i, j } => {
                let xi = if *i == 0 { x.x } else { x.y };
                let xj = if *j == 0 { x.x } else { x.y };
                let delta = if i == j { 0.5 } else { 0.0 };
                (xi * xj - delta * r2) / (r2 * r2)
            }
            KernelKind::Custom { .. } => self.omega(x.angle()) / r2,
        }
    }

    /// Spherical mean `(1/2pi) int Omega`, by trapezoid quadrature; should
    /// vanish for every constructed kernel.
    pub fn spherical_mean(&self) -> f64 {
        let n = 4096;
        let mut acc = 0.0;
        for k in 0..n {
            acc += self.omega(2.0 * std::f64::consts::PI * k as f64 / n as f64);
        }
        acc / n as f64
    }
}

/// Tuning knobs for principal-value quadrature.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PvParams {
    /// Absolute tolerance of the returned value.
    pub tol: f64,
    /// Cell budget for the adaptive quadtree.
    pub budget: usize,
    /// The cancellation radius is `factor * rho(y)`, `factor` in `(0, 1]`.
    pub cancel_factor: f64,
}

impl Default for PvParams {
    fn default() -> Self {
        PvParams {
            tol: 1e-5,
            budget: 4_000_000,
            cancel_factor: 0.5,
        }
    }
}

impl PvParams {
    pub fn with_tol(tol: f64) -> Self {
        PvParams {
            tol,
            ..Default::default()
        }
    }
}

/// `T chi_D (y)` for an interior point `y`, by exact annulus cancellation:
/// the principal value over the disk `B_r(y)`, `r = cancel_factor * rho(y)`,
/// vanishes identically (radial-angular factorization against the zero
/// spherical mean), so the value is the proper integral over `D \ B_r(y)`.
pub fn pv_tchi(d: &Domain, k: &Kernel, y: Point, params: &PvParams) -> Result<f64> {
    if !d.contains(y) {
        return Err(Error::Domain("pv_tchi probe must be interior".into()));
    }
    let rho = d.dist_to_boundary_fast(y);
    if rho < RHO_FLOOR {
        return Err(Error::Domain(format!(
            "probe too close to the boundary (rho = {rho})"
        )));
    }
    let r = params.cancel_factor.clamp(1e-6, 1.0) * rho;
    let region = pv_region(d, y, r);
    let f = |p: Point| k.eval_unchecked(y - p);
    let res = integrate_region(
        &region,
        &f,
        d.bounding_box(),
        params.tol,
        params.budget,
        "pv_tchi",
    )?;
    Ok(res.value)
}

/// Region `D \ B_r(y)` with the per-point trust margin vanishing where the
/// analytically exact inner circle fronts the boundary.
#[allow(clippy::type_complexity)]
fn pv_region<'a>(
    d: &'a Domain,
    y: Point,
    r: f64,
) -> FnRegion<
    impl Fn(Point) -> f64 + Sync + 'a,
    impl Fn(Point) -> bool + Sync + 'a,
    impl Fn(Point) -> f64 + Sync + 'a,
> {
    let dm = d.sd_trust_margin();
    FnRegion {
        sd: move |p: Point| d.signed_distance_fast(p).max(r - (p - y).norm()),
        contains: move |p: Point| d.contains(p) && (p - y).norm() > r,
        margin: move |p: Point| {
            if r - (p - y).norm() >= d.signed_distance_fast(p) {
                0.0
            } else {
                dm
            }
        },
    }
}

/// Same as [`pv_tchi`] but returns the full quadrature result.
pub fn pv_tchi_detailed(d: &Domain, k: &Kernel, y: Point, params: &PvParams) -> Result<QuadResult> {
    if !d.contains(y) {
        return Err(Error::Domain("pv_tchi probe must be interior".into()));
    }
    let rho = d.dist_to_boundary_fast(y);
    if rho < RHO_FLOOR {
        return Err(Error::Domain(format!(
            "probe too close to the boundary (rho = {rho})"
        )));
    }
    let r = params.cancel_factor.clamp(1e-6, 1.0) * rho;
    let region = pv_region(d, y, r);
    let f = |p: Point| k.eval_unchecked(y - p);
    integrate_region(
        &region,
        &f,
        d.bounding_box(),
        params.tol,
        params.budget,
        "pv_tchi",
    )
}

/// Proper integral `int_D K(y - x) dx` for an exterior point `y`.
pub fn pv_tchi_exterior(d: &Domain, k: &Kernel, y: Point, params: &PvParams) -> Result<f64> {
    if d.contains(y) {
        return Err(Error::Domain("exterior evaluation needs y outside".into()));
    }
    if d.dist_to_boundary_fast(y) < RHO_FLOOR {
        return Err(Error::Domain("probe too close to the boundary".into()));
    }
    let dm = d.sd_trust_margin();
    let region = FnRegion {
        sd: |p: Point| d.signed_distance_fast(p),
        contains: |p: Point| d.contains(p),
        margin: move |_| dm,
    };
    let f = |p: Point| k.eval_unchecked(y - p);
    let res = integrate_region(
        &region,
        &f,
        d.bounding_box(),
        params.tol,
        params.budget,
        "pv_tchi_exterior",
    )?;
    Ok(res.value)
}

/// Gradient of `T chi_D` at an interior point by the boundary-integral
/// formula `d_i T chi_D(y) = - int_{dD} K(x - y) cos(nu, x_i) dS(x)`,
/// on a boundary quadrature graded toward the near point. `refinement`
/// halves every generated interval that many extra times.
pub fn grad_tchi_boundary(d: &Domain, k: &Kernel, y: Point, refinement: u32) -> Result<Point> {
    if !d.contains(y) {
        return Err(Error::Domain("gradient probe must be interior".into()));
    }
    let mut gx = 0.0f64;
    let mut gy = 0.0f64;
    for piece in d.boundary_pieces() {
        let mut stack = vec![(piece.t0, piece.t1, 0u32)];
        while let Some((a, b, depth)) = stack.pop() {
            let tm = 0.5 * (a + b);
            let (pm, _, speed) = piece.at(tm);
            let seg_len = speed * (b - a);
            let dist = (pm - y).norm() - 0.5 * seg_len;
            if seg_len > 0.35 * dist.max(1e-9) && depth < 60 {
                stack.push((a, tm, depth + 1));
                stack.push((tm, b, depth + 1));
                continue;
            }
            // Extra uniform halvings per the refinement request.
            let parts = 1usize << refinement.min(8);
            for part in 0..parts {
                let pa = a + (b - a) * part as f64 / parts as f64;
                let pb = a + (b - a) * (part + 1) as f64 / parts as f64;
                let mid = 0.5 * (pa + pb);
                let half = 0.5 * (pb - pa);
                for i in 0..8 {
                    let t = mid + half * GL8_NODES[i];
                    let (x, normal, sp) = piece.at(t);
                    let dxy = x - y;
                    if dxy.norm() < 1e-12 {
                        return Err(Error::Domain(
                            "boundary node coincides with the probe".into(),
                        ));
                    }
                    let kv = k.eval_unchecked(dxy);
                    let w = GL8_WEIGHTS[i] * half * sp;
                    gx -= kv * normal.x * w;
                    gy -= kv * normal.y * w;
                }
            }
        }
    }
    Ok(Point::new(gx, gy))
}

/// Extra-cancellation report: max `|T chi_B|` over interior probes of a ball.
#[derive(Debug, Clone, Serialize)]
pub struct CancellationReport {
    pub kernel: String,
    pub max_abs: f64,
    pub values: Vec<(Point, f64)>,
}

pub fn cancellation_report(
    ball: &Domain,
    k: &Kernel,
    probes: &[Point],
    params: &PvParams,
) -> Result<CancellationReport> {
    if !k.even {
        return Err(Error::Domain(
            "extra cancellation requires an even kernel".into(),
        ));
    }
    let radius = match ball {
        Domain::Ball(b) => b.radius,
        _ => return Err(Error::Domain("cancellation report needs a ball".into())),
    };
    let mut values = Vec::with_capacity(probes.len());
    let mut max_abs = 0.0f64;
    for &p in probes {
        if !ball.contains(p) || ball.dist_to_boundary_fast(p) < radius / 10.0 {
            return Err(Error::Domain(
                "cancellation probes must satisfy rho >= radius/10".into(),
            ));
        }
        let v = pv_tchi(ball, k, p, params)?;
        max_abs = max_abs.max(v.abs());
        values.push((p, v));
    }
    Ok(CancellationReport {
        kernel: k.name.clone(),
        max_abs,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_kernels_zero_mean_and_even() {
        for k in [
            Kernel::beurling_re(),
            Kernel::beurling_im(),
            Kernel::riesz_second(0, 0).unwrap(),
            Kernel::riesz_second(0, 1).unwrap(),
        ] {
            assert!(k.spherical_mean().abs() < 1e-10, "{}", k.name);
            assert!(k.even);
            for &t in &[0.3, 1.1, 2.9] {
                assert!((k.omega(t) - k.omega(t + std::f64::consts::PI)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_eval_examples() {
        let k = Kernel::beurling_re();
        // Omega(0)/1 = -1/pi at (1, 0).
        let v = k.eval(Point::new(1.0, 0.0)).unwrap();
        assert!((v + 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!(k.eval(Point::ZERO).is_err());
        // Homogeneity -2: K(2x) = K(x)/4.
        for k in [
            Kernel::beurling_re(),
            Kernel::beurling_im(),
            Kernel::riesz_second(0, 1).unwrap(),
        ] {
            let x = Point::new(0.4, -0.7);
            let a = k.eval(x).unwrap();
            let b = k.eval(x * 2.0).unwrap();
            assert!((b - a / 4.0).abs() < 1e-14 * a.abs().max(1.0));
            // Evenness.
            assert!((k.eval(-x).unwrap() - a).abs() < 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn rational_forms_match_omega() {
        for k in [
            Kernel::beurling_re(),
            Kernel::beurling_im(),
            Kernel::riesz_second(0, 0).unwrap(),
            Kernel::riesz_second(1, 1).unwrap(),
            Kernel::riesz_second(0, 1).unwrap(),
        ] {
            for i in 0..16 {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 16.0 + 0.05;
                let r = 0.37;
                let x = Point::new(r * t.cos(), r * t.sin());
                let expect = k.omega(t) / (r * r);
                assert!(
                    (k.eval(x).unwrap() - expect).abs() < 1e-12,
                    "{} at {t}",
                    k.name
                );
            }
        }
    }

    #[test]
    fn custom_kernel_projection() {
        let n = 512;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (2.0 * t).cos() + 0.25 // deliberately off-mean
            })
            .collect();
        let k = Kernel::custom(samples, "shifted").unwrap();
        assert!((k.projection_magnitude - 0.25).abs() < 1e-12);
        assert!(k.spherical_mean().abs() < 1e-10);
        assert!(k.even);
        assert!(Kernel::custom(vec![0.0; 16], "too few").is_err());
    }
}
