//! Moduli of continuity and the scalar functionals derived from them.
//!
//! A modulus of continuity is a nondecreasing function `w` on `(0, 1]` with
//! `w(x) -> 0` as `x -> 0` (or `w == 1`), such that `w(x)/x^eps` is almost
//! decreasing for some `eps < 1`. This module provides the built-in families
//! (constant, power, log-power, tabulated), the Dini integral
//! `int_x^1 w(t)/t dt`, a convergence probe for the Dini condition, the
//! associated smoothed modulus
//!
//! ```text
//!     w~(x) = w(x) / int_x^1 w(t) dt/t,
//! ```
//!
//! and the radial extremal function `phi(t) = int_{|t|}^1 w(u)/u du`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quad;

/// Continuation knot for the log-power family: below `t0 = 1/e` the raw
/// `log^-alpha(1/t)` is increasing; above it we continue with the constant 1.
pub const LOGPOWER_KNOT: f64 = 0.36787944117144233; // exp(-1)

/// Lower end of tabulation grids. Seminorm cubes never probe below this.
pub const TAB_GRID_LO: f64 = 9.094947017729282e-13; // 2^-40

/// Upper end of tabulation grids; the tilde transform is undefined at 1.
pub const TAB_GRID_HI: f64 = 1.0 - 9.765625e-4; // 1 - 2^-10

/// Node count for the tilde tabulation (well above the 512-node floor so
/// that log-grid interpolation stays below 1e-6 relative error).
pub const TILDE_GRID_N: usize = 16384;

/// Default lower probe limit for the Dini convergence test.
pub const DEFAULT_PROBE_FLOOR: f64 = TAB_GRID_LO;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModulusFamily {
    /// `w == 1` (the BMO scale).
    Constant,
    /// `w(t) = t^alpha`, `0 < alpha < 1` (the Lipschitz-alpha scale).
    Power { alpha: f64 },
    /// `w(t) = log^-alpha(1/t)` for `t <= 1/e`, continued by the constant 1,
    /// with `0 <= alpha < 1`. `alpha = 0` coincides with the constant family.
    LogPower { alpha: f64 },
    /// Monotone samples on a logarithmic grid in `(0, 1]`, interpolated
    /// linearly in `log t`.
    Tabulated { samples: Vec<(f64, f64)> },
}

/// A modulus of continuity together with its almost-decreasing certificate
/// `(eps, c_eps)`: for all `0 < t < s <= 1`,
/// `w(s)/s^eps <= c_eps * w(t)/t^eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Modulus {
    #[serde(flatten)]
    pub family: ModulusFamily,
    pub epsilon: f64,
    pub c_epsilon: f64,
}

impl Modulus {
    /// `w == 1`, certified with `eps = 1/2`, `c_eps = 1`.
    pub fn constant() -> Self {
        Modulus {
            family: ModulusFamily::Constant,
            epsilon: 0.5,
            c_epsilon: 1.0,
        }
    }

    /// `w(t) = t^alpha`; `w(t)/t^eps` with `eps = (1+alpha)/2` is strictly
    /// decreasing, so `c_eps = 1`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "power modulus needs alpha in (0,1), got {alpha}"
            )));
        }
        Ok(Modulus {
            family: ModulusFamily::Power { alpha },
            epsilon: (1.0 + alpha) / 2.0,
            c_epsilon: 1.0,
        })
    }

    /// `w(t) = log^-alpha(1/t)` continued past `1/e` by 1. The constant
    /// `c_eps` for `eps = 1/2` is measured on the tabulation grid.
    pub fn log_power(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Domain(format!(
                "log-power modulus needs alpha in [0,1), got {alpha}"
            )));
        }
        let mut m = Modulus {
            family: ModulusFamily::LogPower { alpha },
            epsilon: 0.5,
            c_epsilon: 1.0,
        };
        m.c_epsilon = m.measure_c_epsilon(m.epsilon) * 1.05;
        Ok(m)
    }

    /// A tabulated modulus. Samples must be strictly increasing in the
    /// abscissa, nondecreasing and nonnegative in the value, with abscissae
    /// inside `(0, 1]`.
    pub fn tabulated(samples: Vec<(f64, f64)>, epsilon: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain("tabulated modulus needs >= 2 samples".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0,1), got {epsilon}"
            )));
        }
        for w in samples.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::Domain("tabulated abscissae must increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Domain("tabulated values must be nondecreasing".into()));
            }
        }
        for &(t, v) in &samples {
            if !(t > 0.0 && t <= 1.0) || !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("bad tabulated sample ({t}, {v})")));
            }
        }
        let mut m = Modulus {
            family: ModulusFamily::Tabulated { samples },
            epsilon,
            c_epsilon: 1.0,
        };
        m.c_epsilon = m.measure_c_epsilon(epsilon) * 1.05;
        Ok(m)
    }

    /// Evaluate the modulus at `x in (0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain(format!("modulus argument {x} not in (0,1]")));
        }
        Ok(self.eval_raw(x))
    }

    /// Evaluation with the argument clamped into the valid range. Intended
    /// for geometric internals whose arguments are in range up to rounding.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        self.eval_raw(x.clamp(f64::MIN_POSITIVE, 1.0))
    }

    fn eval_raw(&self, x: f64) -> f64 {
        match &self.family {
            ModulusFamily::Constant => 1.0,
            ModulusFamily::Power { alpha } => x.powf(*alpha),
            ModulusFamily::LogPower { alpha } => {
                if *alpha == 0.0 {
                    1.0
                } else {
                    let l = (1.0 / x).ln().max(1.0);
                    l.powf(-alpha)
                }
            }
            ModulusFamily::Tabulated { samples } => interp_log_linear(samples, x),
        }
    }

    /// Derivative of the modulus where it is defined (one-sided at the
    /// log-power knot and at tabulation nodes).
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.family {
            ModulusFamily::Constant => 0.0,
            ModulusFamily::Power { alpha } => alpha * x.powf(alpha - 1.0),
            ModulusFamily::LogPower { alpha } => {
                if *alpha == 0.0 || x >= LOGPOWER_KNOT {
                    0.0
                } else {
                    let l = (1.0 / x).ln();
                    alpha * l.powf(-alpha - 1.0) / x
                }
            }
            ModulusFamily::Tabulated { samples } => {
                // Piecewise slope of the log-linear interpolant: dv/du / t.
                let (i, j) = bracket(samples, x);
                if i == j {
                    return 0.0;
                }
                let (t0, v0) = samples[i];
                let (t1, v1) = samples[j];
                (v1 - v0) / (t1.ln() - t0.ln()) / x
            }
        }
    }

    /// The Dini integral `int_x^1 w(t)/t dt` for `0 < x < 1`.
    ///
    /// Closed forms are used for the analytic families; the log-power family
    /// integrates its raw (uncontinued) integrand `log^-alpha(1/t)/t`, whose
    /// antiderivative is exact, so that the associated `w~` has the exact
    /// closed form `(1-alpha) / log(1/x)`. Tabulated moduli integrate their
    /// interpolant exactly segment by segment.
    pub fn dini_integral(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!(
                "dini integral lower limit {x} not in (0,1)"
            )));
        }
        Ok(self.dini_raw(x))
    }

    fn dini_raw(&self, x: f64) -> f64 {
        match &self.family {
            ModulusFamily::Constant => (1.0 / x).ln(),
            ModulusFamily::Power { alpha } => (1.0 - x.powf(*alpha)) / alpha,
            ModulusFamily::LogPower { alpha } => {
                let l = (1.0 / x).ln();
                l.powf(1.0 - alpha) / (1.0 - alpha)
            }
            ModulusFamily::Tabulated { samples } => tabulated_dini(samples, x),
        }
    }

    /// Independent evaluation of the Dini integral by open adaptive
    /// quadrature in the variable `u = log(1/t)` (relative tolerance 1e-10).
    /// Used to cross-check the closed forms.
    pub fn dini_integral_quadrature(&self, x: f64, rel_tol: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!(
                "dini integral lower limit {x} not in (0,1)"
            )));
        }
        let integrand = |u: f64| -> f64 {
            match &self.family {
                // Raw log-power integrand; see dini_integral.
                ModulusFamily::LogPower { alpha } => u.powf(-alpha),
                _ => self.eval_raw((-u).exp()),
            }
        };
        quad::adaptive_quad_open(&integrand, 0.0, (1.0 / x).ln(), rel_tol, "dini integral")
    }

    /// Probe whether `int_0 w(t)/t dt` converges by evaluating the Dini
    /// integral at a dyadically decreasing sequence of lower limits.
    pub fn is_dini(&self, probe_floor: f64) -> DiniReport {
        let floor = if probe_floor > 0.0 && probe_floor < 0.5 {
            probe_floor
        } else {
            DEFAULT_PROBE_FLOOR
        };
        let k_max = (-floor.log2()).ceil() as usize;
        let probes: Vec<(f64, f64)> = (1..=k_max)
            .map(|k| {
                let x = 2.0f64.powi(-(k as i32));
                (x, self.dini_raw(x))
            })
            .collect();
        let verdict = classify_dini_tail(&probes);
        DiniReport { verdict, probes }
    }

    /// The smoothed modulus `w~(x) = w(x)/int_x^1 w(t) dt/t`, tabulated on a
    /// logarithmic grid over `[2^-40, 1 - 2^-10]`. Monotonicity of the result
    /// is asserted, not repaired.
    pub fn tilde(&self) -> Result<Modulus> {
        let lo = TAB_GRID_LO.ln();
        let hi = TAB_GRID_HI.ln();
        let n = TILDE_GRID_N;
        let mut samples = Vec::with_capacity(n);
        let mut prev = -1.0f64;
        for i in 0..n {
            let u = lo + (hi - lo) * (i as f64) / ((n - 1) as f64);
            let x = u.exp();
            let denom = self.dini_raw(x);
            if denom < 1e-300 {
                return Err(Error::Domain(format!(
                    "tilde denominator underflow at x = {x}"
                )));
            }
            let v = self.eval_raw(x) / denom;
            assert!(
                v + 1e-12 * v.abs().max(1.0) >= prev,
                "tilde transform lost monotonicity at x = {x}"
            );
            prev = prev.max(v);
            samples.push((x, v));
        }
        Modulus::tabulated(samples, self.epsilon.min(0.5))
    }

    /// The radial extremal function `phi(t) = int_{|t|}^1 w(u)/u du` inside
    /// the unit ball, extended by zero outside. `phi(0)` is `+inf` exactly
    /// when the modulus fails the Dini condition.
    pub fn extremal_phi(&self, t: Point) -> f64 {
        let r = t.norm();
        if r >= 1.0 {
            return 0.0;
        }
        if r == 0.0 {
            return match &self.family {
                ModulusFamily::Power { alpha } => 1.0 / alpha,
                ModulusFamily::Constant | ModulusFamily::LogPower { .. } => f64::INFINITY,
                ModulusFamily::Tabulated { samples } => {
                    if samples[0].1 > 0.0 {
                        f64::INFINITY
                    } else {
                        tabulated_dini(samples, samples[0].0)
                    }
                }
            };
        }
        self.dini_raw(r)
    }

    /// Radial derivative of `phi`: `phi'(r) = -w(r)/r` for `0 < r < 1`.
    pub fn extremal_phi_gradient(&self, t: Point) -> Point {
        let r = t.norm();
        if r >= 1.0 || r == 0.0 {
            return Point::ZERO;
        }
        t * (-self.eval_raw(r) / (r * r))
    }

    /// Largest sampled violation ratio of the almost-decreasing inequality;
    /// the certificate is valid on the grid when this is `<= c_epsilon`.
    pub fn measure_c_epsilon(&self, epsilon: f64) -> f64 {
        let lo = TAB_GRID_LO.ln();
        let hi = 0.0f64;
        let n = 512;
        let mut worst: f64 = 1.0;
        let mut running_min = f64::INFINITY;
        for i in 0..n {
            let u = lo + (hi - lo) * (i as f64) / ((n - 1) as f64);
            let t = u.exp().min(1.0);
            let g = self.eval_raw(t) / t.powf(epsilon);
            if running_min.is_finite() {
                worst = worst.max(g / running_min);
            }
            running_min = running_min.min(g);
        }
        worst
    }

    /// Verify the three modulus invariants on a log grid of `n >= 256` points:
    /// monotonicity, decay to zero (unless constant), and the stored
    /// almost-decreasing certificate.
    pub fn verify(&self, n: usize) -> Result<()> {
        let n = n.max(256);
        let lo = TAB_GRID_LO.ln();
        let mut prev = -f64::INFINITY;
        let mut running_min_g = f64::INFINITY;
        for i in 0..n {
            let u = lo * (1.0 - (i as f64) / ((n - 1) as f64));
            let t = u.exp().min(1.0);
            let v = self.eval_raw(t);
            if v + 1e-12 * v.abs().max(1.0) < prev {
                return Err(Error::Domain(format!("modulus not nondecreasing at {t}")));
            }
            prev = prev.max(v);
            let g = v / t.powf(self.epsilon);
            if running_min_g.is_finite() && g > self.c_epsilon * running_min_g * (1.0 + 1e-9) {
                return Err(Error::Domain(format!(
                    "almost-decreasing certificate fails at {t}"
                )));
            }
            running_min_g = running_min_g.min(g);
        }
        // Vanishing at small scales: the power family is probed directly;
        // the log-power family vanishes analytically but too slowly for a
        // finite probe, so it is exempt along with the constant family.
        let vanishes = match self.family {
            ModulusFamily::Constant | ModulusFamily::LogPower { .. } => true,
            ModulusFamily::Power { .. } | ModulusFamily::Tabulated { .. } => {
                self.eval_raw(TAB_GRID_LO) < self.eval_raw(0.5) / 10.0
            }
        };
        if !vanishes {
            return Err(Error::Domain(
                "modulus does not vanish at small scales".into(),
            ));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, ModulusFamily::Constant)
            || matches!(self.family, ModulusFamily::LogPower { alpha } if alpha == 0.0)
    }
}

impl<'de> Deserialize<'de> for Modulus {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(flatten)]
            family: ModulusFamily,
            epsilon: Option<f64>,
            c_epsilon: Option<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let base = match &raw.family {
            ModulusFamily::Constant => Modulus::constant(),
            ModulusFamily::Power { alpha } => {
                Modulus::power(*alpha).map_err(serde::de::Error::custom)?
            }
            ModulusFamily::LogPower { alpha } => {
                Modulus::log_power(*alpha).map_err(serde::de::Error::custom)?
            }
            ModulusFamily::Tabulated { samples } => {
                Modulus::tabulated(samples.clone(), raw.epsilon.unwrap_or(0.5))
                    .map_err(serde::de::Error::custom)?
            }
        };
        Ok(Modulus {
            family: base.family,
            epsilon: raw.epsilon.unwrap_or(base.epsilon),
            c_epsilon: raw.c_epsilon.unwrap_or(base.c_epsilon),
        })
    }
}

/// Convergence verdict of the Dini probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiniVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiniReport {
    pub verdict: DiniVerdict,
    /// `(lower limit, dini integral)` pairs at dyadic lower limits.
    pub probes: Vec<(f64, f64)>,
}

impl DiniReport {
    pub fn is_convergent(&self) -> Option<bool> {
        match self.verdict {
            DiniVerdict::Convergent => Some(true),
            DiniVerdict::Divergent => Some(false),
            DiniVerdict::Inconclusive => None,
        }
    }
}

/// Classify the tail of the probe sequence: geometric decay of the
/// increments means convergence; a power-law tail `k^-p` with `p <= 1`
/// means the integrals grow without bound.
fn classify_dini_tail(probes: &[(f64, f64)]) -> DiniVerdict {
    if probes.len() < 8 {
        return DiniVerdict::Inconclusive;
    }
    let diffs: Vec<f64> = probes.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let scale = probes.last().unwrap().1.abs().max(1.0);
    let tail_len = 12.min(diffs.len());
    let tail = &diffs[diffs.len() - tail_len..];
    if tail.iter().all(|&d| d.abs() <= 1e-13 * scale) {
        return DiniVerdict::Convergent;
    }
    if tail.iter().any(|&d| d < -1e-12 * scale) {
        return DiniVerdict::Inconclusive;
    }
    // Geometric-mean ratio of consecutive increments over the tail.
    let mut log_ratio_sum = 0.0;
    let mut count = 0usize;
    for w in tail.windows(2) {
        if w[0] > 0.0 && w[1] > 0.0 {
            log_ratio_sum += (w[1] / w[0]).ln();
            count += 1;
        }
    }
    if count == 0 {
        return DiniVerdict::Inconclusive;
    }
    let mean_ratio = (log_ratio_sum / count as f64).exp();
    if mean_ratio <= 0.97 {
        return DiniVerdict::Convergent;
    }
    // Power-law fit of log d_k against log k over the tail.
    let k0 = diffs.len() - tail_len;
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0)
        .map(|(i, &d)| (((k0 + i + 1) as f64).ln(), d.ln()))
        .collect();
    if pts.len() < 4 {
        return DiniVerdict::Inconclusive;
    }
    let slope = least_squares_slope(&pts);
    if slope >= -1.0 {
        DiniVerdict::Divergent
    } else if slope < -1.1 {
        DiniVerdict::Convergent
    } else {
        DiniVerdict::Inconclusive
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Log-abscissa linear interpolation, clamped to the end values outside the
/// sample range.
fn interp_log_linear(samples: &[(f64, f64)], x: f64) -> f64 {
    let (i, j) = bracket(samples, x);
    if i == j {
        return samples[i].1;
    }
    let (t0, v0) = samples[i];
    let (t1, v1) = samples[j];
    let s = (x.ln() - t0.ln()) / (t1.ln() - t0.ln());
    v0 + (v1 - v0) * s
}

fn bracket(samples: &[(f64, f64)], x: f64) -> (usize, usize) {
    if x <= samples[0].0 {
        return (0, 0);
    }
    if x >= samples[samples.len() - 1].0 {
        return (samples.len() - 1, samples.len() - 1);
    }
    let mut lo = 0usize;
    let mut hi = samples.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if samples[mid].0 <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Exact Dini integral of the tabulated interpolant. In `u = log t` the
/// interpolant is piecewise linear, so each segment contributes a trapezoid;
/// the constant extensions below/above the grid integrate in closed form.
fn tabulated_dini(samples: &[(f64, f64)], x: f64) -> f64 {
    let t_max = samples[samples.len() - 1].0;
    let v_max = samples[samples.len() - 1].1;
    if x >= t_max {
        return v_max * (1.0 / x).ln();
    }
    // Constant tail above the last node.
    let mut total = v_max * (1.0 / t_max).ln();
    let t_min = samples[0].0;
    let start = x.max(t_min);
    // Full and partial trapezoids between start and t_max.
    for w in samples.windows(2) {
        let (a, va) = w[0];
        let (b, vb) = w[1];
        if b <= start {
            continue;
        }
        let lo = start.max(a);
        let (vlo, vhi) = if lo == a {
            (va, vb)
        } else {
            (interp_log_linear(samples, lo), vb)
        };
        total += 0.5 * (vlo + vhi) * (b.ln() - lo.ln());
    }
    if x < t_min {
        total += samples[0].1 * (t_min.ln() - x.ln());
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let c = Modulus::constant();
        assert_eq!(c.eval(0.5).unwrap(), 1.0);
        let p = Modulus::power(0.5).unwrap();
        assert!((p.eval(0.25).unwrap() - 0.5).abs() < 1e-15);
        let lp = Modulus::log_power(0.5).unwrap();
        // log^{-1/2}(e^4) = 1/2
        assert!((lp.eval((-4.0f64).exp()).unwrap() - 0.5).abs() < 1e-14);
        assert!(c.eval(0.0).is_err());
        assert!(c.eval(1.5).is_err());
    }

    #[test]
    fn eval_logpower_matches_tabulated_variant() {
        let lp = Modulus::log_power(0.5).unwrap();
        let samples: Vec<(f64, f64)> = (0..2048)
            .map(|i| {
                let u = TAB_GRID_LO.ln() * (1.0 - i as f64 / 2047.0);
                let t = u.exp().min(1.0);
                (t, lp.eval_clamped(t))
            })
            .collect();
        let tab = Modulus::tabulated(samples, 0.5).unwrap();
        let x = (-4.0f64).exp();
        assert!((tab.eval(x).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn dini_closed_forms() {
        let c = Modulus::constant();
        for &x in &[0.5, 0.1, 1e-6] {
            assert!((c.dini_integral(x).unwrap() - (1.0 / x).ln()).abs() < 1e-12);
        }
        let p = Modulus::power(0.3).unwrap();
        for &x in &[0.5f64, 0.01] {
            let expect = (1.0 - x.powf(0.3)) / 0.3;
            assert!((p.dini_integral(x).unwrap() - expect).abs() < 1e-12);
        }
        let lp = Modulus::log_power(0.5).unwrap();
        let x = 1e-4f64;
        let expect = (1.0 / x).ln().sqrt() * 2.0;
        assert!((lp.dini_integral(x).unwrap() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn dini_closed_forms_match_quadrature() {
        for m in [
            Modulus::constant(),
            Modulus::power(0.5).unwrap(),
            Modulus::power(0.2).unwrap(),
        ] {
            for &x in &[0.5, 0.03, 1e-5] {
                let cf = m.dini_integral(x).unwrap();
                let q = m.dini_integral_quadrature(x, 1e-10).unwrap();
                assert!(
                    (cf - q).abs() <= 1e-9 * cf.abs().max(1.0),
                    "{cf} vs {q} at {x}"
                );
            }
        }
        // Log-power integrand has an integrable endpoint singularity.
        let lp = Modulus::log_power(0.5).unwrap();
        for &x in &[0.1, 1e-3] {
            let cf = lp.dini_integral(x).unwrap();
            let q = lp.dini_integral_quadrature(x, 1e-10).unwrap();
            assert!((cf - q).abs() <= 1e-7 * cf, "{cf} vs {q} at {x}");
        }
    }

    #[test]
    fn dini_verdicts() {
        assert_eq!(
            Modulus::power(0.5).unwrap().is_dini(1e-10).verdict,
            DiniVerdict::Convergent
        );
        assert_eq!(
            Modulus::constant().is_dini(1e-12).verdict,
            DiniVerdict::Divergent
        );
        assert_eq!(
            Modulus::log_power(0.5).unwrap().is_dini(1e-12).verdict,
            DiniVerdict::Divergent
        );
    }

    #[test]
    fn tilde_closed_forms() {
        // Constant: w~(x) = 1/log(1/x).
        let t = Modulus::constant().tilde().unwrap();
        for &x in &[1e-8f64, 1e-4, 0.1] {
            let expect = 1.0 / (1.0 / x).ln();
            let got = t.eval(x).unwrap();
            assert!(
                (got - expect).abs() < 1e-6 * expect,
                "constant tilde at {x}: {got} vs {expect}"
            );
        }
        // Power: w~(x) = alpha x^alpha / (1 - x^alpha).
        let alpha = 0.5;
        let t = Modulus::power(alpha).unwrap().tilde().unwrap();
        for &x in &[1e-8f64, 1e-3, 0.2] {
            let xa = x.powf(alpha);
            let expect = alpha * xa / (1.0 - xa);
            let got = t.eval(x).unwrap();
            assert!(
                (got - expect).abs() < 1e-6 * expect,
                "power tilde at {x}: {got} vs {expect}"
            );
        }
        // Log-power: w~(x) = (1 - alpha)/log(1/x) exactly for the raw family.
        for &alpha in &[0.0, 0.5] {
            let t = Modulus::log_power(alpha).unwrap().tilde().unwrap();
            for &x in &[1e-8f64, 1e-3] {
                let expect = (1.0 - alpha) / (1.0 / x).ln();
                let got = t.eval(x).unwrap();
                assert!(
                    (got - expect).abs() < 1e-6 * expect,
                    "log-power({alpha}) tilde at {x}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn dini_monotone_in_lower_limit() {
        // The integral with fixed upper limit grows as the lower limit
        // decreases.
        for m in [Modulus::power(0.5).unwrap(), Modulus::constant()] {
            let mut prev = 0.0f64;
            for i in 1..40 {
                let x = 2f64.powi(-i);
                let v = m.dini_integral(x).unwrap();
                assert!(v >= prev - 1e-14, "{v} < {prev} at {x}");
                prev = v;
            }
        }
    }

    #[test]
    fn phi_examples() {
        let c = Modulus::constant();
        assert!((c.extremal_phi(Point::new(0.5, 0.0)) - 2.0f64.ln()).abs() < 1e-14);
        assert_eq!(c.extremal_phi(Point::new(1.5, 0.0)), 0.0);
        assert_eq!(c.extremal_phi(Point::new(1.0, 0.0)), 0.0);
        let p = Modulus::power(0.5).unwrap();
        assert!((p.extremal_phi(Point::new(0.25, 0.0)) - 1.0).abs() < 1e-14);
        // Continuity at the unit sphere: phi -> 0 from inside.
        let r = 1.0 - 2f64.powi(-20);
        let tiny = c.extremal_phi(Point::new(r, 0.0));
        assert!(tiny.abs() <= c.dini_integral(r).unwrap() + 1e-18);
        assert!(tiny < 1e-5);
    }

    #[test]
    fn certificates_verify() {
        for m in [
            Modulus::constant(),
            Modulus::power(0.25).unwrap(),
            Modulus::power(0.75).unwrap(),
            Modulus::log_power(0.0).unwrap(),
            Modulus::log_power(0.5).unwrap(),
            Modulus::log_power(0.9).unwrap(),
        ] {
            m.verify(512).unwrap();
        }
        Modulus::constant().tilde().unwrap().verify(512).unwrap();
        Modulus::power(0.5)
            .unwrap()
            .tilde()
            .unwrap()
            .verify(512)
            .unwrap();
    }

    #[test]
    fn json_round_trip() {
        let m = Modulus::power(0.5).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"family\":\"power\""));
        let back: Modulus = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
        let short: Modulus = serde_json::from_str(r#"{"family":"power","alpha":0.5}"#).unwrap();
        assert_eq!(short, m);
        let c: Modulus = serde_json::from_str(r#"{"family":"constant"}"#).unwrap();
        assert_eq!(c, Modulus::constant());
    }
}
