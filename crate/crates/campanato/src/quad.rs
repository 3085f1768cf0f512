//! One-dimensional quadrature helpers and the smooth step profile.

use crate::error::{Error, Result};

/// 4-point Gauss-Legendre nodes on [-1, 1].
pub const GL4_NODES: [f64; 4] = [
    -0.8611363115940526,
    -0.3399810435848563,
    0.3399810435848563,
    0.8611363115940526,
];
pub const GL4_WEIGHTS: [f64; 4] = [
    0.3478548451374538,
    0.6521451548625461,
    0.6521451548625461,
    0.3478548451374538,
];

/// 8-point Gauss-Legendre nodes on [-1, 1].
pub const GL8_NODES: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
pub const GL8_WEIGHTS: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// Fixed Gauss-Legendre integral of `f` over `[a, b]` with 8 nodes.
pub fn gauss8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += GL8_WEIGHTS[i] * f(mid + half * GL8_NODES[i]);
    }
    acc * half
}

/// Adaptive quadrature with an open (midpoint-refinement) rule, tolerant of
/// integrable endpoint singularities: the integrand is never evaluated at
/// `a` or `b`. Refines the worst interval by error estimate until the
/// summed estimate meets `rel_tol` relative to the running total.
pub fn adaptive_quad_open<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    context: &str,
) -> Result<f64> {
    if !(b > a) {
        if b == a {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!("bad interval [{a}, {b}]")));
    }
    struct Node {
        err: f64,
        seq: u64,
        a: f64,
        b: f64,
        value: f64,
    }
    impl PartialEq for Node {
        fn eq(&self, o: &Self) -> bool {
            self.seq == o.seq
        }
    }
    impl Eq for Node {}
    impl PartialOrd for Node {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Node {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            // Max-heap by error estimate, earliest insertion on ties.
            self.err.total_cmp(&o.err).then(o.seq.cmp(&self.seq))
        }
    }
    let eval = |x0: f64, x1: f64| -> Result<(f64, f64)> {
        // Three nested composite midpoint levels, extrapolated twice; the
        // difference of the two extrapolants estimates the error.
        let m1 = midpoint3(f, x0, x1);
        let mid = 0.5 * (x0 + x1);
        let m2 = midpoint3(f, x0, mid) + midpoint3(f, mid, x1);
        let q1 = 0.5 * (x0 + mid);
        let q2 = 0.5 * (mid + x1);
        let m4 = midpoint3(f, x0, q1)
            + midpoint3(f, q1, mid)
            + midpoint3(f, mid, q2)
            + midpoint3(f, q2, x1);
        if !m4.is_finite() {
            return Err(Error::Poisoned(format!(
                "non-finite quadrature sample in {context}"
            )));
        }
        let r12 = m2 + (m2 - m1) / 3.0;
        let r24 = m4 + (m4 - m2) / 3.0;
        Ok((r24 + (r24 - r12) / 15.0, (r24 - r12).abs()))
    };
    let mut heap = std::collections::BinaryHeap::new();
    let mut settled = 0.0f64; // intervals too small to subdivide further
    let (v0, e0) = eval(a, b)?;
    heap.push(Node {
        err: e0,
        seq: 0,
        a,
        b,
        value: v0,
    });
    let mut total = v0;
    let mut err_sum = e0;
    let mut seq = 0u64;
    let mut evals = 21usize;
    while err_sum > rel_tol * total.abs().max(1e-300) {
        let node = match heap.pop() {
            Some(n) => n,
            None => break,
        };
        let noise_floor = f64::EPSILON
            * total.abs().max(1e-300)
            * ((node.b - node.a) / (b - a)).max(1e-6);
        if node.b - node.a < f64::EPSILON * (node.a.abs() + node.b.abs() + 1e-12)
            || node.err <= noise_floor
        {
            err_sum -= node.err;
            settled += node.value;
            continue;
        }
        total -= node.value;
        err_sum -= node.err;
        let mid = 0.5 * (node.a + node.b);
        for (x0, x1) in [(node.a, mid), (mid, node.b)] {
            let (v, e) = eval(x0, x1)?;
            seq += 1;
            total += v;
            err_sum += e;
            heap.push(Node {
                err: e,
                seq,
                a: x0,
                b: x1,
                value: v,
            });
        }
        evals += 42;
        if evals > 3_000_000 {
            return Err(Error::Quadrature {
                context: context.to_string(),
                achieved: total,
                error_bound: err_sum,
            });
        }
    }
    // Deterministic final sum in insertion order.
    let mut nodes = heap.into_vec();
    nodes.sort_by_key(|n| n.seq);
    Ok(settled + nodes.iter().map(|n| n.value).sum::<f64>())
}

/// Composite 3-cell midpoint rule (open: no endpoint evaluations).
fn midpoint3<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let h = (b - a) / 3.0;
    h * (f(a + 0.5 * h) + f(a + 1.5 * h) + f(a + 2.5 * h))
}

/// The standard C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`, built from
/// `exp(-1/t)` blending.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    let da = a / (t * t);
    let db = -b / ((1.0 - t) * (1.0 - t));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_quad_smooth() {
        let v = adaptive_quad_open(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, "sin")
            .unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn open_quad_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2, singular at the left endpoint.
        let v = adaptive_quad_open(&|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10, "rsqrt").unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn gauss8_polynomial_exact() {
        // Degree-15 exactness.
        let f = |x: f64| x.powi(14);
        let v = gauss8(&f, -1.0, 1.0);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_step_profile() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        let h = 1e-6;
        for &t in &[0.2, 0.5, 0.8] {
            let fd = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
            assert!((fd - smooth_step_deriv(t)).abs() < 1e-6);
        }
    }
}
