//! Principal-value evaluation against independent oracles: the extra
//! cancellation on balls, the closed form of the Beurling transform of a
//! disk, the radial-logarithm reduction for star-shaped regions, and the
//! boundary-integral gradient formula against finite differences.

mod common;

use std::sync::Arc;
use std::time::Instant;

use campanato::czkernel::{
    cancellation_report, grad_tchi_boundary, pv_tchi, pv_tchi_detailed, pv_tchi_exterior, Kernel,
    PvParams,
};
use campanato::geometry::{Domain, Point};
use campanato::moduli::Modulus;

use common::{polygon_corner_angles, radial_log_oracle, riemann_pv_oracle};

#[test]
fn ball_center_is_zero() {
    let d = Domain::unit_ball();
    let k = Kernel::beurling_re();
    let v = pv_tchi(&d, &k, Point::ZERO, &PvParams::with_tol(1e-6)).unwrap();
    assert!(v.abs() < 1e-6, "{v}");
}

#[test]
fn ball_off_center_cancellation() {
    // Extra cancellation: T chi_B vanishes everywhere inside the ball for
    // even kernels, not only at the center.
    let d = Domain::unit_ball();
    let params = PvParams::with_tol(2e-5);
    for k in [
        Kernel::beurling_re(),
        Kernel::beurling_im(),
        Kernel::riesz_second(0, 0).unwrap(),
        Kernel::riesz_second(0, 1).unwrap(),
    ] {
        for &(x, y) in &[(0.5, 0.2), (-0.7, 0.1), (0.0, 0.85), (0.3, -0.6)] {
            let start = Instant::now();
            let res = pv_tchi_detailed(&d, &k, Point::new(x, y), &params).unwrap();
            assert!(
                res.value.abs() < 1e-4,
                "{} at ({x},{y}): {} (bound {}, cells {})",
                k.name,
                res.value,
                res.error_bound,
                res.cells
            );
            // Loose per-probe sanity timing; the acceptance suite binds the
            // batch runtime.
            assert!(start.elapsed().as_secs() < 30);
        }
    }
}

#[test]
fn cancellation_radius_independence() {
    let d = Domain::unit_ball();
    let k = Kernel::beurling_re();
    let y = Point::new(0.4, -0.3);
    let tol = 1e-5;
    let half = pv_tchi(
        &d,
        &k,
        y,
        &PvParams {
            tol,
            cancel_factor: 0.5,
            ..Default::default()
        },
    )
    .unwrap();
    let quarter = pv_tchi(
        &d,
        &k,
        y,
        &PvParams {
            tol,
            cancel_factor: 0.25,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((half - quarter).abs() <= 2.0 * tol, "{half} vs {quarter}");
}

#[test]
fn translation_invariance() {
    let k = Kernel::riesz_second(0, 1).unwrap();
    let tol = 1e-5;
    let d1 = Domain::unit_square();
    let d2 = Domain::polygon(vec![
        Point::new(3.0, -2.0),
        Point::new(4.0, -2.0),
        Point::new(4.0, -1.0),
        Point::new(3.0, -1.0),
    ])
    .unwrap();
    let y = Point::new(0.3, 0.65);
    let shift = Point::new(3.0, -2.0);
    let a = pv_tchi(&d1, &k, y, &PvParams::with_tol(tol)).unwrap();
    let b = pv_tchi(&d2, &k, y + shift, &PvParams::with_tol(tol)).unwrap();
    assert!((a - b).abs() <= 2.0 * tol, "{a} vs {b}");
}

#[test]
fn square_center_is_zero() {
    // Fourfold symmetry cancels the second angular harmonic.
    let d = Domain::unit_square();
    let k = Kernel::beurling_re();
    let v = pv_tchi(&d, &k, Point::new(0.5, 0.5), &PvParams::with_tol(1e-6)).unwrap();
    assert!(v.abs() < 1e-6, "{v}");
    // Rotation-paired Riemann oracle agrees (exactly zero by pairing).
    let oracle = riemann_pv_oracle(&d, &k, Point::new(0.5, 0.5), 1e-3, 16);
    assert!(oracle.abs() < 1e-3, "{oracle}");
}

#[test]
fn square_generic_point_vs_oracles() {
    let d = Domain::unit_square();
    let y = Point::new(0.25, 0.5);
    for k in [Kernel::beurling_re(), Kernel::beurling_im()] {
        let tol = 1e-5;
        let v = pv_tchi(&d, &k, y, &PvParams::with_tol(tol)).unwrap();
        // Radial-log oracle (independent algebraic route).
        let cuts = polygon_corner_angles(&d, y);
        let radial = radial_log_oracle(&d, &k, y, 20_000, &cuts);
        assert!(
            (v - radial).abs() < 5e-5,
            "{}: quadtree {v} vs radial {radial}",
            k.name
        );
        // Rotation-paired Riemann sum with boundary subsampling.
        let riemann = riemann_pv_oracle(&d, &k, y, 4e-4, 16);
        assert!(
            (v - riemann).abs() < 1e-3,
            "{}: quadtree {v} vs riemann {riemann}",
            k.name
        );
    }
}

#[test]
fn exterior_disk_closed_form() {
    // For the unit disk the Beurling transform of the characteristic
    // function at an exterior point z is -1/z^2 (mean-value property of the
    // holomorphic kernel), so at z = 2: -1/4, and at z = 2i: +1/4.
    let d = Domain::unit_ball();
    let tol = 1e-5;
    let re = Kernel::beurling_re();
    let v = pv_tchi_exterior(&d, &re, Point::new(2.0, 0.0), &PvParams::with_tol(tol)).unwrap();
    assert!((v + 0.25).abs() < 2.0 * tol, "{v}");
    let v_sym =
        pv_tchi_exterior(&d, &re, Point::new(-2.0, 0.0), &PvParams::with_tol(tol)).unwrap();
    assert!((v - v_sym).abs() < 2.0 * tol, "evenness: {v} vs {v_sym}");
    let v_rot = pv_tchi_exterior(&d, &re, Point::new(0.0, 2.0), &PvParams::with_tol(tol)).unwrap();
    assert!((v_rot - 0.25).abs() < 2.0 * tol, "{v_rot}");
    // Decay |T chi_D| = R^2/|y|^2 for the disk.
    for &r in &[4.0, 8.0, 16.0] {
        let v = pv_tchi_exterior(&d, &re, Point::new(r, 0.0), &PvParams::with_tol(1e-7)).unwrap();
        assert!(
            (v + 1.0 / (r * r)).abs() < 1e-5 / (r * r) + 2e-7,
            "decay at {r}: {v}"
        );
    }
    let im = Kernel::beurling_im();
    let v = pv_tchi_exterior(&d, &im, Point::new(2.0, 0.0), &PvParams::with_tol(tol)).unwrap();
    assert!(v.abs() < 2.0 * tol, "imaginary part at real axis: {v}");
}

#[test]
fn gradient_formula_square() {
    let d = Domain::unit_square();
    let k = Kernel::beurling_re();
    // Center: zero by symmetry.
    let g = grad_tchi_boundary(&d, &k, Point::new(0.5, 0.5), 1).unwrap();
    assert!(g.norm() < 1e-10, "{g:?}");
    // Generic point: finite-difference cross-check of the quadtree values.
    let y = Point::new(0.25, 0.5);
    let g = grad_tchi_boundary(&d, &k, y, 1).unwrap();
    let h = 1e-3;
    let params = PvParams::with_tol(5e-7);
    let fd = Point::new(
        (pv_tchi(&d, &k, Point::new(y.x + h, y.y), &params).unwrap()
            - pv_tchi(&d, &k, Point::new(y.x - h, y.y), &params).unwrap())
            / (2.0 * h),
        (pv_tchi(&d, &k, Point::new(y.x, y.y + h), &params).unwrap()
            - pv_tchi(&d, &k, Point::new(y.x, y.y - h), &params).unwrap())
            / (2.0 * h),
    );
    assert!(
        (g - fd).norm() <= 1e-2 * fd.norm().max(1e-3),
        "boundary integral {g:?} vs finite difference {fd:?}"
    );
}

#[test]
fn gradient_vanishes_inside_ball() {
    let d = Domain::unit_ball();
    for k in [Kernel::beurling_re(), Kernel::riesz_second(0, 1).unwrap()] {
        let g = grad_tchi_boundary(&d, &k, Point::new(0.3, 0.1), 1).unwrap();
        assert!(g.norm() < 1e-8, "{}: {g:?}", k.name);
    }
}

#[test]
fn cancellation_report_shifted_ball() {
    // Affine invariance: a shifted and scaled ball cancels just the same.
    let d = Domain::ball(Point::new(0.3, 0.3), 0.2).unwrap();
    let k = Kernel::riesz_second(0, 1).unwrap();
    let probes: Vec<Point> = vec![
        Point::new(0.3, 0.3),
        Point::new(0.38, 0.25),
        Point::new(0.22, 0.35),
        Point::new(0.3, 0.44),
    ];
    let rep = cancellation_report(&d, &k, &probes, &PvParams::with_tol(2e-5)).unwrap();
    assert!(rep.max_abs <= 1e-4, "{}", rep.max_abs);
    // Odd-kernel rejection.
    let odd_samples: Vec<f64> = (0..512)
        .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 512.0).cos())
        .collect();
    let odd = Kernel::custom(odd_samples, "first-harmonic").unwrap();
    assert!(!odd.even);
    assert!(cancellation_report(&d, &odd, &probes, &PvParams::default()).is_err());
}

#[test]
fn phi_restricted_oracle_linear_field() {
    // For the ball with an even kernel and f = x1, the restricted operator
    // at the center vanishes by odd symmetry.
    let d = Arc::new(Domain::unit_ball());
    let k = Kernel::beurling_re();
    let f = campanato::geometry::ScalarField::coordinate(d.bounding_box(), 0);
    let v = campanato::t1::restricted_apply(&d, &k, &f, Point::ZERO, 1e-4).unwrap();
    assert!(v.abs() < 2e-4, "{v}");
    let _ = Modulus::constant();
}
