//! Cube means and the Whitney extension operator
//! `f~ = f chi_D + sum_{Q in W', side(Q) <= R} psi_Q f_{Q~}`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Domain, GeneralCube, Point, Rect, ScalarField};
use crate::whitney::{PartitionOfUnity, WhitneyCovering};

/// Mean value of `f` over a cube by tensor midpoint quadrature with
/// `quad_n^2` nodes, Richardson-extrapolated once.
pub fn cube_mean(f: &ScalarField, cube: &GeneralCube, quad_n: usize) -> Result<f64> {
    let n = quad_n.max(2);
    let coarse = midpoint_mean(f, cube, n)?;
    let fine = midpoint_mean(f, cube, 2 * n)?;
    Ok(fine + (fine - coarse) / 3.0)
}

fn midpoint_mean(f: &ScalarField, cube: &GeneralCube, n: usize) -> Result<f64> {
    let rect = cube.rect();
    let hx = rect.width() / n as f64;
    let hy = rect.height() / n as f64;
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let p = Point::new(
                rect.x0 + (i as f64 + 0.5) * hx,
                rect.y0 + (j as f64 + 0.5) * hy,
            );
            let v = f.eval(p);
            if !v.is_finite() {
                return Err(Error::Poisoned(format!(
                    "non-finite sample at ({}, {}) in cube mean",
                    p.x, p.y
                )));
            }
            acc += v;
        }
    }
    Ok(acc / (n * n) as f64)
}

/// The extension `f~` of a field defined on `D`.
pub struct ExtendedField {
    pub domain: Arc<Domain>,
    pub base: ScalarField,
    pub interior: Arc<WhitneyCovering>,
    pub exterior: Arc<WhitneyCovering>,
    pub partition: Arc<PartitionOfUnity>,
    /// Reflected interior cube index per exterior cube (cutoff cubes only).
    pub reflection: Vec<Option<u32>>,
    /// Cached mean `f_{Q~}` per exterior cube under the cutoff.
    pub means: Vec<f64>,
    /// Side cutoff `R` of the extension sum.
    pub cutoff: f64,
    support: Rect,
}

impl ExtendedField {
    pub fn eval(&self, p: Point) -> f64 {
        if self.domain.contains(p) {
            return self.base.eval(p);
        }
        let mut acc = 0.0;
        for (i, psi) in self.partition.psis_at(p) {
            let idx = i as usize;
            if self.exterior.cubes[idx].side() <= self.cutoff && self.reflection[idx].is_some() {
                acc += psi * self.means[idx];
            }
        }
        acc
    }

    /// Analytic gradient on the exterior: `sum grad psi_Q f_{Q~}`.
    pub fn gradient_exterior(&self, p: Point) -> Point {
        let mut acc = Point::ZERO;
        for i in self.partition.covering.dilated_cubes_at(p, 1.25) {
            let idx = i as usize;
            if self.exterior.cubes[idx].side() <= self.cutoff && self.reflection[idx].is_some() {
                acc = acc + self.partition.psi_grad(i, p) * self.means[idx];
            }
        }
        acc
    }

    /// Support hull: the domain together with the `5/4 Q` bump supports of
    /// the cutoff cubes. The extension vanishes outside.
    pub fn support_hull(&self) -> Rect {
        self.support
    }

    /// Package as a [`ScalarField`] (gradient analytic on the exterior,
    /// delegated to the base field inside the domain).
    pub fn as_field(self: &Arc<Self>) -> ScalarField {
        let this = self.clone();
        let f = ScalarField::new(self.support.inflate(1.25), move |p| this.eval(p));
        let this = self.clone();
        let base_has_grad = self.base.has_gradient();
        f.with_gradient(move |p| {
            if this.domain.contains(p) {
                if base_has_grad {
                    this.base.gradient(p).unwrap_or(Point::ZERO)
                } else {
                    this.base.fd_gradient(p, 1e-7)
                }
            } else {
                this.gradient_exterior(p)
            }
        })
    }
}

/// Build the extension of `f` from prebuilt coverings, a partition of unity
/// and the reflection map. `cutoff` restricts the sum to exterior cubes with
/// `side(Q) <= cutoff` (the window size by default).
pub fn extend(
    f: ScalarField,
    domain: &Arc<Domain>,
    interior: &Arc<WhitneyCovering>,
    exterior: &Arc<WhitneyCovering>,
    partition: &Arc<PartitionOfUnity>,
    reflection: Vec<Option<u32>>,
    cutoff: f64,
    quad_n: usize,
) -> Result<ExtendedField> {
    if reflection.len() != exterior.len() {
        return Err(Error::Geometry(
            "reflection map length mismatch with the exterior covering".into(),
        ));
    }
    // Mean per distinct interior reflected cube, then scatter.
    let mut interior_means: HashMap<u32, f64> = HashMap::new();
    for (i, q) in exterior.cubes.iter().enumerate() {
        if q.side() > cutoff {
            continue;
        }
        let refl = reflection[i].ok_or(Error::Reflection { cube: *q })?;
        if let std::collections::hash_map::Entry::Vacant(e) = interior_means.entry(refl) {
            let target = interior.cubes[refl as usize].as_general();
            e.insert(cube_mean(&f, &target, quad_n)?);
        }
    }
    let mut means = vec![f64::NAN; exterior.len()];
    let mut support = domain.bounding_box();
    for (i, q) in exterior.cubes.iter().enumerate() {
        if q.side() > cutoff {
            continue;
        }
        means[i] = interior_means[&reflection[i].unwrap()];
        let bump = q.dilate(1.25).rect();
        support.x0 = support.x0.min(bump.x0);
        support.y0 = support.y0.min(bump.y0);
        support.x1 = support.x1.max(bump.x1);
        support.y1 = support.y1.max(bump.y1);
    }
    Ok(ExtendedField {
        domain: domain.clone(),
        base: f,
        interior: interior.clone(),
        exterior: exterior.clone(),
        partition: partition.clone(),
        reflection,
        means,
        cutoff,
        support,
    })
}

/// Convenience: build coverings, partition, reflection map and extension in
/// one call.
pub fn extend_field(
    f: ScalarField,
    domain: &Arc<Domain>,
    min_level: i32,
    quad_n: usize,
) -> Result<ExtendedField> {
    // One level finer inside: corner exterior cubes need interior
    // candidates half their scale to satisfy the 2 dist(Q, dD) reach.
    let interior = Arc::new(crate::whitney::build_whitney(
        domain,
        crate::whitney::Side::Interior,
        min_level - 1,
    )?);
    let exterior = Arc::new(crate::whitney::build_whitney(
        domain,
        crate::whitney::Side::Exterior,
        min_level,
    )?);
    let partition = Arc::new(crate::whitney::build_partition(&exterior)?);
    let cutoff = domain.window_size();
    let reflection = crate::whitney::reflection_map(&interior, &exterior, cutoff)?;
    extend(
        f, domain, &interior, &exterior, &partition, reflection, cutoff, quad_n,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_constant_and_linear() {
        let support = Rect::new(0.0, 0.0, 1.0, 1.0);
        let c = ScalarField::constant(support, 3.25);
        let q = GeneralCube::new(Point::new(0.3, 0.7), 0.2);
        assert!((cube_mean(&c, &q, 8).unwrap() - 3.25).abs() < 1e-14);
        // f(x) = x1 over the unit cube: mean 1/2 by symmetry.
        let x1 = ScalarField::coordinate(support, 0);
        let unit = GeneralCube::new(Point::new(0.5, 0.5), 1.0);
        assert!((cube_mean(&x1, &unit, 16).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn poisoned_mean() {
        let support = Rect::new(0.0, 0.0, 1.0, 1.0);
        let bad = ScalarField::new(support, |p| if p.x > 0.5 { f64::NAN } else { 0.0 });
        let unit = GeneralCube::new(Point::new(0.5, 0.5), 1.0);
        assert!(matches!(
            cube_mean(&bad, &unit, 4),
            Err(Error::Poisoned(_))
        ));
    }

    #[test]
    fn extension_of_constant_is_constant() {
        let d = Arc::new(Domain::unit_square());
        let f = ScalarField::constant(d.bounding_box(), 1.0);
        let ext = Arc::new(extend_field(f, &d, -7, 8).unwrap());
        // Exactly f on D.
        for &(x, y) in &[(0.1, 0.2), (0.9, 0.9), (0.5, 0.01)] {
            assert_eq!(ext.eval(Point::new(x, y)), 1.0);
        }
        // 1 on covered exterior points whose bumps all lie under the cutoff
        // (points inside the truncation collar would see no bumps at all).
        for &(x, y) in &[(-0.05, 0.5), (1.07, 0.3), (0.5, -0.02)] {
            let p = Point::new(x, y);
            let v = ext.eval(p);
            assert!((v - 1.0).abs() < 1e-12, "{v} at {p:?}");
        }
        // Vanishes far away.
        assert_eq!(ext.eval(Point::new(5.0, 5.0)), 0.0);
    }

    #[test]
    fn extension_equals_f_on_domain() {
        let d = Arc::new(Domain::notched_square());
        let f = ScalarField::coordinate(d.bounding_box(), 0);
        let ext = Arc::new(extend_field(f.clone(), &d, -5, 8).unwrap());
        for &(x, y) in &[(0.1, 0.1), (0.85, 0.9), (0.5, 0.8)] {
            let p = Point::new(x, y);
            if d.contains(p) {
                assert_eq!(ext.eval(p), f.eval(p));
            }
        }
    }

    #[test]
    fn exterior_gradient_consistent() {
        let d = Arc::new(Domain::unit_square());
        let f = ScalarField::coordinate(d.bounding_box(), 0);
        let ext = Arc::new(extend_field(f, &d, -6, 8).unwrap());
        let field = ext.as_field();
        for &(x, y) in &[(-0.08, 0.4), (1.13, 0.62), (0.37, -0.06)] {
            let p = Point::new(x, y);
            assert!(!d.contains(p));
            let g = field.gradient(p).unwrap();
            let fd = field.fd_gradient(p, 1e-6);
            assert!(
                (g - fd).norm() <= 1e-4 * (1.0 + g.norm()),
                "{g:?} vs {fd:?} at {p:?}"
            );
        }
    }
}
