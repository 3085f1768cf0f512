//! Whitney coverings of a domain and of its exterior, the reflected-cube
//! map, and the smooth partition of unity subordinate to the exterior
//! covering.

mod partition;

pub use partition::{build_partition, PartitionOfUnity};

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{exp2i, Domain, DyadicCube, Point, Rect, Window};

/// Which side of the boundary a covering tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Interior,
    Exterior,
}

/// A Whitney covering: dyadic cubes with pairwise disjoint interiors tiling
/// the region (up to the `min_level` truncation collar), each satisfying
/// `diam(Q) <= dist(Q, dD) <= 4 diam(Q)`.
pub struct WhitneyCovering {
    pub side: Side,
    pub domain: Arc<Domain>,
    /// Canonically sorted cube list.
    pub cubes: Vec<DyadicCube>,
    /// Distance of each cube to the boundary (as computed at construction).
    pub dist: Vec<f64>,
    /// Neighbor graph: indices of cubes whose closures touch.
    pub neighbors: Vec<Vec<u32>>,
    pub min_level: i32,
    /// Per-level coordinate index.
    level_index: HashMap<i32, HashMap<(i64, i64), u32>>,
    /// Recorded bounded-overlap constant of the {10Q} family.
    pub n10: u32,
}

impl WhitneyCovering {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn covered_area(&self) -> f64 {
        self.cubes.iter().map(|q| q.area()).sum()
    }

    pub fn index_of(&self, cube: &DyadicCube) -> Option<u32> {
        self.level_index
            .get(&cube.level)
            .and_then(|m| m.get(&(cube.ix, cube.iy)))
            .copied()
    }

    /// Cube of the covering containing the point, if any.
    pub fn cube_at(&self, p: Point) -> Option<u32> {
        for (&level, index) in &self.level_index {
            let s = exp2i(level);
            let key = ((p.x / s).floor() as i64, (p.y / s).floor() as i64);
            if let Some(&i) = index.get(&key) {
                if self.cubes[i as usize].contains(p) {
                    return Some(i);
                }
            }
        }
        None
    }

    /// Indices of cubes whose `factor`-dilation contains `p`.
    pub fn dilated_cubes_at(&self, p: Point, factor: f64) -> Vec<u32> {
        let mut out = Vec::new();
        let half = 0.5 * factor;
        for (&level, index) in &self.level_index {
            let s = exp2i(level);
            // |p - center| <= half * s componentwise.
            let ix_lo = ((p.x - half * s) / s - 0.5).ceil() as i64;
            let ix_hi = ((p.x + half * s) / s - 0.5).floor() as i64;
            let iy_lo = ((p.y - half * s) / s - 0.5).ceil() as i64;
            let iy_hi = ((p.y + half * s) / s - 0.5).floor() as i64;
            for ix in ix_lo..=ix_hi {
                for iy in iy_lo..=iy_hi {
                    if let Some(&i) = index.get(&(ix, iy)) {
                        out.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// All levels present, descending (coarse to fine).
    pub fn levels(&self) -> Vec<i32> {
        let mut l: Vec<i32> = self.level_index.keys().copied().collect();
        l.sort_unstable_by(|a, b| b.cmp(a));
        l
    }
}

/// The acceptance predicate of the construction: the (general) cube lies in
/// the region and `diam(Q) <= dist(Q, dD) <= 4 diam(Q)`.
pub fn accepts(domain: &Domain, side: Side, rect: &Rect) -> bool {
    let diam = rect.diag();
    let dist = domain.dist_rect_to_boundary(rect);
    in_region(domain, side, rect, dist) && dist >= diam && dist <= 4.0 * diam
}

fn in_region(domain: &Domain, side: Side, rect: &Rect, dist_to_boundary: f64) -> bool {
    if dist_to_boundary <= 0.0 {
        return false;
    }
    let inside = domain.contains(rect.center());
    match side {
        Side::Interior => inside,
        Side::Exterior => !inside,
    }
}

/// Build the Whitney covering of the interior or exterior of `domain`,
/// truncated at `min_level`. Deterministic: the recursion order is fixed
/// and the output is canonically sorted.
pub fn build_whitney(domain: &Arc<Domain>, side: Side, min_level: i32) -> Result<WhitneyCovering> {
    let bbox = domain.bounding_box();
    let root_box = match side {
        Side::Interior => bbox,
        Side::Exterior => bbox.inflate(3.0),
    };
    // Root cubes: the dyadic grid at the scale of the box (a handful of
    // cubes; a single ancestor does not exist for boxes straddling grid
    // lines).
    let k0 = root_box
        .width()
        .max(root_box.height())
        .log2()
        .ceil()
        .max(min_level as f64) as i32;
    let s0 = exp2i(k0);
    let mut stack: Vec<DyadicCube> = Vec::new();
    let iy_hi = (root_box.y1 / s0).floor() as i64;
    let ix_hi = (root_box.x1 / s0).floor() as i64;
    for iy in ((root_box.y0 / s0).floor() as i64..=iy_hi).rev() {
        for ix in ((root_box.x0 / s0).floor() as i64..=ix_hi).rev() {
            stack.push(DyadicCube::new(k0, ix, iy));
        }
    }
    let mut accepted: Vec<(DyadicCube, f64)> = Vec::new();
    while let Some(q) = stack.pop() {
        let rect = q.rect();
        let dist = domain.dist_rect_to_boundary(&rect);
        let diam = q.diam();
        if in_region(domain.as_ref(), side, &rect, dist) {
            if dist >= diam && dist <= 4.0 * diam {
                accepted.push((q, dist));
                continue;
            }
            if dist > 4.0 * diam {
                // Unreachable for descendants of a straddling root; fail
                // loudly rather than emit an off-scale cube.
                return Err(Error::Geometry(format!(
                    "cube at level {} unexpectedly deep inside the region",
                    q.level
                )));
            }
        } else {
            // Prune branches that cannot contain region cubes: the cube is
            // entirely on the wrong side and far from the boundary.
            let inside = domain.contains(rect.center());
            let wrong_side = match side {
                Side::Interior => !inside,
                Side::Exterior => inside,
            };
            if wrong_side && dist > 0.0 {
                continue;
            }
        }
        if q.level > min_level {
            // Deterministic child order.
            let ch = q.children();
            stack.push(ch[3]);
            stack.push(ch[2]);
            stack.push(ch[1]);
            stack.push(ch[0]);
        }
    }
    if accepted.is_empty() {
        return Err(Error::Geometry(
            "degenerate domain: no Whitney cube accepted".into(),
        ));
    }
    accepted.sort_by_key(|(q, _)| (q.level, q.ix, q.iy));
    let cubes: Vec<DyadicCube> = accepted.iter().map(|(q, _)| *q).collect();
    let dist: Vec<f64> = accepted.iter().map(|(_, d)| *d).collect();

    let mut level_index: HashMap<i32, HashMap<(i64, i64), u32>> = HashMap::new();
    for (i, q) in cubes.iter().enumerate() {
        level_index
            .entry(q.level)
            .or_default()
            .insert((q.ix, q.iy), i as u32);
    }

    // Neighbor graph via the level index: scan levels within a band wide
    // enough to detect any ratio violation (up to 8x) and fail loudly on
    // ratios above 2.
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); cubes.len()];
    let levels: Vec<i32> = {
        let mut l: Vec<i32> = level_index.keys().copied().collect();
        l.sort_unstable();
        l
    };
    for (i, q) in cubes.iter().enumerate() {
        for &lv in &levels {
            if lv < q.level - 3 || lv > q.level + 3 {
                continue;
            }
            let s = exp2i(lv);
            let r = q.rect();
            let ix_lo = (r.x0 / s).floor() as i64 - 1;
            let ix_hi = (r.x1 / s).floor() as i64 + 1;
            let iy_lo = (r.y0 / s).floor() as i64 - 1;
            let iy_hi = (r.y1 / s).floor() as i64 + 1;
            let index = &level_index[&lv];
            for ix in ix_lo..=ix_hi {
                for iy in iy_lo..=iy_hi {
                    if let Some(&j) = index.get(&(ix, iy)) {
                        if j as usize == i {
                            continue;
                        }
                        let other = &cubes[j as usize];
                        if q.touches(other) {
                            neighbors[i].push(j);
                        }
                    }
                }
            }
        }
        neighbors[i].sort_unstable();
        neighbors[i].dedup();
    }
    for (i, q) in cubes.iter().enumerate() {
        for &j in &neighbors[i] {
            let lr = (q.level - cubes[j as usize].level).abs();
            if lr > 1 {
                return Err(Error::Geometry(format!(
                    "Whitney neighbor side ratio exceeds 2 between levels {} and {}",
                    q.level, cubes[j as usize].level
                )));
            }
        }
    }

    let mut covering = WhitneyCovering {
        side,
        domain: domain.clone(),
        cubes,
        dist,
        neighbors,
        min_level,
        level_index,
        n10: 0,
    };
    covering.n10 = measure_overlap(&covering, 10.0, 2048);
    Ok(covering)
}

/// Max number of `factor`-dilated cubes containing any of `n` deterministic
/// sample points.
fn measure_overlap(cov: &WhitneyCovering, factor: f64, n: usize) -> u32 {
    let bbox = cov.domain.bounding_box().inflate(1.5);
    let mut worst = 0u32;
    // Low-discrepancy (Halton-like) deterministic samples.
    for i in 0..n {
        let p = Point::new(
            bbox.x0 + bbox.width() * halton(i as u64 + 1, 2),
            bbox.y0 + bbox.height() * halton(i as u64 + 1, 3),
        );
        worst = worst.max(cov.dilated_cubes_at(p, factor).len() as u32);
    }
    // Also probe near cube corners where overlap peaks.
    for (idx, q) in cov.cubes.iter().enumerate().step_by(7) {
        let _ = idx;
        let c = q.rect();
        for corner in c.corners() {
            worst = worst.max(cov.dilated_cubes_at(corner, factor).len() as u32);
        }
    }
    worst
}

pub(crate) fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// The reflected cube of an exterior Whitney cube `q`: a maximal-side
/// interior Whitney cube within `2 dist(q, dD)` of `q`; ties broken by
/// smaller center distance, then lexicographic center order.
pub fn reflected_cube(
    interior: &WhitneyCovering,
    q: &DyadicCube,
    dist_q_boundary: f64,
) -> Result<DyadicCube> {
    let reach = 2.0 * dist_q_boundary;
    let qrect = q.rect();
    let qc = q.center();
    let mut best: Option<(i32, f64, (i64, i64), DyadicCube)> = None;
    for (i, cand) in interior.cubes.iter().enumerate() {
        // Quick reject by center distance.
        let max_gap = reach + 0.5 * (cand.diam() + q.diam());
        if cand.center().dist(qc) > max_gap {
            continue;
        }
        if qrect.dist_to_rect(&cand.rect()) <= reach {
            let center_d = cand.center().dist(qc);
            let key = (cand.level, center_d, (cand.ix, cand.iy), *cand);
            best = match best {
                None => Some(key),
                Some(cur) => {
                    let better = key.0 > cur.0
                        || (key.0 == cur.0 && key.1 < cur.1 - 1e-15)
                        || (key.0 == cur.0 && (key.1 - cur.1).abs() <= 1e-15 && key.2 < cur.2);
                    Some(if better { key } else { cur })
                }
            };
        }
        let _ = i;
    }
    best.map(|(_, _, _, c)| c).ok_or(Error::Reflection { cube: *q })
}

/// Build the whole reflection map for exterior cubes with `side <= max_side`.
pub fn reflection_map(
    interior: &WhitneyCovering,
    exterior: &WhitneyCovering,
    max_side: f64,
) -> Result<Vec<Option<u32>>> {
    let mut map = vec![None; exterior.len()];
    for (i, q) in exterior.cubes.iter().enumerate() {
        if q.side() > max_side {
            continue;
        }
        let refl = reflected_cube(interior, q, exterior.dist[i])?;
        map[i] = interior.index_of(&refl);
        if map[i].is_none() {
            return Err(Error::Reflection { cube: *q });
        }
    }
    Ok(map)
}

/// One violation of a covering property.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub property: String,
    pub cube: DyadicCube,
    pub detail: String,
}

/// Programmatic check of the covering properties; all lists must be empty.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringReport {
    pub side: Side,
    pub cube_count: usize,
    pub violations: Vec<Violation>,
    pub covered_area: f64,
    /// Analytic bound for the uncovered collar measure (interior side).
    pub collar_bound: f64,
    pub n10: u32,
}

pub fn verify_covering(cov: &WhitneyCovering) -> CoveringReport {
    let mut violations = Vec::new();
    // Item 2: pairwise disjoint interiors (level-index based).
    for (i, q) in cov.cubes.iter().enumerate() {
        for &lv in &cov.levels() {
            if lv <= q.level {
                continue; // check only against strictly coarser cubes
            }
            // The ancestor of q at level lv would overlap q if present.
            let shift = (lv - q.level) as u32;
            if shift > 62 {
                continue;
            }
            let key = (q.ix >> shift, q.iy >> shift);
            if let Some(&j) = cov.level_index[&lv].get(&key) {
                violations.push(Violation {
                    property: "disjoint-interiors".into(),
                    cube: *q,
                    detail: format!("overlaps coarser cube #{j}"),
                });
            }
        }
        let _ = i;
    }
    // Item 4: diam <= dist <= 4 diam, with dist recomputed.
    for q in &cov.cubes {
        let rect = q.rect();
        let dist = cov.domain.dist_rect_to_boundary(&rect);
        let diam = q.diam();
        if !(dist >= diam * (1.0 - 1e-12) && dist <= 4.0 * diam * (1.0 + 1e-12)) {
            violations.push(Violation {
                property: "distance-window".into(),
                cube: *q,
                detail: format!("dist {dist} vs diam {diam}"),
            });
        }
        // Region membership (no straddling).
        let inside = cov.domain.contains(rect.center());
        let ok = match cov.side {
            Side::Interior => inside,
            Side::Exterior => !inside,
        } && dist > 0.0;
        if !ok {
            violations.push(Violation {
                property: "region-membership".into(),
                cube: *q,
                detail: "cube not inside its region".into(),
            });
        }
    }
    // Item 5: neighbor side ratio <= 2.
    for (i, q) in cov.cubes.iter().enumerate() {
        for &j in &cov.neighbors[i] {
            if (q.level - cov.cubes[j as usize].level).abs() > 1 {
                violations.push(Violation {
                    property: "neighbor-ratio".into(),
                    cube: *q,
                    detail: format!("neighbor level {}", cov.cubes[j as usize].level),
                });
            }
        }
    }
    let collar_bound =
        4.0 * std::f64::consts::SQRT_2 * exp2i(cov.min_level) * cov.domain.perimeter();
    CoveringReport {
        side: cov.side,
        cube_count: cov.len(),
        violations,
        covered_area: cov.covered_area(),
        collar_bound,
        n10: cov.n10,
    }
}

/// Max number of same-level cubes intersected by vertical lines of the
/// window frame, sampled across the window width.
pub fn vertical_line_count(cov: &WhitneyCovering, window: &Window, level: i32) -> usize {
    let index = match cov.level_index.get(&level) {
        Some(ix) => ix,
        None => return 0,
    };
    let mut worst = 0usize;
    let samples = 64;
    for k in 0..samples {
        let x = -window.half_width + 2.0 * window.half_width * (k as f64 + 0.5) / samples as f64;
        let a = window.from_frame(Point::new(x, -window.half_width));
        let b = window.from_frame(Point::new(x, window.half_width));
        let mut count = 0usize;
        for (&(ix, iy), _) in index.iter() {
            let q = DyadicCube::new(level, ix, iy);
            if q.rect().segment_intersects(a, b) {
                count += 1;
            }
        }
        worst = worst.max(count);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeneralCube;

    #[test]
    fn acceptance_predicate_center_cube() {
        // Concentric cube of side 1/4 in the unit square: dist = 3/8,
        // diam = sqrt(2)/4; accepted.
        let d = Domain::unit_square();
        let cube = GeneralCube::new(Point::new(0.5, 0.5), 0.25);
        assert!(accepts(&d, Side::Interior, &cube.rect()));
        // Side 1/2 concentric cube: dist = 1/4 < diam = sqrt(2)/2; rejected.
        let cube = GeneralCube::new(Point::new(0.5, 0.5), 0.5);
        assert!(!accepts(&d, Side::Interior, &cube.rect()));
    }

    #[test]
    fn interior_covering_unit_square() {
        let d = Arc::new(Domain::unit_square());
        let cov = build_whitney(&d, Side::Interior, -8).unwrap();
        let report = verify_covering(&cov);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        // Coverage deficit within the analytic collar bound.
        let deficit = 1.0 - report.covered_area;
        assert!(deficit >= 0.0);
        assert!(deficit <= report.collar_bound, "{deficit} vs {}", report.collar_bound);
    }

    #[test]
    fn deterministic_construction() {
        let d = Arc::new(Domain::notched_square());
        let a = build_whitney(&d, Side::Interior, -7).unwrap();
        let b = build_whitney(&d, Side::Interior, -7).unwrap();
        assert_eq!(a.cubes, b.cubes);
    }

    #[test]
    fn exterior_covering_disjoint_from_interior() {
        let d = Arc::new(Domain::unit_square());
        let int = build_whitney(&d, Side::Interior, -6).unwrap();
        let ext = build_whitney(&d, Side::Exterior, -6).unwrap();
        assert!(verify_covering(&ext).violations.is_empty());
        for q in &ext.cubes {
            for p in &int.cubes {
                assert!(!q.interiors_overlap(p));
            }
        }
    }

    #[test]
    fn reflection_properties() {
        let d = Arc::new(Domain::unit_square());
        let int = build_whitney(&d, Side::Interior, -9).unwrap();
        let ext = build_whitney(&d, Side::Exterior, -8).unwrap();
        let r = d.window_size();
        for (i, q) in ext.cubes.iter().enumerate() {
            if q.side() > r {
                continue;
            }
            let refl = reflected_cube(&int, q, ext.dist[i]).unwrap();
            let gap = q.rect().dist_to_rect(&refl.rect());
            assert!(gap <= 2.0 * ext.dist[i] + 1e-12);
        }
        // Determinism of the whole map.
        let m1 = reflection_map(&int, &ext, r).unwrap();
        let m2 = reflection_map(&int, &ext, r).unwrap();
        assert_eq!(m1, m2);
    }
}
