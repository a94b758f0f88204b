//! Domains, exact distance fields, parallel sets and the hypotheses built on them.

mod cloud;
mod domain;
mod spec;

use std::collections::VecDeque;

pub use cloud::PointCloud;
pub use domain::{closest_on_segment, BoundaryPiece, Domain, Primitive};
pub use spec::{DomainSpec, GridSpec, PrimitiveSpec};

use crate::error::{Error, Result};
use crate::grid::{CompactMask, Grid, Point, ScalarField};
use crate::report::{VerificationReport, Worst};
use crate::solver::stencil::directions;

/// Grid-level tolerance factor for projection and ray criteria (`tau = 2h`).
pub const TAU_GRID_FACTOR: f64 = 2.0;
/// H2 flags closed-set nodes farther than `C_H2 * h` from the open parallel set.
pub const C_H2: f64 = 3.0;

/// Exact distance to the boundary at every inside node.
pub fn distance_field(domain: &Domain, grid: Grid) -> Result<ScalarField> {
    let inside: Vec<bool> = (0..grid.len()).map(|i| domain.contains(grid.point(i))).collect();
    if !inside.iter().any(|&b| b) {
        return Err(Error::NoInsideNodes);
    }
    Ok(ScalarField::from_fn(grid, inside, "distance", |p| domain.boundary_distance(p)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inradius {
    pub value: f64,
    /// Grid spacing; the true inradius lies in `[value, value + uncertainty]`.
    pub uncertainty: f64,
    pub location: Point,
}

pub fn inradius(d: &ScalarField) -> Inradius {
    let (idx, value) = d.max_inside().expect("distance field has inside nodes");
    Inradius { value, uncertainty: d.grid.h, location: d.grid.point(idx) }
}

/// Which parallel set to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    /// `{d > r}`
    Open,
    /// `{d >= r - tol}`
    Closed(f64),
}

pub fn parallel_mask(d: &ScalarField, r: f64, level: Level) -> Result<CompactMask> {
    let rad = inradius(d);
    let upper = rad.value + rad.uncertainty;
    let ok = match level {
        Level::Open => r >= 0.0 && r < upper,
        Level::Closed(_) => r >= 0.0 && r <= upper,
    };
    if !ok {
        return Err(Error::OutOfRange(format!("parallel radius {r} outside [0, {upper}]")));
    }
    Ok(CompactMask::from_fn(d.grid, |i| {
        d.inside[i]
            && match level {
                Level::Open => d.values[i] > r,
                Level::Closed(tol) => d.values[i] >= r - tol,
            }
    }))
}

/// Grid closure of an open set `{d > r}` (or one of its components): the set itself plus the
/// adjacent nodes lying on the level `d = r` up to `tol`.
pub fn closure_mask(d: &ScalarField, open: &CompactMask, r: f64, tol: f64) -> CompactMask {
    let g = d.grid;
    CompactMask::from_fn(g, |i| {
        open.member[i]
            || (d.inside[i]
                && d.values[i] >= r - tol
                && [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
                    .iter()
                    .any(|&(di, dj)| g.offset(i, di, dj).is_some_and(|n| open.member[n])))
    })
}

/// Nodes of `Omega \ closure(Omega_r)`.
pub fn annulus_mask(d: &ScalarField, r: f64, tol: f64) -> CompactMask {
    let open = CompactMask::from_fn(d.grid, |i| d.inside[i] && d.values[i] > r);
    let closed = closure_mask(d, &open, r, tol);
    CompactMask::from_fn(d.grid, |i| d.inside[i] && !closed.member[i])
}

/// 4-connected components, labelled in order of their first node.
#[derive(Debug, Clone)]
pub struct Components {
    pub grid: Grid,
    labels: Vec<Option<usize>>,
    pub members: Vec<Vec<usize>>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn label(&self, idx: usize) -> Option<usize> {
        self.labels[idx]
    }

    pub fn mask(&self, k: usize) -> CompactMask {
        let mut m = CompactMask::empty(self.grid);
        for &i in &self.members[k] {
            m.member[i] = true;
        }
        m
    }

    /// Component containing the node nearest to `p`.
    pub fn containing(&self, p: Point) -> Option<usize> {
        self.grid.nearest(p).and_then(|i| self.labels[i])
    }
}

pub fn connected_components(mask: &CompactMask) -> Components {
    let g = mask.grid;
    let mut labels = vec![None; g.len()];
    let mut members = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..g.len() {
        if !mask.member[start] || labels[start].is_some() {
            continue;
        }
        let k = members.len();
        let mut comp = Vec::new();
        labels[start] = Some(k);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            for n in g.neighbors4(i) {
                if mask.member[n] && labels[n].is_none() {
                    labels[n] = Some(k);
                    queue.push_back(n);
                }
            }
        }
        comp.sort_unstable();
        members.push(comp);
    }
    Components { grid: g, labels, members }
}

/// The inside mask forms a single 4-connected component.
pub fn check_connected(d: &ScalarField) -> bool {
    let mask = CompactMask { grid: d.grid, member: d.inside.clone() };
    connected_components(&mask).count() == 1
}

#[derive(Debug, Clone)]
pub struct H2Check {
    pub report: VerificationReport,
    pub flagged: Vec<usize>,
}

/// Flags closed-parallel-set nodes that are farther than `C_H2 h` from the open parallel set.
pub fn check_h2(d: &ScalarField, r: f64, tol: f64) -> Result<H2Check> {
    let open = parallel_mask(d, r, Level::Open)?;
    let closed = parallel_mask(d, r, Level::Closed(tol))?;
    let dist = open.distance_transform();
    let limit = C_H2 * d.grid.h;
    let mut worst = Worst::default();
    let mut flagged = Vec::new();
    for i in closed.indices() {
        worst.push(dist[i], d.grid.point(i));
        if dist[i] > limit {
            flagged.push(i);
        }
    }
    let report = worst
        .into_report("closure of open parallel set equals closed parallel set", limit)
        .cite("hypothesis H2 (regular closed parallel set)")
        .note(format!("{} of {} closed-set nodes flagged", flagged.len(), closed.count()));
    Ok(H2Check { report, flagged })
}

/// Distance from every inside node to the level set `{d = r}`, measured to exact crossing
/// points located on grid edges.
pub fn level_set_distance(domain: &Domain, d: &ScalarField, r: f64) -> ScalarField {
    let g = d.grid;
    let mut crossings = Vec::new();
    for i in d.inside_indices() {
        for n in [g.offset(i, 1, 0), g.offset(i, 0, 1)].into_iter().flatten() {
            if !d.inside[n] || (d.values[i] > r) == (d.values[n] > r) {
                continue;
            }
            let (mut lo, mut hi) = (g.point(i), g.point(n));
            if d.values[i] > r {
                std::mem::swap(&mut lo, &mut hi);
            }
            for _ in 0..60 {
                let mid = (lo + hi) * 0.5;
                if domain.boundary_distance(mid) > r {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            crossings.push((lo + hi) * 0.5);
        }
    }
    let cloud = PointCloud::new(crossings, 4.0 * g.h);
    let mut out = d.clone();
    out.quantity = format!("distance to level {r}");
    for i in d.inside_indices() {
        out.values[i] = cloud.nearest(g.point(i)).map_or(f64::INFINITY, |(_, dist)| dist);
    }
    out
}

/// Grid version of the ray set: nodes of `Omega \ closure(Omega_r)` on which
/// `d + dist(., level r) = r` within `2h`.
pub fn hat_d_mask(d: &ScalarField, dpar: &ScalarField, r: f64, tol: f64) -> CompactMask {
    let tau_ray = TAU_GRID_FACTOR * d.grid.h;
    let annulus = annulus_mask(d, r, tol);
    CompactMask::from_fn(d.grid, |i| annulus.member[i] && (d.values[i] + dpar.values[i] - r).abs() <= tau_ray)
}

/// Grid approximation of the cut locus: nodes with several exact projections spread wider
/// than `2h`, or whose best ascent slope of `d` falls below `1 - c_sigma sqrt(h)`.
pub fn cutlocus_mask(domain: &Domain, d: &ScalarField, c_sigma: f64) -> CompactMask {
    let g = d.grid;
    let h = g.h;
    let tau_proj = TAU_GRID_FACTOR * h;
    let threshold = 1.0 - c_sigma * h.sqrt();
    let dirs = directions(3);
    CompactMask::from_fn(g, |i| {
        if !d.inside[i] {
            return false;
        }
        let x = g.point(i);
        let projs = domain.projections(x, domain.tau_geom);
        let spread = projs
            .iter()
            .flat_map(|a| projs.iter().map(move |b| a.dist(*b)))
            .fold(0.0, f64::max);
        if spread > tau_proj {
            return true;
        }
        let ascent = dirs
            .iter()
            .map(|&(a, b)| {
                let y = x + Point::new(a as f64 * h, b as f64 * h);
                let len = (x - y).norm();
                let dy = match domain.exit_fraction(x, y) {
                    Some(_) => 0.0,
                    None => domain.boundary_distance(y),
                };
                (dy - d.values[i]) / len
            })
            .fold(f64::NEG_INFINITY, f64::max);
        ascent < threshold
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(domain: &Domain, h: f64) -> ScalarField {
        let grid = Grid::covering(domain.bbox, h, 2).unwrap();
        distance_field(domain, grid).unwrap()
    }

    fn at(d: &ScalarField, x: f64, y: f64) -> f64 {
        d.values[d.grid.nearest(Point::new(x, y)).unwrap()]
    }

    #[test]
    fn distance_examples() {
        let ball = field(&Domain::ball(Point::default(), 1.0).unwrap(), 0.05);
        assert!((at(&ball, 0.0, 0.0) - 1.0).abs() < 1e-12);
        let sq = field(&Domain::square(2.0).unwrap(), 0.05);
        assert!((at(&sq, 0.5, 0.0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn dumbbell_distance_matches_dense_boundary_sampling() {
        let dom = Domain::dumbbell();
        let d = field(&dom, 0.1);
        // brute-force oracle: boundary of the union sampled from each primitive boundary,
        // keeping samples that are not strictly inside another primitive
        let mut samples = Vec::new();
        let n = 20000;
        for k in 0..n {
            let t = k as f64 / n as f64 * std::f64::consts::TAU;
            samples.push(Point::new(-4.0 + 3.0 * t.cos(), 3.0 * t.sin()));
            samples.push(Point::new(4.0 + 3.0 * t.cos(), 3.0 * t.sin()));
        }
        for k in 0..=n {
            let x = -4.0 + 8.0 * k as f64 / n as f64;
            samples.push(Point::new(x, 1.0));
            samples.push(Point::new(x, -1.0));
        }
        let samples: Vec<Point> = samples.into_iter().filter(|p| !dom.contains(*p)).collect();
        let brute = |p: Point| samples.iter().map(|s| s.dist(p)).fold(f64::INFINITY, f64::min);
        assert!((brute(Point::new(0.0, 0.0)) - 1.0).abs() < 1e-3);
        assert!((at(&d, 0.0, 0.0) - 1.0).abs() < 1e-12);
        for (x, y) in [(0.0, 0.5), (-2.0, 0.0), (3.0, 1.5), (-5.5, -1.0), (4.0, 0.0)] {
            assert!((at(&d, x, y) - brute(Point::new(x, y))).abs() < 2e-3, "at ({x}, {y})");
        }
    }

    #[test]
    fn inradius_examples() {
        let h = 0.05;
        let r = inradius(&field(&Domain::ball(Point::default(), 1.0).unwrap(), h));
        assert!((r.value - 1.0).abs() <= h);
        let r = inradius(&field(&Domain::square(2.0).unwrap(), h));
        assert!((r.value - 2.0).abs() <= h);
        let r = inradius(&field(&Domain::dumbbell(), h));
        assert!((r.value - 3.0).abs() <= h);
        assert!((r.location.x.abs() - 4.0).abs() <= h && r.location.y.abs() <= h);
    }

    #[test]
    fn distance_is_one_lipschitz_on_random_pairs() {
        let d = field(&Domain::dumbbell(), 0.1);
        let idx: Vec<usize> = d.inside_indices().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5000 {
            let a = idx[rng.gen_range(0..idx.len())];
            let b = idx[rng.gen_range(0..idx.len())];
            let gap = (d.values[a] - d.values[b]).abs();
            assert!(gap <= d.grid.point(a).dist(d.grid.point(b)) + 1e-12);
        }
    }

    #[test]
    fn boundary_samples_have_zero_distance() {
        for dom in [Domain::dumbbell(), Domain::lopsided_dumbbell(), Domain::square(2.0).unwrap()] {
            for p in dom.boundary_samples(0.05) {
                assert!(dom.boundary_distance(p) <= dom.tau_geom);
            }
        }
    }

    #[test]
    fn parallel_masks() {
        let ball = field(&Domain::ball(Point::default(), 1.0).unwrap(), 0.05);
        let m = parallel_mask(&ball, 0.5, Level::Open).unwrap();
        for i in ball.inside_indices() {
            let rad = ball.grid.point(i).norm();
            if (rad - 0.5).abs() > 1e-9 {
                assert_eq!(m.member[i], rad < 0.5);
            }
        }
        let sq = field(&Domain::square(2.0).unwrap(), 0.05);
        let m = parallel_mask(&sq, 1.0, Level::Open).unwrap();
        for i in m.indices() {
            let p = sq.grid.point(i);
            assert!(p.x.abs() < 1.0 && p.y.abs() < 1.0);
        }
        assert!(parallel_mask(&sq, 2.5, Level::Open).is_err());
        assert!(parallel_mask(&sq, -0.1, Level::Closed(0.0)).is_err());
    }

    #[test]
    fn parallel_masks_nest() {
        let d = field(&Domain::dumbbell(), 0.1);
        let mut prev = parallel_mask(&d, 0.0, Level::Open).unwrap();
        for k in 1..29 {
            let next = parallel_mask(&d, k as f64 * 0.1, Level::Open).unwrap();
            assert!(next.is_subset_of(&prev));
            prev = next;
        }
    }

    #[test]
    fn components() {
        let ball = field(&Domain::ball(Point::default(), 1.0).unwrap(), 0.05);
        assert_eq!(connected_components(&parallel_mask(&ball, 0.5, Level::Open).unwrap()).count(), 1);
        let d = field(&Domain::dumbbell(), 0.05);
        let c = connected_components(&parallel_mask(&d, 1.0, Level::Open).unwrap());
        assert_eq!(c.count(), 2);
        assert_eq!(c.containing(Point::new(-4.0, 0.0)), Some(0));
        assert_eq!(c.containing(Point::new(4.0, 0.0)), Some(1));
        assert_eq!(connected_components(&CompactMask::empty(d.grid)).count(), 0);
        assert!(check_connected(&d));
    }

    #[test]
    fn h2_examples() {
        let sq = field(&Domain::square(2.0).unwrap(), 0.05);
        assert!(check_h2(&sq, 1.0, 1e-9).unwrap().report.pass);
        let ball = field(&Domain::ball(Point::default(), 1.0).unwrap(), 0.05);
        assert!(check_h2(&ball, 0.5, 1e-9).unwrap().report.pass);
        let dom = Domain::lopsided_dumbbell();
        let d = field(&dom, 0.05);
        let h2 = check_h2(&d, 1.0, dom.tau_geom).unwrap();
        assert!(!h2.report.pass);
        assert!(!h2.flagged.is_empty());
        let p = 2.0 * 2f64.sqrt() - 4.0;
        for &i in &h2.flagged {
            let x = d.grid.point(i);
            assert!(x.y.abs() < 1e-9 && x.x > p && x.x <= 4.0 + 1e-9, "flagged {x:?}");
        }
    }

    #[test]
    fn projections_examples() {
        let ball = Domain::ball(Point::default(), 1.0).unwrap();
        let p = ball.projections(Point::new(0.5, 0.0), 1e-9);
        assert!(p.iter().all(|q| q.dist(Point::new(1.0, 0.0)) < 1e-4));
        let sq = Domain::square(2.0).unwrap();
        let p = sq.projections(Point::default(), 1e-9);
        assert_eq!(p.len(), 4);
        for q in [(2.0, 0.0), (-2.0, 0.0), (0.0, 2.0), (0.0, -2.0)] {
            assert!(p.iter().any(|x| x.dist(Point::new(q.0, q.1)) < 1e-12));
        }
        let p = sq.projections(Point::new(1.0, 0.0), 0.1);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn hat_d_examples() {
        let dom = Domain::ball(Point::default(), 1.0).unwrap();
        let d = field(&dom, 0.025);
        let dpar = level_set_distance(&dom, &d, 0.5);
        let hat = hat_d_mask(&d, &dpar, 0.5, dom.tau_geom);
        let ann = annulus_mask(&d, 0.5, dom.tau_geom);
        assert!(hat.is_subset_of(&ann));
        assert_eq!(hat.count(), ann.count());

        let dom = Domain::square(2.0).unwrap();
        let d = field(&dom, 0.025);
        let dpar = level_set_distance(&dom, &d, 1.0);
        let hat = hat_d_mask(&d, &dpar, 1.0, dom.tau_geom);
        let ann = annulus_mask(&d, 1.0, dom.tau_geom);
        assert!(hat.is_subset_of(&ann));
        assert!(hat.count() < ann.count());
        assert!(!hat.contains(d.grid.nearest(Point::new(1.5, 1.5)).unwrap()));
        assert!(hat.contains(d.grid.nearest(Point::new(1.5, 0.0)).unwrap()));

        let dom = Domain::dumbbell();
        let d = field(&dom, 0.05);
        let dpar = level_set_distance(&dom, &d, 1.0);
        let hat = hat_d_mask(&d, &dpar, 1.0, dom.tau_geom);
        // midpoint of a level point and its projection on the left arc
        let theta = 2.0 * std::f64::consts::PI / 3.0;
        let y = Point::new(-4.0 + 2.0 * theta.cos(), 2.0 * theta.sin());
        let z = Point::new(-4.0 + 3.0 * theta.cos(), 3.0 * theta.sin());
        assert!(hat.contains(d.grid.nearest((y + z) * 0.5).unwrap()));
        // the axis of the strip has d = r but stays away from the level set of the open set
        assert!(!hat.contains(d.grid.nearest(Point::new(0.0, 0.0)).unwrap()));
    }

    #[test]
    fn cut_locus_examples() {
        let dom = Domain::ball(Point::default(), 1.0).unwrap();
        let d = field(&dom, 0.05);
        let cut = cutlocus_mask(&dom, &d, 1.0);
        assert!(cut.count() >= 1);
        assert!(cut.indices().all(|i| d.grid.point(i).norm() <= 0.05 + 1e-12));

        let dom = Domain::square(2.0).unwrap();
        let h = 1.0 / 16.0;
        let d = field(&dom, h);
        let cut = cutlocus_mask(&dom, &d, 1.0);
        for i in d.inside_indices() {
            let p = d.grid.point(i);
            let on_diag = (p.x.abs() - p.y.abs()).abs() < 1e-9;
            if on_diag {
                assert!(cut.contains(i), "diagonal node {p:?} missed");
            }
            if cut.contains(i) {
                assert!((p.x.abs() - p.y.abs()).abs() <= h + 1e-9, "spurious {p:?}");
            }
        }

        let dom = Domain::new(vec![Primitive::rect(-4.0, -1.0, 4.0, 1.0)]).unwrap();
        let h = 0.05;
        let d = field(&dom, h);
        let cut = cutlocus_mask(&dom, &d, 1.0);
        for i in d.inside_indices() {
            let p = d.grid.point(i);
            if p.y.abs() < 1e-9 && p.x.abs() < 3.0 {
                assert!(cut.contains(i));
            }
            if cut.contains(i) {
                // medial axis: the axis segment plus the corner bisectors
                let to_axis = p.y.abs();
                let to_bisector = ((4.0 - p.x.abs()) - (1.0 - p.y.abs())).abs() / 2f64.sqrt();
                assert!(to_axis.min(to_bisector) <= h + 1e-9, "spurious {p:?}");
            }
        }
    }
}
