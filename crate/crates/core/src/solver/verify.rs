//! Structural checks for computed infinity-harmonic functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Potential;
use crate::error::{Error, Result};
use crate::geometry::closest_on_segment;
use crate::grid::{CompactMask, Point, ScalarField};
use crate::report::{VerificationReport, Worst};

/// Multiple of `h * range` allowed for cone comparison and slope estimates.
pub const CONE_FACTOR: f64 = 5.0;
/// Multiple of `h` allowed for the Harnack bound.
pub const HARNACK_FACTOR: f64 = 5.0;

fn data_range(field: &ScalarField) -> f64 {
    match (field.min_inside(), field.max_inside()) {
        (Some((_, lo)), Some((_, hi))) if hi > lo => hi - lo,
        _ => 1.0,
    }
}

/// Comparison with cones from above for `u` and `-u` on random node boxes inside `free`.
///
/// Each trial picks a box of free nodes, a vertex (a node of the box, which is then removed
/// from it, or a point outside the box) and a slope `b`, lifts the cone until it dominates the
/// field on the discrete boundary of the punctured box and records how far the field rises
/// above the cone inside.
pub fn verify_cone_comparison(
    field: &ScalarField,
    free: &CompactMask,
    trials: usize,
    seed: u64,
    tol: f64,
) -> VerificationReport {
    let g = field.grid;
    let range = data_range(field);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::signed();
    let mut boxes = 0;
    let max_side = (g.nx.min(g.ny) / 2).clamp(3, 24);
    let mut attempts = 0;
    while boxes < trials && attempts < 200 * trials {
        attempts += 1;
        let w = rng.gen_range(3..=max_side);
        let hgt = rng.gen_range(3..=max_side);
        if w >= g.nx || hgt >= g.ny {
            continue;
        }
        let i0 = rng.gen_range(0..g.nx - w);
        let j0 = rng.gen_range(0..g.ny - hgt);
        let nodes: Vec<usize> = (j0..=j0 + hgt).flat_map(|j| (i0..=i0 + w).map(move |i| (i, j))).map(|(i, j)| g.index(i, j)).collect();
        if !nodes.iter().all(|&n| free.member[n]) {
            continue;
        }
        boxes += 1;
        let on_rim = |n: usize| {
            let (i, j) = g.ij(n);
            i == i0 || i == i0 + w || j == j0 || j == j0 + hgt
        };
        let (x0, punctured) = if rng.gen_bool(0.5) {
            let n = g.index(rng.gen_range(i0 + 1..i0 + w), rng.gen_range(j0 + 1..j0 + hgt));
            (g.point(n), Some(n))
        } else {
            let c = g.coords(i0, j0);
            let span = (w.max(hgt) as f64) * g.h;
            loop {
                let p = Point::new(c.x + rng.gen_range(-span..2.0 * span), c.y + rng.gen_range(-span..2.0 * span));
                let outside = p.x < c.x || p.y < c.y || p.x > c.x + w as f64 * g.h || p.y > c.y + hgt as f64 * g.h;
                if outside {
                    break (p, None);
                }
            }
        };
        let scale = range / ((w.max(hgt) as f64) * g.h);
        let b = rng.gen_range(-3.0 * scale..3.0 * scale);
        for sign in [1.0, -1.0] {
            let cone = |n: usize| b * g.point(n).dist(x0);
            let a = nodes
                .iter()
                .filter(|&&n| on_rim(n) || Some(n) == punctured)
                .map(|&n| sign * field.values[n] - cone(n))
                .fold(f64::NEG_INFINITY, f64::max);
            for &n in &nodes {
                if !on_rim(n) && Some(n) != punctured {
                    worst.push(sign * field.values[n] - (a + cone(n)), g.point(n));
                }
            }
        }
    }
    let mut report = worst.into_report("comparison with cones", tol).cite("comparison with cones from above");
    report.checked = boxes;
    if boxes < trials {
        report = report.note(format!("only {boxes} of {trials} boxes fit inside the free region"));
    }
    report
}

/// Default tolerance for cone comparison: `5 h` times the data range.
pub fn cone_tolerance(field: &ScalarField) -> f64 {
    CONE_FACTOR * field.grid.h * data_range(field)
}

/// Ball slope bounds, max/min on spheres and increasing slope estimates on spheres of radius
/// `3h` that stay inside the free region.
pub fn verify_slope_estimates(p: &Potential) -> Vec<VerificationReport> {
    let f = p.field();
    let g = f.grid;
    let h = g.h;
    let r = 3.0 * h;
    let tol = CONE_FACTOR * h * data_range(f);
    let to_k = p.zero_set.distance_transform();
    let grad = p.solution.descent_field();
    let samples: Vec<Point> = (0..64)
        .map(|k| {
            let t = k as f64 / 64.0 * std::f64::consts::TAU;
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect();
    let reach = r + 2.0 * h;
    let d_bdry: Vec<f64> = (0..g.len()).map(|i| if f.inside[i] { p.domain.boundary_distance(g.point(i)) } else { 0.0 }).collect();
    let (mut cr1, mut cr2, mut ise, mut maxmin) = (Worst::signed(), Worst::signed(), Worst::signed(), Worst::signed());
    let rad = (r / h).ceil() as i64;
    for (k, &i) in p.solution.graph.free.iter().enumerate() {
        if d_bdry[i] <= reach || to_k[i] <= reach {
            continue;
        }
        let x = g.point(i);
        let ux = f.values[i];
        let vals: Vec<(Point, f64)> = samples.iter().map(|&s| (x + s, p.value_at(x + s))).collect();
        let (pmax, umax) = vals.iter().cloned().fold((x, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let (pmin, umin) = vals.iter().cloned().fold((x, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let gx = p.solution.graph.descent(k, &p.solution.state);
        cr1.push(gx - (umax - ux) / r, x);
        cr2.push(gx + (umin - ux) / r, x);
        for q in [pmax, pmin] {
            if let Some(n) = g.nearest(q) {
                if f.inside[n] {
                    ise.push(gx - grad.values[n], x);
                }
            }
        }
        for dj in -rad..=rad {
            for di in -rad..=rad {
                if let Some(n) = g.offset(i, di, dj) {
                    if g.point(n).dist(x) <= r {
                        maxmin.push((f.values[n] - umax).max(umin - f.values[n]), x);
                    }
                }
            }
        }
    }
    let anchor = "slope estimates on balls";
    vec![
        cr1.into_report("gradient below ascent slope on spheres", tol).cite(anchor),
        cr2.into_report("gradient below descent slope on spheres", tol).cite(anchor),
        ise.into_report("increasing slope estimates", tol).cite("increasing slope estimates"),
        maxmin.into_report("extrema on balls attained on spheres", tol).cite("max and min on balls"),
    ]
}

/// Harnack lower bound `w(x0) >= exp(-L / delta)` along a polyline from `x0` to the boundary.
pub fn verify_harnack(p: &Potential, x0: Point, polyline: &[Point]) -> Result<VerificationReport> {
    let g = p.field().grid;
    let mut path = vec![x0];
    let skip = usize::from(polyline.first() == Some(&x0));
    path.extend(&polyline[skip..]);
    let length: f64 = path.windows(2).map(|w| w[0].dist(w[1])).sum();
    let mut delta = f64::INFINITY;
    for z in p.zero_set.indices().map(|i| g.point(i)) {
        if path.len() == 1 {
            delta = delta.min(z.dist(x0));
        }
        for w in path.windows(2) {
            delta = delta.min(z.dist(closest_on_segment(w[0], w[1], z)));
        }
    }
    if !(delta > 0.0) {
        return Err(Error::Precondition("polyline touches the zero set".into()));
    }
    let bound = if length == 0.0 { 1.0 } else { (-length / delta).exp() };
    let value = p.value_at(x0);
    let tol = HARNACK_FACTOR * g.h;
    Ok(VerificationReport::new("Harnack lower bound", bound - value, tol)
        .at(Some(x0))
        .cite("Harnack inequality")
        .checked(1)
        .note(format!("w(x0) = {value:.6}, exp(-L/delta) = {bound:.6}, L = {length:.6}, delta = {delta:.6}")))
}

/// Minimizing pairs `(y, z)` between the boundary and the zero set, within `h` of the minimum.
pub fn minimizing_pairs(p: &Potential) -> Vec<(Point, Point)> {
    let g = p.field().grid;
    let dom = &p.domain;
    let dk: Vec<(usize, f64)> = p.zero_set.indices().map(|i| (i, dom.boundary_distance(g.point(i)))).collect();
    let min = dk.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let mut pairs = Vec::new();
    for &(i, dz) in &dk {
        if dz > min + g.h {
            continue;
        }
        let z = g.point(i);
        for y in dom.projections(z, dom.tau_geom) {
            // with an exact level the zero set starts where the ray reaches that level
            let z = match &p.level {
                Some(cut) if dz > cut.r => y + (z - y) * (cut.r / dz),
                _ => z,
            };
            pairs.push((y, z));
        }
    }
    pairs
}

/// Along every minimizing segment `[y, z]` the potential equals `1 - |x - y| / |y - z|`.
pub fn verify_affine_on_rays(p: &Potential, tol: f64) -> Result<VerificationReport> {
    let pairs = minimizing_pairs(p);
    if pairs.is_empty() {
        return Err(Error::Precondition("no minimizing boundary to zero-set pair".into()));
    }
    let mut worst = Worst::default();
    for &(y, z) in &pairs {
        let len = y.dist(z);
        for s in 1..20 {
            let t = s as f64 / 20.0;
            let x = y + (z - y) * t;
            if p.domain.contains(x) {
                worst.push((p.value_at(x) - (1.0 - t)).abs(), x);
            }
        }
        debug_assert!(len > 0.0);
    }
    Ok(worst
        .into_report("potential affine along minimizing rays", tol)
        .cite("potential along rays")
        .note(format!("{} minimizing segments", pairs.len())))
}
