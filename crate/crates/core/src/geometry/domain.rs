//! Unions of disks and rectangles with exact inside tests and trimmed boundaries.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoundingBox, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    Disk { center: Point, radius: f64 },
    Rect { min: Point, max: Point },
}

impl Primitive {
    pub fn disk(cx: f64, cy: f64, radius: f64) -> Self {
        Primitive::Disk { center: Point::new(cx, cy), radius }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Primitive::Rect { min: Point::new(x0, y0), max: Point::new(x1, y1) }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Primitive::Disk { center, radius } => {
                if !(radius > 0.0 && radius.is_finite() && center.x.is_finite() && center.y.is_finite()) {
                    return Err(Error::DegeneratePrimitive(format!("disk radius {radius}")));
                }
            }
            Primitive::Rect { min, max } => {
                if !(min.x < max.x && min.y < max.y) || ![min.x, min.y, max.x, max.y].iter().all(|v| v.is_finite()) {
                    return Err(Error::DegeneratePrimitive(format!(
                        "rectangle ({}, {})-({}, {})",
                        min.x, min.y, max.x, max.y
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn bbox(&self) -> BoundingBox {
        match *self {
            Primitive::Disk { center, radius } => BoundingBox {
                min: Point::new(center.x - radius, center.y - radius),
                max: Point::new(center.x + radius, center.y + radius),
            },
            Primitive::Rect { min, max } => BoundingBox { min, max },
        }
    }

    /// Open-set membership.
    pub fn strictly_inside(&self, p: Point) -> bool {
        match *self {
            Primitive::Disk { center, radius } => {
                let d = p - center;
                d.dot(d) < radius * radius
            }
            Primitive::Rect { min, max } => p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y,
        }
    }

    fn closed_contains(&self, p: Point) -> bool {
        match *self {
            Primitive::Disk { center, radius } => {
                let d = p - center;
                d.dot(d) <= radius * radius
            }
            Primitive::Rect { min, max } => p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y,
        }
    }

    /// Open parameter interval `(t0, t1)` on which `a + t (b - a)` is strictly inside.
    fn chord(&self, a: Point, b: Point) -> Option<(f64, f64)> {
        let dir = b - a;
        match *self {
            Primitive::Disk { center, radius } => {
                let f = a - center;
                let qa = dir.dot(dir);
                let qb = 2.0 * f.dot(dir);
                let qc = f.dot(f) - radius * radius;
                let disc = qb * qb - 4.0 * qa * qc;
                if qa == 0.0 || disc <= 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                // numerically stable pair of roots
                let q = -0.5 * (qb + qb.signum() * s);
                let (mut t0, mut t1) = if q != 0.0 { (q / qa, qc / q) } else { (-s / (2.0 * qa), s / (2.0 * qa)) };
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                Some((t0, t1))
            }
            Primitive::Rect { min, max } => {
                let mut t0 = f64::NEG_INFINITY;
                let mut t1 = f64::INFINITY;
                for (o, d, lo, hi) in [(a.x, dir.x, min.x, max.x), (a.y, dir.y, min.y, max.y)] {
                    if d == 0.0 {
                        if !(o > lo && o < hi) {
                            return None;
                        }
                    } else {
                        let (mut s0, mut s1) = ((lo - o) / d, (hi - o) / d);
                        if s0 > s1 {
                            std::mem::swap(&mut s0, &mut s1);
                        }
                        t0 = t0.max(s0);
                        t1 = t1.min(s1);
                    }
                }
                (t0 < t1).then_some((t0, t1))
            }
        }
    }

    fn edges(&self) -> Vec<(Point, Point)> {
        match *self {
            Primitive::Disk { .. } => Vec::new(),
            Primitive::Rect { min, max } => {
                let c = [min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)];
                (0..4).map(|k| (c[k], c[(k + 1) % 4])).collect()
            }
        }
    }
}

/// A retained portion of a primitive's boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPiece {
    /// Counter-clockwise arc from angle `start` through `sweep` radians.
    Arc { center: Point, radius: f64, start: f64, sweep: f64 },
    Segment { a: Point, b: Point },
}

fn wrap(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

impl BoundaryPiece {
    fn arc_point(center: Point, radius: f64, theta: f64) -> Point {
        Point::new(center.x + radius * theta.cos(), center.y + radius * theta.sin())
    }

    pub fn endpoints(&self) -> (Point, Point) {
        match *self {
            BoundaryPiece::Arc { center, radius, start, sweep } => (
                Self::arc_point(center, radius, start),
                Self::arc_point(center, radius, start + sweep),
            ),
            BoundaryPiece::Segment { a, b } => (a, b),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            BoundaryPiece::Arc { radius, sweep, .. } => radius * sweep,
            BoundaryPiece::Segment { a, b } => a.dist(b),
        }
    }

    /// Point at arclength fraction `s` in `[0, 1]`.
    pub fn at(&self, s: f64) -> Point {
        match *self {
            BoundaryPiece::Arc { center, radius, start, sweep } => Self::arc_point(center, radius, start + s * sweep),
            BoundaryPiece::Segment { a, b } => a + (b - a) * s,
        }
    }

    /// Sample points no farther than `spacing` apart, endpoints included.
    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        let n = ((self.length() / spacing).ceil() as usize).max(1);
        (0..=n).map(|k| self.at(k as f64 / n as f64)).collect()
    }

    fn arc_contains_angle(start: f64, sweep: f64, theta: f64) -> bool {
        sweep >= TAU || wrap(theta - start) <= sweep
    }

    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            BoundaryPiece::Arc { center, radius, start, sweep } => {
                let v = p - center;
                let rho = v.norm();
                if rho == 0.0 {
                    return radius;
                }
                if Self::arc_contains_angle(start, sweep, v.y.atan2(v.x)) {
                    (rho - radius).abs()
                } else {
                    let (e0, e1) = self.endpoints();
                    p.dist(e0).min(p.dist(e1))
                }
            }
            BoundaryPiece::Segment { a, b } => p.dist(closest_on_segment(a, b, p)),
        }
    }

    /// Nearest point(s) of the piece to `p`; several when they tie (e.g. `p` at an arc center).
    pub fn closest_points(&self, p: Point) -> Vec<Point> {
        match *self {
            BoundaryPiece::Segment { a, b } => vec![closest_on_segment(a, b, p)],
            BoundaryPiece::Arc { center, radius, start, sweep } => {
                let v = p - center;
                let (e0, e1) = self.endpoints();
                if v.norm() == 0.0 {
                    let mut out = vec![e0, e1, self.at(0.5)];
                    if sweep >= TAU {
                        out.push(self.at(0.25));
                        out.push(self.at(0.75));
                    }
                    return out;
                }
                let phi = v.y.atan2(v.x);
                if Self::arc_contains_angle(start, sweep, phi) {
                    return vec![Self::arc_point(center, radius, phi)];
                }
                let (d0, d1) = (p.dist(e0), p.dist(e1));
                if (d0 - d1).abs() <= 1e-12 * radius {
                    vec![e0, e1]
                } else if d0 < d1 {
                    vec![e0]
                } else {
                    vec![e1]
                }
            }
        }
    }
}

pub fn closest_on_segment(a: Point, b: Point, p: Point) -> Point {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return a;
    }
    a + d * ((p - a).dot(d) / len2).clamp(0.0, 1.0)
}

/// Open, bounded region given as a union of primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub primitives: Vec<Primitive>,
    pub bbox: BoundingBox,
    pub boundary: Vec<BoundaryPiece>,
    /// Tolerance for exact-geometry predicates, `1e-9` times the bounding-box diameter.
    pub tau_geom: f64,
}

impl Domain {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::EmptyDomain);
        }
        for p in &primitives {
            p.validate()?;
        }
        let bbox = primitives
            .iter()
            .map(Primitive::bbox)
            .reduce(BoundingBox::union)
            .expect("non-empty");
        let mut boundary = Vec::new();
        for (k, prim) in primitives.iter().enumerate() {
            trim_primitive(k, prim, &primitives, &mut boundary);
        }
        Ok(Domain { primitives, bbox, boundary, tau_geom: 1e-9 * bbox.diameter() })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        Domain::new(vec![Primitive::Disk { center, radius }])
    }

    /// The open square `(-a, a)^2`.
    pub fn square(a: f64) -> Result<Self> {
        Domain::new(vec![Primitive::rect(-a, -a, a, a)])
    }

    /// Two radius-3 disks at `(+-4, 0)` joined by the strip `(-4, 4) x (-1, 1)`.
    pub fn dumbbell() -> Self {
        Domain::new(vec![
            Primitive::disk(-4.0, 0.0, 3.0),
            Primitive::disk(4.0, 0.0, 3.0),
            Primitive::rect(-4.0, -1.0, 4.0, 1.0),
        ])
        .expect("valid primitives")
    }

    /// Like [`Domain::dumbbell`] but the right disk has radius 1.
    pub fn lopsided_dumbbell() -> Self {
        Domain::new(vec![
            Primitive::disk(-4.0, 0.0, 3.0),
            Primitive::disk(4.0, 0.0, 1.0),
            Primitive::rect(-4.0, -1.0, 4.0, 1.0),
        ])
        .expect("valid primitives")
    }

    pub fn contains(&self, p: Point) -> bool {
        if self.primitives.iter().any(|q| q.strictly_inside(p)) {
            return true;
        }
        // seam between touching primitives
        self.primitives.iter().any(|q| q.closed_contains(p)) && self.boundary_distance(p) > self.tau_geom
    }

    /// Exact distance to the trimmed boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.boundary
            .iter()
            .map(|piece| piece.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest points of every boundary piece whose distance is within `tol` of the minimum.
    pub fn projections(&self, p: Point, tol: f64) -> Vec<Point> {
        let d = self.boundary_distance(p);
        let target = d + tol;
        let mut out: Vec<Point> = Vec::new();
        for piece in &self.boundary {
            if piece.distance(p) > target {
                continue;
            }
            for q in piece.closest_points(p) {
                if p.dist(q) <= target && out.iter().all(|o| o.dist(q) > self.tau_geom) {
                    out.push(q);
                }
            }
        }
        out
    }

    /// First parameter `t` in `(0, 1]` at which the segment from inside point `a` towards `b`
    /// leaves the domain, or `None` if the closed segment stays inside.
    pub fn exit_fraction(&self, a: Point, b: Point) -> Option<f64> {
        let chords: Vec<(f64, f64)> = self.primitives.iter().filter_map(|q| q.chord(a, b)).collect();
        let mut end = 0.0f64;
        loop {
            let seam = end > 0.0 && self.contains(a + (b - a) * end);
            let next = chords
                .iter()
                .filter(|&&(t0, t1)| t1 > end && (t0 < end || (seam && t0 <= end + 1e-12)))
                .map(|&(_, t1)| t1)
                .fold(f64::NEG_INFINITY, f64::max);
            if next == f64::NEG_INFINITY {
                return Some(end.clamp(0.0, 1.0));
            }
            end = next;
            if end >= 1.0 {
                return if end > 1.0 || self.contains(b) { None } else { Some(1.0) };
            }
        }
    }

    /// Sample points along the whole trimmed boundary.
    pub fn boundary_samples(&self, spacing: f64) -> Vec<Point> {
        self.boundary.iter().flat_map(|p| p.sample(spacing)).collect()
    }
}

fn line_circle_params(a: Point, b: Point, center: Point, radius: f64) -> Vec<f64> {
    let dir = b - a;
    let f = a - center;
    let qa = dir.dot(dir);
    let qb = 2.0 * f.dot(dir);
    let qc = f.dot(f) - radius * radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    vec![(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)]
}

fn trim_primitive(k: usize, prim: &Primitive, all: &[Primitive], out: &mut Vec<BoundaryPiece>) {
    let others: Vec<&Primitive> = all.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, q)| q).collect();
    let probe = 1e-9 * prim.bbox().diameter();
    // strictly inside another primitive, or a seam where another primitive continues outward
    let covered = |p: Point, outward: Point| {
        others.iter().any(|q| q.strictly_inside(p) || q.strictly_inside(p + outward * probe))
    };
    match *prim {
        Primitive::Disk { center, radius } => {
            let mut cuts = vec![0.0];
            for q in &others {
                match **q {
                    Primitive::Disk { center: c2, radius: r2 } => {
                        let dv = c2 - center;
                        let dd = dv.norm();
                        if dd > 0.0 && dd < radius + r2 && dd > (radius - r2).abs() {
                            let cosv = (radius * radius + dd * dd - r2 * r2) / (2.0 * radius * dd);
                            let base = dv.y.atan2(dv.x);
                            let off = cosv.clamp(-1.0, 1.0).acos();
                            cuts.push(wrap(base + off));
                            cuts.push(wrap(base - off));
                        }
                    }
                    Primitive::Rect { .. } => {
                        for (ea, eb) in q.edges() {
                            for t in line_circle_params(ea, eb, center, radius) {
                                let p = ea + (eb - ea) * t;
                                cuts.push(wrap((p.y - center.y).atan2(p.x - center.x)));
                            }
                        }
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
            let n = cuts.len();
            let mut kept: Vec<(f64, f64)> = Vec::new();
            for i in 0..n {
                let lo = cuts[i];
                let hi = if i + 1 < n { cuts[i + 1] } else { TAU };
                if hi - lo < 1e-14 {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                if !covered(BoundaryPiece::arc_point(center, radius, mid), Point::new(mid.cos(), mid.sin())) {
                    match kept.last_mut() {
                        Some(last) if (last.1 - lo).abs() < 1e-14 => last.1 = hi,
                        _ => kept.push((lo, hi)),
                    }
                }
            }
            // join the piece ending at 2pi with the one starting at 0
            if kept.len() > 1 && kept[0].0 == 0.0 && (kept[kept.len() - 1].1 - TAU).abs() < 1e-14 {
                let last = kept.pop().expect("len > 1");
                kept[0] = (last.0, kept[0].1 + TAU);
            }
            for (lo, hi) in kept {
                out.push(BoundaryPiece::Arc { center, radius, start: lo, sweep: hi - lo });
            }
        }
        Primitive::Rect { .. } => {
            for (ea, eb) in prim.edges() {
                let e = eb - ea;
                let outward = Point::new(e.y, -e.x) * (1.0 / e.norm());
                let mut cuts = vec![0.0, 1.0];
                for q in &others {
                    match **q {
                        Primitive::Disk { center, radius } => {
                            cuts.extend(line_circle_params(ea, eb, center, radius));
                        }
                        Primitive::Rect { .. } => {
                            for (qa, qb) in q.edges() {
                                if let Some(t) = segment_line_param(ea, eb, qa, qb) {
                                    cuts.push(t);
                                }
                            }
                        }
                    }
                }
                let mut cuts: Vec<f64> = cuts.into_iter().filter(|t| (0.0..=1.0).contains(t)).collect();
                cuts.sort_by(f64::total_cmp);
                cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                let mut start: Option<f64> = None;
                let mut last_hi = 0.0;
                for w in cuts.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    let keep = !covered(ea + (eb - ea) * (0.5 * (lo + hi)), outward);
                    match (keep, start) {
                        (true, None) => start = Some(lo),
                        (false, Some(s)) => {
                            out.push(BoundaryPiece::Segment { a: ea + (eb - ea) * s, b: ea + (eb - ea) * lo });
                            start = None;
                        }
                        _ => {}
                    }
                    last_hi = hi;
                }
                if let Some(s) = start {
                    out.push(BoundaryPiece::Segment { a: ea + (eb - ea) * s, b: ea + (eb - ea) * last_hi });
                }
            }
        }
    }
}

/// Parameter along `a -> b` where it crosses the infinite line through `c`, `d`.
fn segment_line_param(a: Point, b: Point, c: Point, d: Point) -> Option<f64> {
    let r = b - a;
    let s = d - c;
    let denom = r.x * s.y - r.y * s.x;
    if denom == 0.0 {
        return None;
    }
    let w = c - a;
    Some((w.x * s.y - w.y * s.x) / denom)
}
