//! Uniform node grids and the per-node data carried on them.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn union(self, o: BoundingBox) -> BoundingBox {
        BoundingBox {
            min: Point::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    pub fn diameter(&self) -> f64 {
        self.min.dist(self.max)
    }
}

/// Node `(i, j)` sits at `origin + (i h, j h)`; storage is row-major from y-min.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(origin: Point, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2x2 nodes, got {nx}x{ny}")));
        }
        Ok(Grid { origin, h, nx, ny })
    }

    /// Grid aligned to integer multiples of `h` (so the axes are grid lines) covering
    /// `bbox` with `margin` extra cells on every side.
    pub fn covering(bbox: BoundingBox, h: f64, margin: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let m = margin.max(2) as i64;
        let i0 = (bbox.min.x / h).floor() as i64 - m;
        let j0 = (bbox.min.y / h).floor() as i64 - m;
        let i1 = (bbox.max.x / h).ceil() as i64 + m;
        let j1 = (bbox.max.y / h).ceil() as i64 + m;
        Grid::new(
            Point::new(i0 as f64 * h, j0 as f64 * h),
            h,
            (i1 - i0 + 1) as usize,
            (j1 - j0 + 1) as usize,
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
        )
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        let (i, j) = self.ij(idx);
        self.coords(i, j)
    }

    /// Index of the node nearest to `p`, if `p` lies within the grid rectangle.
    pub fn nearest(&self, p: Point) -> Option<usize> {
        let fi = ((p.x - self.origin.x) / self.h).round();
        let fj = ((p.y - self.origin.y) / self.h).round();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    /// Offset a node by `(di, dj)` cells, if the result stays on the grid.
    #[inline]
    pub fn offset(&self, idx: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.ij(idx);
        let ni = i as i64 + di;
        let nj = j as i64 + dj;
        if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
            None
        } else {
            Some(self.index(ni as usize, nj as usize))
        }
    }

    /// The four axis neighbours of a node that exist on the grid.
    pub fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .filter_map(move |(di, dj)| self.offset(idx, di, dj))
    }

    pub fn same_shape(&self, o: &Grid) -> bool {
        self.nx == o.nx
            && self.ny == o.ny
            && self.h == o.h
            && self.origin == o.origin
    }
}

/// Real values on a grid plus the mask of in-domain nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub inside: Vec<bool>,
    /// What the values represent, e.g. `"distance"` or `"potential"`.
    pub quantity: String,
}

impl ScalarField {
    pub fn new(grid: Grid, inside: Vec<bool>, quantity: impl Into<String>) -> Self {
        let values = inside
            .iter()
            .map(|&b| if b { 0.0 } else { f64::NAN })
            .collect();
        ScalarField { grid, values, inside, quantity: quantity.into() }
    }

    /// Evaluate `f` at every inside node.
    pub fn from_fn(
        grid: Grid,
        inside: Vec<bool>,
        quantity: impl Into<String>,
        f: impl Fn(Point) -> f64,
    ) -> Self {
        let mut field = ScalarField::new(grid, inside, quantity);
        for idx in 0..grid.len() {
            if field.inside[idx] {
                field.values[idx] = f(grid.point(idx));
            }
        }
        field
    }

    pub fn inside_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len()).filter(move |&i| self.inside[i])
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Max over inside nodes.
    pub fn max_inside(&self) -> Option<(usize, f64)> {
        self.inside_indices()
            .map(|i| (i, self.values[i]))
            .fold(None, |acc, (i, v)| match acc {
                Some((_, best)) if best >= v => acc,
                _ => Some((i, v)),
            })
    }

    pub fn min_inside(&self) -> Option<(usize, f64)> {
        self.inside_indices()
            .map(|i| (i, self.values[i]))
            .fold(None, |acc, (i, v)| match acc {
                Some((_, best)) if best <= v => acc,
                _ => Some((i, v)),
            })
    }

    /// Bilinear interpolation; `None` unless all four cell corners are inside nodes.
    pub fn bilinear(&self, p: Point) -> Option<f64> {
        let g = &self.grid;
        let fx = (p.x - g.origin.x) / g.h;
        let fy = (p.y - g.origin.y) / g.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        if fx > (g.nx - 1) as f64 || fy > (g.ny - 1) as f64 {
            return None;
        }
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let corners = [
            g.index(i, j),
            g.index(i + 1, j),
            g.index(i, j + 1),
            g.index(i + 1, j + 1),
        ];
        if corners.iter().any(|&c| !self.inside[c]) {
            return None;
        }
        let [a, b, c, d] = corners.map(|c| self.values[c]);
        Some((1.0 - ty) * ((1.0 - tx) * a + tx * b) + ty * ((1.0 - tx) * c + tx * d))
    }
}

/// Node subset of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactMask {
    pub grid: Grid,
    pub member: Vec<bool>,
}

impl CompactMask {
    pub fn empty(grid: Grid) -> Self {
        CompactMask { grid, member: vec![false; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize) -> bool) -> Self {
        CompactMask { grid, member: (0..grid.len()).map(f).collect() }
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len()).filter(move |&i| self.member[i])
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.member[idx]
    }

    pub fn union(&self, other: &CompactMask) -> CompactMask {
        CompactMask::from_fn(self.grid, |i| self.member[i] || other.member[i])
    }

    pub fn is_subset_of(&self, other: &CompactMask) -> bool {
        self.member.iter().zip(&other.member).all(|(&a, &b)| !a || b)
    }

    /// Nodes of the mask whose four axis neighbours are all in the mask.
    pub fn grid_interior(&self) -> CompactMask {
        let g = self.grid;
        CompactMask::from_fn(g, |i| {
            self.member[i] && {
                let (ci, cj) = g.ij(i);
                ci > 0 && cj > 0 && ci + 1 < g.nx && cj + 1 < g.ny && g.neighbors4(i).all(|n| self.member[n])
            }
        })
    }

    /// Euclidean distance from every node to the nearest member node (`inf` if empty).
    pub fn distance_transform(&self) -> Vec<f64> {
        squared_edt(self.grid, &self.member)
            .into_iter()
            .map(|d2| d2.sqrt() * self.grid.h)
            .collect()
    }
}

/// Exact squared Euclidean distance transform in units of cells (lower envelope of parabolas,
/// applied separably along rows then columns).
pub fn squared_edt(grid: Grid, seeds: &[bool]) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut out = vec![f64::INFINITY; nx * ny];
    let mut buf = vec![0.0; nx.max(ny)];
    let mut res = vec![0.0; nx.max(ny)];
    for j in 0..ny {
        for i in 0..nx {
            buf[i] = if seeds[j * nx + i] { 0.0 } else { f64::INFINITY };
        }
        edt_1d(&buf[..nx], &mut res[..nx]);
        out[j * nx..(j + 1) * nx].copy_from_slice(&res[..nx]);
    }
    for i in 0..nx {
        for j in 0..ny {
            buf[j] = out[j * nx + i];
        }
        edt_1d(&buf[..ny], &mut res[..ny]);
        for j in 0..ny {
            out[j * nx + i] = res[j];
        }
    }
    out
}

fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k: usize = 0;
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(q) => q,
        None => {
            d.iter_mut().for_each(|x| *x = f64::INFINITY);
            return;
        }
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] {
                // k > 0 here: z[0] is -inf
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(Point::new(0.0, 0.0), 1.0, n, n).unwrap()
    }

    #[test]
    fn covering_is_axis_aligned() {
        let bb = BoundingBox { min: Point::new(-1.0, -1.0), max: Point::new(1.0, 1.0) };
        let g = Grid::covering(bb, 0.25, 2).unwrap();
        let c = g.nearest(Point::new(0.0, 0.0)).unwrap();
        assert_eq!(g.point(c), Point::new(0.0, 0.0));
        assert!(g.origin.x <= -1.5 && g.origin.y <= -1.5);
        assert!(g.coords(g.nx - 1, g.ny - 1).x >= 1.5);
    }

    #[test]
    fn rejects_bad_spacing() {
        assert!(Grid::new(Point::default(), 0.0, 4, 4).is_err());
        assert!(Grid::new(Point::default(), -1.0, 4, 4).is_err());
    }

    #[test]
    fn edt_matches_brute_force() {
        let g = grid(17);
        let seeds: Vec<bool> = (0..g.len()).map(|i| i % 37 == 5 || i == 100).collect();
        let edt = squared_edt(g, &seeds);
        for a in 0..g.len() {
            let pa = g.point(a);
            let brute = (0..g.len())
                .filter(|&b| seeds[b])
                .map(|b| {
                    let d = pa.dist(g.point(b));
                    d * d
                })
                .fold(f64::INFINITY, f64::min);
            assert!((edt[a] - brute).abs() < 1e-9, "node {a}: {} vs {brute}", edt[a]);
        }
    }

    #[test]
    fn edt_of_empty_set_is_infinite() {
        let g = grid(5);
        assert!(squared_edt(g, &vec![false; g.len()]).iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn grid_interior_drops_edges() {
        let g = grid(6);
        let m = CompactMask::from_fn(g, |i| {
            let (x, y) = g.ij(i);
            (1..=3).contains(&x) && (1..=3).contains(&y)
        });
        let int = m.grid_interior();
        assert_eq!(int.count(), 1);
        assert!(int.contains(g.index(2, 2)));
    }

    #[test]
    fn bilinear_reproduces_affine() {
        let g = grid(5);
        let f = ScalarField::from_fn(g, vec![true; g.len()], "affine", |p| 2.0 * p.x - p.y + 0.5);
        let v = f.bilinear(Point::new(1.3, 2.7)).unwrap();
        assert!((v - (2.6 - 2.7 + 0.5)).abs() < 1e-12);
    }
}
