//! Wide-stencil neighbour lists with cut-cell boundary points.

use crate::geometry::Domain;
use crate::grid::{CompactMask, Grid, Point};

/// Lattice directions `(a, b)` with `max(|a|, |b|) <= width` and `gcd(|a|, |b|) = 1`,
/// closed under sign flip, in a fixed order.
pub fn directions(width: usize) -> Vec<(i64, i64)> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let w = width as i64;
    let mut out = Vec::new();
    for b in -w..=w {
        for a in -w..=w {
            if (a, b) != (0, 0) && gcd(a.abs(), b.abs()) == 1 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Zero-set cut cells on the exact level `{d = r}`, placed only in cells with a corner in `near`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCut {
    pub r: f64,
    pub near: CompactMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StencilConfig {
    pub width: usize,
}

impl Default for StencilConfig {
    fn default() -> Self {
        StencilConfig { width: 3 }
    }
}

/// What the stencil sees in direction `v` from a free node.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Hit {
    Node(usize),
    Boundary(f64, Point),
    ZeroSet(f64),
}

/// Compressed neighbour lists for all free nodes.
///
/// Stencil targets index a state vector holding every grid node followed by ghost values
/// for the cut-cell points on the domain boundary and on the zero set.
#[derive(Debug, Clone)]
pub struct StencilGraph {
    pub grid: Grid,
    pub config: StencilConfig,
    /// Free nodes in lexicographic order.
    pub free: Vec<usize>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    dists: Vec<f64>,
    ghosts: Vec<f64>,
}

/// First `t` in `[0, 1]` at which `x + t (y - x)` reaches `{d >= level}`, by sphere tracing
/// the 1-Lipschitz distance function.
fn trace_level(domain: &Domain, x: Point, y: Point, level: f64) -> Option<f64> {
    let len = x.dist(y);
    let mut t = 0.0;
    for _ in 0..400 {
        let p = x + (y - x) * t;
        let gap = level - domain.boundary_distance(p);
        if gap <= 1e-13 * level.max(1.0) {
            return Some(t);
        }
        t += gap / len;
        if t > 1.0 {
            return None;
        }
    }
    Some(t)
}

impl StencilGraph {
    /// `fixed` nodes carry `fixed_value`; boundary crossings carry `boundary(point)`.
    /// With a level cut the zero set is treated as `{d >= r}` near `cut.near` and the stencil
    /// stops at the exact crossing of that level.
    pub fn build(
        domain: &Domain,
        grid: Grid,
        inside: &[bool],
        fixed: &CompactMask,
        fixed_value: f64,
        boundary: &dyn Fn(Point) -> f64,
        level: Option<&LevelCut>,
        config: StencilConfig,
    ) -> Self {
        let dirs = directions(config.width);
        let h = grid.h;
        let mut free = Vec::new();
        let mut offsets = vec![0];
        let mut targets: Vec<u32> = Vec::new();
        let mut dists = Vec::new();
        let mut ghosts = Vec::new();
        let base = grid.len();
        let in_cut_cell = |near: &CompactMask, p: Point| -> bool {
            let fx = ((p.x - grid.origin.x) / h).floor() as i64;
            let fy = ((p.y - grid.origin.y) / h).floor() as i64;
            [(0, 0), (1, 0), (0, 1), (1, 1)].iter().any(|&(a, b)| {
                let (i, j) = (fx + a, fy + b);
                i >= 0
                    && j >= 0
                    && (i as usize) < grid.nx
                    && (j as usize) < grid.ny
                    && near.member[grid.index(i as usize, j as usize)]
            })
        };
        for idx in 0..grid.len() {
            if !inside[idx] || fixed.member[idx] {
                continue;
            }
            free.push(idx);
            let x = grid.point(idx);
            let dx = domain.boundary_distance(x);
            for &(a, b) in &dirs {
                let y = x + Point::new(a as f64 * h, b as f64 * h);
                let len = x.dist(y);
                let exit = domain.exit_fraction(x, y);
                let mut hit = match exit {
                    Some(t) => Hit::Boundary(t, x + (y - x) * t),
                    None => Hit::Node(grid.offset(idx, a, b).expect("inside segment stays on grid")),
                };
                if let Some(LevelCut { r, near }) = level {
                    let r = *r;
                    if dx + len >= r {
                        if let Some(t) = trace_level(domain, x, y, r) {
                            let t_exit = exit.unwrap_or(f64::INFINITY);
                            if t < t_exit && t > 0.0 && in_cut_cell(near, x + (y - x) * t) {
                                hit = Hit::ZeroSet(t);
                            }
                        }
                    }
                }
                let (target, dist) = match hit {
                    Hit::Node(n) => (n, len),
                    Hit::Boundary(t, p) => {
                        ghosts.push(boundary(p));
                        (base + ghosts.len() - 1, (t * len).max(1e-12 * h))
                    }
                    Hit::ZeroSet(t) => {
                        ghosts.push(fixed_value);
                        (base + ghosts.len() - 1, (t * len).max(1e-12 * h))
                    }
                };
                targets.push(target as u32);
                dists.push(dist);
            }
            offsets.push(targets.len());
        }
        StencilGraph { grid, config, free, offsets, targets, dists, ghosts }
    }

    pub fn state_len(&self) -> usize {
        self.grid.len() + self.ghosts.len()
    }

    /// Copy ghost values into the tail of a state vector.
    pub fn fill_ghosts(&self, state: &mut [f64]) {
        state[self.grid.len()..].copy_from_slice(&self.ghosts);
    }

    pub fn ghost_values(&self) -> &[f64] {
        &self.ghosts
    }

    #[inline]
    pub fn entries(&self, k: usize) -> (&[u32], &[f64]) {
        let r = self.offsets[k]..self.offsets[k + 1];
        (&self.targets[r.clone()], &self.dists[r])
    }

    /// Largest and smallest slope `(u(y) - t) / |y - x|` with their distances.
    #[inline]
    pub fn slopes(&self, k: usize, state: &[f64], t: f64) -> Slopes {
        let (targets, dists) = self.entries(k);
        let mut s = Slopes {
            max: f64::NEG_INFINITY,
            max_dist: 1.0,
            max_value: t,
            min: f64::INFINITY,
            min_dist: 1.0,
            min_value: t,
        };
        for (&tg, &d) in targets.iter().zip(dists) {
            let v = state[tg as usize];
            let g = (v - t) / d;
            if g > s.max {
                s.max = g;
                s.max_dist = d;
                s.max_value = v;
            }
            if g < s.min {
                s.min = g;
                s.min_dist = d;
                s.min_value = v;
            }
        }
        s
    }

    /// Solve `max slope + min slope = 0` for the value at free node `k`.
    ///
    /// The root is bracketed by the extreme stencil values; each step takes the mid-slope
    /// average of the current steepest ascent and descent neighbours, falling back to
    /// bisection when that leaves the bracket.
    pub fn local_solve(&self, k: usize, state: &[f64], current: f64) -> f64 {
        let (targets, _) = self.entries(k);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &tg in targets {
            let v = state[tg as usize];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo <= 0.0 {
            return lo;
        }
        let mut t = current.clamp(lo, hi);
        for _ in 0..100 {
            let s = self.slopes(k, state, t);
            let f = s.max + s.min;
            if f == 0.0 {
                return t;
            }
            if f > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let next = (s.min_dist * s.max_value + s.max_dist * s.min_value) / (s.max_dist + s.min_dist);
            if next == t {
                return t;
            }
            t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1e-300) {
                return t;
            }
        }
        t
    }

    /// Mid-slope defect `|max + min| * d+ d- / (d+ + d-)` at node `k`, i.e. the distance between
    /// the current value and its mid-slope average.
    pub fn defect(&self, k: usize, state: &[f64]) -> f64 {
        let t = state[self.free[k]];
        let s = self.slopes(k, state, t);
        (s.max + s.min).abs() * s.max_dist * s.min_dist / (s.max_dist + s.min_dist)
    }

    /// Steepest descent slope `max_y (u(x) - u(y))^+ / |x - y|`.
    pub fn descent(&self, k: usize, state: &[f64]) -> f64 {
        let t = state[self.free[k]];
        (-self.slopes(k, state, t).min).max(0.0)
    }

    pub fn ascent(&self, k: usize, state: &[f64]) -> f64 {
        let t = state[self.free[k]];
        self.slopes(k, state, t).max.max(0.0)
    }

    /// Position of `node` in `free`, if it is a free node.
    pub fn free_position(&self, node: usize) -> Option<usize> {
        self.free.binary_search(&node).ok()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Slopes {
    pub max: f64,
    pub max_dist: f64,
    pub max_value: f64,
    pub min: f64,
    pub min_dist: f64,
    pub min_value: f64,
}
