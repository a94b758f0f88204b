//! Monotone wide-stencil solver for the infinity-Laplace Dirichlet problem.
//!
//! Every free node is driven to the mid-slope condition: the steepest ascent slope and the
//! steepest descent slope over its stencil cancel. Stencil rays that leave the domain or enter
//! the zero set stop at the crossing point, which carries the Dirichlet value at its exact
//! (sub-cell) distance. The nodal update is the exact root of that condition, a weighted
//! average of two stencil values, so it is monotone in the neighbours and never overshoots.
//! Whole sweeps may be Anderson-mixed to speed up convergence; the returned values always come
//! from a plain sweep.

pub mod stencil;
pub mod verify;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::grid::{CompactMask, Grid, Point, ScalarField};
pub use stencil::LevelCut;
use stencil::{StencilConfig, StencilGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Gauss-Seidel, lexicographic then reverse order. Bit-reproducible.
    DeterministicSerial,
    /// Jacobi sweeps evaluated in parallel.
    ParallelJacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative to the range of the Dirichlet data.
    pub tol_residual: f64,
    pub max_sweeps: usize,
    pub mode: Mode,
    pub stencil: StencilConfig,
    /// Anderson mixing depth applied to whole sweeps; 0 runs plain sweeps.
    pub acceleration: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_residual: 1e-8,
            max_sweeps: 200_000,
            mode: Mode::DeterministicSerial,
            stencil: StencilConfig::default(),
            acceleration: 5,
        }
    }
}

/// Converged nodal values plus the stencil they were solved on.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: ScalarField,
    pub graph: StencilGraph,
    /// Full state vector (grid nodes followed by ghost values).
    pub state: Vec<f64>,
    pub residual: f64,
    pub sweeps_used: usize,
}

impl Solution {
    /// Max over free nodes of the mid-slope defect.
    pub fn residual(&self) -> f64 {
        (0..self.graph.free.len())
            .map(|k| self.graph.defect(k, &self.state))
            .fold(0.0, f64::max)
    }

    /// Replace nodal values (same grid, same stencil), e.g. to verify a foreign field.
    pub fn with_values(&self, values: &[f64]) -> Solution {
        let mut out = self.clone();
        for i in 0..self.field.grid.len() {
            if self.field.inside[i] {
                out.field.values[i] = values[i];
                out.state[i] = values[i];
            }
        }
        out.residual = out.residual();
        out
    }

    /// Steepest-descent slope at every free node (0 elsewhere).
    pub fn descent_field(&self) -> ScalarField {
        let mut f = self.field.clone();
        f.quantity = "descent slope".into();
        for i in f.inside_indices().collect::<Vec<_>>() {
            f.values[i] = 0.0;
        }
        for (k, &i) in self.graph.free.iter().enumerate() {
            f.values[i] = self.graph.descent(k, &self.state);
        }
        f
    }
}

/// Solve the Dirichlet problem with value `fixed_value` on `fixed` nodes and `boundary(p)` on
/// the domain boundary, starting from `init` (one value per grid node).
#[allow(clippy::too_many_arguments)]
pub fn solve_dirichlet(
    domain: &Domain,
    grid: Grid,
    fixed: &CompactMask,
    fixed_value: f64,
    boundary: &dyn Fn(Point) -> f64,
    level: Option<&LevelCut>,
    init: &[f64],
    opts: &SolveOptions,
) -> Result<Solution> {
    if !(opts.tol_residual > 0.0) {
        return Err(Error::OutOfRange(format!("tol_residual must be positive, got {}", opts.tol_residual)));
    }
    let inside: Vec<bool> = (0..grid.len()).map(|i| domain.contains(grid.point(i))).collect();
    if !inside.iter().any(|&b| b) {
        return Err(Error::NoInsideNodes);
    }
    let graph = StencilGraph::build(domain, grid, &inside, fixed, fixed_value, boundary, level, opts.stencil);
    let mut state = vec![f64::NAN; graph.state_len()];
    graph.fill_ghosts(&mut state);
    for i in 0..grid.len() {
        if inside[i] {
            state[i] = if fixed.member[i] { fixed_value } else { init[i] };
        }
    }
    let (lo, hi) = data_range(&graph, fixed, fixed_value);
    let range = hi - lo;
    let tol = opts.tol_residual * if range > 0.0 { range } else { 1.0 };
    for &i in &graph.free {
        state[i] = state[i].clamp(lo, hi);
    }

    let sweep = |state: &mut Vec<f64>| -> f64 {
        match opts.mode {
            Mode::DeterministicSerial => {
                let mut change = 0.0f64;
                for k in (0..graph.free.len()).chain((0..graph.free.len()).rev()) {
                    let i = graph.free[k];
                    let new = graph.local_solve(k, state, state[i]);
                    change = change.max((new - state[i]).abs());
                    state[i] = new;
                }
                change
            }
            Mode::ParallelJacobi => {
                let updates: Vec<f64> = (0..graph.free.len())
                    .into_par_iter()
                    .map(|k| graph.local_solve(k, state, state[graph.free[k]]))
                    .collect();
                let mut change = 0.0f64;
                for (k, new) in updates.into_iter().enumerate() {
                    let i = graph.free[k];
                    change = change.max((new - state[i]).abs());
                    state[i] = new;
                }
                change
            }
        }
    };

    let mut anderson = (opts.acceleration > 0).then(|| Anderson::new(opts.acceleration));
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    let mut x: Vec<f64> = Vec::new();
    while sweeps < opts.max_sweeps {
        if anderson.is_some() {
            x.clear();
            x.extend(graph.free.iter().map(|&i| state[i]));
        }
        let change = sweep(&mut state);
        sweeps += 1;
        if change <= tol {
            residual = (0..graph.free.len()).map(|k| graph.defect(k, &state)).fold(0.0, f64::max);
            if residual <= tol {
                break;
            }
        }
        if let Some(aa) = anderson.as_mut() {
            let g: Vec<f64> = graph.free.iter().map(|&i| state[i]).collect();
            if let Some(next) = aa.step(&x, &g) {
                for (&i, v) in graph.free.iter().zip(next) {
                    state[i] = v.clamp(lo, hi);
                }
            }
        }
    }
    if residual > tol {
        residual = (0..graph.free.len()).map(|k| graph.defect(k, &state)).fold(0.0, f64::max);
        if residual > tol {
            return Err(Error::NotConverged { sweeps, residual });
        }
    }
    let mut field = ScalarField::new(grid, inside, "potential");
    for i in 0..grid.len() {
        if field.inside[i] {
            field.values[i] = state[i];
        }
    }
    Ok(Solution { field, graph, state, residual, sweeps_used: sweeps })
}

/// Anderson mixing of the sweep map `x -> g(x)` with a sliding window of differences.
///
/// The mixed iterate only seeds the next sweep; convergence is still judged on a plain sweep.
struct Anderson {
    depth: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    /// Columns of differences of `f = g - x` and of `g`.
    df: Vec<Vec<f64>>,
    dg: Vec<Vec<f64>>,
    best: f64,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Anderson { depth, prev: None, df: Vec::new(), dg: Vec::new(), best: f64::INFINITY }
    }

    fn restart(&mut self) {
        self.df.clear();
        self.dg.clear();
    }

    fn step(&mut self, x: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        let f: Vec<f64> = g.iter().zip(x).map(|(a, b)| a - b).collect();
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if let Some((f0, g0)) = self.prev.take() {
            self.df.push(f.iter().zip(&f0).map(|(a, b)| a - b).collect());
            self.dg.push(g.iter().zip(&g0).map(|(a, b)| a - b).collect());
            if self.df.len() > self.depth {
                self.df.remove(0);
                self.dg.remove(0);
            }
        }
        // a mixed step that made things much worse discards the history
        if norm > 10.0 * self.best {
            self.restart();
        }
        self.best = self.best.min(norm);
        self.prev = Some((f.clone(), g.to_vec()));
        if self.df.is_empty() {
            return None;
        }
        let Some(gamma) = least_squares(&self.df, &f) else {
            self.restart();
            return None;
        };
        let mut next = g.to_vec();
        for (c, col) in gamma.iter().zip(&self.dg) {
            for (v, d) in next.iter_mut().zip(col) {
                *v -= c * d;
            }
        }
        Some(next)
    }
}

/// `argmin |b - A c|` for the columns `a`, by modified Gram-Schmidt; `None` when the columns
/// are numerically dependent.
fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut r = vec![vec![0.0; m]; m];
    for j in 0..m {
        let mut v = a[j].clone();
        for (i, qi) in q.iter().enumerate() {
            let c: f64 = qi.iter().zip(&v).map(|(x, y)| x * y).sum();
            r[i][j] = c;
            for (vv, qq) in v.iter_mut().zip(qi) {
                *vv -= c * qq;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = a[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-10 * scale) {
            return None;
        }
        r[j][j] = norm;
        v.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
    }
    let qtb: Vec<f64> = q.iter().map(|qi| qi.iter().zip(b).map(|(x, y)| x * y).sum()).collect();
    let mut c = vec![0.0; m];
    for j in (0..m).rev() {
        let s: f64 = (j + 1..m).map(|k| r[j][k] * c[k]).sum();
        c[j] = (qtb[j] - s) / r[j][j];
    }
    Some(c)
}

fn data_range(graph: &StencilGraph, fixed: &CompactMask, fixed_value: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in graph.ghost_values() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !fixed.is_empty() {
        lo = lo.min(fixed_value);
        hi = hi.max(fixed_value);
    }
    if lo > hi {
        (fixed_value, fixed_value)
    } else {
        (lo, hi)
    }
}

/// Infinity-harmonic potential: 1 on the boundary, 0 on the zero set.
#[derive(Debug, Clone)]
pub struct Potential {
    pub solution: Solution,
    pub zero_set: CompactMask,
    /// Exact level `{d >= r}` used for cut cells on the zero set, if any.
    pub level: Option<LevelCut>,
    pub domain: Domain,
}

impl Potential {
    pub fn field(&self) -> &ScalarField {
        &self.solution.field
    }

    pub fn residual(&self) -> f64 {
        self.solution.residual
    }

    pub fn sweeps_used(&self) -> usize {
        self.solution.sweeps_used
    }

    /// Value at an arbitrary point: 1 off the domain, bilinear where the cell is fully
    /// inside, nearest inside node otherwise.
    pub fn value_at(&self, p: Point) -> f64 {
        if !self.domain.contains(p) {
            return 1.0;
        }
        let f = self.field();
        if let Some(v) = f.bilinear(p) {
            return v;
        }
        let g = f.grid;
        let fx = ((p.x - g.origin.x) / g.h).floor() as i64;
        let fy = ((p.y - g.origin.y) / g.h).floor() as i64;
        let mut best = (f64::INFINITY, 1.0);
        for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let (i, j) = (fx + a, fy + b);
            if i < 0 || j < 0 || i as usize >= g.nx || j as usize >= g.ny {
                continue;
            }
            let idx = g.index(i as usize, j as usize);
            if f.inside[idx] {
                let dist = g.point(idx).dist(p);
                if dist < best.0 {
                    best = (dist, f.values[idx]);
                }
            }
        }
        best.1
    }
}

/// `dist(x, K) / (dist(x, K) + d(x))`, clipped to `[0, 1]`.
fn distance_ratio_init(domain: &Domain, grid: Grid, k: &CompactMask) -> Vec<f64> {
    let to_k = k.distance_transform();
    (0..grid.len())
        .map(|i| {
            let a = to_k[i];
            let b = domain.boundary_distance(grid.point(i));
            if a + b > 0.0 {
                (a / (a + b)).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

pub fn solve_potential(domain: &Domain, k: &CompactMask, grid: Grid, opts: &SolveOptions) -> Result<Potential> {
    solve_potential_impl(domain, k, grid, None, opts)
}

/// As [`solve_potential`], with zero-set cut cells placed on the exact level `{d = level}`.
pub fn solve_potential_at_level(
    domain: &Domain,
    k: &CompactMask,
    grid: Grid,
    level: f64,
    opts: &SolveOptions,
) -> Result<Potential> {
    let cut = LevelCut { r: level, near: k.clone() };
    solve_potential_impl(domain, k, grid, Some(&cut), opts)
}

/// As [`solve_potential`], with zero-set cut cells on `{d = cut.r}` next to `cut.near`.
pub fn solve_potential_with_cut(
    domain: &Domain,
    k: &CompactMask,
    grid: Grid,
    cut: &LevelCut,
    opts: &SolveOptions,
) -> Result<Potential> {
    solve_potential_impl(domain, k, grid, Some(cut), opts)
}

fn solve_potential_impl(
    domain: &Domain,
    k: &CompactMask,
    grid: Grid,
    level: Option<&LevelCut>,
    opts: &SolveOptions,
) -> Result<Potential> {
    if k.is_empty() {
        return Err(Error::EmptyZeroSet);
    }
    if !k.grid.same_shape(&grid) {
        return Err(Error::InvalidGrid("zero set lives on a different grid".into()));
    }
    if level.is_some_and(|c| !c.near.grid.same_shape(&grid)) {
        return Err(Error::InvalidGrid("level cut lives on a different grid".into()));
    }
    if k.indices().any(|i| !domain.contains(grid.point(i))) {
        return Err(Error::Precondition("zero set must consist of inside nodes".into()));
    }
    let init = coarse_init(domain, k, grid, level, opts).unwrap_or_else(|| distance_ratio_init(domain, grid, k));
    let solution = solve_dirichlet(domain, grid, k, 0.0, &|_| 1.0, level, &init, opts)?;
    Ok(Potential { solution, zero_set: k.clone(), level: level.cloned(), domain: domain.clone() })
}

/// Grids with more nodes than this start from the interpolated solution on the grid of
/// every other node.
const COARSE_START_NODES: usize = 8000;

fn coarse_init(
    domain: &Domain,
    k: &CompactMask,
    grid: Grid,
    level: Option<&LevelCut>,
    opts: &SolveOptions,
) -> Option<Vec<f64>> {
    if grid.len() <= COARSE_START_NODES || grid.nx < 5 || grid.ny < 5 {
        return None;
    }
    let coarse = Grid::new(grid.origin, 2.0 * grid.h, (grid.nx - 1) / 2 + 1, (grid.ny - 1) / 2 + 1).ok()?;
    let restrict = |m: &CompactMask| {
        CompactMask::from_fn(coarse, |c| {
            let (i, j) = coarse.ij(c);
            m.member[grid.index(2 * i, 2 * j)]
        })
    };
    let ck = restrict(k);
    if ck.is_empty() {
        return None;
    }
    let cut = level.map(|c| LevelCut { r: c.r, near: restrict(&c.near) });
    let p = solve_potential_impl(domain, &ck, coarse, cut.as_ref(), opts).ok()?;
    Some((0..grid.len()).map(|i| p.value_at(grid.point(i)).clamp(0.0, 1.0)).collect())
}

/// Max over free nodes of the mid-slope defect.
pub fn residual(p: &Potential) -> f64 {
    p.solution.residual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_field, parallel_mask, Level};

    fn ball_setup(h: f64) -> (Domain, Grid) {
        let dom = Domain::ball(Point::default(), 1.0).unwrap();
        let grid = Grid::covering(dom.bbox, h, 3).unwrap();
        (dom, grid)
    }

    #[test]
    fn cone_from_center() {
        let h = 1.0 / 32.0;
        let (dom, grid) = ball_setup(h);
        let k = CompactMask::from_fn(grid, |i| grid.point(i).norm() <= h + 1e-12);
        let p = solve_potential(&dom, &k, grid, &SolveOptions::default()).unwrap();
        let err = p
            .field()
            .inside_indices()
            .map(|i| (p.field().values[i] - grid.point(i).norm()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 2.0 * h.powf(1.0 / 3.0), "cone error {err}");
        assert!(p.residual() <= 1e-8);
    }

    #[test]
    fn annulus_is_affine_in_radius() {
        let h = 1.0 / 32.0;
        let (dom, grid) = ball_setup(h);
        let d = distance_field(&dom, grid).unwrap();
        let k = parallel_mask(&d, 0.5, Level::Closed(dom.tau_geom)).unwrap();
        let p = solve_potential_at_level(&dom, &k, grid, 0.5, &SolveOptions::default()).unwrap();
        let err = p
            .field()
            .inside_indices()
            .filter(|&i| !k.member[i])
            .map(|i| (p.field().values[i] - (grid.point(i).norm() - 0.5) / 0.5).abs())
            .fold(0.0, f64::max);
        assert!(err <= 5.0 * h, "annulus error {err}");
    }

    #[test]
    fn nearly_full_zero_set() {
        let h = 1.0 / 16.0;
        let (dom, grid) = ball_setup(h);
        let d = distance_field(&dom, grid).unwrap();
        let k = CompactMask::from_fn(grid, |i| d.inside[i] && d.values[i] > 1.5 * h);
        let p = solve_potential(&dom, &k, grid, &SolveOptions::default()).unwrap();
        for i in d.inside_indices() {
            if d.values[i] > 1.5 * h {
                assert_eq!(p.field().values[i], 0.0);
            }
            assert!((0.0..=1.0).contains(&p.field().values[i]));
        }
    }

    #[test]
    fn rejects_empty_zero_set() {
        let (dom, grid) = ball_setup(0.1);
        assert!(matches!(
            solve_potential(&dom, &CompactMask::empty(grid), grid, &SolveOptions::default()),
            Err(Error::EmptyZeroSet)
        ));
    }

    #[test]
    fn reports_non_convergence() {
        let (dom, grid) = ball_setup(1.0 / 16.0);
        let k = CompactMask::from_fn(grid, |i| grid.point(i).norm() < 0.3);
        let opts = SolveOptions { max_sweeps: 1, tol_residual: 1e-14, ..Default::default() };
        match solve_potential(&dom, &k, grid, &opts) {
            Err(Error::NotConverged { sweeps, .. }) => assert_eq!(sweeps, 1),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn serial_mode_is_bit_reproducible_and_jacobi_agrees() {
        let (dom, grid) = ball_setup(1.0 / 16.0);
        let k = CompactMask::from_fn(grid, |i| (grid.point(i) - Point::new(0.3, 0.1)).norm() < 0.2);
        let a = solve_potential(&dom, &k, grid, &SolveOptions::default()).unwrap();
        let b = solve_potential(&dom, &k, grid, &SolveOptions::default()).unwrap();
        assert_eq!(
            a.field().values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.field().values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let opts = SolveOptions { mode: Mode::ParallelJacobi, ..Default::default() };
        let c = solve_potential(&dom, &k, grid, &opts).unwrap();
        assert!(c.residual() <= 1e-8);
        for i in a.field().inside_indices() {
            assert!((a.field().values[i] - c.field().values[i]).abs() < 1e-6);
        }
    }
    #[test]
    fn least_squares_recovers_exact_combinations() {
        let a = vec![vec![1.0, 0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0, -1.0]];
        let b: Vec<f64> = (0..4).map(|i| 2.0 * a[0][i] - 3.0 * a[1][i]).collect();
        let c = least_squares(&a, &b).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] + 3.0).abs() < 1e-12);
        let dependent = vec![a[0].clone(), a[0].iter().map(|x| 2.0 * x).collect()];
        assert!(least_squares(&dependent, &b).is_none());
    }

    #[test]
    fn mixing_reaches_the_plain_sweep_solution_faster() {
        let (dom, grid) = ball_setup(1.0 / 32.0);
        let k = CompactMask::from_fn(grid, |i| (grid.point(i) - Point::new(-0.2, 0.3)).norm() < 0.25);
        let plain = SolveOptions { acceleration: 0, ..Default::default() };
        let a = solve_potential(&dom, &k, grid, &plain).unwrap();
        let b = solve_potential(&dom, &k, grid, &SolveOptions::default()).unwrap();
        assert!(b.sweeps_used() * 2 < a.sweeps_used(), "{} vs {}", b.sweeps_used(), a.sweeps_used());
        assert!(b.residual() <= 1e-8);
        for i in a.field().inside_indices() {
            assert!((a.field().values[i] - b.field().values[i]).abs() < 1e-5);
            assert!((0.0..=1.0).contains(&b.field().values[i]));
        }
    }
}
