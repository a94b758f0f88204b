//! Interior Bernoulli problem: construction and verification of free-boundary solutions.
//!
//! Solutions are infinity-harmonic potentials of compact zero sets. The free-boundary
//! condition itself has no pointwise grid analogue, so every solution is checked through its
//! proved consequences: the gradient bound, the location of the free boundary, the sandwich
//! between `1 - lambda d` and `lambda dist(., level set)`, and the zero-set identity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    check_h2, closure_mask, connected_components, distance_field, hat_d_mask, inradius, level_set_distance,
    parallel_mask, Domain, Inradius, Level, TAU_GRID_FACTOR,
};
use crate::functional::upwind_gradient;
use crate::grid::{CompactMask, Grid, Point, ScalarField};
use crate::report::{ReportSet, VerificationReport, Worst};
use crate::solver::verify::{cone_tolerance, verify_cone_comparison, verify_slope_estimates};
use crate::solver::{solve_potential, solve_potential_with_cut, LevelCut, Potential, SolveOptions};

/// Free-boundary tolerances are `5 h lambda`.
pub const TOL_FACTOR: f64 = 5.0;
/// A node is in the zero set when `u <= 10 tol_residual`.
pub const ZERO_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Trivial,
    Nontrivial,
}

/// A domain with its grid and exact distance field.
#[derive(Debug, Clone)]
pub struct Problem {
    pub domain: Domain,
    pub grid: Grid,
    pub d: ScalarField,
    pub inradius: Inradius,
}

impl Problem {
    pub fn new(domain: &Domain, grid: Grid) -> Result<Self> {
        let d = distance_field(domain, grid)?;
        let inradius = inradius(&d);
        Ok(Problem { domain: domain.clone(), grid, d, inradius })
    }

    /// `1 / R` with the measured inradius.
    pub fn critical_lambda(&self) -> f64 {
        1.0 / self.inradius.value
    }

    pub fn tau_ray(&self) -> f64 {
        TAU_GRID_FACTOR * self.grid.h
    }

    /// Grid closure of `{d > 1/lambda}`.
    pub fn closed_parallel(&self, lambda: f64) -> Result<CompactMask> {
        let r = 1.0 / lambda;
        let open = parallel_mask(&self.d, r, Level::Open)?;
        Ok(closure_mask(&self.d, &open, r, self.domain.tau_geom))
    }

    /// Connected components of `{d > 1/lambda}`, each closed on the grid.
    pub fn closed_components(&self, lambda: f64) -> Result<Vec<CompactMask>> {
        let r = 1.0 / lambda;
        let open = parallel_mask(&self.d, r, Level::Open)?;
        let comps = connected_components(&open);
        Ok((0..comps.count()).map(|k| closure_mask(&self.d, &comps.mask(k), r, self.domain.tau_geom)).collect())
    }
}

#[derive(Debug, Clone)]
pub struct BernoulliSolution {
    pub lambda: f64,
    pub potential: Potential,
    /// Nodes with `u <= tau_zero`.
    pub zero_set: CompactMask,
    /// Zero nodes with a positive 4-neighbour.
    pub free_boundary: Vec<usize>,
    pub kind: SolutionKind,
    pub tau_zero: f64,
}

impl BernoulliSolution {
    fn from_potential(lambda: f64, potential: Potential, opts: &SolveOptions) -> Self {
        let tau_zero = ZERO_FACTOR * opts.tol_residual;
        let f = potential.field();
        let g = f.grid;
        let zero_set = CompactMask::from_fn(g, |i| f.inside[i] && f.values[i] <= tau_zero);
        let free_boundary = zero_set
            .indices()
            .filter(|&i| g.neighbors4(i).any(|n| f.inside[n] && f.values[n] > tau_zero))
            .collect();
        let kind = if zero_set.grid_interior().is_empty() { SolutionKind::Trivial } else { SolutionKind::Nontrivial };
        BernoulliSolution { lambda, potential, zero_set, free_boundary, kind, tau_zero }
    }

    pub fn u(&self) -> &ScalarField {
        self.potential.field()
    }

    /// `5 h lambda`.
    pub fn tolerance(&self) -> f64 {
        TOL_FACTOR * self.u().grid.h * self.lambda
    }
}

/// The potential of the closed parallel set `{d >= 1/lambda}`.
pub fn solve_interior_bernoulli(problem: &Problem, lambda: f64, opts: &SolveOptions) -> Result<BernoulliSolution> {
    if !(lambda > problem.critical_lambda()) {
        return Err(Error::BelowCritical { lambda, critical: problem.critical_lambda() });
    }
    let k = problem.closed_parallel(lambda)?;
    let cut = LevelCut { r: 1.0 / lambda, near: k.clone() };
    let potential = solve_potential_with_cut(&problem.domain, &k, problem.grid, &cut, opts)?;
    Ok(BernoulliSolution::from_potential(lambda, potential, opts))
}

/// Any solution has `sup |grad u| >= 1/R`, which the gradient bound forbids for `lambda < 1/R`.
#[derive(Debug, Clone, Serialize)]
pub struct NonexistenceCertificate {
    pub lambda: f64,
    pub critical: f64,
    pub inradius: f64,
    pub report: VerificationReport,
}

pub fn check_nonexistence(problem: &Problem, lambda: f64) -> Result<NonexistenceCertificate> {
    let critical = problem.critical_lambda();
    if !(lambda < critical) {
        return Err(Error::Precondition(format!(
            "certificate needs lambda below 1/inradius = {critical}, got {lambda}"
        )));
    }
    let report = VerificationReport::new("gradient bound incompatible with inradius", lambda - critical, 0.0)
        .cite("gradient estimate")
        .cite("sup gradient at least one over inradius")
        .checked(1)
        .note(format!("every solution needs sup |grad u| >= {critical:.6} > lambda = {lambda}"));
    Ok(NonexistenceCertificate { lambda, critical, inradius: problem.inradius.value, report })
}

/// Descent slope at every positive node stays below `lambda`.
pub fn verify_gradient_bound(sol: &BernoulliSolution) -> VerificationReport {
    let s = &sol.potential.solution;
    let f = sol.u();
    let mut worst = Worst::signed();
    for (k, &i) in s.graph.free.iter().enumerate() {
        if f.values[i] > sol.tau_zero {
            worst.push(s.graph.descent(k, &s.state) - sol.lambda, f.grid.point(i));
        }
    }
    worst.into_report("gradient bound", sol.tolerance()).cite("gradient estimate")
}

/// `dist(F(u), boundary) >= 1/lambda`, with equality when the zero set has interior.
pub fn verify_fb_location(problem: &Problem, sol: &BernoulliSolution) -> Result<Vec<VerificationReport>> {
    fb_location(problem, sol.lambda, &sol.free_boundary, sol.kind, sol.tolerance())
}

fn fb_location(
    problem: &Problem,
    lambda: f64,
    free_boundary: &[usize],
    kind: SolutionKind,
    tol: f64,
) -> Result<Vec<VerificationReport>> {
    if free_boundary.is_empty() {
        return Err(Error::EmptyFreeBoundary);
    }
    let (at, min) = free_boundary
        .iter()
        .map(|&i| (i, problem.d.values[i]))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let r = 1.0 / lambda;
    let loc = Some(problem.grid.point(at));
    let n = free_boundary.len();
    let mut out = vec![VerificationReport::new("free boundary away from the boundary", r - min, tol)
        .at(loc)
        .checked(n)
        .cite("free boundary location")];
    if kind == SolutionKind::Nontrivial {
        out.push(
            VerificationReport::new("free boundary at distance exactly 1/lambda", min - r, tol)
                .at(loc)
                .checked(n)
                .cite("free boundary location, equality for non-trivial solutions"),
        );
    }
    Ok(out)
}

/// Checks a candidate solution given only by its nodal values: bounds, the upwind gradient
/// bound and the free-boundary location. The field must live on the problem grid.
pub fn verify_field(problem: &Problem, lambda: f64, u: &ScalarField, tau_zero: f64) -> Result<ReportSet> {
    if !u.grid.same_shape(&problem.grid) {
        return Err(Error::InvalidGrid("field grid differs from the domain grid".into()));
    }
    if let Some(i) = problem.d.inside_indices().find(|&i| !u.inside[i]) {
        return Err(Error::Precondition(format!("field undefined at inside node {:?}", problem.grid.point(i))));
    }
    let g = problem.grid;
    let tol = TOL_FACTOR * g.h * lambda;
    let mut reports = ReportSet::new(format!("field check lambda {lambda}"));
    let mut bounds = Worst::signed();
    for i in problem.d.inside_indices() {
        bounds.push((-u.values[i]).max(u.values[i] - 1.0), g.point(i));
    }
    reports.push(bounds.into_report("values between 0 and 1", tau_zero).cite("potential"));
    let grad = upwind_gradient(u, tau_zero);
    let mut slope = Worst::signed();
    for i in problem.d.inside_indices() {
        if u.values[i] > tau_zero {
            slope.push(grad[i] - lambda, g.point(i));
        }
    }
    reports.push(slope.into_report("gradient bound", tol).cite("gradient estimate"));
    let zero = CompactMask::from_fn(g, |i| problem.d.inside[i] && u.values[i] <= tau_zero);
    let free: Vec<usize> = zero
        .indices()
        .filter(|&i| g.neighbors4(i).any(|n| problem.d.inside[n] && u.values[n] > tau_zero))
        .collect();
    let kind = if zero.grid_interior().is_empty() { SolutionKind::Trivial } else { SolutionKind::Nontrivial };
    reports.extend(fb_location(problem, lambda, &free, kind, tol)?);
    Ok(reports)
}

pub fn verify_bounds(sol: &BernoulliSolution) -> VerificationReport {
    let f = sol.u();
    let mut worst = Worst::signed();
    for i in f.inside_indices() {
        worst.push((-f.values[i]).max(f.values[i] - 1.0), f.grid.point(i));
    }
    worst.into_report("values between 0 and 1", 0.0).cite("potential")
}

pub fn verify_residual(sol: &BernoulliSolution, opts: &SolveOptions) -> VerificationReport {
    VerificationReport::new("mid-slope residual", sol.potential.residual(), opts.tol_residual)
        .checked(sol.potential.solution.graph.free.len())
        .cite("potential")
}

/// Outcome of the sandwich check.
#[derive(Debug, Clone)]
pub struct Sandwich {
    pub reports: Vec<VerificationReport>,
    /// Largest width `upper - lower` of the sandwich at a node outside the ray set where `u`
    /// clears both bounds by more than the tolerance.
    pub strict_slack: f64,
    pub strict_at: Option<Point>,
    pub hat_d: CompactMask,
}

/// `1 - lambda d <= u <= lambda dist(., {d = 1/lambda})` on `d <= 1/lambda`, with both
/// equalities on the ray set.
pub fn verify_sandwich(problem: &Problem, sol: &BernoulliSolution) -> Sandwich {
    let lambda = sol.lambda;
    let r = 1.0 / lambda;
    let d = &problem.d;
    let dpar = level_set_distance(&problem.domain, d, r);
    let hat = hat_d_mask(d, &dpar, r, problem.domain.tau_geom);
    let tol = sol.tolerance();
    let u = sol.u();
    let (mut lower, mut upper, mut eq) = (Worst::signed(), Worst::signed(), Worst::signed());
    let mut slack = (f64::NEG_INFINITY, None);
    for i in d.inside_indices() {
        if d.values[i] > r {
            continue;
        }
        let x = problem.grid.point(i);
        let lo = 1.0 - lambda * d.values[i];
        let hi = lambda * dpar.values[i];
        lower.push(lo - u.values[i], x);
        upper.push(u.values[i] - hi, x);
        if hat.member[i] {
            eq.push((u.values[i] - lo).abs().max((hi - u.values[i]).abs()), x);
        } else if u.values[i] - lo > tol && hi - u.values[i] > tol && hi - lo > slack.0 {
            slack = (hi - lo, Some(x));
        }
    }
    let anchor = "sandwich between 1 - lambda d and lambda dist to the level set";
    let reports = vec![
        lower.into_report("lower sandwich bound", tol).cite(anchor),
        upper.into_report("upper sandwich bound", tol).cite(anchor),
        eq.into_report("sandwich equalities on the ray set", tol).cite(anchor).cite("ray set"),
    ];
    Sandwich { reports, strict_slack: slack.0, strict_at: slack.1, hat_d: hat }
}

/// Conditions (i), (ii), (iii) of the admissible zero-set family, each with offending nodes.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Membership {
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii: bool,
    pub violations_i: Vec<usize>,
    pub violations_ii: Vec<usize>,
    pub violations_iii: Vec<usize>,
}

impl Membership {
    pub fn all(&self) -> bool {
        self.cond_i && self.cond_ii && self.cond_iii
    }
}

/// Inside nodes outside `k` that cannot reach the boundary through the complement of `k`.
fn enclosed_nodes(problem: &Problem, k: &CompactMask) -> Vec<usize> {
    let g = problem.grid;
    let inside = &problem.d.inside;
    let complement = CompactMask::from_fn(g, |i| inside[i] && !k.member[i]);
    let comps = connected_components(&complement);
    let touches = |c: usize| {
        comps.members[c].iter().any(|&i| {
            let (a, b) = g.ij(i);
            a == 0 || b == 0 || a + 1 == g.nx || b + 1 == g.ny || g.neighbors4(i).any(|n| !inside[n])
        })
    };
    (0..comps.count()).filter(|&c| !touches(c)).flat_map(|c| comps.members[c].clone()).collect()
}

/// Interiors of the components of `k` matched to components of `{d > 1/lambda}` up to a
/// shell: nodes of the open component missing from the interior lie within `tau_ray` of its
/// complement, and extra interior nodes lie within `tau_ray` of the open component. Returns
/// the matched components of `k` and the nodes of unmatched interiors.
fn match_interiors(problem: &Problem, lambda: f64, k: &CompactMask) -> Result<(CompactMask, Vec<usize>)> {
    let g = problem.grid;
    let open = parallel_mask(&problem.d, 1.0 / lambda, Level::Open)?;
    let open_comps = connected_components(&open);
    let tau = problem.tau_ray() + 1e-9 * g.h;
    let shells: Vec<(CompactMask, Vec<f64>, Vec<f64>)> = (0..open_comps.count())
        .map(|q| {
            let m = open_comps.mask(q);
            let to_q = m.distance_transform();
            let to_out = CompactMask::from_fn(g, |i| !m.member[i]).distance_transform();
            (m, to_q, to_out)
        })
        .collect();
    let k_comps = connected_components(k);
    let mut matched = CompactMask::empty(g);
    let mut bad = Vec::new();
    for c in 0..k_comps.count() {
        let comp = k_comps.mask(c);
        let interior = comp.grid_interior();
        if interior.is_empty() {
            continue;
        }
        let ok = shells.iter().any(|(q, to_q, to_out)| {
            interior.indices().any(|i| q.member[i])
                && interior.indices().all(|i| q.member[i] || to_q[i] <= tau)
                && q.indices().all(|i| interior.member[i] || to_out[i] <= tau)
        });
        if ok {
            matched = matched.union(&comp);
        } else {
            bad.extend(interior.indices());
        }
    }
    Ok((matched, bad))
}

pub fn k_lambda_membership(problem: &Problem, lambda: f64, k: &CompactMask) -> Result<Membership> {
    if k.is_empty() {
        return Err(Error::EmptyZeroSet);
    }
    let r = 1.0 / lambda;
    let floor = r - problem.tau_ray();
    let violations_i: Vec<usize> =
        k.indices().filter(|&i| !problem.d.inside[i] || problem.d.values[i] < floor).collect();
    let (_, violations_ii) = match_interiors(problem, lambda, k)?;
    let violations_iii = enclosed_nodes(problem, k);
    Ok(Membership {
        cond_i: violations_i.is_empty(),
        cond_ii: violations_ii.is_empty(),
        cond_iii: violations_iii.is_empty(),
        violations_i,
        violations_ii,
        violations_iii,
    })
}

/// Potential of a zero set with empty interior on the high region `{d >= 1/lambda}`.
pub fn make_trivial_solution(
    problem: &Problem,
    lambda: f64,
    k: &CompactMask,
    opts: &SolveOptions,
) -> Result<BernoulliSolution> {
    if k.is_empty() {
        return Err(Error::EmptyZeroSet);
    }
    let floor = 1.0 / lambda - problem.tau_ray();
    if let Some(i) = k.indices().find(|&i| !problem.d.inside[i] || problem.d.values[i] < floor) {
        return Err(Error::Precondition(format!(
            "zero set leaves {{d >= 1/lambda}} at {:?}",
            problem.grid.point(i)
        )));
    }
    if let Some(i) = k.grid_interior().indices().next() {
        return Err(Error::Precondition(format!("zero set has interior at {:?}", problem.grid.point(i))));
    }
    let enclosed = enclosed_nodes(problem, k);
    if let Some(&i) = enclosed.first() {
        return Err(Error::Precondition(format!(
            "zero set encloses {} nodes, e.g. {:?}",
            enclosed.len(),
            problem.grid.point(i)
        )));
    }
    let potential = solve_potential(&problem.domain, k, problem.grid, opts)?;
    Ok(BernoulliSolution::from_potential(lambda, potential, opts))
}

/// `{w_K = 0}` equals `K`: zero nodes outside `K` must lie within one cell of `K`.
pub fn verify_zero_set_identity(sol: &BernoulliSolution) -> VerificationReport {
    let k = &sol.potential.zero_set;
    let to_k = k.distance_transform();
    let g = k.grid;
    let mut worst = Worst::default();
    for i in sol.zero_set.indices() {
        if !k.member[i] {
            worst.push(to_k[i] / g.h, g.point(i));
        }
    }
    let mut r = worst.into_report("zero set of the potential equals K", 1.0).cite("zero set of the potential");
    r.checked = sol.zero_set.count();
    r
}

/// Solve the potential of an admissible zero set and verify it as a solution.
pub fn characterize(
    problem: &Problem,
    lambda: f64,
    k: &CompactMask,
    opts: &SolveOptions,
) -> Result<(BernoulliSolution, ReportSet)> {
    let m = k_lambda_membership(problem, lambda, k)?;
    if !m.all() {
        return Err(Error::Precondition(format!(
            "zero set is not admissible: (i) {} (ii) {} (iii) {}",
            m.cond_i, m.cond_ii, m.cond_iii
        )));
    }
    let (matched, _) = match_interiors(problem, lambda, k)?;
    let potential = if matched.is_empty() {
        solve_potential(&problem.domain, k, problem.grid, opts)?
    } else {
        let cut = LevelCut { r: 1.0 / lambda, near: matched };
        solve_potential_with_cut(&problem.domain, k, problem.grid, &cut, opts)?
    };
    let sol = BernoulliSolution::from_potential(lambda, potential, opts);
    let mut reports = ReportSet::new("characterization");
    reports.push(verify_gradient_bound(&sol));
    reports.extend(verify_fb_location(problem, &sol)?);
    reports.push(verify_zero_set_identity(&sol));
    Ok((sol, reports))
}

/// Solver-level and free-boundary checks shared by every constructed solution.
pub fn battery(problem: &Problem, sol: &BernoulliSolution, opts: &SolveOptions, seed: u64) -> Result<Vec<VerificationReport>> {
    let f = sol.u();
    let free = CompactMask::from_fn(f.grid, |i| f.inside[i] && !sol.potential.zero_set.member[i]);
    let mut out = vec![verify_residual(sol, opts), verify_bounds(sol), verify_gradient_bound(sol)];
    out.extend(verify_fb_location(problem, sol)?);
    out.push(verify_zero_set_identity(sol));
    out.push(verify_cone_comparison(f, &free, 100, seed, cone_tolerance(f)));
    out.extend(verify_slope_estimates(&sol.potential));
    Ok(out)
}

/// Largest deficit `t - u(midpoint)` over sampled pairs in the superlevel sets `{u >= t}`;
/// zero means no convexity violation was seen.
pub fn level_set_convexity(sol: &BernoulliSolution, samples: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let f = sol.u();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let idx: Vec<usize> = f.inside_indices().collect();
    for t in [0.25, 0.5, 0.75] {
        let sub: Vec<usize> = idx.iter().copied().filter(|&i| f.values[i] <= t).collect();
        if sub.len() < 2 {
            continue;
        }
        for _ in 0..samples {
            let a = f.grid.point(sub[rng.gen_range(0..sub.len())]);
            let b = f.grid.point(sub[rng.gen_range(0..sub.len())]);
            if let Some(v) = f.bilinear((a + b) * 0.5) {
                worst = worst.max(v - t);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Nonconn,
    Nonreg,
    Square,
    Ball,
}

impl std::str::FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonconn" => Ok(ScenarioName::Nonconn),
            "nonreg" => Ok(ScenarioName::Nonreg),
            "square" => Ok(ScenarioName::Square),
            "ball" => Ok(ScenarioName::Ball),
            other => Err(Error::UnknownScenario(other.into())),
        }
    }
}

impl ScenarioName {
    pub fn domain(self) -> Domain {
        match self {
            ScenarioName::Nonconn => Domain::dumbbell(),
            ScenarioName::Nonreg => Domain::lopsided_dumbbell(),
            ScenarioName::Square => Domain::square(2.0).expect("valid"),
            ScenarioName::Ball => Domain::ball(Point::default(), 1.0).expect("valid"),
        }
    }
}

/// Left tip of the left lens of the dumbbells at level 1.
pub fn dumbbell_tip() -> Point {
    Point::new(2.0 * 2f64.sqrt() - 4.0, 0.0)
}

/// Every other node of the axis segment from the lens tip to `(4, 0)`, starting next to the
/// tip.
pub fn alternating_axis_nodes(grid: Grid) -> CompactMask {
    let p = dumbbell_tip();
    let j = grid.nearest(Point::new(0.0, 0.0)).map(|i| grid.ij(i).1).expect("axis on grid");
    let mut m = CompactMask::empty(grid);
    let mut k = 0;
    for i in 0..grid.nx {
        let x = grid.coords(i, j).x;
        if x > p.x && x <= 4.0 + 1e-9 * grid.h {
            if k % 2 == 0 {
                m.member[grid.index(i, j)] = true;
            }
            k += 1;
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: ScenarioName,
    pub lambda: f64,
    pub problem: Problem,
    pub solutions: Vec<(String, BernoulliSolution)>,
    pub reports: ReportSet,
    /// Recorded, not asserted.
    pub diagnostics: Vec<String>,
}

fn tagged(label: &str, reports: Vec<VerificationReport>) -> Vec<VerificationReport> {
    reports
        .into_iter()
        .map(|mut r| {
            r.property = format!("{label}: {}", r.property);
            r
        })
        .collect()
}

fn sup_diff(a: &ScalarField, b: &ScalarField, on: impl Fn(usize) -> bool) -> (f64, Option<Point>) {
    let mut w = Worst::default();
    for i in a.inside_indices() {
        if on(i) {
            w.push((a.values[i] - b.values[i]).abs(), a.grid.point(i));
        }
    }
    (w.value, w.location)
}

/// Builds the named domain, constructs its designated solutions and runs the verification
/// battery on each.
pub fn scenario(name: ScenarioName, lambda: f64, h: f64, opts: &SolveOptions) -> Result<Scenario> {
    let domain = name.domain();
    let grid = Grid::covering(domain.bbox, h, 3)?;
    let problem = Problem::new(&domain, grid)?;
    let mut reports = ReportSet::new(format!("scenario {name:?} lambda {lambda} h {h}").to_lowercase());
    let mut solutions = Vec::new();
    let mut diagnostics = Vec::new();
    let tau = TOL_FACTOR * h * lambda;
    let r = 1.0 / lambda;
    match name {
        ScenarioName::Ball | ScenarioName::Square => {
            let sol = solve_interior_bernoulli(&problem, lambda, opts)?;
            reports.extend(tagged("w", battery(&problem, &sol, opts, 1)?));
            reports.extend(tagged("w", verify_sandwich(&problem, &sol).reports));
            if name == ScenarioName::Ball {
                let mut w = Worst::default();
                for i in problem.d.inside_indices() {
                    if problem.d.values[i] < r {
                        let exact = 1.0 - lambda * problem.d.values[i];
                        w.push((sol.u().values[i] - exact).abs(), grid.point(i));
                    }
                }
                reports.push(w.into_report("w: closed form 1 - lambda (R - |x|)", tau).cite("radial solution"));
            }
            let m = k_lambda_membership(&problem, lambda, &sol.potential.zero_set)?;
            reports.push(
                VerificationReport::new("w: zero set interior is the parallel set", m.violations_ii.len() as f64, 0.0)
                    .cite("uniqueness on convex domains"),
            );
            diagnostics.push(format!("level-set convexity deficit {:.3e}", level_set_convexity(&sol, 2000, 5)));
            solutions.push(("w".to_string(), sol));
        }
        ScenarioName::Nonconn => {
            let w = solve_interior_bernoulli(&problem, lambda, opts)?;
            reports.extend(tagged("w", battery(&problem, &w, opts, 1)?));
            reports.extend(tagged("w", verify_sandwich(&problem, &w).reports));
            let comps = problem.closed_components(lambda)?;
            if comps.len() != 2 {
                return Err(Error::Precondition(format!("expected two parallel components, found {}", comps.len())));
            }
            // order the components left to right
            let cx = |m: &CompactMask| m.indices().map(|i| grid.point(i).x).sum::<f64>() / m.count() as f64;
            let (left, right) = if cx(&comps[0]) < cx(&comps[1]) { (&comps[0], &comps[1]) } else { (&comps[1], &comps[0]) };
            let mut sides = Vec::new();
            for (label, k) in [("w-", left), ("w+", right)] {
                let (sol, rs) = characterize(&problem, lambda, k, opts)?;
                let _ = rs;
                reports.extend(tagged(label, battery(&problem, &sol, opts, 2)?));
                sides.push(sol);
            }
            let tip = dumbbell_tip();
            let annulus = CompactMask::from_fn(grid, |i| problem.d.inside[i] && !w.potential.zero_set.member[i]);
            let (dev, at) = sup_diff(sides[0].u(), w.u(), |i| annulus.member[i] && grid.point(i).x < tip.x);
            reports.push(
                VerificationReport::new("w- equals w on the left region", dev, tau).at(at).cite("potential along rays"),
            );
            let (gap, at) = sup_diff(sides[0].u(), sides[1].u(), |_| true);
            reports.push(
                VerificationReport::new("one-sided solutions are distinct", 0.3 - gap, 0.0)
                    .at(at)
                    .cite("more than one non-trivial solution")
                    .note(format!("sup |w- - w+| = {gap:.4}")),
            );
            let (gap_w, _) = sup_diff(sides[0].u(), w.u(), |_| true);
            diagnostics.push(format!("sup |w- - w| = {gap_w:.4}, sup |w- - w+| = {gap:.4}"));
            solutions.push(("w".to_string(), w));
            solutions.push(("w-".to_string(), sides.remove(0)));
            solutions.push(("w+".to_string(), sides.remove(0)));
        }
        ScenarioName::Nonreg => {
            let h2 = check_h2(&problem.d, r, problem.tau_ray())?;
            let on_axis = h2.flagged.iter().filter(|&&i| {
                let p = grid.point(i);
                p.y.abs() < 0.5 * h && p.x > dumbbell_tip().x
            });
            let n_axis = on_axis.count();
            reports.push(
                VerificationReport::new("H2 failure detected on the axis", if n_axis > 0 { 0.0 } else { 1.0 }, 0.0)
                    .cite("regular closed parallel set")
                    .note(format!("{} flagged nodes, {} on the axis", h2.flagged.len(), n_axis)),
            );
            let comps = problem.closed_components(lambda)?;
            let left = comps
                .iter()
                .find(|m| m.indices().any(|i| grid.point(i).dist(Point::new(-4.0, 0.0)) < h))
                .ok_or_else(|| Error::Precondition("left lens not found".into()))?;
            let k = left.union(&alternating_axis_nodes(grid));
            let (sol, _) = characterize(&problem, lambda, &k, opts)?;
            reports.extend(tagged("w-C", battery(&problem, &sol, opts, 3)?));
            solutions.push(("w-C".to_string(), sol));
        }
    }
    Ok(Scenario { name, lambda, problem, solutions, reports, diagnostics })
}
