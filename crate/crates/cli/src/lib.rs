//! Command-line front end. `run` maps a subcommand to the library operation, prints a short
//! summary, and writes FIELD v1 files, CSV tables and a JSON report into `--out`.
//!
//! Exit codes: 0 when every verification passes, 2 when one fails, 1 on usage or input errors.

use std::io::IsTerminal;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use infbern::bernoulli::{
    battery, characterize, check_nonexistence, k_lambda_membership, make_trivial_solution, scenario,
    solve_interior_bernoulli, verify_field, verify_sandwich, ScenarioName,
};
use infbern::field_io::{emit_field, emit_mask, read_field, read_mask};
use infbern::functional::{j_inf_evaluate, j_p_evaluate, verify_monotone_in_p};
use infbern::geometry::{check_connected, check_h2, connected_components, parallel_mask, Level, C_H2};
use infbern::radial::{bernoulli_constant_limit, gradient_check, radial_solve, sweep_p};
use infbern::solver::verify::{cone_tolerance, verify_affine_on_rays, verify_cone_comparison, verify_harnack, verify_slope_estimates};
use infbern::solver::{solve_potential, solve_potential_at_level};
use infbern::{
    BernoulliSolution, Branch, CompactMask, Domain, DomainSpec, Error, Grid, Mode, Point, Problem, ReportSet,
    SolveOptions, VerificationReport,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "infbern", version, about = "Infinity-Laplacian Bernoulli free-boundary laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance field, inradius and, with --r, the parallel set and its regularity check.
    Distance {
        #[command(flatten)]
        domain: DomainArgs,
        /// Parallel-set level.
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Infinity-harmonic potential of a zero set, with the solver-level checks.
    Potential {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        zero: ZeroSetArgs,
        /// Harnack polyline `x0,y0;x1,y1;...` starting at the evaluation point.
        #[arg(long)]
        harnack: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve for the parallel-set solution at lambda; below 1/inradius print the
    /// nonexistence certificate instead.
    BernoulliSolve {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check a candidate solution read from a FIELD file.
    BernoulliVerify {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda: f64,
        /// FIELD v1 file with the candidate, on the domain grid.
        #[arg(long)]
        u: PathBuf,
        /// Values at or below this count as zero.
        #[arg(long, default_value_t = 1e-7)]
        tau_zero: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Admissibility of a zero set and verification of its potential as a solution.
    Characterize {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda: f64,
        /// FIELD v1 mask file.
        #[arg(long)]
        k: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Potential of a zero set without interior inside {d >= 1/lambda}.
    Trivial {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        lambda: f64,
        /// FIELD v1 mask file.
        #[arg(long)]
        k: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form radial p-Bernoulli solutions on a ball.
    Radial {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Free-boundary radii and uniform distance to the limit profile along increasing p.
    SweepP {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 3.0)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 20.0, 50.0, 100.0])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        rho_tol: f64,
        #[arg(long, default_value_t = 0.05)]
        rho_ell_tol: f64,
        #[arg(long, default_value_t = 0.1)]
        sup_tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Critical constants of the ball along increasing p.
    Constants {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [3.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        gap_tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Built-in example: nonconn, nonreg, square or ball.
    Scenario {
        name: String,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The energies J_p and J_inf of a field, and their monotonicity in p.
    Jfunc {
        /// FIELD v1 file.
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0, 16.0])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 1e-7)]
        tau_zero: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
struct DomainArgs {
    /// JSON domain spec file.
    #[arg(long, conflicts_with = "domain")]
    spec: Option<PathBuf>,
    /// Built-in domain: ball, square, dumbbell or lopsided.
    #[arg(long)]
    domain: Option<String>,
    /// Grid spacing, overriding the spec.
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Debug, Args)]
struct ZeroSetArgs {
    /// FIELD v1 mask file.
    #[arg(long, conflicts_with = "level")]
    k: Option<PathBuf>,
    /// Use the closed parallel set {d >= level} as the zero set.
    #[arg(long)]
    level: Option<f64>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Residual tolerance relative to the data range.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200_000)]
    max_sweeps: usize,
    /// Parallel Jacobi sweeps instead of the reproducible Gauss-Seidel order.
    #[arg(long)]
    parallel: bool,
    /// Anderson mixing depth over sweeps; 0 disables it.
    #[arg(long, default_value_t = 5)]
    acceleration: usize,
    /// Seed for the sampled checks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Directory for fields, tables and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            tol_residual: self.tol,
            max_sweeps: self.max_sweeps,
            mode: if self.parallel { Mode::ParallelJacobi } else { Mode::DeterministicSerial },
            acceleration: self.acceleration,
            ..SolveOptions::default()
        }
    }
}

impl DomainArgs {
    fn build(&self) -> Result<(Domain, Grid), Error> {
        let mut spec = match (&self.spec, &self.domain) {
            (Some(path), _) => DomainSpec::parse(&std::fs::read_to_string(path)?)?,
            (None, Some(name)) => {
                let domain = match name.as_str() {
                    "ball" => Domain::ball(Point::default(), 1.0)?,
                    "square" => Domain::square(2.0)?,
                    "dumbbell" => Domain::dumbbell(),
                    "lopsided" => Domain::lopsided_dumbbell(),
                    other => return Err(Error::Precondition(format!("unknown built-in domain {other:?}"))),
                };
                DomainSpec::from_primitives(&domain.primitives, self.h.unwrap_or(0.05), 3)
            }
            (None, None) => return Err(Error::Precondition("give --spec or --domain".into())),
        };
        if let Some(h) = self.h {
            spec.grid.h = h;
        }
        spec.build()
    }

    fn problem(&self) -> Result<Problem, Error> {
        let (domain, grid) = self.build()?;
        Problem::new(&domain, grid)
    }
}

/// Where results go. Without `--out` nothing is written.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn new(args: &OutArgs) -> Result<Self, Error> {
        if let Some(dir) = &args.out {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Sink { dir: args.out.clone() })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    fn text(&self, name: &str, body: &str) -> Result<(), Error> {
        if let Some(p) = self.path(name) {
            std::fs::write(p, body)?;
        }
        Ok(())
    }

    fn field(&self, name: &str, f: &infbern::ScalarField) -> Result<(), Error> {
        self.path(name).map_or(Ok(()), |p| emit_field(&p, f))
    }

    fn mask(&self, name: &str, m: &CompactMask) -> Result<(), Error> {
        self.path(name).map_or(Ok(()), |p| emit_mask(&p, m))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Error> {
        self.text(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

struct Printer {
    color: bool,
}

impl Printer {
    fn detect() -> Self {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Printer { color: !no_color && std::io::stdout().is_terminal() }
    }

    fn paint(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn report(&self, r: &VerificationReport) {
        let tag = if r.pass { self.paint("PASS", "32") } else { self.paint("FAIL", "31") };
        let at = r.location.map_or(String::new(), |p| format!(" at ({:.4}, {:.4})", p.x, p.y));
        println!("{tag} {}: worst {:.3e}, tolerance {:.3e}{at}", r.property, r.worst_violation, r.tolerance);
    }

    fn set(&self, rs: &ReportSet) {
        for r in &rs.reports {
            self.report(r);
        }
        let n_fail = rs.failures().count();
        let summary = format!("{}: {} checks, {} failed", rs.title, rs.reports.len(), n_fail);
        println!("{}", if n_fail == 0 { self.paint(&summary, "1;32") } else { self.paint(&summary, "1;31") });
    }
}

fn finish(sink: &Sink, printer: &Printer, rs: &ReportSet) -> Result<i32, Error> {
    sink.text("report.json", &(rs.to_json() + "\n"))?;
    printer.set(rs);
    Ok(if rs.all_pass() { EXIT_PASS } else { EXIT_FAIL })
}

fn parse_polyline(s: &str) -> Result<Vec<Point>, Error> {
    s.split(';')
        .map(|pair| {
            let xy: Vec<&str> = pair.split(',').map(str::trim).collect();
            match xy.as_slice() {
                [x, y] => match (x.parse(), y.parse()) {
                    (Ok(x), Ok(y)) => Ok(Point::new(x, y)),
                    _ => Err(Error::Precondition(format!("bad point {pair:?}"))),
                },
                _ => Err(Error::Precondition(format!("bad point {pair:?}"))),
            }
        })
        .collect()
}

fn load_mask(path: &Path, grid: Grid) -> Result<CompactMask, Error> {
    let m = read_mask(path)?;
    if !m.grid.same_shape(&grid) {
        return Err(Error::InvalidGrid(format!("mask {} is not on the domain grid", path.display())));
    }
    Ok(m)
}

fn solution_outputs(sink: &Sink, label: &str, sol: &BernoulliSolution) -> Result<(), Error> {
    sink.field(&format!("u_{label}.field"), sol.u())?;
    sink.mask(&format!("zero_set_{label}.field"), &sol.zero_set)?;
    let g = sol.u().grid;
    let mut csv = String::from("x,y\n");
    for &i in &sol.free_boundary {
        let p = g.point(i);
        csv.push_str(&format!("{},{}\n", p.x, p.y));
    }
    sink.text(&format!("free_boundary_{label}.csv"), &csv)
}

/// File-name friendly label.
fn slug(label: &str) -> String {
    label.replace('-', "_minus").replace('+', "_plus")
}

fn execute(cmd: Command, printer: &Printer) -> Result<i32, Error> {
    match cmd {
        Command::Distance { domain, r, out } => {
            let sink = Sink::new(&out)?;
            let pb = domain.problem()?;
            let rad = pb.inradius;
            println!(
                "grid {} x {}, h = {}; inradius {:.6} (+{}) at ({:.4}, {:.4}); 1/inradius = {:.6}",
                pb.grid.nx, pb.grid.ny, pb.grid.h, rad.value, rad.uncertainty, rad.location.x, rad.location.y,
                pb.critical_lambda()
            );
            sink.field("distance.field", &pb.d)?;
            let mut rs = ReportSet::new("distance");
            rs.push(
                VerificationReport::new("domain connected", if check_connected(&pb.d) { 0.0 } else { 1.0 }, 0.0)
                    .cite("connected domain")
                    .checked(pb.d.inside_count()),
            );
            if let Some(r) = r {
                let open = parallel_mask(&pb.d, r, Level::Open)?;
                let closed = pb.closed_parallel(1.0 / r)?;
                println!("parallel set at {r}: {} components", connected_components(&open).count());
                sink.mask("parallel_open.field", &open)?;
                sink.mask("parallel_closed.field", &closed)?;
                let h2 = check_h2(&pb.d, r, pb.tau_ray())?;
                sink.mask("h2_flagged.field", &CompactMask::from_fn(pb.grid, |i| h2.flagged.contains(&i)))?;
                let mut report = h2.report;
                report.notes.push(format!("flag distance {C_H2} h"));
                rs.push(report);
            }
            finish(&sink, printer, &rs)
        }
        Command::Potential { domain, zero, harnack, solver, out } => {
            let sink = Sink::new(&out)?;
            let (dom, grid) = domain.build()?;
            let opts = solver.options();
            let pb = Problem::new(&dom, grid)?;
            let pot = match (&zero.k, zero.level) {
                (Some(path), _) => solve_potential(&dom, &load_mask(path, grid)?, grid, &opts)?,
                (None, Some(level)) => {
                    let k = pb.closed_parallel(1.0 / level)?;
                    solve_potential_at_level(&dom, &k, grid, level, &opts)?
                }
                (None, None) => return Err(Error::Precondition("give --k or --level".into())),
            };
            println!("solved in {} sweeps, residual {:.3e}", pot.sweeps_used(), pot.residual());
            sink.field("potential.field", pot.field())?;
            let f = pot.field();
            let free = CompactMask::from_fn(grid, |i| f.inside[i] && !pot.zero_set.member[i]);
            let mut rs = ReportSet::new("potential");
            rs.push(
                VerificationReport::new("mid-slope residual", pot.residual(), opts.tol_residual)
                    .checked(pot.solution.graph.free.len())
                    .cite("potential"),
            );
            rs.push(verify_cone_comparison(f, &free, 100, solver.seed, cone_tolerance(f)));
            rs.extend(verify_slope_estimates(&pot));
            match verify_affine_on_rays(&pot, cone_tolerance(f)) {
                Ok(r) => rs.push(r),
                Err(e) => println!("rays skipped: {e}"),
            }
            if let Some(line) = harnack {
                let path = parse_polyline(&line)?;
                rs.push(verify_harnack(&pot, path[0], &path)?);
            }
            finish(&sink, printer, &rs)
        }
        Command::BernoulliSolve { domain, lambda, solver, out } => {
            let sink = Sink::new(&out)?;
            let pb = domain.problem()?;
            let critical = pb.critical_lambda();
            if lambda < critical {
                let cert = check_nonexistence(&pb, lambda)?;
                println!("no solution: lambda {lambda} is below 1/inradius = {critical:.6}");
                println!("{}", serde_json::to_string_pretty(&cert)?);
                sink.json("certificate.json", &cert)?;
                return Ok(EXIT_USAGE);
            }
            if lambda == critical {
                println!("lambda equals 1/inradius: only trivial solutions exist, use `trivial` with a ridge zero set");
                return Ok(EXIT_USAGE);
            }
            let opts = solver.options();
            let sol = solve_interior_bernoulli(&pb, lambda, &opts)?;
            println!("{:?} solution, {} zero nodes, {} free-boundary nodes", sol.kind, sol.zero_set.count(), sol.free_boundary.len());
            solution_outputs(&sink, "w", &sol)?;
            let mut rs = ReportSet::new(format!("bernoulli-solve lambda {lambda}"));
            rs.extend(battery(&pb, &sol, &opts, solver.seed)?);
            rs.extend(verify_sandwich(&pb, &sol).reports);
            finish(&sink, printer, &rs)
        }
        Command::BernoulliVerify { domain, lambda, u, tau_zero, out } => {
            let sink = Sink::new(&out)?;
            let pb = domain.problem()?;
            let field = read_field(&u)?;
            let rs = verify_field(&pb, lambda, &field, tau_zero)?;
            finish(&sink, printer, &rs)
        }
        Command::Characterize { domain, lambda, k, solver, out } => {
            let sink = Sink::new(&out)?;
            let pb = domain.problem()?;
            let k = load_mask(&k, pb.grid)?;
            let m = k_lambda_membership(&pb, lambda, &k)?;
            sink.json("membership.json", &m)?;
            let mut rs = ReportSet::new(format!("characterize lambda {lambda}"));
            for (name, ok, bad) in [
                ("zero set inside {d >= 1/lambda}", m.cond_i, &m.violations_i),
                ("interior components match parallel components", m.cond_ii, &m.violations_ii),
                ("complement reaches the boundary", m.cond_iii, &m.violations_iii),
            ] {
                let at = bad.first().map(|&i| pb.grid.point(i));
                rs.push(
                    VerificationReport::new(name, if ok { 0.0 } else { bad.len() as f64 }, 0.0)
                        .at(at)
                        .checked(k.count())
                        .cite("admissible zero sets"),
                );
            }
            if m.all() {
                let opts = solver.options();
                let (sol, reports) = characterize(&pb, lambda, &k, &opts)?;
                solution_outputs(&sink, "w", &sol)?;
                rs.extend(reports.reports);
                rs.extend(battery(&pb, &sol, &opts, solver.seed)?);
            }
            finish(&sink, printer, &rs)
        }
        Command::Trivial { domain, lambda, k, solver, out } => {
            let sink = Sink::new(&out)?;
            let pb = domain.problem()?;
            let k = load_mask(&k, pb.grid)?;
            let opts = solver.options();
            let sol = make_trivial_solution(&pb, lambda, &k, &opts)?;
            println!("{:?} solution, {} zero nodes", sol.kind, sol.zero_set.count());
            solution_outputs(&sink, "w", &sol)?;
            let mut rs = ReportSet::new(format!("trivial lambda {lambda}"));
            rs.extend(battery(&pb, &sol, &opts, solver.seed)?);
            finish(&sink, printer, &rs)
        }
        Command::Radial { n, p, r, lambda, out } => {
            let sink = Sink::new(&out)?;
            let rb = radial_solve(n, p, r, lambda)?;
            let show = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.6}"));
            println!("alpha = {}", rb.alpha);
            println!("lambda_p = {}", rb.lambda_p);
            println!("m_alpha = {:.6e}", rb.m_alpha);
            println!("rho' = {}", show(rb.rho_hyper));
            println!("rho'' = {}", show(rb.rho_ell));
            let mut rs = ReportSet::new(format!("radial n {n} p {p} R {r} lambda {lambda}"));
            for (branch, root) in [(Branch::Hyper, rb.rho_hyper), (Branch::Ell, rb.rho_ell)] {
                if let Some(rho) = root {
                    rs.push(
                        VerificationReport::new(format!("{branch:?} root solves f_alpha").to_lowercase(), rb.f(rho).abs(), 1e-12)
                            .cite("free-boundary radius equation"),
                    );
                    rs.push(
                        VerificationReport::new(
                            format!("{branch:?} gradient equals lambda").to_lowercase(),
                            gradient_check(&rb, branch)?,
                            1e-10,
                        )
                        .cite("gradient condition on the free boundary"),
                    );
                }
            }
            #[derive(Serialize)]
            struct Out<'a> {
                solution: infbern::RadialBernoulli,
                reports: &'a ReportSet,
            }
            sink.json("radial.json", &Out { solution: rb, reports: &rs })?;
            finish(&sink, printer, &rs)
        }
        Command::SweepP { n, r, lambda, p, rho_tol, rho_ell_tol, sup_tol, out } => {
            let sink = Sink::new(&out)?;
            let table = sweep_p(n, r, lambda, &p)?;
            let csv = table.to_csv();
            print!("{csv}");
            sink.text("sweep.csv", &csv)?;
            let mut rs = ReportSet::new(format!("sweep-p n {n} R {r} lambda {lambda}"));
            rs.extend(table.limit_reports(rho_tol, rho_ell_tol, sup_tol));
            finish(&sink, printer, &rs)
        }
        Command::Constants { n, r, p, gap_tol, out } => {
            let sink = Sink::new(&out)?;
            let table = bernoulli_constant_limit(n, r, &p)?;
            let csv = table.to_csv();
            print!("{csv}");
            sink.text("constants.csv", &csv)?;
            let mut rs = ReportSet::new(format!("constants n {n} R {r}"));
            rs.extend(table.limit_reports(gap_tol));
            finish(&sink, printer, &rs)
        }
        Command::Scenario { name, lambda, h, solver, out } => {
            let sink = Sink::new(&out)?;
            let which: ScenarioName = name.parse()?;
            let sc = scenario(which, lambda, h, &solver.options())?;
            for (label, sol) in &sc.solutions {
                println!("solution {label}: {:?}, {} zero nodes", sol.kind, sol.zero_set.count());
                solution_outputs(&sink, &slug(label), sol)?;
            }
            sink.field("distance.field", &sc.problem.d)?;
            for d in &sc.diagnostics {
                println!("note: {d}");
            }
            sink.text("diagnostics.txt", &sc.diagnostics.iter().map(|d| format!("{d}\n")).collect::<String>())?;
            finish(&sink, printer, &sc.reports)
        }
        Command::Jfunc { u, lambda, p, tau_zero, out } => {
            let sink = Sink::new(&out)?;
            let field = read_field(&u)?;
            if let Some(&bad) = p.iter().find(|&&q| !(q >= 1.0)) {
                return Err(Error::OutOfRange(format!("p must be at least 1, got {bad}")));
            }
            let mut csv = String::from("p,j_p\n");
            for &q in &p {
                csv.push_str(&format!("{q},{:.16e}\n", j_p_evaluate(&field, lambda, q, tau_zero)));
            }
            let tau_grad = 5.0 * field.grid.h * lambda;
            let j_inf = j_inf_evaluate(&field, lambda, tau_grad, tau_zero);
            print!("{csv}");
            println!("J_inf = {j_inf}");
            sink.text("jfunc.csv", &csv)?;
            let mut rs = ReportSet::new(format!("jfunc lambda {lambda}"));
            let mut sorted = p.clone();
            sorted.sort_by(f64::total_cmp);
            for w in sorted.windows(2) {
                rs.push(verify_monotone_in_p(&field, lambda, w[0], w[1], tau_zero));
            }
            finish(&sink, printer, &rs)
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(cli.command, &Printer::detect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
