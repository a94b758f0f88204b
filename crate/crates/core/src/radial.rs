//! Closed-form radial p-Bernoulli solutions on balls and their p -> infinity limits.
//!
//! On `B_R` in dimension `n` with `p > n` the radial p-harmonic profiles vanishing on `|x| = rho`
//! are `(|x|^a - rho^a) / (R^a - rho^a)` with `a = (p - n) / (p - 1)`. The free-boundary condition
//! `|grad u| = lambda` on `|x| = rho` becomes `f(rho) = lambda rho^a + a rho^(a-1) - lambda R^a = 0`.
//! `f` decreases on `(0, (1-a)/lambda)` and increases afterwards, so it has two, one or no roots
//! according to the sign of its minimum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::VerificationReport;

/// `|m_alpha|` below this is treated as a double root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-12;
/// Lower end of the hyperbolic bracket, relative to `R`.
pub const EPS_ROOT: f64 = 1e-9;
pub const MAX_BISECTION: usize = 200;
/// Radii sampled for sup-norm comparisons.
pub const PROFILE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Smaller root `rho'`.
    Hyper,
    /// Larger root `rho''`.
    Ell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialBernoulli {
    pub n: usize,
    pub p: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub lambda_p: f64,
    pub m_alpha: f64,
    pub rho_hyper: Option<f64>,
    pub rho_ell: Option<f64>,
}

pub fn alpha(n: usize, p: f64) -> f64 {
    (p - n as f64) / (p - 1.0)
}

/// `f(rho) = lambda rho^a + a rho^(a-1) - lambda R^a`.
pub fn f_alpha(a: f64, lambda: f64, r: f64, rho: f64) -> f64 {
    lambda * rho.powf(a) + a * rho.powf(a - 1.0) - lambda * r.powf(a)
}

/// Critical point of `f`.
pub fn rho_star(a: f64, lambda: f64) -> f64 {
    (1.0 - a) / lambda
}

/// `min f = (lambda / (1 - a))^(1 - a) - lambda R^a`.
pub fn m_alpha(a: f64, lambda: f64, r: f64) -> f64 {
    (lambda / (1.0 - a)).powf(1.0 - a) - lambda * r.powf(a)
}

/// `lambda_p(B_R) = (1/R) (1 - a)^(1 - 1/a)`.
pub fn critical_constant(n: usize, p: f64, r: f64) -> Result<f64> {
    check_exponent(n, p)?;
    let a = alpha(n, p);
    Ok((1.0 - a).powf(1.0 - 1.0 / a) / r)
}

fn check_exponent(n: usize, p: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("dimension must be at least 2, got {n}")));
    }
    if !(p > n as f64) || !p.is_finite() {
        return Err(Error::OutOfRange(format!("p must exceed the dimension {n}, got {p}")));
    }
    Ok(())
}

/// Bisection on `[lo, hi]` for a sign change of `f`, carried to floating-point resolution.
/// With `geometric` the midpoint is taken in `log rho`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, geometric: bool) -> f64 {
    let f_lo = f(lo);
    for _ in 0..MAX_BISECTION {
        let mid = if geometric { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if !(mid > lo && mid < hi) {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

pub fn radial_solve(n: usize, p: f64, r: f64, lambda: f64) -> Result<RadialBernoulli> {
    check_exponent(n, p)?;
    if !(r > 0.0) || !(lambda > 0.0) {
        return Err(Error::OutOfRange(format!("R and lambda must be positive, got {r} and {lambda}")));
    }
    let a = alpha(n, p);
    let lambda_p = critical_constant(n, p, r)?;
    let m = m_alpha(a, lambda, r);
    let star = rho_star(a, lambda);
    let f = |rho: f64| f_alpha(a, lambda, r, rho);
    let (rho_hyper, rho_ell) = if m.abs() <= DOUBLE_ROOT_TOL {
        (Some(star), Some(star))
    } else if m > 0.0 {
        (None, None)
    } else {
        if !(star < r) || !(f(r) > 0.0) || !(f(star) < 0.0) {
            return Err(Error::Precondition(format!("roots not bracketed: f(rho*) = {}, f(R) = {}", f(star), f(r))));
        }
        // the hyperbolic root can sit far below EPS_ROOT R for large p; widen the bracket
        // geometrically until f turns positive
        let mut eps = EPS_ROOT * r;
        while !(f(eps) > 0.0) {
            eps *= 1e-12;
            if eps < f64::MIN_POSITIVE * 1e12 {
                return Err(Error::Precondition("hyperbolic root below floating-point range".into()));
            }
        }
        (Some(bisect(f, eps, star, true)), Some(bisect(f, star, r, false)))
    };
    Ok(RadialBernoulli { n, p, r, lambda, alpha: a, lambda_p, m_alpha: m, rho_hyper, rho_ell })
}

impl RadialBernoulli {
    pub fn root(&self, branch: Branch) -> Option<f64> {
        match branch {
            Branch::Hyper => self.rho_hyper,
            Branch::Ell => self.rho_ell,
        }
    }

    fn require(&self, branch: Branch) -> Result<f64> {
        self.root(branch)
            .ok_or_else(|| Error::Precondition(format!("no {branch:?} root for lambda {} at p {}", self.lambda, self.p)))
    }

    pub fn f(&self, rho: f64) -> f64 {
        f_alpha(self.alpha, self.lambda, self.r, rho)
    }
}

/// `(|x|^a - rho^a) / (R^a - rho^a)` on `rho <= |x| <= R`.
pub fn radial_profile(rb: &RadialBernoulli, branch: Branch, x_abs: f64) -> Result<f64> {
    let rho = rb.require(branch)?;
    if !(x_abs >= rho && x_abs <= rb.r) {
        return Err(Error::OutOfRange(format!("|x| = {x_abs} outside [{rho}, {}]", rb.r)));
    }
    let a = rb.alpha;
    Ok(((x_abs.powf(a) - rho.powf(a)) / (rb.r.powf(a) - rho.powf(a))).clamp(0.0, 1.0))
}

/// `| a rho^(a-1) / (R^a - rho^a) - lambda |`, the defect of `|grad u| = lambda` at `|x| = rho`.
pub fn gradient_defect(rb: &RadialBernoulli, rho: f64) -> f64 {
    let a = rb.alpha;
    (a * rho.powf(a - 1.0) / (rb.r.powf(a) - rho.powf(a)) - rb.lambda).abs()
}

pub fn gradient_check(rb: &RadialBernoulli, branch: Branch) -> Result<f64> {
    Ok(gradient_defect(rb, rb.require(branch)?))
}

/// `1 - lambda (R - |x|)`, clamped at zero.
pub fn limit_profile(r: f64, lambda: f64, x_abs: f64) -> f64 {
    (1.0 - lambda * (r - x_abs)).max(0.0)
}

/// Sup over sampled radii of `|u_p^ell - (1 - lambda (R - |x|))^+|`, with `u_p^ell` extended by 0
/// inside its free boundary.
pub fn sup_diff_to_limit(rb: &RadialBernoulli) -> Result<f64> {
    let rho = rb.require(Branch::Ell)?;
    let lo = rho.min(rb.r - 1.0 / rb.lambda).max(0.0);
    let mut sup = 0.0f64;
    for k in 0..=PROFILE_SAMPLES {
        let x = lo + (rb.r - lo) * k as f64 / PROFILE_SAMPLES as f64;
        let u = if x < rho { 0.0 } else { radial_profile(rb, Branch::Ell, x)? };
        sup = sup.max((u - limit_profile(rb.r, rb.lambda, x)).abs());
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub rho_hyper: Option<f64>,
    pub rho_ell: Option<f64>,
    pub sup_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub lambda: f64,
    pub rows: Vec<SweepRow>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:.16e}"))
}

fn check_p_list(n: usize, p_list: &[f64]) -> Result<()> {
    if p_list.is_empty() {
        return Err(Error::OutOfRange("empty p list".into()));
    }
    for w in p_list.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::OutOfRange("p list must be increasing".into()));
        }
    }
    check_exponent(n, p_list[0])
}

pub fn sweep_p(n: usize, r: f64, lambda: f64, p_list: &[f64]) -> Result<SweepTable> {
    check_p_list(n, p_list)?;
    if !(lambda * r > 1.0) {
        return Err(Error::OutOfRange(format!("lambda must exceed 1/R = {}", 1.0 / r)));
    }
    let rows = p_list
        .iter()
        .map(|&p| {
            let rb = radial_solve(n, p, r, lambda)?;
            let sup_diff = if rb.rho_ell.is_some() { Some(sup_diff_to_limit(&rb)?) } else { None };
            Ok(SweepRow { p, rho_hyper: rb.rho_hyper, rho_ell: rb.rho_ell, sup_diff })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { n, r, lambda, rows })
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,rho_hyper,rho_ell,sup_diff\n");
        for row in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                row.p,
                fmt_opt(row.rho_hyper),
                fmt_opt(row.rho_ell),
                fmt_opt(row.sup_diff)
            ));
        }
        s
    }

    /// Limits at the last p: `rho' <= rho_tol`, `|rho'' - (R - 1/lambda)| <= rho_tol_ell`,
    /// `sup_diff <= sup_tol`.
    pub fn limit_reports(&self, rho_tol: f64, rho_tol_ell: f64, sup_tol: f64) -> Vec<VerificationReport> {
        let last = self.rows.last().expect("non-empty sweep");
        let miss = f64::INFINITY;
        let at = format!("at p = {}", last.p);
        vec![
            VerificationReport::new("hyperbolic radius tends to 0", last.rho_hyper.unwrap_or(miss), rho_tol)
                .cite("radial limits")
                .note(at.clone()),
            VerificationReport::new(
                "elliptic radius tends to R - 1/lambda",
                last.rho_ell.map_or(miss, |x| (x - (self.r - 1.0 / self.lambda)).abs()),
                rho_tol_ell,
            )
            .cite("radial limits")
            .note(at.clone()),
            VerificationReport::new("elliptic profile converges uniformly", last.sup_diff.unwrap_or(miss), sup_tol)
                .cite("uniform convergence of p-solutions")
                .note(at),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantTable {
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub rows: Vec<(f64, f64)>,
}

pub fn bernoulli_constant_limit(n: usize, r: f64, p_list: &[f64]) -> Result<ConstantTable> {
    check_p_list(n, p_list)?;
    if !(r > 0.0) {
        return Err(Error::OutOfRange(format!("R must be positive, got {r}")));
    }
    let rows = p_list.iter().map(|&p| Ok((p, critical_constant(n, p, r)?))).collect::<Result<Vec<_>>>()?;
    Ok(ConstantTable { n, r, rows })
}

impl ConstantTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,lambda_p\n");
        for (p, l) in &self.rows {
            s.push_str(&format!("{p},{l:.16e}\n"));
        }
        s
    }

    /// Strictly decreasing along the table and within `gap_tol / R` of `1/R` at the end.
    pub fn limit_reports(&self, gap_tol: f64) -> Vec<VerificationReport> {
        let rise = self.rows.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max);
        let (p_last, l_last) = *self.rows.last().expect("non-empty table");
        let limit = 1.0 / self.r;
        vec![
            VerificationReport::new("critical constant decreasing in p", if rise < 0.0 { 0.0 } else { rise }, 0.0)
                .cite("limit of Bernoulli constants")
                .checked(self.rows.len())
                .note(if self.rows.len() < 2 { "single row".into() } else { format!("largest step {rise:.3e}") }),
            VerificationReport::new("critical constant tends to 1/R", l_last - limit, gap_tol / self.r)
                .cite("limit of Bernoulli constants")
                .note(format!("lambda_p = {l_last:.6} at p = {p_last}")),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// For n = 2, p = 3, lambda = 3, R = 1 and t = sqrt(rho), `2 t f = 6t^2 - 6t + 1`, so the
    /// roots are ((3 -+ sqrt 3)/6)^2.
    fn quadratic_roots() -> (f64, f64) {
        let s = 3f64.sqrt();
        (((3.0 - s) / 6.0).powi(2), ((3.0 + s) / 6.0).powi(2))
    }

    #[test]
    fn p3_roots_match_quadratic() {
        let rb = radial_solve(2, 3.0, 1.0, 3.0).unwrap();
        let (a, b) = quadratic_roots();
        assert_eq!(rb.alpha, 0.5);
        assert_eq!(rb.lambda_p, 2.0);
        assert!((rb.rho_hyper.unwrap() - a).abs() < 1e-10);
        assert!((rb.rho_ell.unwrap() - b).abs() < 1e-10);
        assert!(rb.f(rb.rho_hyper.unwrap()).abs() <= 1e-12);
        assert!(rb.f(rb.rho_ell.unwrap()).abs() <= 1e-12);
        assert!((a - 0.044658).abs() < 1e-6 && (b - 0.622008).abs() < 1e-6);
    }

    #[test]
    fn no_root_and_double_root() {
        let rb = radial_solve(2, 3.0, 1.0, 1.9).unwrap();
        assert!(rb.rho_hyper.is_none() && rb.rho_ell.is_none());
        assert!((rb.m_alpha - ((1.9f64 / 0.5).sqrt() - 1.9)).abs() < 1e-15);
        assert!(rb.m_alpha > 0.049);
        let rb = radial_solve(2, 3.0, 1.0, 2.0).unwrap();
        assert_eq!(rb.rho_hyper, rb.rho_ell);
        assert!((rb.rho_ell.unwrap() - 0.25).abs() < 1e-8);
        assert!(rb.f(0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_p_at_or_below_dimension() {
        assert!(radial_solve(2, 2.0, 1.0, 3.0).is_err());
        assert!(radial_solve(3, 2.5, 1.0, 3.0).is_err());
    }

    #[test]
    fn m_alpha_matches_direct_minimization() {
        for &(n, p, lambda) in &[(2, 3.0, 3.0), (2, 5.0, 1.5), (3, 7.0, 2.5), (2, 20.0, 1.1)] {
            let a = alpha(n, p);
            let r = 1.0;
            // minimum over a fine grid of (0, R]
            let direct = (1..=10_000)
                .map(|k| f_alpha(a, lambda, r, k as f64 / 10_000.0 * r))
                .fold(f64::INFINITY, f64::min);
            let m = m_alpha(a, lambda, r);
            assert!(direct >= m - 1e-12);
            assert!(direct - m < 1e-4, "n {n} p {p}: {direct} vs {m}");
        }
    }

    #[test]
    fn critical_constant_iff_nonpositive_minimum() {
        for n in [2usize, 3] {
            for pi in 0..12 {
                let p = n as f64 + 0.5 + 3.0 * pi as f64;
                let lp = critical_constant(n, p, 1.0).unwrap();
                for li in 0..25 {
                    let lambda = 0.5 + 0.1 * li as f64;
                    if (lambda - lp).abs() < 1e-9 {
                        continue;
                    }
                    let m = m_alpha(alpha(n, p), lambda, 1.0);
                    assert_eq!(lambda >= lp, m <= 0.0, "n {n} p {p} lambda {lambda}");
                }
            }
        }
    }

    #[test]
    fn roots_are_ordered_and_bracketed() {
        for &p in &[3.0, 4.0, 10.0, 50.0, 100.0, 200.0] {
            let rb = radial_solve(2, p, 1.0, 3.0).unwrap();
            let (h, e) = (rb.rho_hyper.unwrap(), rb.rho_ell.unwrap());
            let star = rho_star(rb.alpha, 3.0);
            assert!(0.0 < h && h < star && star < e && e < 1.0);
            assert!(rb.f(1.0) > 0.0 && (rb.f(1.0) - rb.alpha).abs() < 1e-12);
            for b in [Branch::Hyper, Branch::Ell] {
                assert!(gradient_check(&rb, b).unwrap() <= 1e-10, "p {p} {b:?}");
            }
        }
    }

    #[test]
    fn gradient_check_negative_control() {
        let rb = radial_solve(2, 3.0, 1.0, 3.0).unwrap();
        assert!(gradient_defect(&rb, rb.rho_hyper.unwrap() + 1e-3) > 1e-3);
        assert!(gradient_defect(&rb, rb.rho_ell.unwrap() + 1e-3) > 1e-4);
    }

    #[test]
    fn profile_values() {
        let rb = radial_solve(2, 3.0, 1.0, 3.0).unwrap();
        for b in [Branch::Hyper, Branch::Ell] {
            assert_eq!(radial_profile(&rb, b, 1.0).unwrap(), 1.0);
            assert_eq!(radial_profile(&rb, b, rb.root(b).unwrap()).unwrap(), 0.0);
        }
        let s = (3.0 + 3f64.sqrt()) / 6.0;
        let expected = (0.9 - s) / (1.0 - s);
        assert!((radial_profile(&rb, Branch::Ell, 0.81).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.52679).abs() < 1e-5);
        assert!(radial_profile(&rb, Branch::Ell, 0.5).is_err());
        assert!(radial_profile(&radial_solve(2, 3.0, 1.0, 1.0).unwrap(), Branch::Ell, 0.9).is_err());
    }

    #[test]
    fn sweep_limits() {
        let t = sweep_p(2, 1.0, 3.0, &[5.0, 10.0, 20.0, 50.0, 100.0]).unwrap();
        let last = t.rows.last().unwrap();
        assert!(last.rho_hyper.unwrap() <= 0.01);
        assert!((last.rho_ell.unwrap() - 2.0 / 3.0).abs() <= 0.05);
        assert!(last.sup_diff.unwrap() <= 0.1);
        assert!(t.limit_reports(0.01, 0.05, 0.1).iter().all(|r| r.pass));
        for w in t.rows.windows(2) {
            assert!(w[1].rho_ell.unwrap() > w[0].rho_ell.unwrap());
            assert!(w[1].rho_hyper.unwrap() < w[0].rho_hyper.unwrap());
        }
        let csv = t.to_csv();
        assert!(csv.starts_with("p,rho_hyper,rho_ell,sup_diff\n"));
        assert_eq!(csv.lines().count(), 6);
        assert!(sweep_p(2, 1.0, 3.0, &[10.0, 5.0]).is_err());
        assert!(sweep_p(2, 1.0, 0.9, &[10.0]).is_err());
    }

    #[test]
    fn constants_decrease_to_inverse_radius() {
        assert_eq!(critical_constant(2, 3.0, 1.0).unwrap(), 2.0);
        let l200 = critical_constant(2, 200.0, 1.0).unwrap();
        let oracle = (1.0f64 / 199.0).powf(-1.0 / 198.0);
        assert!((l200 - oracle).abs() < 1e-12);
        assert!((l200 - 1.0271).abs() < 1e-4);
        let t = bernoulli_constant_limit(2, 1.0, &[3.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0]).unwrap();
        assert!(t.limit_reports(0.05).iter().all(|r| r.pass));
        assert!(critical_constant(2, 1e6, 1.0).unwrap() - 1.0 < 1e-4);
        assert!((critical_constant(2, 3.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
    }
}
