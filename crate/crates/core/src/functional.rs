//! The energies `J_p(u) = (1/p) int (|grad u| / lambda)^p + ((p-1)/p) |{u > 0}|` and their
//! limit `J_inf(u) = |{u > 0}|` on `lambda`-Lipschitz functions, by midpoint quadrature.

use crate::grid::ScalarField;
use crate::report::VerificationReport;
use crate::solver::stencil::directions;

/// Stencil width used for the upwind gradient, matching the solver default.
pub const GRADIENT_WIDTH: usize = 3;

/// Steepest-descent slope `max_y (u(x) - u(y))^+ / |x - y|` over the inside stencil
/// neighbours; zero outside and on nodes with `u <= tau_zero`.
pub fn upwind_gradient(u: &ScalarField, tau_zero: f64) -> Vec<f64> {
    let g = u.grid;
    let dirs = directions(GRADIENT_WIDTH);
    (0..g.len())
        .map(|i| {
            if !u.inside[i] || u.values[i] <= tau_zero {
                return 0.0;
            }
            dirs.iter()
                .filter_map(|&(a, b)| {
                    let n = g.offset(i, a, b)?;
                    u.inside[n].then(|| (u.values[i] - u.values[n]) / (g.h * ((a * a + b * b) as f64).sqrt()))
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `h^2 #{u > tau_zero}`.
pub fn positive_area(u: &ScalarField, tau_zero: f64) -> f64 {
    let h = u.grid.h;
    h * h * u.inside_indices().filter(|&i| u.values[i] > tau_zero).count() as f64
}

pub fn j_p_evaluate(u: &ScalarField, lambda: f64, p: f64, tau_zero: f64) -> f64 {
    let grad = upwind_gradient(u, tau_zero);
    let h2 = u.grid.h * u.grid.h;
    // summed in node order so that termwise monotonicity carries over to the total
    let mut total = 0.0;
    for i in u.inside_indices() {
        let a = grad[i] / lambda;
        let positive = if u.values[i] > tau_zero { 1.0 } else { 0.0 };
        total += h2 * (a.powf(p) / p + (p - 1.0) / p * positive);
    }
    total
}

/// `+inf` when the upwind gradient exceeds `lambda + tau_grad` somewhere, the positive area
/// otherwise.
pub fn j_inf_evaluate(u: &ScalarField, lambda: f64, tau_grad: f64, tau_zero: f64) -> f64 {
    let sup = upwind_gradient(u, tau_zero).into_iter().fold(0.0, f64::max);
    if sup > lambda + tau_grad {
        f64::INFINITY
    } else {
        positive_area(u, tau_zero)
    }
}

/// `J_p(u) <= J_q(u)` for `p <= q`, reported as the excess of `J_p` over `J_q`.
pub fn verify_monotone_in_p(u: &ScalarField, lambda: f64, p: f64, q: f64, tau_zero: f64) -> VerificationReport {
    let jp = j_p_evaluate(u, lambda, p, tau_zero);
    let jq = j_p_evaluate(u, lambda, q, tau_zero);
    VerificationReport::new("J_p nondecreasing in p", jp - jq, 1e-12)
        .cite("monotonicity of p -> J_p")
        .checked(u.inside_count())
        .note(format!("J_{p} = {jp:.12e}, J_{q} = {jq:.12e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_field, Domain};
    use crate::grid::{Grid, Point};
    use proptest::prelude::*;

    const TZ: f64 = 1e-7;

    fn square_field(h: f64, f: impl Fn(Point, f64) -> f64) -> ScalarField {
        let dom = Domain::square(2.0).unwrap();
        let d = distance_field(&dom, Grid::covering(dom.bbox, h, 3).unwrap()).unwrap();
        let mut u = d.clone();
        for i in d.inside_indices() {
            u.values[i] = f(d.grid.point(i), d.values[i]);
        }
        u
    }

    #[test]
    fn constant_one_gives_weighted_area() {
        let h = 1.0 / 16.0;
        let u = square_field(h, |_, _| 1.0);
        let area = positive_area(&u, TZ);
        assert!((area - 16.0).abs() < 8.0 * h);
        for p in [1.5, 2.0, 10.0] {
            assert!((j_p_evaluate(&u, 1.0, p, TZ) - (p - 1.0) / p * area).abs() < 1e-12);
        }
        assert_eq!(j_inf_evaluate(&u, 1.0, 5.0 * h, TZ), area);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let u = square_field(1.0 / 16.0, |_, _| 0.0);
        assert_eq!(j_p_evaluate(&u, 1.0, 3.0, TZ), 0.0);
        assert_eq!(j_inf_evaluate(&u, 1.0, 0.1, TZ), 0.0);
    }

    #[test]
    fn truncated_distance_energy_is_annulus_area() {
        let h = 1.0 / 32.0;
        let u = square_field(h, |_, d| (1.0 - d).max(0.0));
        // nodes strictly inside (-2, 2)^2 and outside [-1, 1]^2
        let m = (4.0 / h) as usize;
        let lattice = ((m - 1) * (m - 1) - (m / 2 + 1) * (m / 2 + 1)) as f64 * h * h;
        assert!((positive_area(&u, TZ) - lattice).abs() < 1e-12);
        // node counting drops a half-cell strip along both perimeters: (16 + 8) h / 2
        assert!((lattice - (12.0 - 12.0 * h)).abs() < 1e-12);
        for p in [2.0, 10.0] {
            let j = j_p_evaluate(&u, 1.0, p, TZ);
            assert!(j <= lattice + 1e-12 && lattice - j <= 2.0 * h, "p {p}: {j}");
            assert!((j - 12.0).abs() <= 14.0 * h, "p {p}: {j}");
        }
        assert!(verify_monotone_in_p(&u, 1.0, 2.0, 10.0, TZ).pass);
        let r = verify_monotone_in_p(&u, 1.0, 4.0, 4.0, TZ);
        assert_eq!(r.worst_violation, 0.0);
    }

    #[test]
    fn steep_field_has_infinite_limit_energy() {
        let h = 1.0 / 16.0;
        let u = square_field(h, |_, d| (1.0 - 2.0 * d).max(0.0));
        assert_eq!(j_inf_evaluate(&u, 1.0, 5.0 * h, TZ), f64::INFINITY);
        assert!(j_inf_evaluate(&u, 2.0, 5.0 * h, TZ).is_finite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn monotone_on_random_bilinear_fields(
            corners in proptest::collection::vec(0.0f64..2.0, 25),
            p in 1.1f64..20.0,
            dq in 0.0f64..30.0,
            lambda in 0.3f64..3.0,
        ) {
            // bilinear interpolation of a 5 x 5 lattice of values over the square
            let u = square_field(1.0 / 8.0, |x, _| {
                let s = ((x.x + 2.0) / 1.0).clamp(0.0, 3.999);
                let t = ((x.y + 2.0) / 1.0).clamp(0.0, 3.999);
                let (i, j) = (s.floor() as usize, t.floor() as usize);
                let (fs, ft) = (s - i as f64, t - j as f64);
                let c = |a: usize, b: usize| corners[b * 5 + a];
                (1.0 - fs) * (1.0 - ft) * c(i, j) + fs * (1.0 - ft) * c(i + 1, j)
                    + (1.0 - fs) * ft * c(i, j + 1) + fs * ft * c(i + 1, j + 1)
            });
            let r = verify_monotone_in_p(&u, lambda, p, p + dq, TZ);
            prop_assert!(r.pass, "{:?}", r);
        }
    }
}
