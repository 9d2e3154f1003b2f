//! The symplectic density of the `p`-norm in line coordinates `(r, Θ)`.
//!
//! A line tangent to the `p`-circle of radius `r` at `r·(−Θ, Ω)` satisfies
//! `−Θ^{p−1}x + Ω^{p−1}y = r`, and in these coordinates
//!
//! ```text
//! |ω₀| = (p−1)² Θ^{p(p−2)} Ω^{p²−3p+1} / ‖(Θ, Ω)‖_{p(p−1)}^{(p−1)(2p−1)} |dr ∧ dΘ|.
//! ```
//!
//! At `p = 2` this is `dr ∧ dΘ / Ω = dr ∧ dφ`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lines::CHART_MARGIN;
use crate::mc::stream;
use crate::quad::de_piecewise;

/// Relative step of the finite-difference lift in [`pullback_check`].
pub const LIFT_STEP: f64 = 1e-6;

/// Pass threshold of [`pullback_check`].
pub const PULLBACK_TOL: f64 = 1e-4;

/// Default `Θ` range sampled by [`pullback_check`].
pub const PULLBACK_THETA_RANGE: (f64, f64) = (0.05, 0.95);

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("exponent must satisfy 1 < p < ∞, got {p}")));
    }
    Ok(())
}

/// The density for a fixed exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PSympDensity {
    pub p: f64,
}

impl PSympDensity {
    pub fn new(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(PSympDensity { p })
    }

    pub fn omega(&self, theta: f64) -> f64 {
        (1.0 - theta.powf(self.p)).max(0.0).powf(1.0 / self.p)
    }

    /// Density at the chart point `(Θ, Ω)`; no boundary check.
    pub fn at(&self, theta: f64, omega: f64) -> f64 {
        let p = self.p;
        let q = p * (p - 1.0);
        let n = (theta.powf(q) + omega.powf(q)).powf(1.0 / q);
        (p - 1.0).powi(2) * theta.powf(p * (p - 2.0)) * omega.powf(p * p - 3.0 * p + 1.0)
            / n.powf((p - 1.0) * (2.0 * p - 1.0))
    }

    pub fn value(&self, theta: f64) -> Result<f64> {
        let omega = self.omega(theta);
        if !(theta > CHART_MARGIN && omega > CHART_MARGIN) {
            return Err(Error::ChartBoundary { theta, omega });
        }
        Ok(self.at(theta, omega))
    }
}

/// Density of `|ω₀|` with respect to `dr dΘ` at `Θ`.
pub fn psymp_density(p: f64, theta: f64) -> Result<f64> {
    PSympDensity::new(p)?.value(theta)
}

/// Tangency point `r·(−Θ, Ω)` and `F`-unit direction of the chart line.
fn lift(p: f64, r: f64, theta: f64) -> ([f64; 2], [f64; 2]) {
    let omega = (1.0 - theta.powf(p)).max(0.0).powf(1.0 / p);
    let d = [omega.powf(p - 1.0), theta.powf(p - 1.0)];
    let f = (d[0].powf(p) + d[1].powf(p)).powf(1.0 / p);
    ([-r * theta, r * omega], [d[0] / f, d[1] / f])
}

/// Outcome of [`pullback_check`].
#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub p: f64,
    pub n_lines: usize,
    pub max_rel_error: f64,
    /// Samples skipped because the difference stencil left the chart.
    pub excluded: usize,
    pub pass: bool,
}

/// [`pullback_check_in`] over [`PULLBACK_THETA_RANGE`].
pub fn pullback_check(p: f64, n_lines: usize, seed: u64) -> Result<PullbackReport> {
    pullback_check_in(p, n_lines, seed, PULLBACK_THETA_RANGE)
}

/// Evaluates `(p−1)(α^{p−2} dx∧dα + β^{p−2} dy∧dβ)` on two random tangent
/// vectors at random chart points, lifting them to `(x, ξ̄)` by central
/// differences, and compares with `psymp · |dr∧dΘ|`.
pub fn pullback_check_in(p: f64, n_lines: usize, seed: u64, theta_range: (f64, f64)) -> Result<PullbackReport> {
    check_exponent(p)?;
    if n_lines == 0 {
        return Err(Error::invalid("need at least one line"));
    }
    let (lo, hi) = theta_range;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(Error::invalid(format!("theta range must lie in (0, 1), got ({lo}, {hi})")));
    }
    let dens = PSympDensity { p };
    let mut rng = stream(seed, 0);
    let mut max_rel: f64 = 0.0;
    let mut excluded = 0;
    for _ in 0..n_lines {
        let r = rng.random_range(0.1..3.0);
        let theta = rng.random_range(lo..hi);
        let (u, w) = loop {
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let b: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            if (b - a).sin().abs() > 0.1 {
                break ([a.cos(), a.sin()], [b.cos(), b.sin()]);
            }
        };
        let h = LIFT_STEP;
        let derive = |t: [f64; 2]| -> Option<([f64; 2], [f64; 2])> {
            let (tp, tm) = (theta + h * t[1], theta - h * t[1]);
            if !(tp > 0.0 && tp < 1.0 && tm > 0.0 && tm < 1.0) {
                return None;
            }
            let (xp, ap) = lift(p, r + h * t[0], tp);
            let (xm, am) = lift(p, r - h * t[0], tm);
            let d = |a: f64, b: f64| (a - b) / (2.0 * h);
            Some(([d(xp[0], xm[0]), d(xp[1], xm[1])], [d(ap[0], am[0]), d(ap[1], am[1])]))
        };
        let (Some((dxu, dau)), Some((dxw, daw))) = (derive(u), derive(w)) else {
            excluded += 1;
            continue;
        };
        let (_, a0) = lift(p, r, theta);
        let form: f64 = (0..2).map(|i| (p - 1.0) * a0[i].powf(p - 2.0) * (dxu[i] * daw[i] - dxw[i] * dau[i])).sum();
        let expect = dens.at(theta, dens.omega(theta)) * (u[0] * w[1] - u[1] * w[0]);
        let rel = (form.abs() - expect.abs()).abs() / expect.abs();
        if !rel.is_finite() {
            excluded += 1;
            continue;
        }
        max_rel = max_rel.max(rel);
    }
    let evaluated = n_lines - excluded;
    Ok(PullbackReport { p, n_lines, max_rel_error: max_rel, excluded, pass: evaluated > 0 && max_rel < PULLBACK_TOL })
}

/// Quadrature tolerance of [`crofton_via_psymp`].
pub const PSYMP_QUAD_TOL: f64 = 1e-12;

/// Crofton length of the segment `[a, b]` from the measure
/// `½·|ω₀|` on unoriented lines.
///
/// Unoriented lines are covered by the two charts with normals
/// `(±Θ^{p−1}, Ω^{p−1})` and signed `r`. Along a chart the `r`-measure of
/// lines meeting the segment is `|⟨b − a, ν⟩|`, leaving a 1D integral in `Θ`,
/// which is taken in the variable `ψ` with `Θ = sin^{2/p} ψ`,
/// `Ω = cos^{2/p} ψ` to tame the endpoint powers.
pub fn crofton_via_psymp(p: f64, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
    check_exponent(p)?;
    let v = [b[0] - a[0], b[1] - a[1]];
    if v == [0.0, 0.0] {
        return Err(Error::UndefinedDirection);
    }
    let q = p * (p - 1.0);
    let sin_exp = 2.0 * p - 5.0 + 2.0 / p;
    let cos_exp = (2.0 * p - 1.0) * (p - 2.0) / p;
    let n_exp = (p - 1.0) * (2.0 * p - 1.0);
    let scale = 2.0 / p * (p - 1.0).powi(2);
    // Both endpoint singularities behave like distance^(2(p−1)²/p − 1).
    let grade = (p / (2.0 * (p - 1.0).powi(2))).ceil().max(2.0) as i32;
    let mut total = 0.0;
    for sigma in [1.0, -1.0] {
        let integrand = |s: f64, c: f64| {
            let n = (s.powf(2.0 * (p - 1.0)) + c.powf(2.0 * (p - 1.0))).powf(1.0 / q);
            let jac = scale * s.powf(sin_exp) * c.powf(cos_exp) / n.powf(n_exp);
            let reach = (sigma * v[0] * s.powf(2.0 * (p - 1.0) / p) + v[1] * c.powf(2.0 * (p - 1.0) / p)).abs();
            reach * jac
        };
        // Kink where the chart normal is orthogonal to the segment.
        let mut knots = vec![0.0];
        if v[0] != 0.0 {
            let ratio = -v[1] / (sigma * v[0]);
            if ratio > 0.0 {
                let t = ratio.powf(1.0 / (p - 1.0));
                knots.push(t.powf(p / 2.0).atan());
            }
        }
        knots.push(FRAC_PI_2);
        for w in knots.windows(2) {
            total += graded_piece(&integrand, w[0], w[1], grade);
        }
    }
    Ok(0.5 * total)
}

/// `∫_lo^hi f(sin ψ, cos ψ) dψ` for `0 ≤ lo < hi ≤ π/2`, through the map
/// `ψ = lo + (hi − lo)·B(t)` with `B(t) = tᵐ / (tᵐ + (1 − t)ᵐ)`, which flattens
/// algebraic endpoint singularities. Sines and cosines are computed from the
/// distances to the endpoints so that no precision is lost next to them.
fn graded_piece(f: &impl Fn(f64, f64) -> f64, lo: f64, hi: f64, m: i32) -> f64 {
    let width = hi - lo;
    if !(width > 0.0) {
        return 0.0;
    }
    let mf = m as f64;
    let g = |t: f64| {
        let u = 1.0 - t;
        let (tm, um) = (t.powi(m), u.powi(m));
        let den = tm + um;
        let d_lo = width * tm / den;
        let d_hi = width * um / den;
        let db = mf * (t * u).powi(m - 1) / (den * den);
        let s = (lo + d_lo).sin();
        let c = ((FRAC_PI_2 - hi) + d_hi).sin();
        let val = f(s, c) * width * db;
        if val.is_finite() {
            val
        } else {
            0.0
        }
    };
    de_piecewise(g, 0.0, 1.0, &[0.5], PSYMP_QUAD_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::MinkowskiNorm;

    #[test]
    fn euclidean_values() {
        let s = 0.5f64.sqrt();
        assert!((psymp_density(2.0, s).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((psymp_density(2.0, 0.6).unwrap() - 1.25).abs() < 1e-14);
    }

    #[test]
    fn p3_symmetric_point() {
        // At Θ = Ω = t the exponents are 3, 1 and 10 with a 6-norm.
        let t = 2f64.powf(-1.0 / 3.0);
        let n = (2.0 * t.powi(6)).powf(1.0 / 6.0);
        let expect = 4.0 * t.powi(3) * t / n.powi(10);
        assert!((psymp_density(3.0, t).unwrap() - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn boundary_is_an_error() {
        assert!(matches!(psymp_density(3.0, 0.0), Err(Error::ChartBoundary { .. })));
        assert!(matches!(psymp_density(3.0, 1.0), Err(Error::ChartBoundary { .. })));
        assert!(psymp_density(1.0, 0.5).is_err());
    }

    #[test]
    fn pullback_examples() {
        let r = pullback_check(2.0, 100, 1).unwrap();
        assert!(r.pass && r.max_rel_error < 1e-6, "{r:?}");
        let r = pullback_check(3.0, 100, 2).unwrap();
        assert!(r.pass, "{r:?}");
        let r = pullback_check_in(1.5, 100, 3, (0.1, 0.9)).unwrap();
        assert!(r.pass && r.excluded == 0, "{r:?}");
    }

    #[test]
    fn crofton_examples() {
        assert!((crofton_via_psymp(2.0, [0.0, 0.0], [1.0, 0.0]).unwrap() - 1.0).abs() < 1e-6);
        for (p, v) in [(3.0, [1.0, 1.0]), (3.0, [1.0, 2.0]), (2.5, [0.0, -2.0]), (1.5, [0.4, -0.3])] {
            let exact = MinkowskiNorm::p_norm(p, 2).unwrap().evaluate(&v).unwrap();
            let got = crofton_via_psymp(p, [0.0, 0.0], v).unwrap();
            assert!((got - exact).abs() < 1e-5, "p = {p}, v = {v:?}: {got} vs {exact}");
        }
        assert!(crofton_via_psymp(3.0, [1.0, 2.0], [1.0, 2.0]).is_err());
    }
}
