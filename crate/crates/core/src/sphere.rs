//! Even Fourier series on S¹, even spherical-harmonic expansions on S², the
//! cosine transform and its inversion.
//!
//! The cosine transform is `(Cf)(u) = ∫ |⟨ξ,u⟩| f(ξ) dξ` over the unit circle
//! or sphere. It is diagonal in both bases: on S¹ it multiplies the
//! `cos 2kθ`/`sin 2kθ` coefficients by `λ_{2k}`, on S² it multiplies every
//! degree-ℓ harmonic by `λ_ℓ`. A Crofton density `g` of a norm `F` solves
//! `F = ¼·C(g)` on the sphere.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Top-quarter coefficient energy above which an inversion is flagged as
/// under-resolved.
pub const TAIL_WARNING_RATIO: f64 = 1e-6;

/// Default truncation order on the circle.
pub const DEFAULT_ORDER_S1: usize = 1024;

/// Default maximal degree on the sphere.
pub const DEFAULT_DEGREE_S2: usize = 16;

const EVEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    S1,
    S2,
}

/// `a0 + Σ_{k=1..K} (a_k cos 2kθ + b_k sin 2kθ)`, a π-periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenFourierSeries {
    pub a0: f64,
    /// `a[k-1]` multiplies `cos 2kθ`.
    pub a: Vec<f64>,
    /// `b[k-1]` multiplies `sin 2kθ`.
    pub b: Vec<f64>,
}

/// Σ_{k=1..K} c_k cos kφ + s_k sin kφ by Clenshaw's recurrence.
fn trig_sum(c: impl Fn(usize) -> f64, s: impl Fn(usize) -> f64, k_max: usize, phi: f64) -> f64 {
    if k_max == 0 {
        return 0.0;
    }
    let (sin, cos) = phi.sin_cos();
    let alpha = 2.0 * cos;
    let (mut yc1, mut yc2) = (0.0, 0.0);
    let (mut ys1, mut ys2) = (0.0, 0.0);
    for k in (1..=k_max).rev() {
        let yc = c(k) + alpha * yc1 - yc2;
        yc2 = yc1;
        yc1 = yc;
        let ys = s(k) + alpha * ys1 - ys2;
        ys2 = ys1;
        ys1 = ys;
    }
    (yc1 * cos - yc2) + ys1 * sin
}

impl EvenFourierSeries {
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        Ok(EvenFourierSeries { a0, a, b })
    }

    pub fn constant(c: f64) -> Self {
        EvenFourierSeries { a0: c, a: Vec::new(), b: Vec::new() }
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.a0 + trig_sum(|k| self.a[k - 1], |k| self.b[k - 1], self.order(), 2.0 * theta)
    }

    /// Value and first two θ-derivatives.
    pub fn eval_derivatives(&self, theta: f64) -> (f64, f64, f64) {
        let k = self.order();
        let phi = 2.0 * theta;
        let f = self.eval(theta);
        let d1 = trig_sum(|j| 2.0 * j as f64 * self.b[j - 1], |j| -2.0 * j as f64 * self.a[j - 1], k, phi);
        let d2 = trig_sum(|j| -4.0 * (j * j) as f64 * self.a[j - 1], |j| -4.0 * (j * j) as f64 * self.b[j - 1], k, phi);
        (f, d1, d2)
    }

    /// Flat coefficient list `[a0, a_1, b_1, a_2, b_2, …]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(1 + 2 * self.order());
        out.push(self.a0);
        for (a, b) in self.a.iter().zip(&self.b) {
            out.push(*a);
            out.push(*b);
        }
        out
    }

    pub fn from_flat(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "S1 coefficient list must have odd length 1 + 2K, got {}",
                coeffs.len()
            )));
        }
        let (a, b) = coeffs[1..].chunks_exact(2).map(|ab| (ab[0], ab[1])).unzip();
        Ok(EvenFourierSeries { a0: coeffs[0], a, b })
    }

    /// Mean-square energy of each mode: `a0²` then `(a_k² + b_k²)/2`.
    fn mode_energies(&self) -> Vec<f64> {
        std::iter::once(self.a0 * self.a0)
            .chain(self.a.iter().zip(&self.b).map(|(a, b)| 0.5 * (a * a + b * b)))
            .collect()
    }
}

/// Real orthonormal spherical harmonics of all degrees `0..=lmax` at the
/// unit vector `u`, written to `out[ℓ² + ℓ + m]`.
pub fn real_harmonics(lmax: usize, u: [f64; 3], out: &mut [f64]) {
    let [x, y, z] = u;
    let n = lmax + 1;
    debug_assert!(out.len() >= n * n);
    let mut pmm = (0.25 / PI).sqrt();
    // (x + iy)^m
    let (mut re, mut im) = (1.0, 0.0);
    for m in 0..n {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let r = re * x - im * y;
            im = re * y + im * x;
            re = r;
        }
        let (cr, ci) = if m == 0 { (1.0, 0.0) } else { (std::f64::consts::SQRT_2 * re, std::f64::consts::SQRT_2 * im) };
        let mut p_prev2 = 0.0;
        let mut p_prev = pmm;
        for l in m..n {
            let p = if l == m {
                pmm
            } else if l == m + 1 {
                ((2 * m + 3) as f64).sqrt() * z * pmm
            } else {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                a * (z * p_prev - b * p_prev2)
            };
            if l > m {
                p_prev2 = p_prev;
                p_prev = p;
            }
            let base = l * l + l;
            if m == 0 {
                out[base] = p;
            } else {
                out[base + m] = p * cr;
                out[base - m] = p * ci;
            }
        }
    }
}

/// `Σ c_{ℓm} Y_{ℓm}` over even degrees `ℓ = 0, 2, …, L`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenSphericalExpansion {
    lmax: usize,
    /// Coefficient of `Y_{ℓm}` at `ℓ(ℓ−1)/2 + ℓ + m` for even ℓ.
    coeffs: Vec<f64>,
}

impl EvenSphericalExpansion {
    pub fn count(lmax: usize) -> usize {
        (lmax + 1) * (lmax + 2) / 2
    }

    pub fn index(l: usize, m: i64) -> usize {
        debug_assert!(l.is_multiple_of(2) && m.unsigned_abs() as usize <= l);
        l * l.saturating_sub(1) / 2 + (l as i64 + m) as usize
    }

    pub fn new(lmax: usize, coeffs: Vec<f64>) -> Result<Self> {
        if !lmax.is_multiple_of(2) {
            return Err(Error::invalid(format!("maximal degree must be even, got {lmax}")));
        }
        let expected = Self::count(lmax);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: coeffs.len() });
        }
        Ok(EvenSphericalExpansion { lmax, coeffs })
    }

    pub fn constant(c: f64) -> Self {
        EvenSphericalExpansion { lmax: 0, coeffs: vec![c * (4.0 * PI).sqrt()] }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficient(&self, l: usize, m: i64) -> f64 {
        self.coeffs[Self::index(l, m)]
    }

    /// Evaluates at a (Euclidean) unit vector.
    pub fn eval(&self, u: [f64; 3]) -> f64 {
        let n = self.lmax + 1;
        let mut y = vec![0.0; n * n];
        self.eval_with(u, &mut y)
    }

    /// Evaluates using a caller-provided scratch buffer of length `(L+1)²`.
    pub fn eval_with(&self, u: [f64; 3], scratch: &mut [f64]) -> f64 {
        real_harmonics(self.lmax, u, scratch);
        let mut s = 0.0;
        for l in (0..=self.lmax).step_by(2) {
            for m in -(l as i64)..=(l as i64) {
                s += self.coeffs[Self::index(l, m)] * scratch[((l * l + l) as i64 + m) as usize];
            }
        }
        s
    }

    fn degree_energies(&self) -> Vec<f64> {
        (0..=self.lmax)
            .step_by(2)
            .map(|l| (-(l as i64)..=(l as i64)).map(|m| self.coefficient(l, m).powi(2)).sum())
            .collect()
    }
}

/// Least-squares-free Fourier fit of a π-periodic function from uniform
/// samples `f(2πj/N)`, `j = 0..N`.
///
/// Fails with [`Error::NotEven`] if any odd mode exceeds `1e-8` (relative to
/// the sample magnitude).
pub fn fourier_fit_s1(samples: &[f64], order: usize) -> Result<EvenFourierSeries> {
    let n = samples.len();
    if n < 4 * order + 1 {
        return Err(Error::TooFewSamples { needed: 4 * order + 1, got: n });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("samples must be finite"));
    }
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let nf = n as f64;
    let scale = samples.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let max_odd = (1..n.div_ceil(2)).step_by(2).map(|m| 2.0 * buf[m].norm() / nf).fold(0.0, f64::max);
    if max_odd > EVEN_TOL * scale {
        return Err(Error::NotEven { max_odd });
    }
    let a0 = buf[0].re / nf;
    let a = (1..=order).map(|k| 2.0 * buf[2 * k].re / nf).collect();
    let b = (1..=order).map(|k| -2.0 * buf[2 * k].im / nf).collect();
    Ok(EvenFourierSeries { a0, a, b })
}

fn check_even_degree(degree: usize) -> Result<()> {
    if !degree.is_multiple_of(2) {
        return Err(Error::invalid(format!("cosine multipliers are defined for even degrees, got {degree}")));
    }
    Ok(())
}

/// Eigenvalue of the cosine transform on degree `degree` harmonics.
///
/// On S¹, `λ_d = ∫₀^{2π} |cos θ| cos dθ dθ`, reduced to the smooth half period
/// `2∫_{−π/2}^{π/2} cos θ cos dθ dθ`. On S², `λ_ℓ = 2π ∫_{−1}^{1} |t| P_ℓ(t) dt`.
/// Both integrals are evaluated by Gauss–Legendre quadrature.
pub fn cosine_multiplier(space: Space, degree: usize) -> Result<f64> {
    check_even_degree(degree)?;
    Ok(match space {
        Space::S1 => {
            let rule = gauss_legendre(degree + 32);
            s1_multiplier_with(&rule, degree)
        }
        Space::S2 => {
            let rule = gauss_legendre(degree / 2 + 8);
            4.0 * PI * rule.integrate(0.0, 1.0, |t| t * legendre(degree, t))
        }
    })
}

fn s1_multiplier_with(rule: &crate::quad::GlRule, degree: usize) -> f64 {
    let d = degree as f64;
    2.0 * rule.integrate(-PI / 2.0, PI / 2.0, |t| t.cos() * (d * t).cos())
}

/// `λ_0, λ_2, …, λ_{2K}` on S¹.
pub fn s1_multipliers(order: usize) -> Vec<f64> {
    let rule = gauss_legendre(2 * order + 32);
    (0..=order).map(|k| s1_multiplier_with(&rule, 2 * k)).collect()
}

/// `λ_0, λ_2, …, λ_L` on S² (index `ℓ/2`).
pub fn s2_multipliers(lmax: usize) -> Vec<f64> {
    let rule = gauss_legendre(lmax / 2 + 8);
    (0..=lmax).step_by(2).map(|l| 4.0 * PI * rule.integrate(0.0, 1.0, |t| t * legendre(l, t))).collect()
}

/// Legendre polynomial `P_n(t)`.
pub fn legendre(n: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Applies the cosine transform on S¹.
pub fn cosine_transform_s1(series: &EvenFourierSeries) -> EvenFourierSeries {
    let lam = s1_multipliers(series.order());
    EvenFourierSeries {
        a0: series.a0 * lam[0],
        a: series.a.iter().zip(&lam[1..]).map(|(c, l)| c * l).collect(),
        b: series.b.iter().zip(&lam[1..]).map(|(c, l)| c * l).collect(),
    }
}

/// Applies the cosine transform on S².
pub fn cosine_transform_s2(series: &EvenSphericalExpansion) -> EvenSphericalExpansion {
    let lam = s2_multipliers(series.lmax);
    let mut coeffs = series.coeffs.clone();
    for l in (0..=series.lmax).step_by(2) {
        for m in -(l as i64)..=(l as i64) {
            coeffs[EvenSphericalExpansion::index(l, m)] *= lam[l / 2];
        }
    }
    EvenSphericalExpansion { lmax: series.lmax, coeffs }
}

/// A Crofton density with the diagnostics of the inversion that produced it.
#[derive(Debug, Clone)]
pub struct Inversion<T> {
    pub density: T,
    /// Sup-norm of `¼·C(density) − F` over a dense test set.
    pub sup_error: f64,
    /// Share of coefficient energy carried by the top quarter of degrees.
    pub tail_energy_ratio: f64,
    pub tail_warning: bool,
}

fn tail_ratio(energies: &[f64]) -> f64 {
    let n = energies.len();
    let total: f64 = energies.iter().sum();
    if n <= 1 || total == 0.0 {
        return 0.0;
    }
    let quarter = ((n - 1) / 4).max(1);
    energies[n - quarter..].iter().sum::<f64>() / total
}

/// Solves `¼·C(g) = F` on S¹ for `g` truncated at order `K`.
///
/// `f(θ)` is the restriction of the norm to `(cos θ, sin θ)`; it must be even
/// and positive.
pub fn invert_cosine_s1(f: impl Fn(f64) -> f64, order: usize) -> Result<Inversion<EvenFourierSeries>> {
    let n = 16 * (order + 1);
    let samples: Vec<f64> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
    if let Some(bad) = samples.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::invalid(format!("norm restriction must be positive and finite, got {bad}")));
    }
    let fit = fourier_fit_s1(&samples, order)?;
    let lam = s1_multipliers(order);
    let density = EvenFourierSeries {
        a0: 4.0 * fit.a0 / lam[0],
        a: fit.a.iter().zip(&lam[1..]).map(|(c, l)| 4.0 * c / l).collect(),
        b: fit.b.iter().zip(&lam[1..]).map(|(c, l)| 4.0 * c / l).collect(),
    };
    let back = cosine_transform_s1(&density);
    let dense = 8192;
    let sup_error = (0..dense)
        .map(|j| {
            let t = PI * (j as f64 + 0.5) / dense as f64;
            (0.25 * back.eval(t) - f(t)).abs()
        })
        .fold(0.0, f64::max);
    let tail_energy_ratio = tail_ratio(&density.mode_energies());
    Ok(Inversion { density, sup_error, tail_energy_ratio, tail_warning: tail_energy_ratio > TAIL_WARNING_RATIO })
}

/// Nodes and weights of the product rule on S²: Gauss–Legendre in `cos θ`
/// (`2L+2` nodes) times trapezoid in azimuth (`4L+4` nodes).
pub fn sphere_grid(lmax: usize) -> Vec<([f64; 3], f64)> {
    let rule: Arc<_> = gauss_legendre(2 * lmax + 2);
    let nphi = 4 * lmax + 4;
    let dphi = 2.0 * PI / nphi as f64;
    let mut out = Vec::with_capacity(rule.len() * nphi);
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = (1.0 - z * z).max(0.0).sqrt();
        for j in 0..nphi {
            let (sp, cp) = (j as f64 * dphi).sin_cos();
            out.push(([s * cp, s * sp, z], w * dphi));
        }
    }
    out
}

/// Roughly uniform point set on S² (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            [r * c, r * s, z]
        })
        .collect()
}

/// Solves `¼·C(f) = F` on S² for `f` truncated at even degree `L`.
pub fn invert_cosine_s2(f: impl Fn([f64; 3]) -> f64, lmax: usize) -> Result<Inversion<EvenSphericalExpansion>> {
    check_even_degree(lmax)?;
    let n = lmax + 1;
    let mut y = vec![0.0; n * n];
    let mut proj = vec![0.0; n * n];
    let mut scale = 1.0f64;
    for (u, w) in sphere_grid(lmax) {
        let v = f(u);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("norm restriction must be positive and finite, got {v}")));
        }
        scale = scale.max(v);
        real_harmonics(lmax, u, &mut y);
        for (p, yi) in proj.iter_mut().zip(&y) {
            *p += w * v * yi;
        }
    }
    let max_odd = (1..n).step_by(2).flat_map(|l| (l * l..(l + 1) * (l + 1)).map(|i| proj[i].abs())).fold(0.0, f64::max);
    if max_odd > EVEN_TOL * scale {
        return Err(Error::NotEven { max_odd });
    }
    let lam = s2_multipliers(lmax);
    let mut coeffs = vec![0.0; EvenSphericalExpansion::count(lmax)];
    for l in (0..=lmax).step_by(2) {
        for m in -(l as i64)..=(l as i64) {
            coeffs[EvenSphericalExpansion::index(l, m)] = 4.0 * proj[((l * l + l) as i64 + m) as usize] / lam[l / 2];
        }
    }
    let density = EvenSphericalExpansion { lmax, coeffs };
    let back = cosine_transform_s2(&density);
    let sup_error =
        fibonacci_sphere(2000).into_iter().map(|u| (0.25 * back.eval_with(u, &mut y) - f(u)).abs()).fold(0.0, f64::max);
    let tail_energy_ratio = tail_ratio(&density.degree_energies());
    Ok(Inversion { density, sup_error, tail_energy_ratio, tail_warning: tail_energy_ratio > TAIL_WARNING_RATIO })
}

/// A density on S¹ or S², as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum CroftonDensity {
    S1(EvenFourierSeries),
    S2(EvenSphericalExpansion),
}

/// On-disk layout `{space, order, coefficients}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityRecord {
    pub space: Space,
    pub order: usize,
    pub coefficients: Vec<f64>,
}

impl CroftonDensity {
    pub fn to_record(&self) -> DensityRecord {
        match self {
            CroftonDensity::S1(s) => DensityRecord { space: Space::S1, order: s.order(), coefficients: s.to_flat() },
            CroftonDensity::S2(s) => DensityRecord { space: Space::S2, order: s.lmax, coefficients: s.coeffs.clone() },
        }
    }

    pub fn from_record(rec: DensityRecord) -> Result<Self> {
        match rec.space {
            Space::S1 => {
                let s = EvenFourierSeries::from_flat(&rec.coefficients)?;
                if s.order() != rec.order {
                    return Err(Error::DimensionMismatch {
                        expected: 1 + 2 * rec.order,
                        found: rec.coefficients.len(),
                    });
                }
                Ok(CroftonDensity::S1(s))
            }
            Space::S2 => Ok(CroftonDensity::S2(EvenSphericalExpansion::new(rec.order, rec.coefficients)?)),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(crate::json::to_string(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(serde_json::from_str(s)?)
    }
}
