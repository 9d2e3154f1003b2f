//! Minkowski norms on ℝ² and ℝ³: evaluation, first and second derivatives,
//! duals, and sampled axiom checks.
//!
//! Four kinds are supported:
//!
//! * `p`-norms, `F(v) = (Σ |v_i|^p)^{1/p}` for `1 < p < ∞`;
//! * quadratic norms, `F(v) = √(vᵀAv)` for a positive-definite `A`;
//! * custom norms `F(v) = |v|·h(v/|v|)` given by an even profile `h` on the
//!   unit circle (Fourier series) or sphere (spherical harmonics);
//! * the restriction of a three-dimensional norm to a plane, expressed in an
//!   orthonormal frame of that plane.
//!
//! `p`-norms with `p` not an even integer are only `C¹` across the coordinate
//! hyperplanes; their Hessians are reported as [`Error::SingularPoint`] there.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::stream;
use crate::sphere::{real_harmonics, EvenFourierSeries, EvenSphericalExpansion};

/// Minimum angular distance of sampled directions from every coordinate
/// hyperplane.
pub const AXIS_MARGIN: f64 = 1e-3;

/// Pass threshold for the sampled axiom residuals.
pub const AXIOM_TOL: f64 = 1e-8;

/// Coarse grid used to bracket the numeric dual-norm maximizer.
const DUAL_GRID: usize = 720;
const DUAL_ANGLE_TOL: f64 = 1e-12;
const DUAL_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    P { p: f64 },
    Quadratic { a: DMatrix<f64>, a_inv: DMatrix<f64> },
    CustomCircle { profile: EvenFourierSeries },
    CustomSphere { profile: EvenSphericalExpansion },
    Restricted { parent: Box<MinkowskiNorm>, e1: [f64; 3], e2: [f64; 3] },
}

/// A symmetric norm on ℝ² or ℝ³.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiNorm {
    kind: NormKind,
    dim: usize,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimension must be 2 or 3, got {dim}")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn euclid(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn is_even_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p as i64) % 2 == 0
}

impl MinkowskiNorm {
    /// The `p`-norm on ℝ^dim.
    pub fn p_norm(p: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("exponent must satisfy 1 < p < inf, got {p}")));
        }
        Ok(MinkowskiNorm { kind: NormKind::P { p }, dim })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::p_norm(2.0, dim)
    }

    /// `√(vᵀAv)` for a symmetric positive-definite `A`.
    pub fn quadratic(a: DMatrix<f64>) -> Result<Self> {
        let dim = a.nrows();
        check_dim(dim)?;
        if a.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: a.ncols() });
        }
        if (&a - a.transpose()).amax() > 1e-12 * a.amax() {
            return Err(Error::invalid("quadratic-norm matrix must be symmetric"));
        }
        let chol =
            a.clone().cholesky().ok_or_else(|| Error::invalid("quadratic-norm matrix must be positive definite"))?;
        let a_inv = chol.inverse();
        Ok(MinkowskiNorm { kind: NormKind::Quadratic { a, a_inv }, dim })
    }

    /// `|v|·h(θ)` on ℝ² with `h` an even, positive profile.
    pub fn custom_circle(profile: EvenFourierSeries) -> Result<Self> {
        let min = (0..4096).map(|j| profile.eval(PI * j as f64 / 4096.0)).fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::invalid(format!("custom profile must be positive, minimum {min}")));
        }
        Ok(MinkowskiNorm { kind: NormKind::CustomCircle { profile }, dim: 2 })
    }

    /// `|v|·h(v/|v|)` on ℝ³ with `h` an even, positive profile.
    pub fn custom_sphere(profile: EvenSphericalExpansion) -> Result<Self> {
        let min =
            crate::sphere::fibonacci_sphere(4000).into_iter().map(|u| profile.eval(u)).fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::invalid(format!("custom profile must be positive, minimum {min}")));
        }
        Ok(MinkowskiNorm { kind: NormKind::CustomSphere { profile }, dim: 3 })
    }

    /// Fits an even circle profile to `(angle, value)` samples by least squares.
    pub fn from_circle_samples(samples: &[(f64, f64)]) -> Result<Self> {
        let n = samples.len();
        if n < 6 {
            return Err(Error::TooFewSamples { needed: 6, got: n });
        }
        let order = ((n / 2).saturating_sub(1) / 2).clamp(1, 32);
        let cols = 1 + 2 * order;
        let design = DMatrix::from_fn(n, cols, |i, j| {
            let t = samples[i].0;
            match j {
                0 => 1.0,
                _ => {
                    let k = j.div_ceil(2);
                    let arg = 2.0 * k as f64 * t;
                    if j % 2 == 1 {
                        arg.cos()
                    } else {
                        arg.sin()
                    }
                }
            }
        });
        let rhs = DVector::from_iterator(n, samples.iter().map(|s| s.1));
        let coeffs = least_squares(design, rhs)?;
        let profile = EvenFourierSeries::from_flat(coeffs.as_slice())?;
        Self::custom_circle(profile)
    }

    /// Fits an even sphere profile to `(polar, azimuth, value)` samples.
    pub fn from_sphere_samples(samples: &[(f64, f64, f64)]) -> Result<Self> {
        let n = samples.len();
        if n < 12 {
            return Err(Error::TooFewSamples { needed: 12, got: n });
        }
        let mut lmax = 0;
        while lmax < 16 && EvenSphericalExpansion::count(lmax + 2) * 2 <= n {
            lmax += 2;
        }
        let cols = EvenSphericalExpansion::count(lmax);
        let full = (lmax + 1) * (lmax + 1);
        let mut y = vec![0.0; full];
        let mut design = DMatrix::zeros(n, cols);
        for (i, &(th, ph, _)) in samples.iter().enumerate() {
            let (st, ct) = th.sin_cos();
            let (sp, cp) = ph.sin_cos();
            real_harmonics(lmax, [st * cp, st * sp, ct], &mut y);
            for l in (0..=lmax).step_by(2) {
                for m in -(l as i64)..=(l as i64) {
                    design[(i, EvenSphericalExpansion::index(l, m))] = y[((l * l + l) as i64 + m) as usize];
                }
            }
        }
        let rhs = DVector::from_iterator(n, samples.iter().map(|s| s.2));
        let coeffs = least_squares(design, rhs)?;
        Self::custom_sphere(EvenSphericalExpansion::new(lmax, coeffs.as_slice().to_vec())?)
    }

    /// Restriction of a norm on ℝ³ to the plane spanned by the orthonormal
    /// pair `(e1, e2)`, in those coordinates.
    pub fn restrict_to_plane(&self, e1: [f64; 3], e2: [f64; 3]) -> Result<Self> {
        if self.dim != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: self.dim });
        }
        let ortho = (dot(&e1, &e1) - 1.0).abs().max((dot(&e2, &e2) - 1.0).abs()).max(dot(&e1, &e2).abs());
        if ortho > 1e-12 {
            return Err(Error::invalid("plane frame must be orthonormal"));
        }
        Ok(MinkowskiNorm { kind: NormKind::Restricted { parent: Box::new(self.clone()), e1, e2 }, dim: 2 })
    }

    /// Parses `p:<p>`, `quad:<upper-triangular entries>` or `custom:<csv>`.
    ///
    /// `dim` fixes the dimension of `p`-norms (default 2) and is checked
    /// against the implied dimension of the other forms.
    pub fn from_spec(spec: &str, dim: Option<usize>) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').ok_or_else(|| {
            Error::Parse(format!("norm spec '{spec}' must look like p:<p>, quad:<a..> or custom:<csv>"))
        })?;
        let norm = match kind.trim() {
            "p" => {
                let p: f64 = rest.trim().parse().map_err(|_| Error::Parse(format!("bad exponent '{rest}'")))?;
                Self::p_norm(p, dim.unwrap_or(2))?
            }
            "quad" => {
                let vals: Vec<f64> = rest
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad matrix entry '{t}'"))))
                    .collect::<Result<_>>()?;
                let a = match vals.len() {
                    3 => DMatrix::from_row_slice(2, 2, &[vals[0], vals[1], vals[1], vals[2]]),
                    6 => DMatrix::from_row_slice(
                        3,
                        3,
                        &[vals[0], vals[1], vals[2], vals[1], vals[3], vals[4], vals[2], vals[4], vals[5]],
                    ),
                    k => return Err(Error::Parse(format!("quad needs 3 (2D) or 6 (3D) entries, got {k}"))),
                };
                Self::quadratic(a)?
            }
            "custom" => Self::from_csv(Path::new(rest.trim()))?,
            other => return Err(Error::Parse(format!("unknown norm kind '{other}'"))),
        };
        if let Some(d) = dim {
            if d != norm.dim {
                return Err(Error::DimensionMismatch { expected: d, found: norm.dim });
            }
        }
        Ok(norm)
    }

    /// Reads `(angle, value)` or `(polar, azimuth, value)` rows.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_path(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let row: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            match row {
                Ok(r) => rows.push(r),
                // Allow a single header line.
                Err(_) if rows.is_empty() => continue,
                Err(e) => return Err(Error::Parse(format!("{}: {e}", path.display()))),
            }
        }
        match rows.first().map(Vec::len) {
            Some(2) if rows.iter().all(|r| r.len() == 2) => {
                Self::from_circle_samples(&rows.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>())
            }
            Some(3) if rows.iter().all(|r| r.len() == 3) => {
                Self::from_sphere_samples(&rows.iter().map(|r| (r[0], r[1], r[2])).collect::<Vec<_>>())
            }
            _ => Err(Error::Parse(format!("{}: expected 2 or 3 numeric columns", path.display()))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    /// The exponent of a `p`-norm.
    pub fn exponent(&self) -> Option<f64> {
        match self.kind {
            NormKind::P { p } => Some(p),
            _ => None,
        }
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok(())
    }

    /// `F(v)`.
    pub fn evaluate(&self, v: &[f64]) -> Result<f64> {
        self.check(v)?;
        Ok(self.value(v))
    }

    /// `F(v)` without the dimension check.
    pub fn value(&self, v: &[f64]) -> f64 {
        match &self.kind {
            NormKind::P { p } => p_value(*p, v),
            NormKind::Quadratic { a, .. } => quad_form(a, v).max(0.0).sqrt(),
            NormKind::CustomCircle { profile } => {
                let r = v[0].hypot(v[1]);
                if r == 0.0 {
                    0.0
                } else {
                    r * profile.eval(v[1].atan2(v[0]))
                }
            }
            NormKind::CustomSphere { profile } => {
                let r = euclid(v);
                if r == 0.0 {
                    0.0
                } else {
                    r * profile.eval([v[0] / r, v[1] / r, v[2] / r])
                }
            }
            NormKind::Restricted { parent, e1, e2 } => parent.value(&lift(e1, e2, v)),
        }
    }

    /// `F(cos θ, sin θ)`.
    pub fn on_circle(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.value(&[c, s])
    }

    /// `∇F(v)`, the differential `dF(v)` as a covector.
    pub fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v)?;
        if v.iter().all(|x| *x == 0.0) {
            return Err(Error::UndefinedDirection);
        }
        Ok(match &self.kind {
            NormKind::P { p } => {
                let f = p_value(*p, v);
                v.iter().map(|x| x.signum() * (x.abs() / f).powf(p - 1.0)).collect()
            }
            NormKind::Quadratic { a, .. } => {
                let f = quad_form(a, v).sqrt();
                mat_vec(a, v).into_iter().map(|x| x / f).collect()
            }
            NormKind::CustomCircle { profile } => {
                let r = v[0].hypot(v[1]);
                let t = v[1].atan2(v[0]);
                let (h, h1, _) = profile.eval_derivatives(t);
                let (s, c) = (v[1] / r, v[0] / r);
                vec![h * c - h1 * s, h * s + h1 * c]
            }
            NormKind::CustomSphere { .. } => fd_gradient(|x| self.value(x), v),
            NormKind::Restricted { parent, e1, e2 } => {
                let g = parent.gradient(&lift(e1, e2, v))?;
                vec![dot(&g, e1), dot(&g, e2)]
            }
        })
    }

    /// `∇F(v)` and `½·Hess(F²)(v)`.
    pub fn gradient_and_hessian(&self, v: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        if let NormKind::P { p } = self.kind {
            if !is_even_integer(p) && v.contains(&0.0) {
                return Err(Error::SingularPoint { p, point: v.to_vec() });
            }
        }
        let g = self.gradient(v)?;
        let h = self.half_hessian(v, &g)?;
        Ok((g, h))
    }

    /// `½·Hess(F²)` wherever it is finite. For `p > 2` this includes the
    /// coordinate hyperplanes, which plane restrictions routinely cross.
    fn half_hessian(&self, v: &[f64], g: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim;
        let h = match &self.kind {
            NormKind::P { p } => {
                let p = *p;
                let f = p_value(p, v);
                DMatrix::from_fn(n, n, |i, j| {
                    let diag = if i == j { (p - 1.0) * (v[i].abs() / f).powf(p - 2.0) } else { 0.0 };
                    diag - (p - 2.0) * g[i] * g[j]
                })
            }
            NormKind::Quadratic { a, .. } => a.clone(),
            NormKind::CustomCircle { profile } => {
                let r = v[0].hypot(v[1]);
                let t = v[1].atan2(v[0]);
                let (h0, _, h2) = profile.eval_derivatives(t);
                let e_t = [-v[1] / r, v[0] / r];
                let k = h0 * (h0 + h2);
                DMatrix::from_fn(2, 2, |i, j| k * e_t[i] * e_t[j] + g[i] * g[j])
            }
            NormKind::CustomSphere { .. } => {
                let cols: Vec<Vec<f64>> = (0..3)
                    .map(|j| {
                        fd_gradient(
                            |x| {
                                let gx = fd_gradient(|y| self.value(y), x);
                                self.value(x) * gx[j]
                            },
                            v,
                        )
                    })
                    .collect();
                let m = DMatrix::from_fn(3, 3, |i, j| cols[j][i]);
                (&m + m.transpose()) * 0.5
            }
            NormKind::Restricted { parent, e1, e2 } => {
                let x = lift(e1, e2, v);
                let gp = parent.gradient(&x)?;
                let hp = parent.half_hessian(&x, &gp)?;
                let e = DMatrix::from_column_slice(3, 2, &[e1[0], e1[1], e1[2], e2[0], e2[1], e2[2]]);
                e.transpose() * hp * e
            }
        };
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularPoint { p: self.exponent().unwrap_or(f64::NAN), point: v.to_vec() });
        }
        Ok(h)
    }

    /// `Hess F(v) = (½·Hess(F²) − ∇F∇Fᵀ)/F`.
    pub fn hessian(&self, v: &[f64]) -> Result<DMatrix<f64>> {
        let (g, h) = self.gradient_and_hessian(v)?;
        let f = self.value(v);
        let gv = DVector::from_column_slice(&g);
        Ok((h - &gv * gv.transpose()) / f)
    }

    /// The dual norm `F*(ξ) = sup{ |ξ(v)| : F(v) ≤ 1 }`.
    pub fn dual_evaluate(&self, xi: &[f64]) -> Result<f64> {
        self.check(xi)?;
        match &self.kind {
            NormKind::P { p } => Ok(p_value(p / (p - 1.0), xi)),
            NormKind::Quadratic { a_inv, .. } => Ok(quad_form(a_inv, xi).max(0.0).sqrt()),
            _ if xi.iter().all(|x| *x == 0.0) => Ok(0.0),
            _ if self.dim == 2 => self.dual_numeric_2d(xi),
            _ => self.dual_numeric_3d(xi),
        }
    }

    /// Golden-section maximization of `⟨ξ,u⟩/F(u)` over the unit circle.
    fn dual_numeric_2d(&self, xi: &[f64]) -> Result<f64> {
        let obj = |phi: f64| {
            let (s, c) = phi.sin_cos();
            (xi[0] * c + xi[1] * s) / self.value(&[c, s])
        };
        let step = 2.0 * PI / DUAL_GRID as f64;
        let best = (0..DUAL_GRID)
            .map(|i| (i, obj(i as f64 * step)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
            .0;
        let phi = golden_max(&obj, (best as f64 - 1.0) * step, (best as f64 + 1.0) * step, DUAL_ANGLE_TOL);
        let value = obj(phi);
        let (s, c) = phi.sin_cos();
        self.dual_residual(xi, &[c, s], value)?;
        Ok(value)
    }

    /// Maximization of `⟨ξ,u⟩/F(u)` over the unit sphere: lattice search, then
    /// alternating golden-section refinement along two tangent angles.
    fn dual_numeric_3d(&self, xi: &[f64]) -> Result<f64> {
        let obj = |u: &[f64; 3]| dot(xi, u) / self.value(u);
        let start = crate::sphere::fibonacci_sphere(4 * DUAL_GRID)
            .into_iter()
            .fold(([1.0, 0.0, 0.0], f64::NEG_INFINITY), |acc, u| {
                let v = obj(&u);
                if v > acc.1 {
                    (u, v)
                } else {
                    acc
                }
            })
            .0;
        let mut u = start;
        let mut width = 0.1;
        for _ in 0..60 {
            let (t1, t2) = tangent_basis(&u);
            for t in [t1, t2] {
                let along = |a: f64| {
                    let (s, c) = a.sin_cos();
                    [c * u[0] + s * t[0], c * u[1] + s * t[1], c * u[2] + s * t[2]]
                };
                let a = golden_max(&|a| obj(&along(a)), -width, width, DUAL_ANGLE_TOL);
                u = along(a);
            }
            width = (width * 0.5).max(1e-6);
        }
        let value = obj(&u);
        self.dual_residual(xi, &u, value)?;
        Ok(value)
    }

    fn dual_residual(&self, xi: &[f64], u: &[f64], value: f64) -> Result<()> {
        let g = self.gradient(u)?;
        let scale = euclid(xi);
        let residual = xi.iter().zip(&g).map(|(x, gi)| (x - value * gi).powi(2)).sum::<f64>().sqrt() / scale;
        if !(residual < DUAL_RESIDUAL_TOL) {
            return Err(Error::Solver { residual });
        }
        Ok(())
    }

    /// Samples positivity, homogeneity, the Euler identity and positive
    /// definiteness of `½·Hess(F²)` at `n_samples` off-axis points.
    pub fn check_axioms(&self, n_samples: usize, seed: u64) -> AxiomReport {
        let mut rng = stream(seed, 0);
        let mut rep = AxiomReport {
            n_samples,
            positivity_violation: self.value(&vec![0.0; self.dim]).abs(),
            homogeneity_residual: 0.0,
            euler_residual: 0.0,
            min_hessian_eigenvalue: f64::INFINITY,
            worst_direction: Vec::new(),
            failures: Vec::new(),
            pass: false,
        };
        for _ in 0..n_samples.max(1) {
            let v = sample_off_axis(&mut rng, self.dim);
            let f = self.value(&v);
            if !(f > 0.0) {
                rep.positivity_violation = rep.positivity_violation.max(1.0 + f.abs());
                continue;
            }
            let lambda: f64 = rng.random_range(-10.0..10.0);
            let scaled: Vec<f64> = v.iter().map(|x| lambda * x).collect();
            let hom = (self.value(&scaled) - lambda.abs() * f).abs() / (lambda.abs() * f);
            rep.homogeneity_residual = rep.homogeneity_residual.max(hom);
            match self.gradient_and_hessian(&v) {
                Ok((g, h)) => {
                    rep.euler_residual = rep.euler_residual.max((dot(&g, &v) - f).abs() / f);
                    let lam = SymmetricEigen::new(h).eigenvalues.min();
                    if lam < rep.min_hessian_eigenvalue {
                        rep.min_hessian_eigenvalue = lam;
                        rep.worst_direction = v.clone();
                    }
                }
                Err(e) => rep.failures.push(e.to_string()),
            }
        }
        let hess_violation = (-rep.min_hessian_eigenvalue).max(0.0);
        rep.pass = rep.failures.is_empty()
            && rep.positivity_violation < AXIOM_TOL
            && rep.homogeneity_residual < AXIOM_TOL
            && rep.euler_residual < AXIOM_TOL
            && hess_violation < AXIOM_TOL
            && rep.min_hessian_eigenvalue > 0.0;
        rep
    }
}

/// Outcome of [`MinkowskiNorm::check_axioms`].
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub n_samples: usize,
    pub positivity_violation: f64,
    /// Max of `|F(λv) − |λ|F(v)| / (|λ|F(v))`.
    pub homogeneity_residual: f64,
    /// Max of `|⟨∇F(v),v⟩ − F(v)| / F(v)`.
    pub euler_residual: f64,
    /// Smallest eigenvalue of `½·Hess(F²)` seen; negative means non-convex.
    pub min_hessian_eigenvalue: f64,
    pub worst_direction: Vec<f64>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// A random direction at least [`AXIS_MARGIN`] radians away from every
/// coordinate hyperplane, with Euclidean length in `[0.1, 10]`.
pub fn sample_off_axis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let floor = AXIS_MARGIN.sin();
    loop {
        let u: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let r = euclid(&u);
        if r == 0.0 || u.iter().any(|x| x.abs() < floor * r) {
            continue;
        }
        let len = 10f64.powf(rng.random_range(-1.0..1.0));
        return u.iter().map(|x| x * len / r).collect();
    }
}

fn p_value(p: f64, v: &[f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

fn quad_form(a: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += v[i] * a[(i, j)] * v[j];
        }
    }
    s
}

fn mat_vec(a: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..v.len()).map(|i| (0..v.len()).map(|j| a[(i, j)] * v[j]).sum()).collect()
}

fn lift(e1: &[f64; 3], e2: &[f64; 3], s: &[f64]) -> [f64; 3] {
    [e1[0] * s[0] + e2[0] * s[1], e1[1] * s[0] + e2[1] * s[1], e1[2] * s[0] + e2[2] * s[1]]
}

/// Fourth-order central-difference gradient.
fn fd_gradient(f: impl Fn(&[f64]) -> f64, v: &[f64]) -> Vec<f64> {
    let h = 1e-4 * euclid(v).max(1e-300);
    let mut x = v.to_vec();
    (0..v.len())
        .map(|i| {
            let mut at = |d: f64| {
                x[i] = v[i] + d;
                let y = f(&x);
                x[i] = v[i];
                y
            };
            (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
        })
        .collect()
}

fn tangent_basis(u: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&a, u);
    let mut t1 = [a[0] - d * u[0], a[1] - d * u[1], a[2] - d * u[2]];
    let n = euclid(&t1);
    t1.iter_mut().for_each(|x| *x /= n);
    let t2 = [u[1] * t1[2] - u[2] * t1[1], u[2] * t1[0] - u[0] * t1[2], u[0] * t1[1] - u[1] * t1[0]];
    (t1, t2)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub(crate) fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if d <= c {
            break;
        }
    }
    if fc > fd {
        c
    } else {
        d
    }
}

fn least_squares(design: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    design.svd(true, true).solve(&rhs, 1e-12).map_err(|e| Error::invalid(format!("least-squares fit failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(p: f64) -> MinkowskiNorm {
        MinkowskiNorm::p_norm(p, 2).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(p(2.0).evaluate(&[3.0, 4.0]).unwrap(), 5.0);
        assert!((p(3.0).evaluate(&[1.0, 1.0]).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(p(3.0).evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(p(3.0).evaluate(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn euclidean_derivatives() {
        let (g, h) = p(2.0).gradient_and_hessian(&[3.0, 4.0]).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        assert!((h - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn derivative_errors() {
        assert!(matches!(p(3.0).gradient(&[0.0, 0.0]), Err(Error::UndefinedDirection)));
        assert!(matches!(p(3.0).gradient_and_hessian(&[1.0, 0.0]), Err(Error::SingularPoint { .. })));
        assert!(p(4.0).gradient_and_hessian(&[1.0, 0.0]).is_ok());
    }

    #[test]
    fn p15_hessian_is_positive_definite() {
        let (_, h) = p(1.5).gradient_and_hessian(&[1.0, 0.3]).unwrap();
        assert!(SymmetricEigen::new(h).eigenvalues.min() > 0.0);
    }

    #[test]
    fn dual_examples() {
        assert!((p(3.0).dual_evaluate(&[1.0, 1.0]).unwrap() - 2f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((p(2.0).dual_evaluate(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
        let n = p(4.0);
        let g = n.gradient(&[2.0, 1.0]).unwrap();
        assert!((n.dual_evaluate(&g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_norm() {
        let n = MinkowskiNorm::from_spec("quad:4,0,1", None).unwrap();
        assert!((n.evaluate(&[1.0, 1.0]).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!((n.dual_evaluate(&[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(n.check_axioms(200, 1).pass);
        assert!(MinkowskiNorm::from_spec("quad:1,2,1", None).is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(MinkowskiNorm::from_spec("p:3", Some(3)).unwrap().dim(), 3);
        assert!(matches!(MinkowskiNorm::from_spec("p:abc", None), Err(Error::Parse(_))));
        assert!(matches!(MinkowskiNorm::from_spec("lp3", None), Err(Error::Parse(_))));
        assert!(MinkowskiNorm::from_spec("p:0.5", None).is_err());
        assert!(matches!(MinkowskiNorm::from_spec("quad:1,0,1", Some(3)), Err(Error::DimensionMismatch { .. })));
        assert_eq!(MinkowskiNorm::from_spec("quad:2,0,0,1,0,3", None).unwrap().dim(), 3);
    }

    #[test]
    fn custom_circle_matches_quadratic() {
        // Profile of the ellipse norm sqrt(4x² + y²), sampled and refitted.
        let exact = MinkowskiNorm::from_spec("quad:4,0,1", None).unwrap();
        let samples: Vec<(f64, f64)> = (0..256)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 256.0;
                (t, exact.on_circle(t))
            })
            .collect();
        let custom = MinkowskiNorm::from_circle_samples(&samples).unwrap();
        for &t in &[0.1, 0.8, 2.0] {
            assert!((custom.on_circle(t) - exact.on_circle(t)).abs() < 1e-9);
        }
        let v = [0.7, -1.3];
        let g1 = custom.gradient(&v).unwrap();
        let g2 = exact.gradient(&v).unwrap();
        assert!((g1[0] - g2[0]).abs() < 1e-8 && (g1[1] - g2[1]).abs() < 1e-8);
        let (_, h1) = custom.gradient_and_hessian(&v).unwrap();
        let (_, h2) = exact.gradient_and_hessian(&v).unwrap();
        assert!((h1 - h2).amax() < 1e-6);
        let xi = [0.3, 0.9];
        assert!((custom.dual_evaluate(&xi).unwrap() - exact.dual_evaluate(&xi).unwrap()).abs() < 1e-9);
        assert!(custom.check_axioms(300, 4).pass);
    }

    #[test]
    fn nonconvex_profile_fails_hessian_check() {
        let profile = EvenFourierSeries::new(1.0, vec![0.0, 0.3], vec![0.0, 0.0]).unwrap();
        let n = MinkowskiNorm::custom_circle(profile).unwrap();
        let rep = n.check_axioms(1000, 3);
        assert!(!rep.pass);
        assert!(rep.min_hessian_eigenvalue < 0.0);
    }

    #[test]
    fn restricted_norm_is_planar_norm() {
        let n3 = MinkowskiNorm::p_norm(3.0, 3).unwrap();
        let r = n3.restrict_to_plane([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        let n2 = p(3.0);
        let xi = [0.4, -1.1];
        let d_num = r.dual_evaluate(&xi).unwrap();
        let d_exact = n2.dual_evaluate(&xi).unwrap();
        assert!((d_num - d_exact).abs() < 1e-12 * d_exact);
        let (g, h) = r.gradient_and_hessian(&[0.3, 0.8]).unwrap();
        let (g2, h2) = n2.gradient_and_hessian(&[0.3, 0.8]).unwrap();
        assert!((g[0] - g2[0]).abs() < 1e-15 && (h - h2).amax() < 1e-14);
    }

    #[test]
    fn custom_sphere_dual_matches_quadratic() {
        let exact = MinkowskiNorm::from_spec("quad:1,0,0,2,0,3", None).unwrap();
        let mut samples = Vec::new();
        for i in 0..40 {
            for j in 0..80 {
                let th = PI * (i as f64 + 0.5) / 40.0;
                let ph = 2.0 * PI * j as f64 / 80.0;
                let u = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                samples.push((th, ph, exact.value(&u)));
            }
        }
        let custom = MinkowskiNorm::from_sphere_samples(&samples).unwrap();
        let v = [0.3, -0.5, 0.8];
        assert!((custom.value(&v) - exact.value(&v)).abs() < 1e-4);
        let xi = [0.2, 0.7, -0.4];
        let d = custom.dual_evaluate(&xi).unwrap();
        assert!((d - exact.dual_evaluate(&xi).unwrap()).abs() < 1e-4);
    }
}
