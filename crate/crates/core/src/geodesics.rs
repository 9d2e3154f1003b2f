//! Length functional of sampled paths and the variational check that
//! straight segments are the unique shortest paths of a Minkowski norm.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::stream;
use crate::norms::{sample_off_axis, MinkowskiNorm};

/// Grid size used for chord and perturbed paths.
const PATH_SAMPLES: usize = 2049;
/// Number of sine modes in a perturbation.
pub const PERTURBATION_MODES: usize = 5;
/// Maximum perturbation amplitude relative to the chord length.
pub const MAX_AMPLITUDE: f64 = 0.2;
/// Allowed shortfall of a perturbed path below the chord.
pub const CHORD_TOL: f64 = 1e-10;

/// A path sampled on a uniform parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPath {
    t: Vec<f64>,
    x: Vec<Vec<f64>>,
}

impl ParamPath {
    pub fn new(t: Vec<f64>, x: Vec<Vec<f64>>) -> Result<Self> {
        if t.len() < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: t.len() });
        }
        if t.len() != x.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), found: x.len() });
        }
        let dim = x[0].len();
        if let Some(bad) = x.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        if t.iter().chain(x.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("path samples must be finite"));
        }
        let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::invalid("parameter grid must be increasing"));
        }
        let uneven = t.iter().enumerate().any(|(i, ti)| (ti - (t[0] + i as f64 * h)).abs() > 1e-9 * h.max(t[0].abs()));
        if uneven {
            return Err(Error::invalid("parameter grid must be uniform"));
        }
        Ok(ParamPath { t, x })
    }

    /// Samples `f` at `n` uniform parameters in `[a, b]`.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let t: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n.max(2) - 1) as f64).collect();
        let x = t.iter().map(|&s| f(s)).collect();
        Self::new(t, x)
    }

    /// Reads rows `t,x,y[,z]`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let rows = crate::lines::read_numeric_csv(path)?;
        let (t, x) = rows
            .into_iter()
            .map(|r| {
                if r.len() < 3 || r.len() > 4 {
                    return Err(Error::Parse(format!("{}: path rows must be t,x,y[,z]", path.display())));
                }
                Ok((r[0], r[1..].to_vec()))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Self::new(t, x)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn translated(&self, c: &[f64]) -> Self {
        let x = self.x.iter().map(|p| p.iter().zip(c).map(|(a, b)| a + b).collect()).collect();
        ParamPath { t: self.t.clone(), x }
    }

    fn step(&self) -> f64 {
        (self.t[self.t.len() - 1] - self.t[0]) / (self.t.len() - 1) as f64
    }

    /// Velocity samples by fourth-order finite differences (second order for
    /// fewer than five samples).
    fn velocities(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let h = self.step();
        let x = &self.x;
        // Stencils act on offsets from their first node so constant paths
        // give exactly zero velocity.
        let comb = |w: &[(usize, f64)], scale: f64| -> Vec<f64> {
            let base = w[0].0;
            (0..self.dim()).map(|d| w.iter().map(|&(i, c)| c * (x[i][d] - x[base][d])).sum::<f64>() / scale).collect()
        };
        (0..n)
            .map(|i| match n {
                2 => comb(&[(1, 1.0), (0, -1.0)], h),
                3 | 4 => {
                    if i == 0 {
                        comb(&[(0, -3.0), (1, 4.0), (2, -1.0)], 2.0 * h)
                    } else if i == n - 1 {
                        comb(&[(n - 1, 3.0), (n - 2, -4.0), (n - 3, 1.0)], 2.0 * h)
                    } else {
                        comb(&[(i + 1, 1.0), (i - 1, -1.0)], 2.0 * h)
                    }
                }
                _ => {
                    let s = 12.0 * h;
                    if i == 0 {
                        comb(&[(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)], s)
                    } else if i == 1 {
                        comb(&[(0, -3.0), (1, -10.0), (2, 18.0), (3, -6.0), (4, 1.0)], s)
                    } else if i == n - 1 {
                        comb(&[(n - 1, 25.0), (n - 2, -48.0), (n - 3, 36.0), (n - 4, -16.0), (n - 5, 3.0)], s)
                    } else if i == n - 2 {
                        comb(&[(n - 1, 3.0), (n - 2, 10.0), (n - 3, -18.0), (n - 4, 6.0), (n - 5, -1.0)], s)
                    } else {
                        comb(&[(i - 2, 1.0), (i - 1, -8.0), (i + 1, 8.0), (i + 2, -1.0)], s)
                    }
                }
            })
            .collect()
    }
}

/// Composite Simpson rule on uniform samples, closing with the 3/8 rule when
/// the interval count is odd.
fn simpson(y: &[f64], h: f64) -> f64 {
    let m = y.len() - 1;
    if m == 1 {
        return 0.5 * h * (y[0] + y[1]);
    }
    let even = if m.is_multiple_of(2) { m } else { m - 3 };
    let mut s = 0.0;
    for k in (0..even).step_by(2) {
        s += y[k] + 4.0 * y[k + 1] + y[k + 2];
    }
    let mut total = s * h / 3.0;
    if even < m {
        let j = even;
        total += 3.0 * h / 8.0 * (y[j] + 3.0 * y[j + 1] + 3.0 * y[j + 2] + y[j + 3]);
    }
    total
}

/// `∫ F(r′(t)) dt` over the sampled path.
pub fn path_length(norm: &MinkowskiNorm, path: &ParamPath) -> Result<f64> {
    if path.dim() != norm.dim() {
        return Err(Error::DimensionMismatch { expected: norm.dim(), found: path.dim() });
    }
    let speeds: Vec<f64> = path.velocities().iter().map(|v| norm.value(v)).collect();
    Ok(simpson(&speeds, path.step()))
}

/// Outcome of [`verify_shortest_path`].
#[derive(Debug, Clone, Serialize)]
pub struct ShortestPathReport {
    pub chord_length: f64,
    pub n_perturbations: usize,
    /// Smallest `length(perturbed) − length(chord)` seen.
    pub min_margin: f64,
    pub pass: bool,
}

fn chord_point(x: &[f64], y: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + t * (b - a)).collect()
}

/// `length(chord + δ) − length(chord)` for the perturbation
/// `δ(t) = Σ_k coeffs[k]·sin((k+1)πt)`.
pub fn perturbation_margin(norm: &MinkowskiNorm, x: &[f64], y: &[f64], coeffs: &[Vec<f64>]) -> Result<f64> {
    let chord = ParamPath::from_fn(0.0, 1.0, PATH_SAMPLES, |t| chord_point(x, y, t))?;
    let bent = ParamPath::from_fn(0.0, 1.0, PATH_SAMPLES, |t| {
        let mut p = chord_point(x, y, t);
        for (k, c) in coeffs.iter().enumerate() {
            let s = ((k + 1) as f64 * PI * t).sin();
            p.iter_mut().zip(c).for_each(|(pi, ci)| *pi += ci * s);
        }
        p
    })?;
    Ok(path_length(norm, &bent)? - path_length(norm, &chord)?)
}

/// Random endpoint-fixed sine perturbations of the chord from `x` to `y`
/// never shorten it by more than [`CHORD_TOL`].
pub fn verify_shortest_path(
    norm: &MinkowskiNorm,
    x: &[f64],
    y: &[f64],
    n_perturbations: usize,
    seed: u64,
) -> Result<ShortestPathReport> {
    let dim = norm.dim();
    if x.len() != dim || y.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: x.len().max(y.len()) });
    }
    let span = x.iter().zip(y).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    if span == 0.0 {
        return Err(Error::invalid("endpoints must differ"));
    }
    let margins: Vec<f64> = (0..n_perturbations)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let mut coeffs: Vec<Vec<f64>> =
                (0..PERTURBATION_MODES).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            // Σ_k |c_k| bounds |δ(t)| coordinatewise.
            let bound = (0..dim).map(|d| coeffs.iter().map(|c| c[d].abs()).sum::<f64>().powi(2)).sum::<f64>().sqrt();
            let amp = MAX_AMPLITUDE * span * (1.0 - rng.random::<f64>());
            coeffs.iter_mut().flatten().for_each(|c| *c *= amp / bound);
            perturbation_margin(norm, x, y, &coeffs)
        })
        .collect::<Result<_>>()?;
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ShortestPathReport {
        chord_length: norm.value(&y.iter().zip(x).map(|(b, a)| b - a).collect::<Vec<_>>()),
        n_perturbations,
        min_margin,
        pass: n_perturbations == 0 || min_margin >= -CHORD_TOL,
    })
}

/// Outcome of [`hessian_identity_check`].
#[derive(Debug, Clone, Serialize)]
pub struct HessianIdentityReport {
    pub n_samples: usize,
    /// Max entrywise `|D(F∇F) − F·D(∇F) − ∇F∇Fᵀ|` with `D` a central difference.
    pub max_residual: f64,
    /// Max entrywise gap between `D(F∇F)` and the analytic `½·Hess(F²)`.
    pub analytic_gap: f64,
    pub worst_point: Vec<f64>,
    pub failures: Vec<String>,
}

/// Central-difference Jacobian of `f` at `v` with step `h`.
fn jacobian(f: impl Fn(&[f64]) -> Result<Vec<f64>>, v: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let n = v.len();
    let mut cols = Vec::with_capacity(n);
    let mut x = v.to_vec();
    for j in 0..n {
        x[j] = v[j] + h;
        let fp = f(&x)?;
        x[j] = v[j] - h;
        let fm = f(&x)?;
        x[j] = v[j];
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    Ok(cols)
}

/// Checks `½·Hess(F²) = F·Hess F + ∇F∇Fᵀ` entrywise at random off-axis points
/// by differencing the analytic gradient with step `1e-5·max(1, |v|)`.
pub fn hessian_identity_check(norm: &MinkowskiNorm, n_samples: usize, seed: u64) -> HessianIdentityReport {
    let mut rng = stream(seed, 0);
    let mut rep = HessianIdentityReport {
        n_samples,
        max_residual: 0.0,
        analytic_gap: 0.0,
        worst_point: Vec::new(),
        failures: Vec::new(),
    };
    for _ in 0..n_samples {
        let v = sample_off_axis(&mut rng, norm.dim());
        let outcome = (|| -> Result<(f64, f64)> {
            let h = 1e-5 * v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
            let f = norm.value(&v);
            let g = norm.gradient(&v)?;
            let lhs = jacobian(
                |x| {
                    let fx = norm.value(x);
                    Ok(norm.gradient(x)?.into_iter().map(|gi| fx * gi).collect())
                },
                &v,
                h,
            )?;
            let dg = jacobian(|x| norm.gradient(x), &v, h)?;
            let (_, analytic) = norm.gradient_and_hessian(&v)?;
            let mut res: f64 = 0.0;
            let mut gap: f64 = 0.0;
            for j in 0..v.len() {
                for i in 0..v.len() {
                    res = res.max((lhs[j][i] - f * dg[j][i] - g[i] * g[j]).abs());
                    gap = gap.max((lhs[j][i] - analytic[(i, j)]).abs());
                }
            }
            Ok((res, gap))
        })();
        match outcome {
            Ok((res, gap)) => {
                if res > rep.max_residual {
                    rep.max_residual = res;
                    rep.worst_point = v.clone();
                }
                rep.analytic_gap = rep.analytic_gap.max(gap);
            }
            Err(e) => rep.failures.push(e.to_string()),
        }
    }
    rep
}
