//! Crofton length in a Minkowski plane.
//!
//! With unoriented lines `(θ, r) ∈ [0, π) × ℝ` and density `g`, the length
//! of a curve `γ` is
//!
//! ```text
//! L(γ) = ½ ∫₀^π ∫_ℝ #(γ ∩ l_{θ,r}) g(θ) dr dθ,
//! ```
//!
//! where `g` solves `¼·C(g) = F` on the unit circle.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lines::{Line2D, Polyline};
use crate::mc::{self, McEstimate, McOptions};
use crate::norms::MinkowskiNorm;
use crate::quad::gauss_legendre;
use crate::sphere::{cosine_transform_s1, invert_cosine_s1, EvenFourierSeries, Inversion};

/// Normalization of the unoriented line measure.
pub const C_LEN: f64 = 0.5;

/// Smallest sample count accepted by [`crofton_length_mc`].
pub const MIN_MC_SAMPLES: u64 = 1000;

/// Relative widening of the sampled offset band.
pub const BAND_MARGIN: f64 = 1e-6;

/// Relative tolerance of [`gelfand_identity_check`].
pub const GELFAND_TOL: f64 = 1e-8;

/// The measure `½·g(θ) dθ dr` on unoriented lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CroftonMeasure2D {
    density: EvenFourierSeries,
}

impl CroftonMeasure2D {
    pub fn new(density: EvenFourierSeries) -> Self {
        CroftonMeasure2D { density }
    }

    /// The Euclidean measure, `g ≡ 1`.
    pub fn euclidean() -> Self {
        Self::new(EvenFourierSeries::constant(1.0))
    }

    /// Inverts the cosine transform of `norm` at the given order.
    pub fn from_norm(norm: &MinkowskiNorm, order: usize) -> Result<(Self, Inversion<EvenFourierSeries>)> {
        if norm.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: norm.dim() });
        }
        let inv = invert_cosine_s1(|t| norm.on_circle(t), order)?;
        Ok((Self::new(inv.density.clone()), inv))
    }

    pub fn density(&self) -> &EvenFourierSeries {
        &self.density
    }

    /// Nodes needed to integrate `cos·g` over a half period to round-off.
    fn nodes(&self) -> usize {
        2 * self.density.order() + 64
    }
}

/// `½ ∫₀^π |⟨ξ_θ, b − a⟩| g(θ) dθ`, integrated over the half period on which
/// `⟨ξ_θ, b − a⟩ ≥ 0`.
pub fn crofton_length_segment(measure: &CroftonMeasure2D, a: [f64; 2], b: [f64; 2]) -> f64 {
    let v = [b[0] - a[0], b[1] - a[1]];
    let len = v[0].hypot(v[1]);
    if len == 0.0 {
        return 0.0;
    }
    let phi = v[1].atan2(v[0]);
    let rule = gauss_legendre(measure.nodes());
    let g = &measure.density;
    let s = rule.integrate(phi - PI / 2.0, phi + PI / 2.0, |t| (t - phi).cos() * g.eval(t));
    C_LEN * len * s
}

/// Sum of [`crofton_length_segment`] over the segments of `poly`.
pub fn crofton_length_polyline(measure: &CroftonMeasure2D, poly: &Polyline) -> f64 {
    poly.segments().map(|(a, b)| crofton_length_segment(measure, a, b)).sum()
}

/// Monte Carlo estimate of the Crofton length of `poly` from lines drawn
/// uniformly in `[0, π) × [c_θ − R, c_θ + R]`, where the band covers the
/// polyline's bounding disk.
pub fn crofton_length_mc(measure: &CroftonMeasure2D, poly: &Polyline, opts: McOptions) -> Result<McEstimate> {
    if opts.n < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_MC_SAMPLES as usize, got: opts.n as usize });
    }
    let (center, radius) = poly.bounding_disk();
    let band = radius * (1.0 + BAND_MARGIN);
    let scale = C_LEN * PI * 2.0 * band;
    let g = &measure.density;
    mc::run(opts, |rng| {
        let theta = rng.random::<f64>() * PI;
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let (s, c) = theta.sin_cos();
        let line = Line2D::new(theta, center[0] * c + center[1] * s + u * band);
        let count = poly.crossings(&line);
        if count == 0 {
            0.0
        } else {
            scale * count as f64 * g.eval(theta)
        }
    })
}

/// Both sides of the Gelfand identity for a segment.
#[derive(Debug, Clone, Serialize)]
pub struct GelfandReport {
    /// Pushed-forward density integrated along the segment.
    pub lhs: f64,
    /// Crossing count integrated over line space.
    pub rhs: f64,
    pub rel_diff: f64,
    pub pass: bool,
}

/// Compares the spectral evaluation `|v|·¼·C(g)(v̂)` with the crossing
/// integral `½ ∫₀^π (max − min of the projections) g(θ) dθ`.
pub fn gelfand_identity_check(measure: &CroftonMeasure2D, a: [f64; 2], b: [f64; 2]) -> Result<GelfandReport> {
    let v = [b[0] - a[0], b[1] - a[1]];
    let len = v[0].hypot(v[1]);
    if len == 0.0 {
        return Err(Error::UndefinedDirection);
    }
    let phi = v[1].atan2(v[0]);
    let lhs = len * 0.25 * cosine_transform_s1(&measure.density).eval(phi);

    // The projection extent has a kink where the line is parallel to the segment.
    let kink = (phi + PI / 2.0).rem_euclid(PI);
    let rule = gauss_legendre(measure.nodes());
    let g = &measure.density;
    let integrand = |t: f64| {
        let (s, c) = t.sin_cos();
        let (pa, pb) = (a[0] * c + a[1] * s, b[0] * c + b[1] * s);
        (pa.max(pb) - pa.min(pb)) * g.eval(t)
    };
    let rhs = C_LEN * (rule.integrate(0.0, kink, integrand) + rule.integrate(kink, PI, integrand));
    let rel_diff = (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE);
    Ok(GelfandReport { lhs, rhs, rel_diff, pass: rel_diff < GELFAND_TOL })
}
