//! Affine lines in the plane, planes and lines in space, and the crossing
//! predicates used by every Crofton estimator.
//!
//! A planar line is `{ z : ⟨z, (cos θ, sin θ)⟩ = r }`. Lines are unoriented:
//! the canonical form keeps `θ ∈ [0, π)` and flips the sign of `r`.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::MinkowskiNorm;

pub mod mesh;

pub use mesh::{mesh_line_crossings, TriMesh};

/// Minimum chart coordinate accepted by [`PNormLineParam`].
pub const CHART_MARGIN: f64 = 1e-10;

/// Reads a headerless (or single-header) CSV of numbers.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("{}, row {}: {e}", path.display(), i + 1))),
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line2D {
    pub theta: f64,
    pub r: f64,
}

impl Line2D {
    pub fn new(theta: f64, r: f64) -> Self {
        Line2D { theta, r }
    }

    /// The line through `a` and `b`.
    pub fn through(a: [f64; 2], b: [f64; 2]) -> Result<Self> {
        let d = [b[0] - a[0], b[1] - a[1]];
        if d == [0.0, 0.0] {
            return Err(Error::invalid("points must differ"));
        }
        let theta = (-d[0]).atan2(d[1]);
        let (s, c) = theta.sin_cos();
        Ok(canonicalize(Line2D { theta, r: a[0] * c + a[1] * s }))
    }

    pub fn normal(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [c, s]
    }

    /// Signed offset of `z` from the line along the normal.
    pub fn side(&self, z: [f64; 2]) -> f64 {
        let n = self.normal();
        z[0] * n[0] + z[1] * n[1] - self.r
    }
}

/// Maps `(θ, r)` to the representative with `θ ∈ [0, π)`.
pub fn canonicalize(line: Line2D) -> Line2D {
    let mut theta = line.theta.rem_euclid(2.0 * PI);
    if theta >= 2.0 * PI {
        theta = 0.0;
    }
    let mut r = line.r;
    if theta >= PI {
        theta -= PI;
        r = -r;
    }
    Line2D { theta, r: r + 0.0 }
}

/// Segments whose projected extent is below this fraction of their length
/// count as parallel to the line.
pub const PARALLEL_SLOPE: f64 = 1e-15;

/// 1 if the segment `[a, b]` meets the line, with the half-open rule
/// `min ≤ r < max` on the projections; 0 for parallel segments.
pub fn segment_crossings(a: [f64; 2], b: [f64; 2], line: &Line2D) -> u32 {
    let (s, c) = line.theta.sin_cos();
    let pa = a[0] * c + a[1] * s;
    let pb = b[0] * c + b[1] * s;
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    crossing_from_projections(pa, pb, line.r, len)
}

#[inline]
pub(crate) fn crossing_from_projections(pa: f64, pb: f64, r: f64, len: f64) -> u32 {
    if (pa - pb).abs() <= PARALLEL_SLOPE * len {
        return 0;
    }
    let (lo, hi) = if pa < pb { (pa, pb) } else { (pb, pa) };
    (lo <= r && r < hi) as u32
}

/// An open polygonal chain in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<[f64; 2]>,
}

impl Polyline {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("polyline needs at least one vertex"));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("polyline coordinates must be finite"));
        }
        Ok(Polyline { vertices })
    }

    /// Reads rows `x,y`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let rows = read_numeric_csv(path)?;
        let verts = rows
            .into_iter()
            .map(|r| match r.as_slice() {
                [x, y] => Ok([*x, *y]),
                _ => Err(Error::Parse(format!("{}: polyline rows must be x,y", path.display()))),
            })
            .collect::<Result<_>>()?;
        Self::new(verts)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Number of crossings with a line (sum over segments).
    pub fn crossings(&self, line: &Line2D) -> u32 {
        let (s, c) = line.theta.sin_cos();
        let proj: Vec<f64> = self.vertices.iter().map(|v| v[0] * c + v[1] * s).collect();
        proj.windows(2)
            .zip(self.vertices.windows(2))
            .map(|(w, v)| {
                let len = (v[1][0] - v[0][0]).hypot(v[1][1] - v[0][1]);
                crossing_from_projections(w[0], w[1], line.r, len)
            })
            .sum()
    }

    /// Midpoint of the bounding box and the largest vertex distance from it.
    pub fn bounding_disk(&self) -> ([f64; 2], f64) {
        bounding_disk(&self.vertices)
    }
}

pub(crate) fn bounding_disk(pts: &[[f64; 2]]) -> ([f64; 2], f64) {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let r = pts.iter().map(|p| (p[0] - c[0]).hypot(p[1] - c[1])).fold(0.0, f64::max);
    (c, r)
}

/// Line coordinates adapted to the `p`-norm: the line is tangent to the
/// `p`-sphere of radius `r ≥ 0` at `r·u`, where `u = (σ₁Θ, σ₂Ω)` is a unit
/// vector with `Θ^p + Ω^p = 1`, and its equation is `⟨z, ∇F(u)⟩ = r` with
/// `∇F(u) = (σ₁Θ^{p−1}, σ₂Ω^{p−1})`.
///
/// `quadrant` numbers the sign pattern of `u`: 1 = (+,+), 2 = (−,+),
/// 3 = (−,−), 4 = (+,−).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PNormLineParam {
    pub p: f64,
    pub theta: f64,
    pub omega: f64,
    pub quadrant: u8,
    pub r: f64,
}

fn quadrant_signs(q: u8) -> (f64, f64) {
    match q {
        1 => (1.0, 1.0),
        2 => (-1.0, 1.0),
        3 => (-1.0, -1.0),
        _ => (1.0, -1.0),
    }
}

impl PNormLineParam {
    /// Builds the chart point for `(p, Θ, quadrant, r)`.
    pub fn new(p: f64, theta: f64, quadrant: u8, r: f64) -> Result<Self> {
        if !(1..=4).contains(&quadrant) {
            return Err(Error::invalid(format!("quadrant must be 1..4, got {quadrant}")));
        }
        let omega = (1.0 - theta.powf(p)).max(0.0).powf(1.0 / p);
        if !(theta > CHART_MARGIN && omega > CHART_MARGIN) {
            return Err(Error::ChartBoundary { theta, omega });
        }
        Ok(PNormLineParam { p, theta, omega, quadrant, r })
    }

    /// Chart coordinates of an arbitrary planar line.
    pub fn from_line(p: f64, line: &Line2D) -> Result<Self> {
        let q = p / (p - 1.0);
        let line = canonicalize(*line);
        let nu = line.normal();
        let dual = (nu[0].abs().powf(q) + nu[1].abs().powf(q)).powf(1.0 / q);
        let mut nu_p = [nu[0] / dual, nu[1] / dual];
        let mut r = line.r / dual;
        if r < 0.0 {
            nu_p = [-nu_p[0], -nu_p[1]];
            r = -r;
        }
        // u = ∇F*(ν_p); since F*(ν_p) = 1 this is |ν_p|^{q−1} componentwise.
        let theta = nu_p[0].abs().powf(q - 1.0);
        let omega = nu_p[1].abs().powf(q - 1.0);
        if !(theta > CHART_MARGIN && omega > CHART_MARGIN) {
            return Err(Error::ChartBoundary { theta, omega });
        }
        let quadrant = match (nu_p[0] >= 0.0, nu_p[1] >= 0.0) {
            (true, true) => 1,
            (false, true) => 2,
            (false, false) => 3,
            (true, false) => 4,
        };
        Ok(PNormLineParam { p, theta, omega, quadrant, r })
    }

    /// The covector `∇F(u)`; the line is `⟨z, normal⟩ = r`.
    pub fn normal(&self) -> [f64; 2] {
        let (s1, s2) = quadrant_signs(self.quadrant);
        [s1 * self.theta.powf(self.p - 1.0), s2 * self.omega.powf(self.p - 1.0)]
    }

    /// The point where the line touches the `p`-sphere of radius `r`.
    pub fn tangency_point(&self) -> [f64; 2] {
        let (s1, s2) = quadrant_signs(self.quadrant);
        [self.r * s1 * self.theta, self.r * s2 * self.omega]
    }

    /// `⟨x, ∇F(u)⟩`, equal to `r` for every `x` on the line.
    pub fn distance_at(&self, x: [f64; 2]) -> f64 {
        let n = self.normal();
        x[0] * n[0] + x[1] * n[1]
    }

    pub fn to_line(&self) -> Line2D {
        let n = self.normal();
        let len = n[0].hypot(n[1]);
        canonicalize(Line2D { theta: n[1].atan2(n[0]), r: self.r / len })
    }
}

/// Converts a line to `p`-norm chart coordinates and back; returns the chart
/// point, the reconstructed line and the largest coordinate error.
pub fn pnorm_param_roundtrip(p: f64, line: &Line2D) -> Result<(PNormLineParam, Line2D, f64)> {
    let param = PNormLineParam::from_line(p, line)?;
    let back = param.to_line();
    let canon = canonicalize(*line);
    let dtheta = (back.theta - canon.theta).abs();
    // θ near 0 and near π describe nearly the same line with opposite r.
    let err = if dtheta > PI / 2.0 {
        (PI - dtheta).max((back.r + canon.r).abs())
    } else {
        dtheta.max((back.r - canon.r).abs())
    };
    Ok((param, back, err))
}

/// Image of a line under the map `(x, ξ̄) ↦ (ξ̄, x − dF(ξ̄)(x)·ξ̄)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiImage {
    pub xi_bar: Vec<f64>,
    pub eta_bar: Vec<f64>,
    /// `dF(ξ̄)(η̄)`, zero up to rounding.
    pub tangency_residual: f64,
}

/// Sends the line through `x` with `F`-unit direction `xi` to the pair
/// `(ξ̄, η̄)`, where `η̄` is the point of the line at which `dF(ξ̄)` vanishes.
pub fn psi_map(norm: &MinkowskiNorm, x: &[f64], xi: &[f64]) -> Result<PsiImage> {
    let f = norm.evaluate(xi)?;
    if (f - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit { value: f });
    }
    if x.len() != xi.len() {
        return Err(Error::DimensionMismatch { expected: xi.len(), found: x.len() });
    }
    let g = norm.gradient(xi)?;
    let dfx: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
    let eta: Vec<f64> = x.iter().zip(xi).map(|(a, b)| a - dfx * b).collect();
    let tangency_residual = g.iter().zip(&eta).map(|(a, b)| a * b).sum();
    Ok(PsiImage { xi_bar: xi.to_vec(), eta_bar: eta, tangency_residual })
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// The plane `{ x : ⟨x, normal⟩ = r }` with a Euclidean unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plane3D {
    pub normal: [f64; 3],
    pub r: f64,
}

impl Plane3D {
    /// The plane `⟨x, n⟩ = c`; `n` need not be unit length.
    pub fn new(n: [f64; 3], c: f64) -> Result<Self> {
        let len = norm3(n);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::UndefinedDirection);
        }
        Ok(Plane3D { normal: [n[0] / len, n[1] / len, n[2] / len], r: c / len })
    }

    pub fn residual(&self, x: [f64; 3]) -> f64 {
        dot3(x, self.normal) - self.r
    }
}

/// The line `{ point + t·direction }` with a Euclidean unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line3D {
    pub point: [f64; 3],
    pub direction: [f64; 3],
}

impl Line3D {
    pub fn new(point: [f64; 3], direction: [f64; 3]) -> Result<Self> {
        let len = norm3(direction);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::UndefinedDirection);
        }
        Ok(Line3D { point, direction: [direction[0] / len, direction[1] / len, direction[2] / len] })
    }

    pub fn at(&self, t: f64) -> [f64; 3] {
        [
            self.point[0] + t * self.direction[0],
            self.point[1] + t * self.direction[1],
            self.point[2] + t * self.direction[2],
        ]
    }

    /// Euclidean distance from `x` to the line.
    pub fn distance(&self, x: [f64; 3]) -> f64 {
        let d = [x[0] - self.point[0], x[1] - self.point[1], x[2] - self.point[2]];
        norm3(cross(d, self.direction))
    }
}

/// Smallest `|n₁ × n₂|` for which two planes are treated as transversal.
pub const PARALLEL_TOL: f64 = 1e-10;

/// The line `H₁ ∩ H₂`, through the point of the intersection nearest the
/// origin.
pub fn intersect_planes(h1: &Plane3D, h2: &Plane3D) -> Result<Line3D> {
    let d = cross(h1.normal, h2.normal);
    let dd = dot3(d, d);
    if !(dd.sqrt() > PARALLEL_TOL) {
        return Err(Error::DegenerateIntersection);
    }
    let a = cross(h2.normal, d);
    let b = cross(d, h1.normal);
    let point = [(h1.r * a[0] + h2.r * b[0]) / dd, (h1.r * a[1] + h2.r * b[1]) / dd, (h1.r * a[2] + h2.r * b[2]) / dd];
    Line3D::new(point, d)
}
