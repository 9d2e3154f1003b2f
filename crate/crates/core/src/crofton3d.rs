//! Holmes–Thompson surface area in a 3D Minkowski space from pairs of
//! random planes.
//!
//! Planes `⟨x, ξ⟩ = r` carry the measure `f(ξ) dξ dr`, where `f` solves
//! `¼·C(f) = F` on S². Two planes meet in a line, and
//!
//! ```text
//! area(M) = C₃ ∫∫ #(M ∩ H₁ ∩ H₂) f(ξ₁) f(ξ₂) dξ₁ dr₁ dξ₂ dr₂,   C₃ = 1/(8π).
//! ```
//!
//! For the Euclidean norm `f ≡ 2/π`, and `C₃` makes the right side the
//! Euclidean area.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::htarea2d::{dual_ball_area, Polygon};
use crate::lines::mesh::mesh_line_crossings_with;
use crate::lines::{cross, dot3, intersect_planes, Plane3D, TriMesh};
use crate::mc::{self, McEstimate, McOptions};
use crate::norms::MinkowskiNorm;
use crate::sphere::{invert_cosine_s2, EvenSphericalExpansion, Inversion};

/// Calibration of the plane-pair measure.
pub const C3: f64 = 1.0 / (8.0 * PI);

/// Smallest sample count accepted by [`surface_area_mc`].
pub const MIN_MC_SAMPLES: u64 = 10_000;

/// Pairs whose normals satisfy `|ξ₁ × ξ₂|` below this are discarded.
pub const PARALLEL_FLOOR: f64 = 1e-10;

/// The plane measure `f(ξ) dξ dr` on S² × ℝ.
#[derive(Debug, Clone)]
pub struct SurfaceMeasure {
    density: EvenSphericalExpansion,
}

impl SurfaceMeasure {
    pub fn new(density: EvenSphericalExpansion) -> Result<Self> {
        if density.coefficients().iter().all(|c| *c == 0.0) {
            return Err(Error::invalid("Crofton density vanishes identically"));
        }
        Ok(SurfaceMeasure { density })
    }

    pub fn euclidean() -> Self {
        SurfaceMeasure { density: EvenSphericalExpansion::constant(2.0 / PI) }
    }

    pub fn from_norm(norm: &MinkowskiNorm, lmax: usize) -> Result<(Self, Inversion<EvenSphericalExpansion>)> {
        if norm.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: norm.dim() });
        }
        let inv = invert_cosine_s2(|u| norm.value(&u), lmax)?;
        Ok((Self::new(inv.density.clone())?, inv))
    }

    pub fn density(&self) -> &EvenSphericalExpansion {
        &self.density
    }
}

fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let rho = (1.0 - z * z).max(0.0).sqrt();
    [rho * phi.cos(), rho * phi.sin(), z]
}

/// Monte Carlo surface area of `mesh`.
///
/// Each sample draws two normals uniformly on S² and two offsets uniformly
/// in a band of half-width `R` around the mesh's bounding sphere, then scores
/// `f(ξ₁) f(ξ₂)` times the number of triangles met by `H₁ ∩ H₂`.
pub fn surface_area_mc(measure: &SurfaceMeasure, mesh: &TriMesh, opts: McOptions) -> Result<McEstimate> {
    if opts.n < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_MC_SAMPLES as usize, got: opts.n as usize });
    }
    let (center, radius) = mesh.bounding_sphere();
    let band = radius * (1.0 + 1e-6);
    let scale = C3 * (4.0 * PI * 2.0 * band).powi(2);
    let lmax = measure.density.lmax();
    mc::run(opts, |rng| {
        let xi1 = uniform_sphere(rng);
        let xi2 = uniform_sphere(rng);
        let r1 = dot3(center, xi1) + band * (2.0 * rng.random::<f64>() - 1.0);
        let r2 = dot3(center, xi2) + band * (2.0 * rng.random::<f64>() - 1.0);
        let d = cross(xi1, xi2);
        if dot3(d, d).sqrt() < PARALLEL_FLOOR {
            return 0.0;
        }
        let h1 = Plane3D { normal: xi1, r: r1 };
        let h2 = Plane3D { normal: xi2, r: r2 };
        let Ok(line) = intersect_planes(&h1, &h2) else {
            return 0.0;
        };
        if line.distance(center) > radius {
            return 0.0;
        }
        let mut scratch = Vec::new();
        let count = mesh_line_crossings_with(mesh, &line, &mut scratch);
        if count == 0 {
            return 0.0;
        }
        let mut y = vec![0.0; (lmax + 1) * (lmax + 1)];
        let f1 = measure.density.eval_with(xi1, &mut y);
        let f2 = measure.density.eval_with(xi2, &mut y);
        scale * count as f64 * f1 * f2
    })
}

/// An orthonormal basis `(e₁, e₂)` of the plane with unit normal `n`; `e₁`
/// comes from the coordinate axis least aligned with `n`.
pub fn canonical_frame(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let k = (0..3).min_by(|&i, &j| n[i].abs().total_cmp(&n[j].abs())).expect("three axes");
    let mut axis = [0.0; 3];
    axis[k] = 1.0;
    let t = dot3(axis, n);
    let v = [axis[0] - t * n[0], axis[1] - t * n[1], axis[2] - t * n[2]];
    let l = dot3(v, v).sqrt();
    let e1 = [v[0] / l, v[1] / l, v[2] / l];
    (e1, cross(n, e1))
}

/// HT area of a flat polygon: `Leb(region)·|B*_P|/π`, with `B*_P` the dual
/// ball of the norm restricted to the plane.
pub fn flat_patch_oracle(norm: &MinkowskiNorm, plane: &Plane3D, region: &Polygon) -> Result<f64> {
    let (e1, e2) = canonical_frame(plane.normal);
    flat_patch_oracle_in_frame(norm, e1, e2, region)
}

/// As [`flat_patch_oracle`], with the polygon given in the frame `(e₁, e₂)`.
pub fn flat_patch_oracle_in_frame(norm: &MinkowskiNorm, e1: [f64; 3], e2: [f64; 3], region: &Polygon) -> Result<f64> {
    let restricted = norm.restrict_to_plane(e1, e2)?;
    Ok(region.area() * dual_ball_area(&restricted)? / PI)
}
