//! Holmes–Thompson area of planar regions.
//!
//! Pairs of lines drawn from `g(θ) dθ dr ⊗ g(θ′) dθ′ dr′` push forward under
//! `(l, l′) ↦ l ∩ l′` to `κ·dx`, since `dr dr′ = |sin(θ − θ′)| dx`. With
//! `C_cal = 1/(2π)` chosen so that `κ = 1` for `g ≡ 1`,
//!
//! ```text
//! κ = C_cal ∫₀^π ∫₀^π g(θ) g(θ′) |sin(θ − θ′)| dθ dθ′,
//! ```
//!
//! and the HT area of `U` is `κ·Leb(U)`, which equals `Leb(U)·|B*|/π` with
//! `B*` the dual unit ball.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lines::{bounding_disk, read_numeric_csv};
use crate::mc::{self, McEstimate, McOptions};
use crate::norms::MinkowskiNorm;
use crate::quad::adaptive_gl;
use crate::sphere::{invert_cosine_s1, s1_multipliers, EvenFourierSeries, Inversion};

/// Calibration making the Euclidean pair density equal to Lebesgue measure.
pub const C_CAL: f64 = 1.0 / (2.0 * PI);

/// Pairs with `|sin(θ − θ′)|` below this are discarded.
pub const PARALLEL_FLOOR: f64 = 1e-10;

/// Cells of the tabulated `|g|` used as the angle proposal.
pub const PROPOSAL_CELLS: usize = 4096;

/// Smallest sample count accepted by the Monte Carlo estimators.
pub const MIN_MC_SAMPLES: u64 = 1000;

/// A simple polygon, stored without a repeated closing vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
}

fn touches(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    orient(a, b, c) == 0.0 && on_segment(a, b, c)
}

fn segments_meet(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    touches(a, b, c) || touches(a, b, d) || touches(c, d, a) || touches(c, d, b)
}

impl Polygon {
    /// Validates that the polygon has at least three vertices, finite
    /// coordinates and no self-intersections.
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::invalid("polygon needs at least three vertices"));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("polygon coordinates must be finite"));
        }
        let n = vertices.len();
        let edge = |i: usize| (vertices[i], vertices[(i + 1) % n]);
        for i in 0..n {
            let (a, b) = edge(i);
            if a == b {
                return Err(Error::invalid(format!("polygon edge {i} has zero length")));
            }
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (c, d) = edge(j);
                if adjacent {
                    // Neighbours share a vertex; they may not fold back onto each other.
                    let folds = if j == i + 1 {
                        touches(a, b, d) || touches(c, d, a)
                    } else {
                        touches(a, b, c) || touches(c, d, b)
                    };
                    if folds {
                        return Err(Error::SelfIntersecting { first: i, second: j });
                    }
                    continue;
                }
                if segments_meet(a, b, c, d) {
                    return Err(Error::SelfIntersecting { first: i, second: j });
                }
            }
        }
        Ok(Polygon { vertices })
    }

    /// Reads rows `x,y`; a repeated closing vertex is dropped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let rows = read_numeric_csv(path)?;
        let verts = rows
            .into_iter()
            .map(|r| match r.as_slice() {
                [x, y] => Ok([*x, *y]),
                _ => Err(Error::Parse(format!("{}: polygon rows must be x,y", path.display()))),
            })
            .collect::<Result<_>>()?;
        Self::new(verts)
    }

    /// Axis-parallel square with lower-left corner `lo`.
    pub fn square(lo: [f64; 2], side: f64) -> Result<Self> {
        Self::new(vec![lo, [lo[0] + side, lo[1]], [lo[0] + side, lo[1] + side], [lo[0], lo[1] + side]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Lebesgue area by the shoelace formula.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let o = self.vertices[0];
        let twice: f64 = (1..n - 1).map(|i| orient(o, self.vertices[i], self.vertices[i + 1])).sum();
        0.5 * twice.abs()
    }

    /// Even–odd point-in-polygon test.
    pub fn contains(&self, z: [f64; 2]) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[j]);
            if (a[1] > z[1]) != (b[1] > z[1]) {
                let x = a[0] + (z[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if z[0] < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    pub fn translated(&self, c: [f64; 2]) -> Self {
        Polygon { vertices: self.vertices.iter().map(|v| [v[0] + c[0], v[1] + c[1]]).collect() }
    }
}

/// `κ` from the Fourier coefficients of `g`, using the cosine-transform
/// eigenvalues: the inner integral is `½·C(g)(θ − π/2)`.
pub fn kappa_from_density(g: &EvenFourierSeries) -> f64 {
    let lam = s1_multipliers(g.order());
    let mut sum = 0.5 * lam[0] * PI * g.a0 * g.a0;
    for (k, ((a, b), l)) in g.a.iter().zip(&g.b).zip(&lam[1..]).enumerate() {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += 0.5 * sign * l * 0.5 * PI * (a * a + b * b);
    }
    C_CAL * sum
}

/// Area of the dual unit ball, `½∫₀^{2π} F*(cos φ, sin φ)^{−2} dφ`.
pub fn dual_ball_area(norm: &MinkowskiNorm) -> Result<f64> {
    if norm.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: norm.dim() });
    }
    let failed = std::cell::Cell::new(None);
    let f = |phi: f64| match norm.dual_evaluate(&[phi.cos(), phi.sin()]) {
        Ok(d) => 1.0 / (d * d),
        Err(e) => {
            failed.set(Some(e.to_string()));
            0.0
        }
    };
    // By symmetry the full turn is twice the half turn. F* may have kinks
    // anywhere, so the rule bisects toward them.
    let area = adaptive_gl(f, 0.0, PI, 1e-13);
    match failed.take() {
        Some(msg) => Err(Error::invalid(format!("dual norm evaluation failed: {msg}"))),
        None => Ok(area),
    }
}

/// The line-pair measure `C_cal·g ⊗ g`.
#[derive(Debug, Clone)]
pub struct HTAreaMeasure {
    density: EvenFourierSeries,
    kappa: f64,
}

impl HTAreaMeasure {
    pub fn new(density: EvenFourierSeries) -> Self {
        let kappa = kappa_from_density(&density);
        HTAreaMeasure { density, kappa }
    }

    pub fn euclidean() -> Self {
        Self::new(EvenFourierSeries::constant(1.0))
    }

    pub fn from_norm(norm: &MinkowskiNorm, order: usize) -> Result<(Self, Inversion<EvenFourierSeries>)> {
        if norm.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: norm.dim() });
        }
        let inv = invert_cosine_s1(|t| norm.on_circle(t), order)?;
        Ok((Self::new(inv.density.clone()), inv))
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn density(&self) -> &EvenFourierSeries {
        &self.density
    }
}

/// `κ·Leb(U)` for a region given as disjoint simple polygons.
pub fn ht_area_exact(measure: &HTAreaMeasure, region: &[Polygon]) -> f64 {
    measure.kappa * region.iter().map(Polygon::area).sum::<f64>()
}

/// Draws line pairs covering a disk and reports their intersection point
/// with its importance weight.
struct PairSampler<'a> {
    g: &'a EvenFourierSeries,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
    center: [f64; 2],
    band: f64,
}

impl<'a> PairSampler<'a> {
    fn new(g: &'a EvenFourierSeries, center: [f64; 2], radius: f64) -> Result<Self> {
        let h = PI / PROPOSAL_CELLS as f64;
        let raw: Vec<f64> = (0..PROPOSAL_CELLS).map(|i| g.eval((i as f64 + 0.5) * h).abs()).collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        if !(mean > 0.0) {
            return Err(Error::invalid("Crofton density vanishes identically"));
        }
        let floor = 1e-3 * mean;
        let cells: Vec<f64> = raw.iter().map(|v| v.max(floor)).collect();
        let total: f64 = cells.iter().sum::<f64>() * h;
        let pdf: Vec<f64> = cells.iter().map(|v| v / total).collect();
        let mut cdf = Vec::with_capacity(PROPOSAL_CELLS);
        let mut acc = 0.0;
        for v in &pdf {
            acc += v * h;
            cdf.push(acc);
        }
        Ok(PairSampler { g, cdf, pdf, center, band: radius * (1.0 + 1e-6) })
    }

    fn angle(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let u: f64 = rng.random::<f64>() * self.cdf[PROPOSAL_CELLS - 1];
        let i = self.cdf.partition_point(|&c| c <= u).min(PROPOSAL_CELLS - 1);
        let h = PI / PROPOSAL_CELLS as f64;
        let theta = (i as f64 + rng.random::<f64>()) * h;
        (theta, self.pdf[i])
    }

    /// A line pair, or `None` for near-parallel pairs.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Option<Draw> {
        let (t1, q1) = self.angle(rng);
        let (t2, q2) = self.angle(rng);
        let u1 = 2.0 * rng.random::<f64>() - 1.0;
        let u2 = 2.0 * rng.random::<f64>() - 1.0;
        let (s1, c1) = t1.sin_cos();
        let (s2, c2) = t2.sin_cos();
        let r1 = self.center[0] * c1 + self.center[1] * s1 + u1 * self.band;
        let r2 = self.center[0] * c2 + self.center[1] * s2 + u2 * self.band;
        let det = c1 * s2 - s1 * c2;
        if det.abs() < PARALLEL_FLOOR {
            return None;
        }
        let point = [(r1 * s2 - r2 * s1) / det, (c1 * r2 - c2 * r1) / det];
        let scale = C_CAL * (2.0 * self.band).powi(2) / (q1 * q2);
        Some(Draw { point, scale, angles: (t1, t2) })
    }

    /// Importance weight of a pair; evaluated only for scoring pairs.
    fn weight(&self, d: &Draw) -> f64 {
        d.scale * self.g.eval(d.angles.0) * self.g.eval(d.angles.1)
    }
}

struct Draw {
    point: [f64; 2],
    scale: f64,
    angles: (f64, f64),
}

fn check_samples(opts: &McOptions) -> Result<()> {
    if opts.n < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_MC_SAMPLES as usize, got: opts.n as usize });
    }
    Ok(())
}

/// Monte Carlo HT area: line pairs are drawn with angles from a tabulated
/// `|g|`, offsets uniform over a band covering the region, and each pair
/// scores its signed weight when `l ∩ l′` falls inside the region.
pub fn ht_area_mc(measure: &HTAreaMeasure, region: &[Polygon], opts: McOptions) -> Result<McEstimate> {
    check_samples(&opts)?;
    if region.is_empty() {
        return Err(Error::invalid("region has no polygons"));
    }
    let pts: Vec<[f64; 2]> = region.iter().flat_map(|p| p.vertices().iter().copied()).collect();
    let (center, radius) = bounding_disk(&pts);
    let sampler = PairSampler::new(&measure.density, center, radius)?;
    mc::run(opts, |rng| match sampler.sample(rng) {
        Some(d) if region.iter().any(|p| p.contains(d.point)) => sampler.weight(&d),
        _ => 0.0,
    })
}

/// Monte Carlo HT area of each cell of a `k × k` grid on the square
/// `[lo, lo + side]²`, from one shared stream of line pairs.
pub fn ht_cell_areas_mc(
    measure: &HTAreaMeasure,
    lo: [f64; 2],
    side: f64,
    k: usize,
    opts: McOptions,
) -> Result<Vec<McEstimate>> {
    check_samples(&opts)?;
    if k == 0 || !(side > 0.0) {
        return Err(Error::invalid("grid needs k ≥ 1 and a positive side"));
    }
    let half = 0.5 * side;
    let center = [lo[0] + half, lo[1] + half];
    let sampler = PairSampler::new(&measure.density, center, half * 2f64.sqrt())?;
    let cell = side / k as f64;
    let moments = mc::run_multi(opts, k * k, |rng, out| {
        if let Some(d) = sampler.sample(rng) {
            let i = ((d.point[0] - lo[0]) / cell).floor();
            let j = ((d.point[1] - lo[1]) / cell).floor();
            if i >= 0.0 && j >= 0.0 && (i as usize) < k && (j as usize) < k {
                out[j as usize * k + i as usize] = sampler.weight(&d);
            }
        }
    })?;
    Ok(moments.into_iter().map(|m| mc::estimate(m, opts)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::square([0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn shoelace_and_containment() {
        let sq = unit_square();
        assert_eq!(sq.area(), 1.0);
        assert!(sq.contains([0.5, 0.5]) && !sq.contains([1.5, 0.5]));
        let tri = Polygon::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(tri.vertices().len(), 3);
        assert_eq!(tri.area(), 1.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let err = Polygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::SelfIntersecting { first: 0, second: 2 }));
        assert!(Polygon::new(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn euclidean_kappa_is_one() {
        assert!((HTAreaMeasure::euclidean().kappa() - 1.0).abs() < 1e-14);
        assert!((ht_area_exact(&HTAreaMeasure::euclidean(), &[unit_square()]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dual_ball_examples() {
        let e = MinkowskiNorm::euclidean(2).unwrap();
        assert!((dual_ball_area(&e).unwrap() - PI).abs() < 1e-12);
        let a = nalgebra::DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]);
        let ell = MinkowskiNorm::quadratic(a).unwrap();
        assert!((dual_ball_area(&ell).unwrap() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn additivity_over_disjoint_squares() {
        let m = HTAreaMeasure::from_norm(&MinkowskiNorm::p_norm(3.0, 2).unwrap(), 256).unwrap().0;
        let one = ht_area_exact(&m, &[unit_square()]);
        let two = ht_area_exact(&m, &[unit_square(), unit_square().translated([3.0, 0.5])]);
        assert_eq!(two, 2.0 * one);
    }

    #[test]
    fn euclidean_mc_square() {
        let est = ht_area_mc(&HTAreaMeasure::euclidean(), &[unit_square()], McOptions::new(100_000, 5)).unwrap();
        assert!((est.value - 1.0).abs() < 3.0 * est.stderr, "{est:?}");
    }
}
