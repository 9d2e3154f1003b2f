//! Monte Carlo behaviour: error scaling, spatial uniformity, refinement.

use std::f64::consts::PI;

use crofton_core::crofton2d::{crofton_length_mc, crofton_length_polyline, CroftonMeasure2D};
use crofton_core::crofton3d::{surface_area_mc, SurfaceMeasure};
use crofton_core::htarea2d::{ht_cell_areas_mc, HTAreaMeasure};
use crofton_core::lines::{Polyline, TriMesh};
use crofton_core::{McOptions, MinkowskiNorm};

#[test]
fn stderr_shrinks_by_root_two() {
    let m = CroftonMeasure2D::from_norm(&MinkowskiNorm::p_norm(3.0, 2).unwrap(), 256).unwrap().0;
    let poly = Polyline::new(vec![[0.0, 0.0], [1.0, 0.3], [0.4, 1.0]]).unwrap();
    let (mut small, mut large) = (0.0, 0.0);
    for seed in 0..20 {
        small += crofton_length_mc(&m, &poly, McOptions::new(20_000, seed)).unwrap().stderr;
        large += crofton_length_mc(&m, &poly, McOptions::new(40_000, 100 + seed)).unwrap().stderr;
    }
    let ratio = small / large;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn polyline_estimate_matches_segment_sum() {
    let m = CroftonMeasure2D::from_norm(&MinkowskiNorm::p_norm(2.5, 2).unwrap(), 256).unwrap().0;
    let poly = Polyline::new(vec![[0.0, 0.0], [2.0, 0.5], [1.5, 2.0], [-0.5, 1.0]]).unwrap();
    let exact = crofton_length_polyline(&m, &poly);
    let est = crofton_length_mc(&m, &poly, McOptions::new(200_000, 17)).unwrap();
    assert!((est.value - exact).abs() < 3.0 * est.stderr, "{est:?} vs {exact}");
}

#[test]
fn intersection_density_is_uniform() {
    let m = HTAreaMeasure::from_norm(&MinkowskiNorm::p_norm(3.0, 2).unwrap(), 256).unwrap().0;
    let side = 1.0;
    let k = 10;
    let cells = ht_cell_areas_mc(&m, [-0.5, -0.5], side, k, McOptions::new(1_000_000, 23)).unwrap();
    let expect = m.kappa() * (side / k as f64).powi(2);
    for (i, c) in cells.iter().enumerate() {
        assert!((c.value - expect).abs() < 4.0 * c.stderr, "cell {i}: {c:?} vs {expect}");
    }
}

#[test]
fn sphere_refinement_is_stable() {
    // Shared seeds reuse the same plane pairs, so the difference between
    // meshes is dominated by the change in geometry.
    let e = SurfaceMeasure::euclidean();
    let (coarse, fine) = (TriMesh::icosphere(2), TriMesh::icosphere(3));
    let opts = McOptions::new(200_000, 31);
    let a = surface_area_mc(&e, &coarse, opts).unwrap();
    let b = surface_area_mc(&e, &fine, opts).unwrap();
    let geometric = (4.0 * PI - coarse.area()).abs();
    let sigma = a.stderr.hypot(b.stderr);
    assert!((a.value - b.value).abs() < sigma + geometric, "{a:?} vs {b:?}, geometric {geometric}");
}
