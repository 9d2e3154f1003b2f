//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and then
//! asserts it. Runs are serialized so the wall-clock budgets measure one
//! criterion at a time.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crofton_core::crofton2d::{crofton_length_mc, crofton_length_segment, CroftonMeasure2D};
use crofton_core::crofton3d::{flat_patch_oracle, surface_area_mc, SurfaceMeasure};
use crofton_core::geodesics::{hessian_identity_check, verify_shortest_path};
use crofton_core::htarea2d::{dual_ball_area, ht_area_exact, ht_area_mc, HTAreaMeasure, Polygon};
use crofton_core::lines::{Plane3D, Polyline, TriMesh};
use crofton_core::mc::stream;
use crofton_core::sphere::{cosine_multiplier, invert_cosine_s1, Space};
use crofton_core::symplectic2d::{crofton_via_psymp, psymp_density, pullback_check, pullback_check_in};
use crofton_core::{json, McOptions, MinkowskiNorm};
use nalgebra::DMatrix;
use rand::Rng;
use statrs::function::gamma::gamma;

static SERIAL: Mutex<()> = Mutex::new(());

const PS: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 4.0];

fn report(id: u32, name: &str, pass: bool, budget: Duration, elapsed: Duration, detail: String) {
    let timed = elapsed <= budget;
    let verdict = if pass && timed { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:>2} [{name}]: {verdict} ({detail}; {:.2}s of {:.0}s)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(timed, "criterion {id} exceeded its time budget");
}

fn run(id: u32, name: &str, budget_s: f64, body: impl FnOnce() -> (bool, String)) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let (pass, detail) = body();
    report(id, name, pass, Duration::from_secs_f64(budget_s), start.elapsed(), detail);
}

fn pnorm(p: f64, dim: usize) -> MinkowskiNorm {
    MinkowskiNorm::p_norm(p, dim).unwrap()
}

fn random_points(seed: u64, n: usize) -> Vec<([f64; 2], [f64; 2])> {
    let mut rng = stream(seed, 0);
    (0..n)
        .map(|_| {
            let a = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let b = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            (a, b)
        })
        .collect()
}

#[test]
fn criterion_01_norm_axioms() {
    run(1, "norm axioms", 1.0, || {
        let mut worst: f64 = 0.0;
        for (i, &p) in PS.iter().enumerate() {
            let rep = pnorm(p, 2).check_axioms(1000, 100 + i as u64);
            worst = worst.max(rep.homogeneity_residual).max(rep.euler_residual);
        }
        (worst < 1e-8, format!("max residual {worst:.2e} < 1e-8"))
    });
}

#[test]
fn criterion_02_hessian_identity() {
    run(2, "Hessian identity", 1.0, || {
        let mut pass = true;
        let mut parts = Vec::new();
        for (i, &p) in PS.iter().enumerate() {
            let rep = hessian_identity_check(&pnorm(p, 2), 200, 200 + i as u64);
            let tol = if p >= 2.0 { 1e-5 } else { 1e-4 };
            pass &= rep.failures.is_empty() && rep.max_residual < tol;
            parts.push(format!("p={p}: {:.1e}", rep.max_residual));
        }
        (pass, parts.join(", "))
    });
}

#[test]
fn criterion_03_shortest_paths() {
    run(3, "shortest paths", 5.0, || {
        let mut worst = f64::INFINITY;
        let mut pass = true;
        for (i, &p) in PS.iter().enumerate() {
            let rep = verify_shortest_path(&pnorm(p, 2), &[0.2, -0.4], &[1.3, 0.9], 100, 300 + i as u64).unwrap();
            pass &= rep.pass;
            worst = worst.min(rep.min_margin);
        }
        (pass && worst >= -1e-10, format!("smallest margin {worst:.3e} ≥ -1e-10"))
    });
}

#[test]
fn criterion_04_cosine_round_trip_s1() {
    run(4, "S1 cosine-transform round trip", 1.0, || {
        let mut pass = true;
        let mut parts = Vec::new();
        for p in [2.0, 2.5, 3.0, 4.0] {
            let norm = pnorm(p, 2);
            let inv = invert_cosine_s1(|t| norm.on_circle(t), 64).unwrap();
            pass &= inv.sup_error < 1e-8;
            parts.push(format!("p={p}: {:.2e}", inv.sup_error));
        }
        let e = invert_cosine_s1(|_| 1.0, 64).unwrap().density;
        let dev = e.a.iter().chain(&e.b).fold((e.a0 - 1.0).abs(), |m, c| m.max(c.abs()));
        pass &= dev < 1e-10;
        parts.push(format!("Euclidean |g - 1| {dev:.1e}"));
        (pass, format!("sup errors at K=64 vs 1e-8: {}", parts.join(", ")))
    });
}

#[test]
fn criterion_05_crofton_length() {
    let mut worst_budget: f64 = 0.0;
    let mut pass = true;
    let mut parts = Vec::new();
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    for (i, p) in [2.0, 2.5, 3.0, 4.0].into_iter().enumerate() {
        let start = Instant::now();
        let norm = pnorm(p, 2);
        let measure = CroftonMeasure2D::from_norm(&norm, 1024).unwrap().0;
        let mut exact_err: f64 = 0.0;
        for (a, b) in random_points(500 + i as u64, 100) {
            let got = crofton_length_segment(&measure, a, b);
            let want = norm.evaluate(&[b[0] - a[0], b[1] - a[1]]).unwrap();
            exact_err = exact_err.max((got - want).abs());
        }
        let poly = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        let want = norm.evaluate(&[1.0, 0.0]).unwrap() + norm.evaluate(&[0.0, 1.0]).unwrap();
        let est = crofton_length_mc(&measure, &poly, McOptions::new(1_000_000, 510 + i as u64)).unwrap();
        let z = (est.value - want).abs() / est.stderr;
        let secs = start.elapsed().as_secs_f64();
        worst_budget = worst_budget.max(secs);
        pass &= exact_err < 1e-7 && z < 3.0;
        parts.push(format!("p={p}: quad {exact_err:.1e}, MC {z:.2}σ, {secs:.1}s"));
    }
    drop(_guard);
    let detail = parts.join("; ");
    let ok = pass && worst_budget <= 10.0;
    println!(
        "criterion  5 [Crofton length exactness]: {} ({detail}; budget 10s per norm)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion 5 failed: {detail}");
    assert!(worst_budget <= 10.0, "criterion 5 exceeded its time budget");
}

#[test]
fn criterion_06_symplectic_density() {
    run(6, "p-norm symplectic density", 10.0, || {
        let mut red: f64 = 0.0;
        for i in 0..1000 {
            let t = 0.01 + 0.98 * (i as f64 + 0.5) / 1000.0;
            let omega = (1.0 - t * t).sqrt();
            red = red.max((psymp_density(2.0, t).unwrap() - 1.0 / omega).abs());
        }
        let mut pull: f64 = 0.0;
        let mut pull_ok = true;
        for (i, p) in [2.0, 2.5, 3.0].into_iter().enumerate() {
            let rep = pullback_check(p, 100, 600 + i as u64).unwrap();
            pull_ok &= rep.pass;
            pull = pull.max(rep.max_rel_error);
        }
        let rep = pullback_check_in(1.5, 100, 610, (0.1, 0.9)).unwrap();
        pull_ok &= rep.pass;
        pull = pull.max(rep.max_rel_error);
        let mut crof: f64 = 0.0;
        for (i, &p) in PS.iter().enumerate() {
            let norm = pnorm(p, 2);
            for (a, b) in random_points(620 + i as u64, 20) {
                let want = norm.evaluate(&[b[0] - a[0], b[1] - a[1]]).unwrap();
                crof = crof.max((crofton_via_psymp(p, a, b).unwrap() - want).abs());
            }
        }
        (
            red < 1e-12 && pull_ok && pull < 1e-4 && crof < 1e-5,
            format!("p=2 reduction {red:.1e} < 1e-12, pullback {pull:.1e} < 1e-4, Crofton {crof:.1e} < 1e-5"),
        )
    });
}

#[test]
fn criterion_07_ht_area() {
    run(7, "HT area oracle agreement", 60.0, || {
        // Closed-form dual balls: the unit q-ball has area 4Γ(1+1/q)²/Γ(1+2/q),
        // and the dual of the (2,1)-ellipse has semi-axes ½ and 1.
        let q_ball = |p: f64| {
            let q = p / (p - 1.0);
            4.0 * gamma(1.0 + 1.0 / q).powi(2) / gamma(1.0 + 2.0 / q)
        };
        let mut norms: Vec<(MinkowskiNorm, f64)> =
            [2.0, 2.5, 3.0, 4.0].into_iter().map(|p| (pnorm(p, 2), q_ball(p))).collect();
        let ellipse = MinkowskiNorm::quadratic(DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0])).unwrap();
        norms.push((ellipse, PI / 2.0));
        let mut gap: f64 = 0.0;
        let mut closed_gap: f64 = 0.0;
        for (norm, closed) in &norms {
            let m = HTAreaMeasure::from_norm(norm, 1024).unwrap().0;
            gap = gap.max((m.kappa() - dual_ball_area(norm).unwrap() / PI).abs());
            closed_gap = closed_gap.max((m.kappa() - closed / PI).abs());
        }
        let euclid = (HTAreaMeasure::euclidean().kappa() - 1.0).abs();
        let sq = Polygon::square([0.0, 0.0], 1.0).unwrap();
        let m3 = HTAreaMeasure::from_norm(&pnorm(3.0, 2), 1024).unwrap().0;
        let exact = ht_area_exact(&m3, std::slice::from_ref(&sq));
        let est = ht_area_mc(&m3, std::slice::from_ref(&sq), McOptions::new(1_000_000, 700)).unwrap();
        let z = (est.value - exact).abs() / est.stderr;
        (
            gap < 1e-6 && closed_gap < 1e-6 && euclid < 1e-10 && z < 3.0,
            format!("|κ - |B*|/π| {gap:.1e} < 1e-6 (closed form {closed_gap:.1e}), Euclidean {euclid:.1e}, MC {:.5} vs {exact:.5} ({z:.2}σ)", est.value),
        )
    });
}

#[test]
fn criterion_08_s2_multipliers() {
    run(8, "S2 Funk-Hecke multipliers", 1.0, || {
        let want = [(0, 2.0 * PI), (2, PI / 2.0), (4, -PI / 12.0)];
        let err = want.iter().map(|&(l, v)| (cosine_multiplier(Space::S2, l).unwrap() - v).abs()).fold(0.0, f64::max);
        (err < 1e-10, format!("max error {err:.1e} < 1e-10"))
    });
}

#[test]
fn criterion_09_surface_area() {
    run(9, "3D surface Crofton", 120.0, || {
        let e = SurfaceMeasure::euclidean();
        let disk = surface_area_mc(&e, &TriMesh::disk(16, 128), McOptions::new(1_000_000, 900)).unwrap();
        let sphere = surface_area_mc(&e, &TriMesh::icosphere(4), McOptions::new(1_000_000, 901)).unwrap();
        let rel_disk = (disk.value - PI).abs() / PI;
        let rel_sphere = (sphere.value - 4.0 * PI).abs() / (4.0 * PI);
        let p3 = pnorm(3.0, 3);
        let m3 = SurfaceMeasure::from_norm(&p3, 16).unwrap().0;
        let sq = TriMesh::square(1.0, 4);
        let est = surface_area_mc(&m3, &sq, McOptions::new(1_000_000, 902)).unwrap();
        let oracle = flat_patch_oracle(
            &p3,
            &Plane3D::new([0.0, 0.0, 1.0], 0.0).unwrap(),
            &Polygon::square([0.0, 0.0], 1.0).unwrap(),
        )
        .unwrap();
        let z = (est.value - oracle).abs() / est.stderr;
        (
            rel_disk < 0.02 && rel_sphere < 0.02 && z < 3.0,
            format!(
                "disk {:.4} ({:.2}%), sphere {:.4} ({:.2}%), p=3 square {:.5} vs {oracle:.5} ({z:.2}σ)",
                disk.value,
                100.0 * rel_disk,
                sphere.value,
                100.0 * rel_sphere,
                est.value
            ),
        )
    });
}

#[test]
fn criterion_10_determinism() {
    run(10, "determinism across workers", 120.0, || {
        let outputs = |w: usize| -> Vec<String> {
            let opts = |seed: u64, n: u64| McOptions::new(n, seed).with_workers(w);
            let m2 = CroftonMeasure2D::from_norm(&pnorm(3.0, 2), 256).unwrap().0;
            let poly = Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
            let ht = HTAreaMeasure::from_norm(&pnorm(3.0, 2), 256).unwrap().0;
            let sq = Polygon::square([0.0, 0.0], 1.0).unwrap();
            let s3 = SurfaceMeasure::from_norm(&pnorm(3.0, 3), 8).unwrap().0;
            vec![
                json::to_string(&crofton_length_mc(&m2, &poly, opts(1, 100_000)).unwrap()).unwrap(),
                json::to_string(&ht_area_mc(&ht, &[sq], opts(2, 100_000)).unwrap()).unwrap(),
                json::to_string(&surface_area_mc(&s3, &TriMesh::icosphere(2), opts(3, 100_000)).unwrap()).unwrap(),
                json::to_string(&verify_shortest_path(&pnorm(3.0, 2), &[0.0, 0.0], &[1.0, 2.0], 20, 4).unwrap())
                    .unwrap(),
            ]
        };
        let one = outputs(1);
        let eight = outputs(8);
        let same = one == eight;
        (same, format!("{} outputs byte-identical for 1 and 8 workers: {same}", one.len()))
    });
}
