use std::f64::consts::PI;

use crofton_core::geodesics::{path_length, verify_shortest_path, ParamPath};
use crofton_core::MinkowskiNorm;
use proptest::prelude::*;

fn off_axis() -> impl Strategy<Value = [f64; 2]> {
    (0.05f64..PI / 2.0 - 0.05, 0.1f64..5.0, 0usize..4).prop_map(|(t, s, q)| {
        let a = t + q as f64 * PI / 2.0;
        [s * a.cos(), s * a.sin()]
    })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(2.5), Just(3.0), Just(4.0), 1.2f64..6.0]
}

/// Brute-force `sup ⟨ξ,u⟩ / F(u)` over a fine grid of the circle, refined
/// once around the best node.
fn dual_by_search(norm: &MinkowskiNorm, xi: [f64; 2]) -> f64 {
    let ratio = |t: f64| {
        let u = [t.cos(), t.sin()];
        (xi[0] * u[0] + xi[1] * u[1]) / norm.value(&u)
    };
    let n = 20_000;
    let step = 2.0 * PI / n as f64;
    let best = (0..n).map(|i| i as f64 * step).max_by(|a, b| ratio(*a).total_cmp(&ratio(*b))).unwrap();
    (0..=2000).map(|i| ratio(best - step + i as f64 * step / 1000.0)).fold(f64::MIN, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn absolutely_homogeneous(p in exponent(), v in off_axis(), lambda in -50.0f64..50.0) {
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let f = norm.evaluate(&v).unwrap();
        let scaled = norm.evaluate(&[lambda * v[0], lambda * v[1]]).unwrap();
        prop_assert!((scaled - lambda.abs() * f).abs() < 1e-10 * f * lambda.abs().max(1.0));
    }

    #[test]
    fn euler_identity(p in exponent(), v in off_axis()) {
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let g = norm.gradient(&v).unwrap();
        let f = norm.evaluate(&v).unwrap();
        prop_assert!((g[0] * v[0] + g[1] * v[1] - f).abs() < 1e-8 * f.max(1.0));
    }

    #[test]
    fn differential_is_dual_unit(p in exponent(), v in off_axis()) {
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let g = norm.gradient(&v).unwrap();
        prop_assert!((norm.dual_evaluate(&g).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hessian_of_square(p in 2.0f64..5.0, v in off_axis()) {
        // ½·Hess(F²) = F·Hess(F) + ∇F∇Fᵀ, with the left side by central differences.
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let f = norm.evaluate(&v).unwrap();
        let g = norm.gradient(&v).unwrap();
        let h = norm.hessian(&v).unwrap();
        let step = 1e-5 * f;
        for j in 0..2 {
            let mut vp = v;
            let mut vm = v;
            vp[j] += step;
            vm[j] -= step;
            let (gp, gm) = (norm.gradient(&vp).unwrap(), norm.gradient(&vm).unwrap());
            let (fp, fm) = (norm.value(&vp), norm.value(&vm));
            for i in 0..2 {
                let lhs = (fp * gp[i] - fm * gm[i]) / (2.0 * step);
                let rhs = f * h[(i, j)] + g[i] * g[j];
                prop_assert!((lhs - rhs).abs() < 1e-5 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dual_matches_search(p in exponent(), xi in off_axis()) {
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let q = p / (p - 1.0);
        let closed = (xi[0].abs().powf(q) + xi[1].abs().powf(q)).powf(1.0 / q);
        prop_assert!((norm.dual_evaluate(&xi).unwrap() - closed).abs() < 1e-9 * closed);
        prop_assert!((dual_by_search(&norm, xi) - closed).abs() < 1e-7 * closed);
    }

    #[test]
    fn quadratic_dual_matches_search(a in 0.2f64..3.0, b in -0.5f64..0.5, c in 0.2f64..3.0, xi in off_axis()) {
        prop_assume!(a * c - b * b > 0.05);
        let m = nalgebra::DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
        let norm = MinkowskiNorm::quadratic(m).unwrap();
        let d = norm.dual_evaluate(&xi).unwrap();
        prop_assert!((dual_by_search(&norm, xi) - d).abs() < 1e-7 * d);
    }

    #[test]
    fn length_ignores_grid_resolution(p in exponent(), a in off_axis(), b in off_axis()) {
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let seg = |t: f64| vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        let coarse = path_length(&norm, &ParamPath::from_fn(0.0, 1.0, 50, seg).unwrap()).unwrap();
        let fine = path_length(&norm, &ParamPath::from_fn(0.0, 1.0, 99, seg).unwrap()).unwrap();
        prop_assert!((coarse - fine).abs() < 1e-9);
    }

    #[test]
    fn length_ignores_affine_time_change(p in exponent(), s in 0.1f64..10.0, t0 in -5.0f64..5.0) {
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let curve = |u: f64| vec![u.cos() + 0.3 * u, (2.0 * u).sin()];
        let base = ParamPath::from_fn(0.0, 1.0, 400, curve).unwrap();
        let moved = ParamPath::from_fn(t0, t0 + s, 400, |t| curve((t - t0) / s)).unwrap();
        let (l0, l1) = (path_length(&norm, &base).unwrap(), path_length(&norm, &moved).unwrap());
        prop_assert!((l0 - l1).abs() < 1e-9 * l0);
    }

    #[test]
    fn length_translation_invariant(p in exponent(), c in off_axis()) {
        // Dyadic samples and offsets keep every difference exact.
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let q = |x: f64| (x * 1024.0).round() / 1024.0;
        let path = ParamPath::from_fn(0.0, 1.0, 64, |t| vec![q(t * t), q((3.0 * t).sin())]).unwrap();
        let shifted = path.translated(&[q(c[0]), q(c[1])]);
        prop_assert_eq!(path_length(&norm, &path).unwrap(), path_length(&norm, &shifted).unwrap());
    }

    #[test]
    fn chords_are_shortest(p in exponent(), a in off_axis(), b in off_axis(), seed in any::<u64>()) {
        prop_assume!((a[0] - b[0]).hypot(a[1] - b[1]) > 1e-3);
        let norm = MinkowskiNorm::p_norm(p, 2).unwrap();
        let rep = verify_shortest_path(&norm, &a, &b, 100, seed).unwrap();
        prop_assert!(rep.min_margin >= -1e-10, "{rep:?}");
    }
}
