use std::collections::hash_map::RandomState;
use std::f64::consts::PI;
use std::hash::{BuildHasher, Hasher};

use crofton_core::crofton2d::{crofton_length_mc, crofton_length_polyline, CroftonMeasure2D};
use crofton_core::crofton3d::{canonical_frame, surface_area_mc, SurfaceMeasure};
use crofton_core::geodesics::{hessian_identity_check, verify_shortest_path};
use crofton_core::htarea2d::{dual_ball_area, ht_area_exact, ht_area_mc, HTAreaMeasure, Polygon};
use crofton_core::lines::{Polyline, TriMesh};
use crofton_core::sphere::{invert_cosine_s1, invert_cosine_s2, CroftonDensity};
use crofton_core::symplectic2d::{crofton_via_psymp, PSympDensity};
use crofton_core::{McEstimate, McOptions, MinkowskiNorm};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Command, Method, RunConfig};
use crate::CliError;

const DEFAULT_ORDER_2D: usize = 1024;
const DEFAULT_ORDER_3D: usize = 16;
const DEFAULT_MC_SAMPLES: u64 = 1_000_000;
const DEFAULT_AXIOM_SAMPLES: u64 = 1000;
const DEFAULT_PERTURBATIONS: u64 = 100;
const HESSIAN_SAMPLES: usize = 200;
/// Relative vertex offset below which a mesh counts as planar.
const PLANAR_TOL: f64 = 1e-9;

pub fn run(cfg: &RunConfig) -> Result<Value, CliError> {
    match cfg.command {
        Command::NormCheck => norm_check(cfg),
        Command::CroftonDensity => crofton_density(cfg),
        Command::Length => length(cfg),
        Command::SymplecticDensity => symplectic_density(cfg),
        Command::HtArea => ht_area(cfg),
        Command::Surface3d => surface3d(cfg),
        Command::GeodesicCheck => geodesic_check(cfg),
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::runtime(e.to_string()))
}

fn norm(cfg: &RunConfig) -> Result<MinkowskiNorm, CliError> {
    Ok(MinkowskiNorm::from_spec(cfg.norm_spec()?, cfg.opts.dim)?)
}

fn seed(cfg: &RunConfig) -> u64 {
    cfg.opts.seed.unwrap_or_else(|| RandomState::new().build_hasher().finish())
}

fn mc_options(cfg: &RunConfig) -> McOptions {
    let opts = McOptions::new(cfg.opts.n.unwrap_or(DEFAULT_MC_SAMPLES), seed(cfg));
    match cfg.opts.workers {
        Some(w) => opts.with_workers(w),
        None => opts,
    }
}

fn norm_check(cfg: &RunConfig) -> Result<Value, CliError> {
    let n = cfg.opts.n.unwrap_or(DEFAULT_AXIOM_SAMPLES) as usize;
    #[derive(Serialize)]
    struct Report {
        norm: String,
        dim: usize,
        seed: u64,
        #[serde(flatten)]
        axioms: crofton_core::norms::AxiomReport,
    }
    let f = norm(cfg)?;
    let seed = seed(cfg);
    let axioms = f.check_axioms(n, seed);
    to_value(&Report { norm: cfg.norm_spec()?.to_string(), dim: f.dim(), seed, axioms })
}

fn crofton_density(cfg: &RunConfig) -> Result<Value, CliError> {
    #[derive(Serialize)]
    struct Report {
        #[serde(flatten)]
        record: crofton_core::sphere::DensityRecord,
        /// Sup-norm of `¼·C(g) − F`.
        round_trip_residual: f64,
        tail_energy_ratio: f64,
        tail_warning: bool,
    }
    let f = norm(cfg)?;
    let report = if f.dim() == 2 {
        let inv = invert_cosine_s1(|t| f.on_circle(t), cfg.opts.order.unwrap_or(64))?;
        Report {
            record: CroftonDensity::S1(inv.density).to_record(),
            round_trip_residual: inv.sup_error,
            tail_energy_ratio: inv.tail_energy_ratio,
            tail_warning: inv.tail_warning,
        }
    } else {
        let inv = invert_cosine_s2(|u| f.value(&u), cfg.opts.order.unwrap_or(DEFAULT_ORDER_3D))?;
        Report {
            record: CroftonDensity::S2(inv.density).to_record(),
            round_trip_residual: inv.sup_error,
            tail_energy_ratio: inv.tail_energy_ratio,
            tail_warning: inv.tail_warning,
        }
    };
    to_value(&report)
}

#[derive(Serialize)]
struct Estimate {
    method: &'static str,
    value: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    mc: Option<McFields>,
}

#[derive(Serialize)]
struct McFields {
    stderr: f64,
    n: u64,
    seed: u64,
}

impl From<McEstimate> for Estimate {
    fn from(e: McEstimate) -> Self {
        Estimate { method: "mc", value: e.value, mc: Some(McFields { stderr: e.stderr, n: e.n, seed: e.seed }) }
    }
}

fn length(cfg: &RunConfig) -> Result<Value, CliError> {
    let poly = Polyline::from_csv(cfg.require(&cfg.opts.input, "input")?)?;
    let f = norm(cfg)?;
    let order = cfg.opts.order.unwrap_or(DEFAULT_ORDER_2D);
    let est = match cfg.opts.method.unwrap_or(Method::Exact) {
        Method::Exact => {
            let m = CroftonMeasure2D::from_norm(&f, order)?.0;
            Estimate { method: "exact", value: crofton_length_polyline(&m, &poly), mc: None }
        }
        Method::Mc => {
            let m = CroftonMeasure2D::from_norm(&f, order)?.0;
            crofton_length_mc(&m, &poly, mc_options(cfg))?.into()
        }
        Method::Symplectic => {
            let p = f.exponent().ok_or_else(|| CliError::validation("--method symplectic needs a p-norm"))?;
            let value = poly.segments().map(|(a, b)| crofton_via_psymp(p, a, b)).sum::<Result<f64, _>>()?;
            Estimate { method: "symplectic", value, mc: None }
        }
    };
    to_value(&est)
}

fn symplectic_density(cfg: &RunConfig) -> Result<Value, CliError> {
    #[derive(Serialize)]
    struct Report {
        p: f64,
        theta: f64,
        omega: f64,
        density: f64,
    }
    let p = *cfg.require(&cfg.opts.p, "p")?;
    let theta = *cfg.require(&cfg.opts.theta, "theta")?;
    let d = PSympDensity::new(p)?;
    to_value(&Report { p, theta, omega: d.omega(theta), density: d.value(theta)? })
}

fn ht_area(cfg: &RunConfig) -> Result<Value, CliError> {
    #[derive(Serialize)]
    struct Report {
        kappa: f64,
        lebesgue: f64,
        ht_area: f64,
        /// `Leb·|B*|/π`.
        oracle_dual_ball: f64,
        rel_err: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        mc: Option<Estimate>,
    }
    if cfg.opts.polygon.is_empty() {
        return Err(CliError::validation("--polygon is required for this command"));
    }
    let region: Vec<Polygon> = cfg.opts.polygon.iter().map(|p| Polygon::from_csv(p)).collect::<Result<_, _>>()?;
    let f = norm(cfg)?;
    let m = HTAreaMeasure::from_norm(&f, cfg.opts.order.unwrap_or(DEFAULT_ORDER_2D))?.0;
    let lebesgue: f64 = region.iter().map(Polygon::area).sum();
    let ht = ht_area_exact(&m, &region);
    let oracle = lebesgue * dual_ball_area(&f)? / PI;
    let mc = match cfg.opts.method {
        Some(Method::Mc) => Some(ht_area_mc(&m, &region, mc_options(cfg))?.into()),
        Some(Method::Symplectic) => return Err(CliError::validation("ht-area supports --method exact or mc")),
        _ => None,
    };
    to_value(&Report {
        kappa: m.kappa(),
        lebesgue,
        ht_area: ht,
        oracle_dual_ball: oracle,
        rel_err: (ht - oracle).abs() / oracle,
        mc,
    })
}

/// Unit normal of the mesh's plane, if every vertex lies on it.
fn mesh_plane(mesh: &TriMesh) -> Option<[f64; 3]> {
    let (_, radius) = mesh.bounding_sphere();
    let v = mesh.vertices();
    let n = mesh.triangles().iter().find_map(|t| {
        let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
        let (u, w) = ([b[0] - a[0], b[1] - a[1], b[2] - a[2]], [c[0] - a[0], c[1] - a[1], c[2] - a[2]]);
        let n = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        (len > 0.0).then(|| [n[0] / len, n[1] / len, n[2] / len])
    })?;
    let d = |x: [f64; 3]| n[0] * (x[0] - v[0][0]) + n[1] * (x[1] - v[0][1]) + n[2] * (x[2] - v[0][2]);
    v.iter().all(|&x| d(x).abs() <= PLANAR_TOL * radius).then_some(n)
}

fn surface3d(cfg: &RunConfig) -> Result<Value, CliError> {
    #[derive(Serialize)]
    struct Report {
        #[serde(flatten)]
        estimate: Estimate,
        euclidean_area: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        rel_err: Option<f64>,
    }
    let mesh = TriMesh::from_off(cfg.require(&cfg.opts.mesh, "mesh")?)?;
    let f = MinkowskiNorm::from_spec(cfg.norm_spec()?, Some(cfg.opts.dim.unwrap_or(3)))?;
    let m = SurfaceMeasure::from_norm(&f, cfg.opts.order.unwrap_or(DEFAULT_ORDER_3D))?.0;
    let est = surface_area_mc(&m, &mesh, mc_options(cfg))?;
    let oracle = match mesh_plane(&mesh) {
        Some(n) => {
            let (e1, e2) = canonical_frame(n);
            Some(mesh.area() * dual_ball_area(&f.restrict_to_plane(e1, e2)?)? / PI)
        }
        None => None,
    };
    let rel_err = oracle.map(|o| (est.value - o).abs() / o);
    to_value(&Report { estimate: est.into(), euclidean_area: mesh.area(), oracle, rel_err })
}

fn geodesic_check(cfg: &RunConfig) -> Result<Value, CliError> {
    #[derive(Serialize)]
    struct Report {
        seed: u64,
        shortest_path: crofton_core::geodesics::ShortestPathReport,
        hessian_identity: crofton_core::geodesics::HessianIdentityReport,
    }
    let f = norm(cfg)?;
    let from = cfg.require(&cfg.opts.from, "from")?;
    let to = cfg.require(&cfg.opts.to, "to")?;
    let seed = seed(cfg);
    let n = cfg.opts.n.unwrap_or(DEFAULT_PERTURBATIONS) as usize;
    let shortest_path = verify_shortest_path(&f, from, to, n, seed)?;
    let hessian_identity = hessian_identity_check(&f, HESSIAN_SAMPLES, seed);
    to_value(&Report { seed, shortest_path, hessian_identity })
}
