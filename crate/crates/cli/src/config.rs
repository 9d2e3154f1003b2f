//! Command-line flags, optional TOML config and their merge into a
//! [`RunConfig`]. Flags win over the config file.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "crofton", version, about = "Crofton densities, lengths and Holmes-Thompson areas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample the norm axioms and the Euler identity.
    NormCheck,
    /// Invert the cosine transform of the norm.
    CroftonDensity,
    /// Crofton length of a polyline (`--input`).
    Length,
    /// Closed-form p-norm symplectic density at a chart coordinate.
    SymplecticDensity,
    /// Holmes-Thompson area of polygons (`--polygon`).
    HtArea,
    /// Monte Carlo Holmes-Thompson area of a triangle mesh (`--mesh`).
    Surface3d,
    /// Chord minimality and the Hessian identity.
    GeodesicCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Quadrature of the density.
    Exact,
    /// Monte Carlo over random lines.
    Mc,
    /// Quadrature of the p-norm symplectic density (lengths only).
    Symplectic,
}

/// Every option, as given on the command line or in the config file.
#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// Norm: `p:<p>`, `quad:<upper-triangular entries>` or `custom:<csv>`.
    #[arg(long, global = true)]
    pub norm: Option<String>,
    /// Ambient dimension for `p:` norms.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Polyline CSV (x,y per row).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Polygon CSV; repeat for a union of disjoint polygons.
    #[arg(long, global = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub polygon: Vec<PathBuf>,
    /// Triangle mesh in OFF format.
    #[arg(long, global = true)]
    pub mesh: Option<PathBuf>,
    /// Truncation order of the density (Fourier order or spherical degree).
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Sample count (Monte Carlo draws, axiom samples or perturbations).
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Random seed; generated and reported when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<Method>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Exponent for `symplectic-density`.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Chart coordinate Θ in (0, 1) for `symplectic-density`.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Start point for `geodesic-check`, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub from: Option<Vec<f64>>,
    /// End point for `geodesic-check`, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub to: Option<Vec<f64>>,
    /// TOML file with any of the options above (kebab-case keys).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<PathBuf>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(PathBuf),
        Many(Vec<PathBuf>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(p) => vec![p],
        OneOrMany::Many(v) => v,
    })
}

impl Options {
    /// Fills every unset option from `base`.
    fn or(self, base: Options) -> Options {
        Options {
            norm: self.norm.or(base.norm),
            dim: self.dim.or(base.dim),
            input: self.input.or(base.input),
            polygon: if self.polygon.is_empty() { base.polygon } else { self.polygon },
            mesh: self.mesh.or(base.mesh),
            order: self.order.or(base.order),
            n: self.n.or(base.n),
            seed: self.seed.or(base.seed),
            workers: self.workers.or(base.workers),
            method: self.method.or(base.method),
            format: self.format.or(base.format),
            p: self.p.or(base.p),
            theta: self.theta.or(base.theta),
            from: self.from.or(base.from),
            to: self.to.or(base.to),
            config: self.config,
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub opts: Options,
    pub format: Format,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let opts = match &cli.opts.config {
            Some(path) => cli.opts.clone().or(read_config(path)?),
            None => cli.opts,
        };
        Ok(RunConfig { command: cli.command, format: opts.format.unwrap_or(Format::Json), opts })
    }

    pub fn norm_spec(&self) -> Result<&str, CliError> {
        self.opts.norm.as_deref().ok_or_else(|| CliError::validation("--norm is required"))
    }

    pub fn require<'a, T>(&self, value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| CliError::validation(format!("--{flag} is required for this command")))
    }
}

fn read_config(path: &Path) -> Result<Options, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::validation(format!("bad config {}: {e}", path.display())))
}
