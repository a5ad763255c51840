//! TOML run files.
//!
//! ```toml
//! [geometry]
//! geometry = "strip"        # or "interval"
//! nx = 64
//! ny = 64
//! lx = 1.0
//!
//! [model]
//! mode = "robin"            # or "limit"
//! k = 0.1
//! eps = 0.0
//!
//! [bulk_potential]
//! kind = "polynomial"       # or "obstacle"
//! power = 3
//! coeff = 1.0
//! pi_slope = 1.0
//!
//! [coupling]
//! kind = "affine"           # "identity", "tanh"
//! alpha = 2.0
//! eta = 0.5
//!
//! [forcing]
//! f = "zero"
//! f_gamma = { kind = "sinusoidal", amplitude = 0.1, mode = 1, decay = 0.0 }
//!
//! [initial]
//! u0 = { kind = "random_smooth", amplitude = 0.5, modes = 4, seed = 1 }
//! phi0 = "compatible"
//!
//! [run]
//! dt = 1e-4
//! t_end = 0.1
//! ```
//!
//! Profiles are `"zero"`, a path to a CSV file, or a table whose `kind` is
//! `constant`, `sinusoidal`, `random_smooth` or `csv`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::MonotoneGraph;
use crate::grid::{normal_derivative, trace, Geometry, StripGrid};
use crate::io::{read_bulk_csv, read_surface_csv};
use crate::model::{Coupling, Mode, ModelConfig, Perturbation, PotentialSplit, Profile, DEFAULT_CLIP};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub geometry: GeometrySection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub bulk_potential: PotentialSection,
    #[serde(default)]
    pub surface_potential: PotentialSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default = "strip")]
    pub geometry: Geometry,
    #[serde(default = "one")]
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "unit")]
    pub lx: f64,
}

fn strip() -> Geometry {
    Geometry::Strip
}
fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "robin")]
    pub mode: Mode,
    #[serde(default = "unit")]
    pub k: f64,
    #[serde(default)]
    pub eps: f64,
}

fn robin() -> Mode {
    Mode::Robin
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            mode: Mode::Robin,
            k: 1.0,
            eps: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphName {
    Polynomial,
    Obstacle,
    Custom,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(default = "polynomial")]
    pub kind: GraphName,
    #[serde(default = "cubic_power")]
    pub power: u32,
    #[serde(default = "unit")]
    pub coeff: f64,
    #[serde(default = "minus_one")]
    pub lower: f64,
    #[serde(default = "unit")]
    pub upper: f64,
    /// `π(s) = −pi_slope·s`, clipped at `±pi_clip`.
    #[serde(default = "unit")]
    pub pi_slope: f64,
    #[serde(default = "clip")]
    pub pi_clip: f64,
    pub pi_offset: Option<f64>,
}

fn polynomial() -> GraphName {
    GraphName::Polynomial
}
fn cubic_power() -> u32 {
    3
}
fn minus_one() -> f64 {
    -1.0
}
fn clip() -> f64 {
    DEFAULT_CLIP
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self {
            kind: GraphName::Polynomial,
            power: 3,
            coeff: 1.0,
            lower: -1.0,
            upper: 1.0,
            pi_slope: 1.0,
            pi_clip: DEFAULT_CLIP,
            pi_offset: None,
        }
    }
}

impl PotentialSection {
    pub fn build(&self) -> Result<PotentialSplit> {
        let graph = match self.kind {
            GraphName::Polynomial => MonotoneGraph::polynomial(self.power, self.coeff)?,
            GraphName::Obstacle => MonotoneGraph::obstacle(self.lower, self.upper)?,
            GraphName::Custom => {
                return Err(Error::config(
                    "custom graphs need callbacks and are only available through the library API",
                ))
            }
        };
        let pert = Perturbation::linear_with_offset(self.pi_slope, self.pi_clip, self.pi_offset)?;
        Ok(PotentialSplit::new(graph, pert))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingName {
    Identity,
    Affine,
    Tanh,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(default = "identity")]
    pub kind: CouplingName,
    #[serde(default = "unit")]
    pub alpha: f64,
    #[serde(default)]
    pub eta: f64,
}

fn identity() -> CouplingName {
    CouplingName::Identity
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self {
            kind: CouplingName::Identity,
            alpha: 1.0,
            eta: 0.0,
        }
    }
}

impl CouplingSection {
    pub fn build(&self) -> Result<Coupling> {
        match self.kind {
            CouplingName::Identity => Ok(Coupling::identity()),
            CouplingName::Affine => Coupling::affine(self.alpha, self.eta),
            CouplingName::Tanh => Coupling::tanh(self.alpha, self.eta),
        }
    }
}

/// A profile given by name, CSV path, or parameter table.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Name(String),
    Table(ProfileTable),
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Name("zero".into())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileTable {
    Zero,
    Constant {
        value: f64,
    },
    Sinusoidal {
        #[serde(default)]
        value: f64,
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
        #[serde(default)]
        decay: f64,
    },
    RandomSmooth {
        #[serde(default)]
        value: f64,
        amplitude: f64,
        #[serde(default = "four")]
        modes: u32,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
    },
}

fn one_u32() -> u32 {
    1
}
fn four() -> u32 {
    4
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Bulk,
    Surface,
}

impl ProfileSpec {
    fn build(&self, grid: &StripGrid, target: Target, base: &Path) -> Result<Profile> {
        let csv = |p: &Path| -> Result<Profile> {
            let p = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
            Ok(match target {
                Target::Bulk => Profile::BulkTable(read_bulk_csv(&p, grid)?),
                Target::Surface => Profile::SurfaceTable(read_surface_csv(&p, grid)?),
            })
        };
        match self {
            ProfileSpec::Name(n) if n == "zero" => Ok(Profile::Zero),
            ProfileSpec::Name(n) if n.ends_with(".csv") => csv(Path::new(n)),
            ProfileSpec::Name(n) => Err(Error::config(format!(
                "profile '{n}' is neither \"zero\" nor a .csv path; use a table for parameters"
            ))),
            ProfileSpec::Table(t) => match t {
                ProfileTable::Zero => Ok(Profile::Zero),
                ProfileTable::Constant { value } => Ok(Profile::Constant(*value)),
                ProfileTable::Sinusoidal {
                    value,
                    amplitude,
                    mode,
                    decay,
                } => Ok(Profile::Sinusoidal {
                    value: *value,
                    amplitude: *amplitude,
                    mode: *mode,
                    decay: *decay,
                }),
                ProfileTable::RandomSmooth {
                    value,
                    amplitude,
                    modes,
                    seed,
                } => Ok(Profile::RandomSmooth {
                    value: *value,
                    amplitude: *amplitude,
                    modes: *modes,
                    seed: *seed,
                }),
                ProfileTable::Csv { path } => csv(path),
            },
        }
    }

    fn is_compatible_marker(&self) -> bool {
        matches!(self, ProfileSpec::Name(n) if n == "compatible")
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    #[serde(default)]
    pub f: ProfileSpec,
    #[serde(default)]
    pub f_gamma: ProfileSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub u0: ProfileSpec,
    /// A profile, or `"compatible"` for `φ₀ = h⁻¹(K∂νu₀ + u₀|Γ)`.
    #[serde(default = "compatible")]
    pub phi0: ProfileSpec,
}

fn compatible() -> ProfileSpec {
    ProfileSpec::Name("compatible".into())
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            u0: ProfileSpec::default(),
            phi0: compatible(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Defaults to the suggested step of the model.
    pub dt: Option<f64>,
    #[serde(default = "t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub sample_every: usize,
}

fn t_end() -> f64 {
    0.1
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: 0.1,
            sample_every: 0,
        }
    }
}

impl RunFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Builds the model. Relative CSV paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<ModelConfig> {
        let gs = &self.geometry;
        let grid = match gs.geometry {
            Geometry::Strip => StripGrid::strip(gs.nx, gs.ny, gs.lx)?,
            Geometry::Interval => StripGrid::interval(gs.ny)?,
        };
        let mut c = ModelConfig::new(grid);
        c.mode = self.model.mode;
        c.k = self.model.k;
        c.eps = self.model.eps;
        c.bulk = self.bulk_potential.build()?;
        c.surface = self.surface_potential.build()?;
        c.coupling = self.coupling.build()?;
        c.f = self.forcing.f.build(&grid, Target::Bulk, base)?;
        c.f_gamma = self.forcing.f_gamma.build(&grid, Target::Surface, base)?;
        c.u0 = self.initial.u0.build(&grid, Target::Bulk, base)?.bulk(&grid, 0.0)?;
        c.phi0 = if self.initial.phi0.is_compatible_marker() {
            compatible_phi0(&c)?
        } else {
            self.initial.phi0.build(&grid, Target::Surface, base)?.surface(&grid, 0.0)?
        };
        c.t_end = self.run.t_end;
        c.sample_every = self.run.sample_every;
        c.dt = match self.run.dt {
            Some(dt) => dt,
            None => c.default_dt(),
        };
        Ok(c)
    }
}

/// `φ₀ = h⁻¹(K∂νu₀ + u₀|Γ)`, with `K = 0` in limit mode.
pub fn compatible_phi0(c: &ModelConfig) -> Result<crate::grid::SurfaceField> {
    let mut target = trace(&c.u0);
    if c.mode == Mode::Robin {
        let dn = normal_derivative(&c.grid, &c.u0)?;
        target = target.zip_map(&dn, |u, d| u + c.k * d);
    }
    let phi = target.map(|s| c.coupling.inverse(s).unwrap_or(f64::NAN));
    let unreachable = target.iter().zip(phi.iter()).find(|(_, p)| p.is_nan()).map(|(s, _)| *s);
    match unreachable {
        Some(s) => Err(Error::config(format!("coupling cannot reach boundary value {s}"))),
        None => Ok(phi),
    }
}

/// Parses `a:b:nlog` (n log-spaced values from a to b), `a:b:nlin`, or a
/// comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::input(format!("cannot parse value list '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let tail = parts[2].trim();
        let (n, log) = if let Some(n) = tail.strip_suffix("log") {
            (n, true)
        } else if let Some(n) = tail.strip_suffix("lin") {
            (n, false)
        } else {
            return Err(bad());
        };
        let n: usize = n.parse().map_err(|_| bad())?;
        if n < 2 || (log && (a <= 0.0 || b <= 0.0)) {
            return Err(bad());
        }
        return Ok((0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                if log {
                    (a.ln() + s * (b.ln() - a.ln())).exp()
                } else {
                    a + s * (b - a)
                }
            })
            .collect());
    }
    spec.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}
