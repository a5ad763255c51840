//! Convergence studies: K-sweeps against the limit problem, Yosida
//! parameter sweeps, continuous-dependence scaling and log-log rate fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{trace, BulkField, GridNorms, StripGrid, SurfaceField};
use crate::limit::LimitSolver;
use crate::model::{Mode, ModelConfig, Profile};
use crate::robin::RobinSolver;
use crate::trajectory::Sample;

/// Space-time error norms of a difference trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// `max_t ‖e‖_{L²(Ω)} + (∫‖e‖²_{H¹(Ω)} dt)^{1/2}`.
    pub x_omega: f64,
    /// The same on `Γ`.
    pub x_gamma: f64,
    /// `(∫‖αφ + η − u|Γ‖²_{L²(Γ)} dt)^{1/2}`; for sweeps without a mismatch
    /// it holds the `L²(Σ)` norm of the trace difference.
    pub boundary_mismatch: f64,
}

/// Streams difference fields sample by sample. Time integrals use the
/// trapezoid rule over the pushed sample times.
#[derive(Clone, Debug)]
pub struct ErrorAccumulator {
    grid: StripGrid,
    max_u: f64,
    max_phi: f64,
    int_u: f64,
    int_phi: f64,
    int_mismatch: f64,
    last: Option<(f64, [f64; 3])>,
}

impl ErrorAccumulator {
    pub fn new(grid: &StripGrid) -> Self {
        Self {
            grid: *grid,
            max_u: 0.0,
            max_phi: 0.0,
            int_u: 0.0,
            int_phi: 0.0,
            int_mismatch: 0.0,
            last: None,
        }
    }

    pub fn push(&mut self, t: f64, du: &BulkField, dphi: &SurfaceField, mismatch: &SurfaceField) {
        let g = &self.grid;
        let (lu, lp) = (du.l2_squared(g), dphi.l2_squared(g));
        self.max_u = self.max_u.max(lu.sqrt());
        self.max_phi = self.max_phi.max(lp.sqrt());
        let now = [
            lu + du.h1_seminorm_squared(g),
            lp + dphi.h1_seminorm_squared(g),
            mismatch.l2_squared(g),
        ];
        if let Some((t0, prev)) = self.last {
            let w = 0.5 * (t - t0);
            self.int_u += w * (prev[0] + now[0]);
            self.int_phi += w * (prev[1] + now[1]);
            self.int_mismatch += w * (prev[2] + now[2]);
        }
        self.last = Some((t, now));
    }

    pub fn finish(&self) -> ErrorNorms {
        ErrorNorms {
            x_omega: self.max_u + self.int_u.sqrt(),
            x_gamma: self.max_phi + self.int_phi.sqrt(),
            boundary_mismatch: self.int_mismatch.sqrt(),
        }
    }
}

/// Least-squares line through `(ln p, ln e)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Rows dropped because their error was zero or not finite.
    pub excluded: usize,
    /// Set when all parameters coincide; the slope is then reported as 0.
    pub degenerate: bool,
}

pub fn fit_rate(params: &[f64], errors: &[f64]) -> Result<RateFit> {
    if params.len() != errors.len() {
        return Err(Error::input("params and errors differ in length"));
    }
    let pts: Vec<(f64, f64)> = params
        .iter()
        .zip(errors)
        .filter(|(p, e)| **p > 0.0 && **e > 0.0 && p.is_finite() && e.is_finite())
        .map(|(p, e)| (p.ln(), e.ln()))
        .collect();
    let excluded = params.len() - pts.len();
    if pts.len() < 3 {
        return Err(Error::Fit(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-300 {
        return Ok(RateFit {
            slope: 0.0,
            intercept: my,
            r2: 0.0,
            excluded,
            degenerate: true,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= 1e-300 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept,
        r2,
        excluded,
        degenerate: false,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub param: f64,
    /// `Err` holds the failure message of a run that did not finish.
    pub norms: std::result::Result<ErrorNorms, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FittedSlopes {
    pub x_omega: Option<RateFit>,
    pub x_gamma: Option<RateFit>,
    pub boundary_mismatch: Option<RateFit>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
    pub fits: FittedSlopes,
}

impl ConvergenceTable {
    fn from_rows(rows: Vec<TableRow>) -> Self {
        let ok: Vec<(f64, ErrorNorms)> = rows
            .iter()
            .filter_map(|r| r.norms.as_ref().ok().map(|n| (r.param, *n)))
            .collect();
        let params: Vec<f64> = ok.iter().map(|r| r.0).collect();
        let column = |f: fn(&ErrorNorms) -> f64| {
            let e: Vec<f64> = ok.iter().map(|r| f(&r.1)).collect();
            fit_rate(&params, &e).ok()
        };
        let fits = FittedSlopes {
            x_omega: column(|n| n.x_omega),
            x_gamma: column(|n| n.x_gamma),
            boundary_mismatch: column(|n| n.boundary_mismatch),
        };
        Self { rows, fits }
    }

    pub fn failures(&self) -> impl Iterator<Item = (&f64, &String)> {
        self.rows
            .iter()
            .filter_map(|r| r.norms.as_ref().err().map(|e| (&r.param, e)))
    }
}

/// `K ∈ {10^{-1}, 10^{-1.5}, …, 10^{-4}}`.
pub fn default_ks() -> Vec<f64> {
    (0..7).map(|i| 10f64.powf(-1.0 - 0.5 * i as f64)).collect()
}

/// Sets `φ₀ = (u₀|Γ − η)/α` so the data are compatible for every `K`
/// (when `∂νu₀ = 0`).
pub fn make_compatible(config: &ModelConfig) -> Result<ModelConfig> {
    let (alpha, eta) = match config.coupling.affine_params() {
        Some(p) if p.0 != 0.0 => p,
        _ => return Err(Error::config("compatible data need an affine coupling with alpha != 0")),
    };
    let mut c = config.clone();
    c.phi0 = trace(&c.u0).map(|s| (s - eta) / alpha);
    Ok(c)
}

type Fields = (BulkField, SurfaceField);

fn record(config: &ModelConfig) -> Result<Vec<Fields>> {
    let mut out = Vec::with_capacity(config.steps() + 1);
    let keep = |s: &Sample, out: &mut Vec<Fields>| out.push((s.u.clone(), s.phi.clone()));
    match config.mode {
        Mode::Robin => {
            RobinSolver::new(config.clone())?.run_with_observer(false, |s, _| keep(s, &mut out))?;
        }
        Mode::Limit => {
            LimitSolver::new(config.clone())?.run_with_observer(false, |s, _| keep(s, &mut out))?;
        }
    }
    Ok(out)
}

/// Runs `config` and accumulates errors against `reference` (one entry per
/// time level). `mismatch` maps a sample to the surface field whose `L²(Σ)`
/// norm is reported as the boundary mismatch.
fn compare(
    config: &ModelConfig,
    reference: &[Fields],
    mismatch: &(dyn Fn(&Sample, &Fields) -> SurfaceField + Sync),
) -> Result<ErrorNorms> {
    let mut acc = ErrorAccumulator::new(&config.grid);
    let mut idx = 0usize;
    let mut observe = |s: &Sample| {
        if let Some(r) = reference.get(idx) {
            acc.push(s.t, &s.u.sub(&r.0), &s.phi.sub(&r.1), &mismatch(s, r));
        }
        idx += 1;
    };
    match config.mode {
        Mode::Robin => {
            RobinSolver::new(config.clone())?.run_with_observer(false, |s, _| observe(s))?;
        }
        Mode::Limit => {
            LimitSolver::new(config.clone())?.run_with_observer(false, |s, _| observe(s))?;
        }
    }
    if idx != reference.len() {
        return Err(Error::input("reference and run have different lengths"));
    }
    Ok(acc.finish())
}

/// Robin runs at each `K` against one limit run on the same grid and step.
/// The base configuration must carry an affine coupling; its mode is
/// ignored. Failed runs appear as rows with an error message.
pub fn sweep_k(base: &ModelConfig, ks: &[f64]) -> Result<ConvergenceTable> {
    let (alpha, eta) = base
        .coupling
        .affine_params()
        .ok_or_else(|| Error::config("K sweep requires an affine coupling"))?;
    if let Some(k) = ks.iter().find(|k| !(**k > 0.0)) {
        return Err(Error::input(format!("K values must be positive, got {k}")));
    }
    let mut limit = base.clone();
    limit.mode = Mode::Limit;
    let reference = record(&limit)?;
    let mismatch = move |s: &Sample, _: &Fields| {
        trace(&s.u).zip_map(&s.phi, |u, p| alpha * p + eta - u)
    };
    let rows = ks
        .par_iter()
        .map(|&k| {
            let mut c = base.clone();
            c.mode = Mode::Robin;
            c.k = k;
            TableRow {
                param: k,
                norms: compare(&c, &reference, &mismatch).map_err(|e| e.to_string()),
            }
        })
        .collect();
    Ok(ConvergenceTable::from_rows(rows))
}

/// Runs at each Yosida parameter against the `eps = 0` run in the base
/// mode. The mismatch column holds the `L²(Σ)` trace difference.
pub fn sweep_eps(base: &ModelConfig, epss: &[f64]) -> Result<ConvergenceTable> {
    if let Some(e) = epss.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::input(format!("eps values must be nonnegative, got {e}")));
    }
    let mut exact = base.clone();
    exact.eps = 0.0;
    let reference = record(&exact)?;
    let mismatch = |s: &Sample, r: &Fields| trace(&s.u).sub(&trace(&r.0));
    let rows = epss
        .par_iter()
        .map(|&eps| {
            let mut c = base.clone();
            c.eps = eps;
            TableRow {
                param: eps,
                norms: compare(&c, &reference, &mismatch).map_err(|e| e.to_string()),
            }
        })
        .collect();
    Ok(ConvergenceTable::from_rows(rows))
}

/// Datum perturbed in a continuous-dependence study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Datum {
    U0,
    Phi0,
    F,
    FGamma,
}

impl std::str::FromStr for Datum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u0" => Ok(Datum::U0),
            "phi0" => Ok(Datum::Phi0),
            "f" => Ok(Datum::F),
            "fGamma" | "f_gamma" | "fgamma" => Ok(Datum::FGamma),
            _ => Err(Error::input(format!("unknown datum '{s}'"))),
        }
    }
}

impl std::fmt::Display for Datum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Datum::U0 => "u0",
            Datum::Phi0 => "phi0",
            Datum::F => "f",
            Datum::FGamma => "fGamma",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtsDepRow {
    pub delta: f64,
    /// `‖u_δ − u‖_{𝕏_Ω} + ‖φ_δ − φ‖_{𝕏_Γ}`.
    pub diff: f64,
    /// `diff/δ`; `None` for `δ = 0`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CtsDepReport {
    pub which: Datum,
    pub rows: Vec<CtsDepRow>,
    /// `max ratio / min ratio` over the rows with `δ > 0`.
    pub spread: f64,
}

/// Smooth perturbation direction with unit `L²` norm on the datum's domain.
pub fn unit_profile(grid: &StripGrid, which: Datum) -> Result<Profile> {
    let p = Profile::RandomSmooth {
        value: 0.0,
        amplitude: 1.0,
        modes: 3,
        seed: 0xC0FFEE,
    };
    let norm = match which {
        Datum::U0 | Datum::F => p.bulk(grid, 0.0)?.l2_squared(grid).sqrt(),
        Datum::Phi0 | Datum::FGamma => p.surface(grid, 0.0)?.l2_squared(grid).sqrt(),
    };
    Ok(match p {
        Profile::RandomSmooth {
            value, modes, seed, ..
        } => Profile::RandomSmooth {
            value,
            amplitude: 1.0 / norm,
            modes,
            seed,
        },
        other => other,
    })
}

fn perturb(base: &ModelConfig, which: Datum, dir: &Profile, delta: f64) -> Result<ModelConfig> {
    let mut c = base.clone();
    let g = c.grid;
    match which {
        Datum::U0 => c.u0.values += &(delta * &dir.bulk(&g, 0.0)?.values),
        Datum::Phi0 => {
            let d = dir.surface(&g, 0.0)?;
            c.phi0 = c.phi0.zip_map(&d, |p, q| p + delta * q);
        }
        Datum::F => {
            let d = dir.bulk(&g, 0.0)?.map(|v| delta * v);
            c.f = c.f.plus(Profile::BulkTable(d));
        }
        Datum::FGamma => {
            let d = dir.surface(&g, 0.0)?.map(|v| delta * v);
            c.f_gamma = c.f_gamma.plus(Profile::SurfaceTable(d));
        }
    }
    Ok(c)
}

/// Perturbs one datum by `δ·p` with a fixed unit profile `p` and reports
/// the solution difference per unit `δ`, in the mode of `base`.
pub fn ctsdep(base: &ModelConfig, deltas: &[f64], which: Datum) -> Result<CtsDepReport> {
    if let Some(d) = deltas.iter().find(|d| !(**d >= 0.0)) {
        return Err(Error::input(format!("deltas must be nonnegative, got {d}")));
    }
    let reference = record(base)?;
    let dir = unit_profile(&base.grid, which)?;
    let zero = |s: &Sample, _: &Fields| s.phi.map(|_| 0.0);
    let rows: Vec<CtsDepRow> = deltas
        .par_iter()
        .map(|&delta| {
            let c = perturb(base, which, &dir, delta)?;
            let n = compare(&c, &reference, &zero)?;
            let diff = n.x_omega + n.x_gamma;
            Ok(CtsDepRow {
                delta,
                diff,
                ratio: (delta > 0.0).then(|| diff / delta),
            })
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let spread = if ratios.is_empty() {
        f64::NAN
    } else {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    };
    Ok(CtsDepReport { which, rows, spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_rate_on_exact_powers() {
        let ks = default_ks();
        let e1: Vec<f64> = ks.clone();
        let f = fit_rate(&ks, &e1).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let e2: Vec<f64> = ks.iter().map(|k| k.sqrt()).collect();
        assert!((fit_rate(&ks, &e2).unwrap().slope - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_rate_synthetic_oracle() {
        let ks: Vec<f64> = (0..7).map(|i| 10f64.powf(-1.0 - 0.5 * i as f64)).collect();
        let e: Vec<f64> = ks.iter().map(|k| 3.0 * k + 0.01 * k * k).collect();
        // closed-form least squares on the same points
        let xs: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
        let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
        let n = xs.len() as f64;
        let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let oracle = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let f = fit_rate(&ks, &e).unwrap();
        assert!((f.slope - oracle).abs() < 1e-10);
        assert!((0.98..=1.02).contains(&f.slope));
    }

    #[test]
    fn fit_rate_edge_cases() {
        let f = fit_rate(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]).unwrap();
        assert!(f.degenerate && f.slope == 0.0);
        let f = fit_rate(&[1.0, 0.1, 0.01, 0.001], &[1.0, 0.0, 0.01, 0.001]).unwrap();
        assert_eq!(f.excluded, 1);
        assert!(matches!(fit_rate(&[1.0, 0.1, 0.01], &[1.0, 0.0, 0.0]), Err(Error::Fit(1))));
    }

    #[test]
    fn accumulator_of_zero_difference_is_zero() {
        let g = StripGrid::strip(4, 5, 1.0).unwrap();
        let mut acc = ErrorAccumulator::new(&g);
        for n in 0..4 {
            acc.push(n as f64 * 0.1, &BulkField::zeros(&g), &SurfaceField::zeros(&g), &SurfaceField::zeros(&g));
        }
        assert_eq!(acc.finish(), ErrorNorms::default());
    }

    #[test]
    fn accumulator_constant_difference() {
        // e ≡ 1 on Ω of measure 1 for t ∈ [0, 1]: max L² = 1, ∫‖e‖²_{H¹} = 1
        let g = StripGrid::strip(4, 5, 1.0).unwrap();
        let mut acc = ErrorAccumulator::new(&g);
        for n in 0..=10 {
            acc.push(
                n as f64 * 0.1,
                &BulkField::constant(&g, 1.0),
                &SurfaceField::constant(&g, 1.0),
                &SurfaceField::constant(&g, 2.0),
            );
        }
        let e = acc.finish();
        assert!((e.x_omega - 2.0).abs() < 1e-12);
        // Γ has measure 2
        assert!((e.x_gamma - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((e.boundary_mismatch - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn datum_names_round_trip() {
        for d in [Datum::U0, Datum::Phi0, Datum::F, Datum::FGamma] {
            assert_eq!(d.to_string().parse::<Datum>().unwrap(), d);
        }
    }

    #[test]
    fn unit_profile_has_unit_norm() {
        let g = StripGrid::strip(16, 9, 2.0).unwrap();
        let p = unit_profile(&g, Datum::U0).unwrap();
        assert!((p.bulk(&g, 0.0).unwrap().l2_squared(&g).sqrt() - 1.0).abs() < 1e-12);
        let p = unit_profile(&g, Datum::FGamma).unwrap();
        assert!((p.surface(&g, 0.0).unwrap().l2_squared(&g).sqrt() - 1.0).abs() < 1e-12);
    }
}
