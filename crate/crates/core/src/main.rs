use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use bsac::config::{parse_values, RunFile};
use bsac::grid::{norms, Norms};
use bsac::harness::{ctsdep, sweep_eps, sweep_k, Datum};
use bsac::io::{
    write_bulk_csv, write_ctsdep_csv, write_energy_csv, write_surface_csv, write_table_csv, write_toml, Check,
    FitFile, Summary,
};
use bsac::model::{Mode, ModelConfig};
use bsac::robin::{run, stationary_residual, steady_state};

#[derive(Parser)]
#[command(name = "bsac", version, about = "Bulk-surface Allen-Cahn solver and convergence harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration to its final time.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the mode of the configuration.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Robin runs over K against the limit problem, with rate fits.
    SweepK {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "1e-1:1e-4:7log")]
        ks: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Yosida parameter sweep against the unregularized run.
    SweepEps {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "1e-1:1e-4:4log")]
        eps: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Continuous-dependence scaling for one datum.
    Ctsdep {
        #[arg(long)]
        config: PathBuf,
        /// One of u0, phi0, f, fGamma.
        #[arg(long)]
        which: String,
        #[arg(long, default_value = "1e-1,1e-2,1e-3")]
        deltas: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time-step until the increment drops below the tolerance.
    Steady {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path) -> Result<ModelConfig> {
    load_as(path, None)
}

fn load_as(path: &Path, mode: Option<Mode>) -> Result<ModelConfig> {
    let mut file = RunFile::load(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(m) = mode {
        file.model.mode = m;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(file.build(base)?)
}

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn check(name: &str, value: f64, threshold: &str, pass: bool) -> Check {
    eprintln!("{} {name} = {value:.4} ({threshold})", if pass { "PASS" } else { "FAIL" });
    Check {
        name: name.into(),
        value,
        threshold: threshold.into(),
        pass,
    }
}

fn cmd_run(config: &Path, out: &Path, mode: Option<String>) -> Result<bool> {
    let mode = mode.map(|m| m.parse::<Mode>()).transpose()?;
    let cfg = load_as(config, mode)?;
    prepare(out)?;
    eprintln!(
        "mode {:?}, grid {}x{}, dt {:e}, T {}, {} steps",
        cfg.mode,
        cfg.grid.nx(),
        cfg.grid.ny(),
        cfg.dt,
        cfg.t_end,
        cfg.steps()
    );
    let traj = run(&cfg)?;
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }
    write_energy_csv(&out.join("energy.csv"), &traj.energy)?;
    for s in &traj.samples {
        let name = format!("fields_t{:.6}.csv", s.t);
        match cfg.mode {
            Mode::Robin => {
                write_bulk_csv(&out.join(&name), &s.u, None)?;
                write_surface_csv(&out.join(format!("surface_t{:.6}.csv", s.t)), &cfg.grid, &s.phi)?;
            }
            Mode::Limit => write_bulk_csv(&out.join(&name), &s.u, Some(&s.phi))?,
        }
    }
    let last = traj.last().context("run produced no samples")?;
    let (nu, np): (Norms, Norms) = (norms(&cfg.grid, &last.u), norms(&cfg.grid, &last.phi));
    let summary = Summary {
        mode: format!("{:?}", cfg.mode).to_lowercase(),
        steps: last.step,
        t_final: last.t,
        dt: cfg.dt,
        energy_initial: traj.energy.first().map(|r| r.energy),
        energy_final: traj.energy.last().map(|r| r.energy),
        u_l2: nu.l2,
        u_h1_seminorm: nu.h1_seminorm,
        u_linf: nu.linf,
        phi_l2: np.l2,
        phi_h1_seminorm: np.h1_seminorm,
        phi_linf: np.linf,
        compatibility_defect: traj.compatibility_defect,
        warnings: traj.warnings.clone(),
    };
    write_toml(&out.join("summary.toml"), &summary)?;
    Ok(true)
}

fn cmd_sweep_k(config: &Path, ks: &str, out: &Path) -> Result<bool> {
    let cfg = load(config)?;
    let ks = parse_values(ks)?;
    prepare(out)?;
    let table = sweep_k(&cfg, &ks)?;
    for (k, e) in table.failures() {
        eprintln!("run at K = {k:e} failed: {e}");
    }
    write_table_csv(&out.join("table.csv"), &table)?;
    let fits = &table.fits;
    let mut checks = Vec::new();
    let slope = |f: &Option<bsac::harness::RateFit>| f.map_or(f64::NAN, |f| f.slope);
    let m = slope(&fits.boundary_mismatch);
    checks.push(check("mismatch_slope", m, "in [0.8, 1.2]", (0.8..=1.2).contains(&m)));
    let r2 = fits.boundary_mismatch.map_or(f64::NAN, |f| f.r2);
    checks.push(check("mismatch_r2", r2, ">= 0.95", r2 >= 0.95));
    let xo = slope(&fits.x_omega);
    checks.push(check("x_omega_slope", xo, ">= 0.35", xo >= 0.35));
    let xg = slope(&fits.x_gamma);
    checks.push(check("x_gamma_slope", xg, ">= 0.35", xg >= 0.35));
    let pass = checks.iter().all(|c| c.pass) && table.failures().next().is_none();
    write_toml(
        &out.join("fit.toml"),
        &FitFile {
            slopes: fits.clone(),
            checks,
            pass,
        },
    )?;
    Ok(pass)
}

fn cmd_sweep_eps(config: &Path, eps: &str, out: &Path) -> Result<bool> {
    let cfg = load(config)?;
    let eps = parse_values(eps)?;
    prepare(out)?;
    let table = sweep_eps(&cfg, &eps)?;
    write_table_csv(&out.join("table.csv"), &table)?;
    write_toml(
        &out.join("fit.toml"),
        &FitFile {
            slopes: table.fits.clone(),
            checks: Vec::new(),
            pass: true,
        },
    )?;
    if let Some(f) = table.fits.x_omega {
        eprintln!("x_omega slope {:.4} (r2 {:.4}), report only", f.slope, f.r2);
    }
    let ok = table.failures().next().is_none();
    Ok(ok)
}

fn cmd_ctsdep(config: &Path, which: &str, deltas: &str, out: &Path) -> Result<bool> {
    let cfg = load(config)?;
    let which: Datum = which.parse()?;
    let deltas = parse_values(deltas)?;
    prepare(out)?;
    let report = ctsdep(&cfg, &deltas, which)?;
    write_ctsdep_csv(&out.join("ctsdep.csv"), &report)?;
    let c = check("ratio_spread", report.spread, "max/min <= 1.2", report.spread <= 1.2);
    let pass = c.pass;
    write_toml(
        &out.join("fit.toml"),
        &FitFile {
            slopes: Default::default(),
            checks: vec![c],
            pass,
        },
    )?;
    Ok(pass)
}

fn cmd_steady(config: &Path, tol: f64, max_iter: usize, out: &Path) -> Result<bool> {
    let cfg = load(config)?;
    prepare(out)?;
    let st = match steady_state(&cfg, tol, max_iter) {
        Ok(st) => st,
        Err(e @ bsac::Error::NonConvergence { .. }) => {
            eprintln!("FAIL {e}");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let res = stationary_residual(&st.state, &cfg)?;
    eprintln!(
        "converged after {} steps (increment {:e}); residuals bulk {:e}, surface {:e}, transmission {:e}",
        st.iterations, st.residual, res.bulk_res, res.surface_res, res.robin_res
    );
    match cfg.mode {
        Mode::Robin => {
            write_bulk_csv(&out.join("fields_steady.csv"), &st.state.u, None)?;
            write_surface_csv(&out.join("surface_steady.csv"), &cfg.grid, &st.state.phi)?;
        }
        Mode::Limit => write_bulk_csv(&out.join("fields_steady.csv"), &st.state.u, Some(&st.state.phi))?,
    }
    let checks = vec![
        Check {
            name: "iterations".into(),
            value: st.iterations as f64,
            threshold: format!("<= {max_iter}"),
            pass: true,
        },
        Check {
            name: "bulk_res".into(),
            value: res.bulk_res,
            threshold: "report".into(),
            pass: true,
        },
        Check {
            name: "surface_res".into(),
            value: res.surface_res,
            threshold: "report".into(),
            pass: true,
        },
        Check {
            name: "robin_res".into(),
            value: res.robin_res,
            threshold: "report".into(),
            pass: true,
        },
    ];
    write_toml(
        &out.join("fit.toml"),
        &FitFile {
            slopes: Default::default(),
            checks,
            pass: true,
        },
    )?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, mode } => cmd_run(&config, &out, mode),
        Command::SweepK { config, ks, out } => cmd_sweep_k(&config, &ks, &out),
        Command::SweepEps { config, eps, out } => cmd_sweep_eps(&config, &eps, &out),
        Command::Ctsdep {
            config,
            which,
            deltas,
            out,
        } => cmd_ctsdep(&config, &which, &deltas, &out),
        Command::Steady {
            config,
            tol,
            max_iter,
            out,
        } => cmd_steady(&config, tol, max_iter, &out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
