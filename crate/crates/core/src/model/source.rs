//! Closed-form and tabulated space-time profiles used for forcings and
//! initial data.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{BulkField, StripGrid, SurfaceField};

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Zero,
    Constant(f64),
    /// `value + amplitude·e^(−decay·t)·cos(2π·mode·x/Lx)·cos(π·mode·y)`.
    Sinusoidal {
        value: f64,
        amplitude: f64,
        mode: u32,
        decay: f64,
    },
    /// `value + amplitude·Σ c_ab cos(2πa·x/Lx + θ_ab)·cos(πb·y)` over
    /// `a, b ≤ modes`, seeded. Each term has zero normal derivative on `Γ`.
    RandomSmooth {
        value: f64,
        amplitude: f64,
        modes: u32,
        seed: u64,
    },
    BulkTable(BulkField),
    SurfaceTable(SurfaceField),
    Sum(Vec<Profile>),
}

impl Profile {
    pub fn is_time_dependent(&self) -> bool {
        match self {
            Profile::Sinusoidal {
                amplitude, decay, ..
            } => *amplitude != 0.0 && *decay != 0.0,
            Profile::Sum(parts) => parts.iter().any(Profile::is_time_dependent),
            _ => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Zero => true,
            Profile::Constant(c) => *c == 0.0,
            Profile::Sum(parts) => parts.iter().all(Profile::is_zero),
            _ => false,
        }
    }

    /// `self + other`.
    pub fn plus(self, other: Profile) -> Profile {
        match self {
            Profile::Zero => other,
            Profile::Sum(mut parts) => {
                parts.push(other);
                Profile::Sum(parts)
            }
            p => Profile::Sum(vec![p, other]),
        }
    }

    fn point(&self, grid: &StripGrid, x: f64, y: f64, t: f64) -> Option<f64> {
        match self {
            Profile::Zero => Some(0.0),
            Profile::Constant(c) => Some(*c),
            Profile::Sinusoidal {
                value,
                amplitude,
                mode,
                decay,
            } => {
                let m = *mode as f64;
                Some(
                    value
                        + amplitude
                            * (-decay * t).exp()
                            * (2.0 * PI * m * x / grid.lx()).cos()
                            * (PI * m * y).cos(),
                )
            }
            Profile::RandomSmooth {
                value,
                amplitude,
                modes,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut s = 0.0;
                for a in 0..=*modes {
                    for b in 0..=*modes {
                        let c: f64 = rng.gen_range(-1.0..1.0);
                        let theta: f64 = rng.gen_range(0.0..2.0 * PI);
                        if a == 0 && b == 0 {
                            continue;
                        }
                        let w = c / (1.0 + (a * a + b * b) as f64);
                        s += w
                            * (2.0 * PI * a as f64 * x / grid.lx() + theta).cos()
                            * (PI * b as f64 * y).cos();
                    }
                }
                Some(value + amplitude * s)
            }
            Profile::BulkTable(_) | Profile::SurfaceTable(_) | Profile::Sum(_) => None,
        }
    }

    pub fn bulk(&self, grid: &StripGrid, t: f64) -> Result<BulkField> {
        match self {
            Profile::BulkTable(f) => {
                grid.check_bulk(f)?;
                Ok(f.clone())
            }
            Profile::SurfaceTable(_) => Err(Error::config(
                "a surface table cannot be used as a bulk profile",
            )),
            Profile::Sum(parts) => {
                let mut acc = grid.zeros_bulk();
                for p in parts {
                    acc.values += &p.bulk(grid, t)?.values;
                }
                Ok(acc)
            }
            p => Ok(grid.bulk_from_fn(|x, y| p.point(grid, x, y, t).unwrap_or(0.0))),
        }
    }

    pub fn surface(&self, grid: &StripGrid, t: f64) -> Result<SurfaceField> {
        match self {
            Profile::SurfaceTable(f) => {
                grid.check_surface(f)?;
                Ok(f.clone())
            }
            Profile::BulkTable(f) => {
                grid.check_bulk(f)?;
                Ok(crate::grid::trace(f))
            }
            Profile::Sum(parts) => {
                let mut acc = grid.zeros_surface();
                for p in parts {
                    let s = p.surface(grid, t)?;
                    acc.bottom += &s.bottom;
                    acc.top += &s.top;
                }
                Ok(acc)
            }
            p => Ok(grid.surface_from_fn(|x, y| p.point(grid, x, y, t).unwrap_or(0.0))),
        }
    }
}
