//! Transmission function `h` relating the trace of `u` to `φ`.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::ScalarFn;

#[derive(Clone)]
pub enum CouplingKind {
    /// `h(s) = αs + η`.
    Affine { alpha: f64, eta: f64 },
    /// `h(s) = α·tanh(s) + η`.
    Tanh { alpha: f64, eta: f64 },
    Custom {
        h: ScalarFn,
        dh: ScalarFn,
        d2h: ScalarFn,
        sup_dh: f64,
        sup_d2h: f64,
    },
}

#[derive(Clone)]
pub struct Coupling {
    kind: CouplingKind,
}

impl std::fmt::Debug for Coupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            CouplingKind::Affine { alpha, eta } => write!(f, "Affine(alpha={alpha}, eta={eta})"),
            CouplingKind::Tanh { alpha, eta } => write!(f, "Tanh(alpha={alpha}, eta={eta})"),
            CouplingKind::Custom { sup_dh, sup_d2h, .. } => {
                write!(f, "Custom(|h'|<={sup_dh}, |h''|<={sup_d2h})")
            }
        }
    }
}

impl Coupling {
    pub fn affine(alpha: f64, eta: f64) -> Result<Self> {
        if !(alpha.is_finite() && eta.is_finite()) {
            return Err(Error::input("affine coupling needs finite alpha and eta"));
        }
        Ok(Self {
            kind: CouplingKind::Affine { alpha, eta },
        })
    }

    pub fn identity() -> Self {
        Self {
            kind: CouplingKind::Affine {
                alpha: 1.0,
                eta: 0.0,
            },
        }
    }

    pub fn tanh(alpha: f64, eta: f64) -> Result<Self> {
        if !(alpha.is_finite() && eta.is_finite()) {
            return Err(Error::input("tanh coupling needs finite alpha and eta"));
        }
        Ok(Self {
            kind: CouplingKind::Tanh { alpha, eta },
        })
    }

    pub fn custom(
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dh: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sup_dh: f64,
        sup_d2h: f64,
    ) -> Self {
        Self {
            kind: CouplingKind::Custom {
                h: Arc::new(h),
                dh: Arc::new(dh),
                d2h: Arc::new(d2h),
                sup_dh,
                sup_d2h,
            },
        }
    }

    pub fn kind(&self) -> &CouplingKind {
        &self.kind
    }

    pub fn h(&self, s: f64) -> f64 {
        match &self.kind {
            CouplingKind::Affine { alpha, eta } => alpha * s + eta,
            CouplingKind::Tanh { alpha, eta } => alpha * s.tanh() + eta,
            CouplingKind::Custom { h, .. } => h(s),
        }
    }

    pub fn dh(&self, s: f64) -> f64 {
        match &self.kind {
            CouplingKind::Affine { alpha, .. } => *alpha,
            CouplingKind::Tanh { alpha, .. } => {
                let c = s.cosh();
                alpha / (c * c)
            }
            CouplingKind::Custom { dh, .. } => dh(s),
        }
    }

    pub fn d2h(&self, s: f64) -> f64 {
        match &self.kind {
            CouplingKind::Affine { .. } => 0.0,
            CouplingKind::Tanh { alpha, .. } => {
                let c = s.cosh();
                -2.0 * alpha * s.tanh() / (c * c)
            }
            CouplingKind::Custom { d2h, .. } => d2h(s),
        }
    }

    pub fn sup_dh(&self) -> f64 {
        match &self.kind {
            CouplingKind::Affine { alpha, .. } | CouplingKind::Tanh { alpha, .. } => alpha.abs(),
            CouplingKind::Custom { sup_dh, .. } => *sup_dh,
        }
    }

    pub fn sup_d2h(&self) -> f64 {
        match &self.kind {
            CouplingKind::Affine { .. } => 0.0,
            // max |2 tanh(s) sech²(s)| = 4/(3√3)
            CouplingKind::Tanh { alpha, .. } => alpha.abs() * 4.0 / (3.0 * 3f64.sqrt()),
            CouplingKind::Custom { sup_d2h, .. } => *sup_d2h,
        }
    }

    /// `(α, η)` when `h` is affine.
    pub fn affine_params(&self) -> Option<(f64, f64)> {
        match self.kind {
            CouplingKind::Affine { alpha, eta } => Some((alpha, eta)),
            _ => None,
        }
    }

    /// `g = h⁻¹` for affine `h`.
    pub fn inverse(&self, s: f64) -> Option<f64> {
        self.affine_params().map(|(a, e)| (s - e) / a)
    }

    /// Sampled checks of the declared bounds and, for affine `h`, of
    /// `h(s) = αs + η`.
    pub fn check(&self, rng: &mut impl Rng, samples: usize) -> Vec<String> {
        let mut problems = Vec::new();
        let (b1, b2) = (self.sup_dh(), self.sup_d2h());
        for _ in 0..samples {
            let s: f64 = rng.gen_range(-20.0..20.0);
            if self.dh(s).abs() > b1 * (1.0 + 1e-12) {
                problems.push(format!("|h'({s})| exceeds declared bound {b1}"));
                break;
            }
            if self.d2h(s).abs() > b2 * (1.0 + 1e-12) + 1e-15 {
                problems.push(format!("|h''({s})| exceeds declared bound {b2}"));
                break;
            }
            if let Some((a, e)) = self.affine_params() {
                if self.h(s) - (a * s + e) != 0.0 {
                    problems.push(format!("h is not affine at {s}"));
                    break;
                }
            }
        }
        problems
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tanh_bounds_hold() {
        let c = Coupling::tanh(-1.5, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(c.check(&mut rng, 2000).is_empty());
        let h = 1e-6;
        let s = 0.37;
        assert!(((c.h(s + h) - c.h(s - h)) / (2.0 * h) - c.dh(s)).abs() < 1e-8);
        assert!(((c.dh(s + h) - c.dh(s - h)) / (2.0 * h) - c.d2h(s)).abs() < 1e-8);
    }

    #[test]
    fn affine_inverse() {
        let c = Coupling::affine(2.0, 1.0).unwrap();
        assert_eq!(c.inverse(3.0), Some(1.0));
        assert_eq!(Coupling::tanh(1.0, 0.0).unwrap().inverse(0.5), None);
    }

    #[test]
    fn understated_bound_is_reported() {
        let c = Coupling::custom(|s| 3.0 * s, |_| 3.0, |_| 0.0, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(!c.check(&mut rng, 10).is_empty());
    }
}
