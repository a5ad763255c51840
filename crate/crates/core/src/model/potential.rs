//! Potential splits `W = β̂ + π̂` with a convex graph part and a Lipschitz
//! perturbation.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Interval, MonotoneGraph, ScalarFn};

/// Default clip level `M` for the linear perturbation.
pub const DEFAULT_CLIP: f64 = 10.0;

/// Lipschitz perturbation `π` with antiderivative `π̂`.
#[derive(Clone)]
pub enum Perturbation {
    /// `π(s) = clamp(−slope·s, −clip, clip)`; `π̂` is the even antiderivative
    /// with `π̂(0) = offset`.
    Linear { slope: f64, clip: f64, offset: f64 },
    Custom {
        pi: ScalarFn,
        pi_hat: ScalarFn,
        lipschitz: f64,
        validity: Interval,
    },
}

impl std::fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Perturbation::Linear {
                slope,
                clip,
                offset,
            } => f
                .debug_struct("Linear")
                .field("slope", slope)
                .field("clip", clip)
                .field("offset", offset)
                .finish(),
            Perturbation::Custom {
                lipschitz,
                validity,
                ..
            } => f
                .debug_struct("Custom")
                .field("lipschitz", lipschitz)
                .field("validity", validity)
                .finish(),
        }
    }
}

impl Perturbation {
    /// Linear perturbation with the offset that makes `π̂ ≥ 0` on its
    /// validity interval.
    pub fn linear(slope: f64, clip: f64) -> Result<Self> {
        Self::linear_with_offset(slope, clip, None)
    }

    pub fn linear_with_offset(slope: f64, clip: f64, offset: Option<f64>) -> Result<Self> {
        if !slope.is_finite() {
            return Err(Error::input(format!("pi slope must be finite, got {slope}")));
        }
        if !(clip > 0.0 && clip.is_finite()) {
            return Err(Error::input(format!("pi clip must be positive, got {clip}")));
        }
        let offset = offset.unwrap_or_else(|| {
            if slope > 0.0 {
                clip * clip / (2.0 * slope)
            } else {
                0.0
            }
        });
        Ok(Perturbation::Linear {
            slope,
            clip,
            offset,
        })
    }

    pub fn zero() -> Self {
        Perturbation::Linear {
            slope: 0.0,
            clip: DEFAULT_CLIP,
            offset: 0.0,
        }
    }

    pub fn pi(&self, s: f64) -> f64 {
        match self {
            Perturbation::Linear { slope, clip, .. } => (-slope * s).clamp(-clip, *clip),
            Perturbation::Custom { pi, .. } => pi(s),
        }
    }

    pub fn pi_hat(&self, s: f64) -> f64 {
        match self {
            Perturbation::Linear {
                slope,
                clip,
                offset,
            } => {
                if *slope == 0.0 {
                    return *offset;
                }
                let kink = clip / slope.abs();
                let a = s.abs();
                if a <= kink {
                    offset - slope * s * s / 2.0
                } else {
                    offset - slope * kink * kink / 2.0 - slope.signum() * clip * (a - kink)
                }
            }
            Perturbation::Custom { pi_hat, .. } => pi_hat(s),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Perturbation::Linear { slope, .. } => slope.abs(),
            Perturbation::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    /// Interval on which `π̂ ≥ 0` is promised.
    pub fn validity(&self) -> Interval {
        match self {
            Perturbation::Linear { slope, clip, .. } => {
                if *slope == 0.0 {
                    Interval::real_line()
                } else {
                    let t = clip / slope.abs();
                    Interval { lo: -t, hi: t }
                }
            }
            Perturbation::Custom { validity, .. } => *validity,
        }
    }

    pub fn offset(&self) -> Option<f64> {
        match self {
            Perturbation::Linear { offset, .. } => Some(*offset),
            Perturbation::Custom { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PotentialSplit {
    pub graph: MonotoneGraph,
    pub perturbation: Perturbation,
}

impl PotentialSplit {
    pub fn new(graph: MonotoneGraph, perturbation: Perturbation) -> Self {
        Self {
            graph,
            perturbation,
        }
    }

    /// `β̂(s) = s⁴/4`, `π(s) = −s` clipped at `M = 10`, `π̂ ≥ 0` on `[−M, M]`.
    pub fn double_well() -> Self {
        Self::new(
            MonotoneGraph::cubic(),
            Perturbation::linear(1.0, DEFAULT_CLIP).expect("valid constants"),
        )
    }

    /// Double well whose `π̂` offset is `1/4`, so `W(s) = (s² − 1)²/4` exactly
    /// on `[−M, M]` and `W(±1) = 0`.
    pub fn quartic_double_well() -> Self {
        Self::new(
            MonotoneGraph::cubic(),
            Perturbation::linear_with_offset(1.0, DEFAULT_CLIP, Some(0.25)).expect("valid constants"),
        )
    }

    /// Double obstacle: `β = ∂I_[−1,1]` with `π(s) = −s` clipped.
    pub fn double_obstacle() -> Self {
        Self::new(
            MonotoneGraph::obstacle(-1.0, 1.0).expect("valid interval"),
            Perturbation::linear(1.0, DEFAULT_CLIP).expect("valid constants"),
        )
    }

    pub fn zero() -> Self {
        Self::new(MonotoneGraph::zero(), Perturbation::zero())
    }

    pub fn pi(&self, s: f64) -> f64 {
        self.perturbation.pi(s)
    }

    pub fn lipschitz(&self) -> f64 {
        self.perturbation.lipschitz()
    }

    /// `W(s)`, with `β̂` replaced by its Moreau envelope when `eps > 0`.
    pub fn potential(&self, eps: f64, s: f64) -> Result<f64> {
        Ok(self.graph.regularized_beta_hat(eps, s)? + self.perturbation.pi_hat(s))
    }

    /// Spot checks of the Lipschitz bound, `π̂ ≥ 0` on the validity interval
    /// and `π̂′ = π` by central differences. Returns one message per failure.
    pub fn check(&self, rng: &mut impl Rng, samples: usize) -> Vec<String> {
        let mut problems = Vec::new();
        let p = &self.perturbation;
        let lip = p.lipschitz();
        let v = p.validity();
        let span = |x: f64| if x.is_finite() { x } else { 20.0f64.copysign(x) };
        let (lo, hi) = (span(v.lo), span(v.hi));
        for _ in 0..samples {
            let a: f64 = rng.gen_range(-2.0 * DEFAULT_CLIP..2.0 * DEFAULT_CLIP);
            let b: f64 = rng.gen_range(-2.0 * DEFAULT_CLIP..2.0 * DEFAULT_CLIP);
            let d = (p.pi(a) - p.pi(b)).abs();
            if d > lip * (a - b).abs() * (1.0 + 1e-12) + 1e-14 {
                problems.push(format!("pi violates Lipschitz bound {lip} at ({a}, {b})"));
                break;
            }
        }
        for _ in 0..samples {
            let s: f64 = rng.gen_range(lo..=hi);
            if p.pi_hat(s) < -1e-12 {
                problems.push(format!("pi_hat({s}) = {} is negative", p.pi_hat(s)));
                break;
            }
            // Stay clear of the clip kinks where π is not differentiable.
            let s = 0.9 * s;
            let h = 1e-5;
            let fd = (p.pi_hat(s + h) - p.pi_hat(s - h)) / (2.0 * h);
            if (fd - p.pi(s)).abs() > 1e-8 * (1.0 + p.pi(s).abs()) * 100.0 {
                problems.push(format!("pi_hat' = {fd} differs from pi = {} at {s}", p.pi(s)));
                break;
            }
        }
        problems
    }
}

pub fn custom_perturbation(
    pi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    pi_hat: impl Fn(f64) -> f64 + Send + Sync + 'static,
    lipschitz: f64,
    validity: Interval,
) -> Perturbation {
    Perturbation::Custom {
        pi: Arc::new(pi),
        pi_hat: Arc::new(pi_hat),
        lipschitz,
        validity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn double_well_split_is_consistent() {
        let w = PotentialSplit::double_well();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(w.check(&mut rng, 500).is_empty());
        assert_eq!(w.pi(1.0), -1.0);
        assert_eq!(w.pi(30.0), -10.0);
        assert_eq!(w.perturbation.pi_hat(10.0), 0.0);
        assert_eq!(w.perturbation.pi_hat(0.0), 50.0);
    }

    #[test]
    fn quartic_double_well_vanishes_at_minima() {
        let w = PotentialSplit::quartic_double_well();
        for s in [-1.0, 1.0] {
            assert_eq!(w.potential(0.0, s).unwrap(), 0.0);
        }
        let s = 0.3f64;
        let exact = (s * s - 1.0).powi(2) / 4.0;
        assert!((w.potential(0.0, s).unwrap() - exact).abs() < 1e-15);
    }

    #[test]
    fn pi_hat_continuous_across_kink() {
        let p = Perturbation::linear(2.0, 4.0).unwrap();
        let k = 2.0;
        let below = p.pi_hat(k - 1e-9);
        let above = p.pi_hat(k + 1e-9);
        assert!((below - above).abs() < 1e-7);
        let neg = Perturbation::linear(-1.5, 3.0).unwrap();
        assert!(neg.pi_hat(7.0) > neg.pi_hat(1.0));
    }

    #[test]
    fn detects_wrong_lipschitz_constant() {
        let p = custom_perturbation(|s| -3.0 * s, |s| 10.0 - 1.5 * s * s, 1.0, Interval { lo: -2.0, hi: 2.0 });
        let split = PotentialSplit::new(MonotoneGraph::zero(), p);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(!split.check(&mut rng, 200).is_empty());
    }
}
