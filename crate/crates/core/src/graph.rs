//! Scalar calculus for maximal monotone graphs `β = ∂β̂` on the real line.
//!
//! A graph is either an odd power `c·r^p`, the subdifferential of the
//! indicator of an interval `[a, b]` (the obstacle), or a user-supplied
//! continuous monotone function on a closed interval. On a bounded domain
//! the graph is extended by vertical rays at the endpoints, so every
//! resolvent `(I + εβ)⁻¹` is defined on the whole line.
//!
//! Everything here is pure and the graph is immutable once built.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative tolerance for the scalar root finds.
const ROOT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 400;

/// Closed interval with possibly infinite endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::input(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum GraphKind {
    /// `β(r) = c·r^p` with odd `p ≥ 1`, `β̂(r) = c·r^(p+1)/(p+1)`.
    Polynomial { power: u32, coeff: f64 },
    /// `β = ∂I_[a,b]` with `a ≤ 0 ≤ b`.
    Obstacle { lower: f64, upper: f64 },
    /// Continuous nondecreasing `beta` on `domain` with `beta(0) = 0`, and
    /// its convex antiderivative `beta_hat` with `beta_hat(0) = 0`.
    Custom {
        beta: ScalarFn,
        beta_hat: ScalarFn,
        domain: Interval,
    },
}

impl fmt::Debug for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Polynomial { power, coeff } => f
                .debug_struct("Polynomial")
                .field("power", power)
                .field("coeff", coeff)
                .finish(),
            GraphKind::Obstacle { lower, upper } => f
                .debug_struct("Obstacle")
                .field("lower", lower)
                .field("upper", upper)
                .finish(),
            GraphKind::Custom { domain, .. } => {
                f.debug_struct("Custom").field("domain", domain).finish()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct MonotoneGraph {
    kind: GraphKind,
}

impl MonotoneGraph {
    pub fn polynomial(power: u32, coeff: f64) -> Result<Self> {
        if power == 0 || power.is_multiple_of(2) {
            return Err(Error::input(format!(
                "polynomial graph needs an odd power, got {power}"
            )));
        }
        if !(coeff.is_finite() && coeff >= 0.0) {
            return Err(Error::input(format!(
                "polynomial coefficient must be finite and nonnegative, got {coeff}"
            )));
        }
        Ok(Self {
            kind: GraphKind::Polynomial { power, coeff },
        })
    }

    /// The zero graph `β ≡ 0`.
    pub fn zero() -> Self {
        Self {
            kind: GraphKind::Polynomial {
                power: 1,
                coeff: 0.0,
            },
        }
    }

    pub fn cubic() -> Self {
        Self {
            kind: GraphKind::Polynomial {
                power: 3,
                coeff: 1.0,
            },
        }
    }

    pub fn obstacle(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= 0.0 && upper >= 0.0) || lower.is_nan() || upper.is_nan() {
            return Err(Error::input(format!(
                "obstacle interval [{lower}, {upper}] must contain 0"
            )));
        }
        Ok(Self {
            kind: GraphKind::Obstacle { lower, upper },
        })
    }

    pub fn custom(beta: ScalarFn, beta_hat: ScalarFn, domain: Interval) -> Result<Self> {
        if !domain.contains(0.0) {
            return Err(Error::input(format!("custom domain {domain} must contain 0")));
        }
        if beta(0.0) != 0.0 || beta_hat(0.0) != 0.0 {
            return Err(Error::input(
                "custom graph needs beta(0) = 0 and beta_hat(0) = 0",
            ));
        }
        Ok(Self {
            kind: GraphKind::Custom {
                beta,
                beta_hat,
                domain,
            },
        })
    }

    pub fn kind(&self) -> &GraphKind {
        &self.kind
    }

    pub fn domain(&self) -> Interval {
        match &self.kind {
            GraphKind::Polynomial { .. } => Interval::real_line(),
            GraphKind::Obstacle { lower, upper } => Interval {
                lo: *lower,
                hi: *upper,
            },
            GraphKind::Custom { domain, .. } => *domain,
        }
    }

    /// True when `β(x)` is a single point for every `x` in the domain.
    pub fn is_single_valued(&self) -> bool {
        !self.domain().is_bounded() && !matches!(self.kind, GraphKind::Obstacle { .. })
    }

    /// The set `β(x)` as an interval, `None` outside `D(β)`.
    pub fn value_set(&self, x: f64) -> Option<Interval> {
        let dom = self.domain();
        if !dom.contains(x) {
            return None;
        }
        let (v_lo, v_hi) = match &self.kind {
            GraphKind::Polynomial { power, coeff } => {
                let v = coeff * x.powi(*power as i32);
                return Some(Interval::point(v));
            }
            GraphKind::Obstacle { .. } => (0.0, 0.0),
            GraphKind::Custom { beta, .. } => {
                let v = beta(x);
                (v, v)
            }
        };
        let lo = if x == dom.lo { f64::NEG_INFINITY } else { v_lo };
        let hi = if x == dom.hi { f64::INFINITY } else { v_hi };
        Some(Interval { lo, hi })
    }

    /// Convex antiderivative `β̂`, `+∞` outside the domain.
    pub fn beta_hat(&self, x: f64) -> f64 {
        match &self.kind {
            GraphKind::Polynomial { power, coeff } => {
                let q = *power as i32 + 1;
                coeff * x.powi(q) / q as f64
            }
            GraphKind::Obstacle { lower, upper } => {
                if x >= *lower && x <= *upper {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            GraphKind::Custom {
                beta_hat, domain, ..
            } => {
                if domain.contains(x) {
                    beta_hat(x)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `β°(x)`: the element of `β(x)` with least absolute value.
    pub fn minimal_section(&self, x: f64) -> Result<f64> {
        match self.value_set(x) {
            Some(set) => Ok(set.clamp(0.0)),
            None => {
                let d = self.domain();
                Err(Error::Domain {
                    value: x,
                    lo: d.lo,
                    hi: d.hi,
                })
            }
        }
    }

    /// `𝒥_ε(x) = (I + εβ)⁻¹(x)`.
    pub fn resolvent(&self, eps: f64, x: f64) -> Result<f64> {
        check_positive("eps", eps)?;
        if !x.is_finite() {
            return Err(Error::input(format!("resolvent argument must be finite, got {x}")));
        }
        match &self.kind {
            GraphKind::Obstacle { lower, upper } => Ok(x.max(*lower).min(*upper)),
            GraphKind::Polynomial { power, coeff } => {
                polynomial_resolvent(*power, eps * coeff, x)
            }
            GraphKind::Custom { beta, domain, .. } => {
                bracketed_resolvent(beta.as_ref(), *domain, eps, x)
            }
        }
    }

    /// Yosida approximation `β_ε(x) = (x − 𝒥_ε(x))/ε`.
    pub fn yosida(&self, eps: f64, x: f64) -> Result<f64> {
        let j = self.resolvent(eps, x)?;
        Ok((x - j) / eps)
    }

    /// Moreau envelope `β̂_ε(x) = β̂(𝒥_ε x) + |x − 𝒥_ε x|²/(2ε)`.
    pub fn moreau_envelope(&self, eps: f64, x: f64) -> Result<f64> {
        let j = self.resolvent(eps, x)?;
        Ok(self.beta_hat(j) + (x - j).powi(2) / (2.0 * eps))
    }

    /// Solves `y + λ·β_ε(y) = x` in closed form through `𝒥_{ε+λ}`.
    pub fn resolvent_of_yosida(&self, eps: f64, lam: f64, x: f64) -> Result<f64> {
        check_positive("eps", eps)?;
        check_positive("lambda", lam)?;
        let j = self.resolvent(eps + lam, x)?;
        Ok((eps * x + lam * j) / (eps + lam))
    }

    /// Implicit reaction map of step `dt`: the resolvent of `β` when
    /// `eps = 0`, of the Yosida approximation `β_eps` otherwise.
    pub fn step_resolvent(&self, eps: f64, dt: f64, x: f64) -> Result<f64> {
        if eps > 0.0 {
            self.resolvent_of_yosida(eps, dt, x)
        } else {
            self.resolvent(dt, x)
        }
    }

    /// `β` or `β_eps` evaluated as a set, for residual computations.
    pub fn regularized_value_set(&self, eps: f64, x: f64) -> Result<Option<Interval>> {
        if eps > 0.0 {
            Ok(Some(Interval::point(self.yosida(eps, x)?)))
        } else {
            Ok(self.value_set(x))
        }
    }

    /// `β̂` or the Moreau envelope `β̂_eps`.
    pub fn regularized_beta_hat(&self, eps: f64, x: f64) -> Result<f64> {
        if eps > 0.0 {
            self.moreau_envelope(eps, x)
        } else {
            Ok(self.beta_hat(x))
        }
    }

    /// Resolvent of `s ↦ α·β(g(s))` with `g(s) = (s − η)/α`, i.e. the
    /// solution `y` of `y + dt·α·β(g(y)) ∋ x`. Equals `α·𝒥_dt(g(x)) + η`.
    pub fn affine_step_resolvent(
        &self,
        eps: f64,
        dt: f64,
        alpha: f64,
        eta: f64,
        x: f64,
    ) -> Result<f64> {
        if alpha == 0.0 {
            return Err(Error::input("alpha must be nonzero"));
        }
        let phi = self.step_resolvent(eps, dt, (x - eta) / alpha)?;
        Ok(alpha * phi + eta)
    }

    /// `D(β∘g)` for `g(s) = α⁻¹(s − η)`.
    pub fn compose_affine_domain(&self, alpha: f64, eta: f64) -> Result<Interval> {
        compose_affine(self.domain(), alpha, eta)
    }
}

/// Image of `[a, b]` under `r ↦ αr + η`, which is `{s : α⁻¹(s − η) ∈ [a, b]}`.
pub fn compose_affine(domain: Interval, alpha: f64, eta: f64) -> Result<Interval> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::input(format!("alpha must be finite and nonzero, got {alpha}")));
    }
    if !eta.is_finite() {
        return Err(Error::input(format!("eta must be finite, got {eta}")));
    }
    let map = |r: f64| if r.is_infinite() { alpha.signum() * r } else { alpha * r + eta };
    let (p, q) = (map(domain.lo), map(domain.hi));
    Ok(Interval {
        lo: p.min(q),
        hi: p.max(q),
    })
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Solves `y + a·y^p = x` for odd `p`. The map is odd, so solve for `|x|`
/// by Newton from an upper bound; on the convex branch the iterates
/// decrease monotonically onto the root.
fn polynomial_resolvent(power: u32, a: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if a == 0.0 {
        return Ok(x);
    }
    if power == 1 {
        return Ok(x / (1.0 + a));
    }
    let p = power as i32;
    let target = x.abs();
    let mut y = target.min((target / a).powf(1.0 / power as f64));
    for it in 0..MAX_ITER {
        let yp1 = y.powi(p - 1);
        let f = y + a * yp1 * y - target;
        if f <= 0.0 {
            return Ok(x.signum() * y);
        }
        let df = 1.0 + a * p as f64 * yp1;
        let step = f / df;
        let next = y - step;
        if step <= 2.0 * f64::EPSILON * y || next <= 0.0 {
            let y_final = next.max(0.0);
            return Ok(x.signum() * y_final);
        }
        y = next;
        if it + 1 == MAX_ITER {
            return Err(Error::RootFind {
                x,
                iterations: MAX_ITER,
                residual: f,
            });
        }
    }
    unreachable!()
}

/// Resolvent of a continuous monotone `beta` on `domain` by a safeguarded
/// secant/bisection iteration on the bracket `[min(x,0), max(x,0)]`.
fn bracketed_resolvent(
    beta: &(dyn Fn(f64) -> f64 + Send + Sync),
    domain: Interval,
    eps: f64,
    x: f64,
) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let f = |y: f64| y + eps * beta(y) - x;
    let mut lo = domain.clamp(x.min(0.0));
    let mut hi = domain.clamp(x.max(0.0));
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    // Solution sits on a vertical ray at a domain endpoint.
    if f_hi < 0.0 {
        return Ok(hi);
    }
    if f_lo > 0.0 {
        return Ok(lo);
    }
    let tol = ROOT_TOL * (1.0 + x.abs());
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }
    let mut side = 0i8;
    for _ in 0..MAX_ITER {
        // Illinois-modified regula falsi, falling back to bisection.
        let mut y = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(y > lo && y < hi) {
            y = 0.5 * (lo + hi);
        }
        let fy = f(y);
        if fy.abs() <= tol || (hi - lo) <= 4.0 * f64::EPSILON * (1.0 + y.abs()) {
            return Ok(y);
        }
        if fy < 0.0 {
            lo = y;
            f_lo = fy;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = y;
            f_hi = fy;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    let y = 0.5 * (lo + hi);
    Err(Error::RootFind {
        x,
        iterations: MAX_ITER,
        residual: f(y),
    })
}
