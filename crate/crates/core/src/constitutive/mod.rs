//! Pointwise constitutive laws of the Meissner system.
//!
//! The cubic `t = (1 - v^2) v` is inverted on `[0, sqrt(4/27)]` to define the
//! function `F` through `v = F(t^2) t`, which closes the limiting curl system
//! for `H`. The energy density `G(f, A) = |f A|^2 + (1 - f^2)^2 / 2`, its
//! first and second variations, and the convexity margin
//! `f^2 - |A|^2 - 1/3` live here as well.

mod energy;

pub use energy::{omega_energy, EnergyBreakdown};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest admissible `t`, `sqrt(4/27)`.
pub const T_MAX: f64 = 0.384_900_179_459_750_5;
/// Largest admissible `s = t^2`.
pub const S_MAX: f64 = 4.0 / 27.0;
/// `1/sqrt(3)`, the branch endpoint of the cubic.
pub const V_MAX: f64 = 0.577_350_269_189_625_8;
/// Rounding slack accepted at the endpoint of the domain.
pub const ENDPOINT_SLACK: f64 = 1e-12;

/// Ginzburg-Landau parameter; the limiting system uses `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Kappa {
    Finite(f64),
    Infinite(InfinityTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfinityTag {
    #[serde(rename = "INFINITY")]
    Infinity,
}

impl Kappa {
    pub const INFINITY: Kappa = Kappa::Infinite(InfinityTag::Infinity);

    pub fn finite(self) -> Option<f64> {
        match self {
            Kappa::Finite(k) => Some(k),
            Kappa::Infinite(_) => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Kappa::Infinite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GLParameters {
    pub lambda: f64,
    pub kappa: Kappa,
    pub mu: f64,
}

impl GLParameters {
    pub fn new(lambda: f64, kappa: Kappa, mu: f64) -> Result<Self> {
        let p = GLParameters { lambda, kappa, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn finite(lambda: f64, kappa: f64, mu: f64) -> Result<Self> {
        Self::new(lambda, Kappa::Finite(kappa), mu)
    }

    pub fn limit(lambda: f64, mu: f64) -> Result<Self> {
        Self::new(lambda, Kappa::INFINITY, mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameters(format!("lambda must be positive, got {}", self.lambda)));
        }
        if let Kappa::Finite(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidParameters(format!("kappa must be positive, got {k}")));
            }
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameters(format!("mu must be nonnegative, got {}", self.mu)));
        }
        Ok(())
    }

    /// Large-kappa estimates only hold for `kappa >= max(1, lambda)`.
    pub fn require_estimate_regime(&self) -> Result<()> {
        match self.kappa {
            Kappa::Finite(k) if k < self.lambda.max(1.0) => Err(Error::InvalidParameters(format!(
                "kappa = {k} below max(1, lambda) = {}",
                self.lambda.max(1.0)
            ))),
            _ => Ok(()),
        }
    }
}

/// A sample of the constitutive curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstitutivePoint {
    pub t: f64,
    pub v: f64,
    pub f_value: f64,
}

impl ConstitutivePoint {
    pub fn at(t: f64) -> Result<Self> {
        let v = invert_cubic(t)?;
        let t = t.clamp(0.0, T_MAX);
        let f_value = if t == 0.0 { 1.0 } else { v / t };
        Ok(ConstitutivePoint { t, v, f_value })
    }
}

/// Unique `v` in `[0, 1/sqrt(3)]` with `(1 - v^2) v = t`.
///
/// Trigonometric starting value, polished by safeguarded Newton; bisection
/// takes over whenever a Newton step leaves the bracket.
pub fn invert_cubic(t: f64) -> Result<f64> {
    if !(t >= 0.0) || t > T_MAX + ENDPOINT_SLACK {
        return Err(Error::OutOfDomain { value: t, max: T_MAX });
    }
    if t >= T_MAX {
        return Ok(V_MAX);
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let residual = |v: f64| v - v * v * v - t;
    let (mut lo, mut hi) = (0.0_f64, V_MAX);
    let arg = (1.5 * 3f64.sqrt() * t).min(1.0);
    let mut v = 2.0 / 3f64.sqrt() * (arg.asin() / 3.0).sin();
    for _ in 0..200 {
        let r = residual(v);
        if r.abs() <= 1e-16 {
            break;
        }
        if r < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let d = 1.0 - 3.0 * v * v;
        let mut next = if d > 0.0 { v - r / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 1e-17 {
            v = next;
            break;
        }
        v = next;
    }
    Ok(v.clamp(0.0, V_MAX))
}

/// `F(s)` for `s = t^2` in `[0, 4/27]`, with `F(0) = 1`.
pub fn f_of(s: f64) -> Result<f64> {
    if !(s >= 0.0) || s > S_MAX + ENDPOINT_SLACK {
        return Err(Error::OutOfDomain { value: s, max: S_MAX });
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let t = s.sqrt().min(T_MAX);
    let v = invert_cubic(t)?;
    Ok(v / t)
}

/// `F(s)` and `F'(s)`. From `F (1 - F^2 s) = 1` one gets
/// `F' = F^3 / (1 - 3 F^2 s)`; the derivative is infinite at `s = 4/27`.
pub fn f_and_derivative(s: f64) -> Result<(f64, f64)> {
    let f = f_of(s)?;
    let v2 = f * f * s.max(0.0);
    let denom = 1.0 - 3.0 * v2;
    let df = if denom > 0.0 { f * f * f / denom } else { f64::INFINITY };
    Ok((f, df))
}

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Energy density and its partial derivatives `(G, G_f, G_A)`.
pub fn g_density_and_grad(f: f64, a: &Vec3) -> (f64, f64, Vec3) {
    let a2 = dot(a, a);
    let g = g_density_sq(f, a2);
    let gf = 2.0 * (f * f + a2 - 1.0) * f;
    let ga = [2.0 * f * f * a[0], 2.0 * f * f * a[1], 2.0 * f * f * a[2]];
    (g, gf, ga)
}

/// Energy density from `f` and the squared magnitude `|A|²`.
pub fn g_density_sq(f: f64, a2: f64) -> f64 {
    f * f * a2 + 0.5 * (1.0 - f * f).powi(2)
}

/// Energy density alone.
pub fn g_density(f: f64, a: &Vec3) -> f64 {
    g_density_and_grad(f, a).0
}

/// `<G''(f, A), (g, B)> = 2 |f B + 2 g A|^2 + 6 g^2 (f^2 - |A|^2 - 1/3)`.
pub fn second_variation_form(f: f64, a: &Vec3, g: f64, b: &Vec3) -> f64 {
    let w = [f * b[0] + 2.0 * g * a[0], f * b[1] + 2.0 * g * a[1], f * b[2] + 2.0 * g * a[2]];
    2.0 * dot(&w, &w) + 6.0 * g * g * (f * f - dot(a, a) - 1.0 / 3.0)
}

/// Rounding allowance for membership tests on the boundary of the convexity sets.
pub const MARGIN_ROUNDING: f64 = 4.0 * f64::EPSILON;

/// Pointwise convexity margin `f^2 - |A|^2 - 1/3`.
#[inline]
pub fn pointwise_margin(f: f64, a2: f64) -> f64 {
    f * f - a2 - 1.0 / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityMargin {
    pub margin: f64,
    pub delta: f64,
    /// Smallest sampled `f`; membership requires `f > 0` everywhere.
    pub min_f: f64,
}

impl ConvexityMargin {
    /// Margin over paired samples of `f` and `|A|^2`.
    pub fn from_samples(f: &[f64], a2: &[f64], delta: f64) -> Self {
        assert_eq!(f.len(), a2.len(), "margin samples must pair up");
        let margin = f
            .iter()
            .zip(a2)
            .map(|(&f, &a2)| pointwise_margin(f, a2))
            .fold(f64::INFINITY, f64::min);
        let min_f = f.iter().copied().fold(f64::INFINITY, f64::min);
        ConvexityMargin { margin, delta, min_f }
    }

    pub fn in_k(&self) -> bool {
        self.min_f > 0.0 && self.margin > MARGIN_ROUNDING
    }

    pub fn in_k_closure(&self) -> bool {
        self.min_f > 0.0 && self.margin >= -MARGIN_ROUNDING
    }

    pub fn in_k_delta(&self) -> bool {
        self.min_f > 0.0 && self.margin > self.delta + MARGIN_ROUNDING
    }
}
