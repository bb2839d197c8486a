//! Soft maximum, soft minimum and the bell-shaped soft equality indicator,
//! together with their partial derivatives.
//!
//! All soft forms are evaluated in shifted log-sum-exp / logistic form so
//! that small relaxation factors (e.g. 0.005 on unit-scale inputs) never
//! overflow. A factor `<= 0` selects the hard (exact) operators.

use crate::error::{Error, Result};

/// Relaxation factor. Nonpositive values mean hard semantics.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Gamma(pub f64);

impl Gamma {
    pub const HARD: Gamma = Gamma(0.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_soft(self) -> bool {
        self.0 > 0.0
    }

    /// Errors unless the factor admits derivatives.
    pub fn require_soft(self) -> Result<Self> {
        if self.is_soft() {
            Ok(self)
        } else {
            Err(Error::NonpositiveGamma(self.0))
        }
    }
}

impl From<f64> for Gamma {
    fn from(v: f64) -> Self {
        Gamma(v)
    }
}

/// Logistic function, evaluated without overflow for any finite input.
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `γ·ln(e^{a/γ} + e^{b/γ})`, or `max(a, b)` when `γ <= 0`.
pub fn max_gamma(gamma: Gamma, a: f64, b: f64) -> f64 {
    let g = gamma.0;
    if g <= 0.0 {
        return a.max(b);
    }
    a.max(b) + g * (-(a - b).abs() / g).exp().ln_1p()
}

/// `-γ·ln(e^{-a/γ} + e^{-b/γ})`, or `min(a, b)` when `γ <= 0`.
pub fn min_gamma(gamma: Gamma, a: f64, b: f64) -> f64 {
    let g = gamma.0;
    if g <= 0.0 {
        return a.min(b);
    }
    a.min(b) - g * (-(a - b).abs() / g).exp().ln_1p()
}

/// Bell function `e^{-x²/(2γ)}`; the indicator of `x = 0` when `γ <= 0`.
pub fn bell_gamma(gamma: Gamma, x: f64) -> f64 {
    let g = gamma.0;
    if g <= 0.0 {
        return if x == 0.0 { 1.0 } else { 0.0 };
    }
    (-(x * x) / (2.0 * g)).exp()
}

/// Soft indicator of `a = b`; it is the loss of the `a != b` comparison.
pub fn nequal_gamma(gamma: Gamma, a: f64, b: f64) -> f64 {
    bell_gamma(gamma, a - b)
}

/// Weights `(∂/∂a, ∂/∂b)` of `max_gamma` at `(a, b)`. They sum to exactly 1.
pub fn max_weights(gamma: Gamma, a: f64, b: f64) -> (f64, f64) {
    let t = (a - b) / gamma.0;
    let small = logistic(-t.abs());
    let large = 1.0 - small;
    if t >= 0.0 {
        (large, small)
    } else {
        (small, large)
    }
}

/// `dBell/dx = e^{-x²/(2γ)}·(-x/γ)`.
pub fn dbell_gamma_dx(gamma: Gamma, x: f64) -> Result<f64> {
    let g = gamma.require_soft()?.0;
    Ok(dbell(g, x))
}

/// Total derivative of `max_gamma(γ, a(t), b(t))` given `a' = da`, `b' = db`.
pub fn dmax_gamma_ds(gamma: Gamma, a: f64, da: f64, b: f64, db: f64) -> Result<f64> {
    gamma.require_soft()?;
    Ok(dmax(gamma, a, da, b, db))
}

/// Total derivative of `min_gamma(γ, a(t), b(t))`.
pub fn dmin_gamma_ds(gamma: Gamma, a: f64, da: f64, b: f64, db: f64) -> Result<f64> {
    gamma.require_soft()?;
    Ok(dmin(gamma, a, da, b, db))
}

/// Total derivative of `nequal_gamma(γ, a(t), b(t))`.
pub fn dnequal_gamma_ds(gamma: Gamma, a: f64, da: f64, b: f64, db: f64) -> Result<f64> {
    gamma.require_soft()?;
    Ok(dnequal(gamma, a, da, b, db))
}

/// Total derivative of the `a <= b` loss `max_gamma(γ, a - b, 0)`.
pub fn dlequal_gamma_ds(gamma: Gamma, a: f64, da: f64, b: f64, db: f64) -> Result<f64> {
    gamma.require_soft()?;
    Ok(dlequal(gamma, a, da, b, db))
}

// Unchecked kernels for the loss module, which validates γ once.

#[inline]
pub(crate) fn dmax(gamma: Gamma, a: f64, da: f64, b: f64, db: f64) -> f64 {
    let (wa, wb) = max_weights(gamma, a, b);
    wa * da + wb * db
}

#[inline]
pub(crate) fn dmin(gamma: Gamma, a: f64, da: f64, b: f64, db: f64) -> f64 {
    let (wb, wa) = max_weights(gamma, a, b);
    wa * da + wb * db
}

#[inline]
fn dbell(g: f64, x: f64) -> f64 {
    (-(x * x) / (2.0 * g)).exp() * (-x / g)
}

#[inline]
pub(crate) fn dnequal(gamma: Gamma, a: f64, da: f64, b: f64, db: f64) -> f64 {
    dbell(gamma.0, a - b) * (da - db)
}

#[inline]
pub(crate) fn dlequal(gamma: Gamma, a: f64, da: f64, b: f64, db: f64) -> f64 {
    logistic((a - b) / gamma.0) * (da - db)
}
