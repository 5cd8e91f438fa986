use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    /// `w * ln(1 + x)`
    Log1p,
    /// `w * x^(1 - alpha) / (1 - alpha)`, alpha != 1
    AlphaFair,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UtilityError {
    #[error("utility evaluated at negative rate {0}")]
    NegativeRate(f64),
    #[error("invalid utility parameters: {0}")]
    Invalid(&'static str),
}

/// Strictly concave, increasing utility of a flow's admitted rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct UtilitySpec<T = f64> {
    pub kind: UtilityKind,
    #[serde(default = "unit_weight")]
    pub weight: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<T>,
}

fn unit_weight<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> Default for UtilitySpec<T> {
    fn default() -> Self {
        Self::log1p(T::one())
    }
}

impl<T: Scalar> UtilitySpec<T> {
    pub fn log1p(weight: T) -> Self {
        Self { kind: UtilityKind::Log1p, weight, alpha: None }
    }

    pub fn alpha_fair(weight: T, alpha: T) -> Self {
        Self { kind: UtilityKind::AlphaFair, weight, alpha: Some(alpha) }
    }

    pub fn check(&self) -> Result<(), UtilityError> {
        if !(self.weight > T::zero() && self.weight.is_finite()) {
            return Err(UtilityError::Invalid("weight must be positive and finite"));
        }
        match (self.kind, self.alpha) {
            (UtilityKind::Log1p, None) => Ok(()),
            (UtilityKind::Log1p, Some(_)) => Err(UtilityError::Invalid("log1p takes no alpha")),
            (UtilityKind::AlphaFair, Some(a)) if a > T::zero() && a != T::one() && a.is_finite() => Ok(()),
            (UtilityKind::AlphaFair, _) => Err(UtilityError::Invalid("alpha_fair needs alpha > 0 and alpha != 1")),
        }
    }

    fn alpha(&self) -> T {
        self.alpha.unwrap_or_else(T::one)
    }

    fn guard(x: T) -> Result<(), UtilityError> {
        if x < T::zero() || x.is_nan() {
            Err(UtilityError::NegativeRate(x.to_f64_lossy()))
        } else {
            Ok(())
        }
    }

    /// Utility at rate `x >= 0`. Alpha-fair with alpha > 1 is `-inf` at 0.
    pub fn value(&self, x: T) -> Result<T, UtilityError> {
        Self::guard(x)?;
        Ok(match self.kind {
            UtilityKind::Log1p => self.weight * x.ln_1p(),
            UtilityKind::AlphaFair => {
                let e = T::one() - self.alpha();
                self.weight * x.powf(e) / e
            }
        })
    }

    /// Marginal utility at `x >= 0`.
    pub fn derivative(&self, x: T) -> Result<T, UtilityError> {
        Self::guard(x)?;
        Ok(match self.kind {
            UtilityKind::Log1p => self.weight / (T::one() + x),
            UtilityKind::AlphaFair => self.weight * x.powf(-self.alpha()),
        })
    }

    /// Unconstrained maximizer of `m * g(x) - price * x` over `x >= 0`, i.e.
    /// the rate at which marginal utility equals `price / m`. Returns
    /// `+inf` for a zero price.
    pub fn price_response(&self, m: T, price: T) -> T {
        if price <= T::zero() {
            return T::infinity();
        }
        match self.kind {
            UtilityKind::Log1p => (m * self.weight / price - T::one()).max(T::zero()),
            UtilityKind::AlphaFair => (m * self.weight / price).powf(T::one() / self.alpha()),
        }
    }
}

/// Free-function forms used by the reports.
pub fn utility_value<T: Scalar>(spec: &UtilitySpec<T>, x: T) -> Result<T, UtilityError> {
    spec.value(x)
}

pub fn utility_derivative<T: Scalar>(spec: &UtilitySpec<T>, x: T) -> Result<T, UtilityError> {
    spec.derivative(x)
}
