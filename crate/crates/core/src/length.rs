//! Geodesic lengths.
//!
//! A length is either an exact rational multiple of `log q` or a plain
//! floating-point value. Exact lengths are reduced to the smallest integer
//! root of their base before comparison, so `2·log 2` and `1·log 4` are the
//! same value and lengths over unrelated roots are never equal. Any
//! comparison involving a numeric length uses an absolute tolerance.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{perfect_power_root, tanh_half_log_multiple};

/// Default absolute tolerance when matching numeric lengths.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LengthError {
    #[error("exact length base must be at least 2, got {0}")]
    BaseTooSmall(u64),
    #[error("exact length multiplier must be positive, got {0}")]
    NonPositiveMultiplier(BigRational),
    #[error("numeric length must be positive and finite, got {0}")]
    InvalidNumeric(f64),
    #[error("length {0} is not an exact multiple of a logarithm")]
    Inexact(LengthValue),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LengthValue {
    /// `mult · log(base)`.
    Exact {
        base: u64,
        mult: BigRational,
    },
    Numeric(f64),
}

impl LengthValue {
    pub fn exact(base: u64, mult: BigRational) -> Result<Self, LengthError> {
        if base < 2 {
            return Err(LengthError::BaseTooSmall(base));
        }
        if !mult.is_positive() {
            return Err(LengthError::NonPositiveMultiplier(mult));
        }
        Ok(LengthValue::Exact { base, mult })
    }

    /// `n · log(base)`.
    pub fn log_multiple(base: u64, n: u64) -> Result<Self, LengthError> {
        Self::exact(base, BigRational::from_integer(n.into()))
    }

    pub fn numeric(value: f64) -> Result<Self, LengthError> {
        if value.is_finite() && value > 0.0 {
            Ok(LengthValue::Numeric(value))
        } else {
            Err(LengthError::InvalidNumeric(value))
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, LengthValue::Exact { .. })
    }

    /// Exact lengths rewritten over the smallest integer root of their base.
    pub fn canonical(&self) -> Option<(u64, BigRational)> {
        match self {
            LengthValue::Exact { base, mult } => {
                let (root, e) = perfect_power_root(*base);
                Some((root, mult * BigRational::from_integer(e.into())))
            }
            LengthValue::Numeric(_) => None,
        }
    }

    /// `n` when the length is `n·log(root)` for the canonical root and a
    /// positive integer `n`.
    pub fn integer_multiple(&self) -> Option<(u64, BigInt)> {
        let (root, mult) = self.canonical()?;
        mult.is_integer().then(|| (root, mult.to_integer()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LengthValue::Exact { .. } => {
                let (root, mult) = self.canonical().expect("exact");
                rational_to_f64(&mult) * (root as f64).ln()
            }
            LengthValue::Numeric(v) => *v,
        }
    }

    /// `k` times this length, staying exact when possible.
    pub fn scale(&self, k: u64) -> LengthValue {
        match self {
            LengthValue::Exact { base, mult } => LengthValue::Exact {
                base: *base,
                mult: mult * BigRational::from_integer(k.into()),
            },
            LengthValue::Numeric(v) => LengthValue::Numeric(v * k as f64),
        }
    }

    /// `self / other` as an exact rational. `Ok(None)` means the two are
    /// exact but incommensurable (different canonical roots).
    pub fn exact_ratio(&self, other: &LengthValue) -> Result<Option<BigRational>, LengthError> {
        let (ra, ma) = self
            .canonical()
            .ok_or_else(|| LengthError::Inexact(self.clone()))?;
        let (rb, mb) = other
            .canonical()
            .ok_or_else(|| LengthError::Inexact(other.clone()))?;
        Ok((ra == rb).then(|| ma / mb))
    }

    /// Exact equality for exact pairs, `|Δ| ≤ eps` otherwise.
    pub fn same_as(&self, other: &LengthValue, eps: f64) -> bool {
        self.cmp_within(other, eps) == Ordering::Equal
    }

    pub fn cmp_within(&self, other: &LengthValue, eps: f64) -> Ordering {
        match (self.canonical(), other.canonical()) {
            (Some((ra, ma)), Some((rb, mb))) if ra == rb => ma.cmp(&mb),
            // Distinct roots are rationally independent: never equal.
            (Some(_), Some(_)) => {
                let (a, b) = (self.to_f64(), other.to_f64());
                a.partial_cmp(&b).unwrap_or(Ordering::Equal)
            }
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if (a - b).abs() <= eps {
                    Ordering::Equal
                } else {
                    a.total_cmp(&b)
                }
            }
        }
    }

    /// Deterministic total order used for sorting before tolerance sweeps.
    pub(crate) fn sort_cmp(&self, other: &LengthValue) -> Ordering {
        self.to_f64().total_cmp(&other.to_f64()).then_with(|| {
            match (self.canonical(), other.canonical()) {
                (Some((ra, ma)), Some((rb, mb))) => ra.cmp(&rb).then(ma.cmp(&mb)),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            }
        })
    }

    /// `tanh(l/2)`, exact when the length is an integer multiple of the log
    /// of its canonical root.
    pub fn tanh_half(&self) -> Weight {
        match self.integer_multiple() {
            Some((root, n)) => match n.to_u64() {
                Some(n) => Weight::Exact(tanh_half_log_multiple(root, n)),
                None => Weight::Numeric((self.to_f64() / 2.0).tanh()),
            },
            None => Weight::Numeric((self.to_f64() / 2.0).tanh()),
        }
    }
}

impl fmt::Display for LengthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthValue::Exact { base, mult } => write!(f, "{mult}·log {base}"),
            LengthValue::Numeric(v) => write!(f, "{v}"),
        }
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both parts down so neither overflows.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// A weight or sum of weights: exact while every contribution is exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Exact(BigRational),
    Numeric(f64),
}

/// Relative tolerance for comparing weights once any numeric term is involved.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

impl Weight {
    pub fn zero() -> Self {
        Weight::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Weight::Exact(BigRational::one())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Weight::Exact(r) => rational_to_f64(r),
            Weight::Numeric(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Weight::Exact(r) => Some(r),
            Weight::Numeric(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Weight::Exact(r) => r.is_zero(),
            Weight::Numeric(v) => *v == 0.0,
        }
    }

    pub fn scale(&self, factor: &BigRational) -> Weight {
        match self {
            Weight::Exact(r) => Weight::Exact(r * factor),
            Weight::Numeric(v) => Weight::Numeric(v * rational_to_f64(factor)),
        }
    }

    /// Exact equality when both sides are exact; otherwise relative
    /// agreement within [`WEIGHT_TOLERANCE`].
    pub fn matches(&self, other: &Weight) -> bool {
        match (self, other) {
            (Weight::Exact(a), Weight::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= WEIGHT_TOLERANCE * a.abs().max(b.abs()).max(1.0)
            }
        }
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        match (self, rhs) {
            (Weight::Exact(a), Weight::Exact(b)) => Weight::Exact(a + b),
            (a, b) => Weight::Numeric(a.to_f64() + b.to_f64()),
        }
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        let lhs = std::mem::replace(self, Weight::zero());
        *self = lhs + rhs;
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Exact(r) => write!(f, "{r}"),
            Weight::Numeric(v) => write!(f, "{v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(LengthValue::exact(1, rat(1, 1)).is_err());
        assert!(LengthValue::exact(2, rat(0, 1)).is_err());
        assert!(LengthValue::exact(2, rat(-1, 3)).is_err());
        assert!(LengthValue::numeric(0.0).is_err());
        assert!(LengthValue::numeric(f64::NAN).is_err());
    }

    #[test]
    fn exact_comparison_across_power_bases() {
        let a = LengthValue::log_multiple(4, 1).unwrap();
        let b = LengthValue::log_multiple(2, 2).unwrap();
        assert!(a.same_as(&b, 0.0));
        let c = LengthValue::log_multiple(3, 1).unwrap();
        assert_eq!(a.cmp_within(&c, 1.0), Ordering::Greater);
        assert!(!c.same_as(&LengthValue::log_multiple(2, 1).unwrap(), 1.0));
    }

    #[test]
    fn numeric_tolerance() {
        let a = LengthValue::log_multiple(2, 1).unwrap();
        let b = LengthValue::numeric(std::f64::consts::LN_2 + 1e-12).unwrap();
        assert!(a.same_as(&b, 1e-9));
        assert!(!a.same_as(&b, 1e-14));
    }

    #[test]
    fn exact_tanh_on_integer_multiples() {
        let l = LengthValue::log_multiple(3, 2).unwrap();
        assert_eq!(l.tanh_half(), Weight::Exact(rat(4, 5)));
        // 1/2 · log 4 = log 2
        let half = LengthValue::exact(4, rat(1, 2)).unwrap();
        assert_eq!(half.tanh_half(), Weight::Exact(rat(1, 3)));
        let irr = LengthValue::exact(2, rat(1, 2)).unwrap();
        assert!(matches!(irr.tanh_half(), Weight::Numeric(_)));
    }

    #[test]
    fn ratio_of_incommensurable_lengths_is_none() {
        let a = LengthValue::log_multiple(2, 1).unwrap();
        let b = LengthValue::log_multiple(3, 1).unwrap();
        assert_eq!(a.exact_ratio(&b).unwrap(), None);
        let c = LengthValue::log_multiple(8, 1).unwrap();
        assert_eq!(c.exact_ratio(&a).unwrap(), Some(rat(3, 1)));
        assert!(LengthValue::numeric(1.0).unwrap().exact_ratio(&a).is_err());
    }

    #[test]
    fn weights_degrade_to_numeric() {
        let w = Weight::Exact(rat(1, 3)) + Weight::Exact(rat(1, 1));
        assert_eq!(w, Weight::Exact(rat(4, 3)));
        let n = w + Weight::Numeric(0.5);
        assert!(matches!(n, Weight::Numeric(_)));
        assert!(n.matches(&Weight::Exact(rat(11, 6))));
    }
}
