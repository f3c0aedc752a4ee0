//! Discrepancy between two spectra with equal total weight.
//!
//! `a(l)` is the excess of primitive orientation-preserving geodesics of
//! `A` over `B` at length `l`; `b(l)` is the excess of primitive
//! orientation-reversing geodesics of `B` over `A` (note the swap). Every
//! routine that reasons about divisibility of lengths requires exact
//! lengths sharing one canonical root.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{is_prime, tanh_half_log_multiple};
use crate::length::{LengthError, LengthValue, DEFAULT_EPSILON};
use crate::spectrum::{
    check_horizons, joint_groups, LengthTwistSpectrum, Orientation, SpectrumError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscrepancyError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Length(LengthError),
    #[error("length {0} is numeric; divisibility needs exact lengths")]
    InexactLength(LengthValue),
    #[error("lengths over incommensurable bases {0} and {1}")]
    MixedBases(u64, u64),
    #[error("duplicate length {0} in discrepancy table")]
    DuplicateLength(LengthValue),
    #[error("length {length} lies beyond the horizon {horizon}")]
    BeyondHorizon {
        length: LengthValue,
        horizon: LengthValue,
    },
    #[error("{length} is a proper multiple of {divisor}, which is in the support")]
    NotMinimal {
        length: LengthValue,
        divisor: LengthValue,
    },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{p}·({length}) is also a multiple of {other}")]
    PrimeCollision {
        p: u64,
        length: LengthValue,
        other: LengthValue,
    },
    #[error("{0} is an integer multiple of {1}")]
    RatioIsInteger(LengthValue, LengthValue),
}

impl From<LengthError> for DiscrepancyError {
    fn from(e: LengthError) -> Self {
        match e {
            LengthError::Inexact(l) => DiscrepancyError::InexactLength(l),
            other => DiscrepancyError::Length(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyRow {
    pub length: LengthValue,
    pub a: BigInt,
    pub b: BigInt,
}

/// `a` and `b` over a set of pairwise distinct lengths. Rows where both are
/// zero are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyTable {
    rows: Vec<DiscrepancyRow>,
    horizon: LengthValue,
}

impl DiscrepancyTable {
    pub fn new<I>(rows: I, horizon: LengthValue) -> Result<Self, DiscrepancyError>
    where
        I: IntoIterator<Item = (LengthValue, BigInt, BigInt)>,
    {
        let mut out: Vec<DiscrepancyRow> = Vec::new();
        for (length, a, b) in rows {
            if length.cmp_within(&horizon, DEFAULT_EPSILON).is_gt() {
                return Err(DiscrepancyError::BeyondHorizon {
                    length,
                    horizon: horizon.clone(),
                });
            }
            if out
                .iter()
                .any(|r| r.length.same_as(&length, DEFAULT_EPSILON))
            {
                return Err(DiscrepancyError::DuplicateLength(length));
            }
            out.push(DiscrepancyRow { length, a, b });
        }
        out.retain(|r| !(r.a.is_zero() && r.b.is_zero()));
        out.sort_by(|x, y| x.length.sort_cmp(&y.length));
        Ok(DiscrepancyTable { rows: out, horizon })
    }

    pub fn rows(&self) -> &[DiscrepancyRow] {
        &self.rows
    }

    pub fn horizon(&self) -> &LengthValue {
        &self.horizon
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    fn row(&self, l: &LengthValue) -> Option<&DiscrepancyRow> {
        self.rows
            .iter()
            .find(|r| r.length.same_as(l, DEFAULT_EPSILON))
    }

    pub fn a(&self, l: &LengthValue) -> BigInt {
        self.row(l).map(|r| r.a.clone()).unwrap_or_default()
    }

    pub fn b(&self, l: &LengthValue) -> BigInt {
        self.row(l).map(|r| r.b.clone()).unwrap_or_default()
    }

    /// Canonical root shared by every length of the table (and `extra`).
    fn common_root<'a>(
        &'a self,
        extra: &'a [&'a LengthValue],
    ) -> Result<Option<u64>, DiscrepancyError> {
        let mut root = None;
        for l in self
            .rows
            .iter()
            .map(|r| &r.length)
            .chain(extra.iter().copied())
        {
            let (r, _) = l
                .canonical()
                .ok_or_else(|| DiscrepancyError::InexactLength(l.clone()))?;
            match root {
                None => root = Some(r),
                Some(r0) if r0 != r => return Err(DiscrepancyError::MixedBases(r0, r)),
                _ => {}
            }
        }
        Ok(root)
    }
}

/// Discrepancy of primitive geodesic counts between `a` and `b`.
pub fn discrepancy(
    a: &LengthTwistSpectrum,
    b: &LengthTwistSpectrum,
) -> Result<DiscrepancyTable, DiscrepancyError> {
    let horizon = check_horizons(a, b)?;
    let mut rows = Vec::new();
    for (length, ea, eb) in joint_groups(a, b) {
        let count = |entries: &[&crate::spectrum::GeodesicEntry], o: Orientation| -> BigInt {
            entries
                .iter()
                .filter(|e| e.nu == 1 && e.orientation == o)
                .map(|e| BigInt::from(e.multiplicity))
                .sum()
        };
        let alpha = count(&ea, Orientation::Preserving) - count(&eb, Orientation::Preserving);
        let beta = count(&eb, Orientation::Reversing) - count(&ea, Orientation::Reversing);
        rows.push((length, alpha, beta));
    }
    DiscrepancyTable::new(rows, horizon)
}

fn divides(small: &LengthValue, big: &LengthValue) -> bool {
    matches!(big.exact_ratio(small), Ok(Some(r)) if r.is_integer())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSets {
    /// Lengths where `a` or `b` is nonzero, ascending.
    pub support: Vec<LengthValue>,
    /// Elements of the support that are not a proper multiple of another.
    pub minimal: Vec<LengthValue>,
}

/// The support `L` of a table and its divisibility-minimal elements `L0`
/// (`l ⪯ m` iff `m = k·l` for a positive integer `k`).
pub fn support_sets(t: &DiscrepancyTable) -> Result<SupportSets, DiscrepancyError> {
    t.common_root(&[])?;
    let support: Vec<LengthValue> = t.rows.iter().map(|r| r.length.clone()).collect();
    let minimal = support
        .iter()
        .filter(|l| !support.iter().any(|m| m != *l && divides(m, l)))
        .cloned()
        .collect();
    Ok(SupportSets { support, minimal })
}

/// Support element strictly dividing `l`, if any. A length with none is
/// minimal in the sense used below, whether or not it is in the support.
fn strict_divisor(t: &DiscrepancyTable, l: &LengthValue) -> Option<LengthValue> {
    t.rows
        .iter()
        .map(|r| &r.length)
        .find(|m| !m.same_as(l, 0.0) && divides(m, l))
        .cloned()
}

fn tanh_half_exact(l: &LengthValue) -> Result<(u64, u64, BigRational), DiscrepancyError> {
    let (root, n) = l
        .integer_multiple()
        .ok_or_else(|| DiscrepancyError::InexactLength(l.clone()))?;
    let n = n
        .to_u64()
        .ok_or_else(|| DiscrepancyError::InexactLength(l.clone()))?;
    Ok((root, n, tanh_half_log_multiple(root, n)))
}

/// `a(l) − tanh(l/2)·b(l)` at a minimal length, exactly. At such a length
/// only primitive geodesics can differ, so equal total weight forces this
/// residual to vanish.
pub fn lemma1_residual(
    t: &DiscrepancyTable,
    l: &LengthValue,
) -> Result<BigRational, DiscrepancyError> {
    t.common_root(&[l])?;
    if let Some(divisor) = strict_divisor(t, l) {
        return Err(DiscrepancyError::NotMinimal {
            length: l.clone(),
            divisor,
        });
    }
    let (_, _, tanh) = tanh_half_exact(l)?;
    Ok(BigRational::from_integer(t.a(l)) - tanh * BigRational::from_integer(t.b(l)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcedGrowth {
    /// The value of `b(p·l)` forced by equal total weight at `p·l`.
    pub forced_b: BigRational,
    /// `e^{p·l}/(2p)`, exact as `root^{p·n}/(2p)` for `l = n·log(root)`.
    pub lower_bound: BigRational,
}

/// Solves the weight balance at `p·l` for `b(p·l)`, given `a(l)`, `b(l)`
/// and the difference `b(p·l) − a(p·l)` from the table:
///
/// `b(pl) = [ (tanh(pl/2)·b(l) − a(l))/p + (b(pl) − a(pl)) ] / (1 − tanh(pl/2))`.
///
/// Valid only when the sole lengths in play at `p·l` are `l` and `p·l`.
pub fn forced_growth(
    t: &DiscrepancyTable,
    l: &LengthValue,
    p: u64,
) -> Result<ForcedGrowth, DiscrepancyError> {
    if p.is_multiple_of(2) || !is_prime(p) {
        return Err(DiscrepancyError::NotOddPrime(p));
    }
    t.common_root(&[l])?;
    if let Some(divisor) = strict_divisor(t, l) {
        return Err(DiscrepancyError::NotMinimal {
            length: l.clone(),
            divisor,
        });
    }
    let minimal = support_sets(t)?.minimal;
    for other in minimal.iter().filter(|m| !m.same_as(l, 0.0)) {
        if divides(l, other) {
            // `other` is a multiple of `l`; it collides exactly when other = p·l.
            if other.same_as(&l.scale(p), 0.0) {
                return Err(DiscrepancyError::PrimeCollision {
                    p,
                    length: l.clone(),
                    other: other.clone(),
                });
            }
            continue;
        }
        if odd_prime_multiples(l, other, p)?.contains(&p) {
            return Err(DiscrepancyError::PrimeCollision {
                p,
                length: l.clone(),
                other: other.clone(),
            });
        }
    }
    let pl = l.scale(p);
    let (root, n, _) = tanh_half_exact(l)?;
    let tanh_pl = tanh_half_log_multiple(root, p * n);
    let p_rat = BigRational::from_integer(p.into());
    let a_l = BigRational::from_integer(t.a(l));
    let b_l = BigRational::from_integer(t.b(l));
    let gap_pl = BigRational::from_integer(t.b(&pl) - t.a(&pl));
    let numerator = (&tanh_pl * b_l - a_l) / &p_rat + gap_pl;
    let forced_b = numerator / (BigRational::one() - tanh_pl);
    let e_pl: BigInt = Pow::pow(BigInt::from(root), p * n);
    let lower_bound = BigRational::new(e_pl, BigInt::from(2 * p));
    Ok(ForcedGrowth {
        forced_b,
        lower_bound,
    })
}

/// Odd primes `p ≤ bound` with `p·l` an integer multiple of `l1`. At most
/// one such prime exists: writing `l/l1 = u/v` in lowest terms, `p·u/v` is
/// an integer exactly when `v = p`.
pub fn odd_prime_multiples(
    l: &LengthValue,
    l1: &LengthValue,
    bound: u64,
) -> Result<BTreeSet<u64>, DiscrepancyError> {
    let ratio = match l.exact_ratio(l1)? {
        Some(r) => r,
        None => return Ok(BTreeSet::new()),
    };
    if ratio.is_integer() && ratio.is_positive() {
        return Err(DiscrepancyError::RatioIsInteger(l.clone(), l1.clone()));
    }
    let mut out = BTreeSet::new();
    if let Some(v) = ratio.denom().to_u64() {
        if v % 2 == 1 && v <= bound && is_prime(v) {
            out.insert(v);
        }
    }
    Ok(out)
}
