//! The necklace family of integer solutions to the equal-weight constraint.
//!
//! Fix `q ≥ 2` and `l₀ = log q`, so that `tanh(n·l₀/2) = (qⁿ−1)/(qⁿ+1)` is
//! rational. With `c_n = (1/n)·Σ_{j|n} μ(n/j)·q^j` (the number of primitive
//! necklaces of length `n` in `q` colours), the assignment
//!
//! ```text
//! a(l₀) = q−1, b(l₀) = q+1, a(2l₀) = 1, b(2l₀) = 0,
//! a(nl₀) = b(nl₀) = c_n for odd n ≥ 3, and 0 for even n ≥ 4
//! ```
//!
//! satisfies, at every length `l = n·l₀`,
//!
//! ```text
//! Σ_k a(l/k)/k = Σ_{k odd} b(l/k)·tanh(l/2k)/k + Σ_{k even} b(l/k)/k.
//! ```
//!
//! The values grow like `qⁿ/n`, which is what rules the family out as the
//! discrepancy of two real surfaces.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

pub use crate::arith::mobius;
use crate::arith::{divisors, tanh_half_log_multiple};
use crate::discrepancy::{DiscrepancyError, DiscrepancyTable};
use crate::length::{LengthValue, DEFAULT_EPSILON};
use crate::spectrum::{LengthTwistSpectrum, Orientation, SpectrumError};

/// Largest `qⁿ` the brute-force necklace oracle will enumerate.
pub const ORACLE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("q must be at least 2, got {0}")]
    BaseTooSmall(u64),
    #[error("n must be at least 1")]
    ZeroIndex,
    #[error("n = {n} lies beyond the horizon N = {horizon}")]
    BeyondHorizon { n: u64, horizon: u64 },
    #[error("{q}^{n} strings is too many to enumerate")]
    TooLarge { q: u64, n: u64 },
    #[error("asymptotic ratio needs an odd n ≥ 3, got {0}")]
    EvenOrSmall(u64),
    #[error("multiplicity {0} does not fit in 64 bits")]
    MultiplicityOverflow(BigInt),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
}

fn check_q(q: u64) -> Result<(), ScenarioError> {
    if q < 2 {
        Err(ScenarioError::BaseTooSmall(q))
    } else {
        Ok(())
    }
}

/// `c_n = (1/n)·Σ_{j|n} μ(n/j)·q^j`, exactly.
pub fn necklace_count(q: u64, n: u64) -> BigUint {
    assert!(q >= 2 && n >= 1, "necklace_count needs q ≥ 2 and n ≥ 1");
    let qb = BigInt::from(q);
    let sum: BigInt = divisors(n)
        .into_iter()
        .map(|j| BigInt::from(mobius(n / j)) * Pow::pow(&qb, j))
        .sum();
    let (quot, rem) = sum.div_rem(&BigInt::from(n));
    assert!(
        rem.is_zero(),
        "n = {n} does not divide the Möbius sum for q = {q}"
    );
    quot.to_biguint().expect("necklace counts are positive")
}

/// Counts aperiodic strings of length `n` over `q` symbols up to rotation by
/// brute force: a class is counted through its unique representative that
/// is strictly smaller than each of its nontrivial rotations.
pub fn necklace_count_oracle(q: u64, n: u64) -> Result<u64, ScenarioError> {
    check_q(q)?;
    if n == 0 {
        return Err(ScenarioError::ZeroIndex);
    }
    let total = q
        .checked_pow(n as u32)
        .filter(|&t| t <= ORACLE_LIMIT)
        .ok_or(ScenarioError::TooLarge { q, n })?;
    let n = n as usize;
    let count = (0..total)
        .into_par_iter()
        .filter(|&code| {
            let mut word = vec![0u64; n];
            let mut c = code;
            for slot in word.iter_mut().rev() {
                *slot = c % q;
                c /= q;
            }
            (1..n).all(|r| {
                let rotated = word[r..].iter().chain(&word[..r]);
                word.iter().cmp(rotated).is_lt()
            })
        })
        .count();
    Ok(count as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSolution {
    q: u64,
    horizon: u64,
    a: BTreeMap<u64, BigInt>,
    b: BTreeMap<u64, BigInt>,
}

/// Explicit solution for base `q` at lengths `n·log q`, `1 ≤ n ≤ horizon`.
pub fn build_scenario(q: u64, horizon: u64) -> Result<ScenarioSolution, ScenarioError> {
    check_q(q)?;
    if horizon == 0 {
        return Err(ScenarioError::ZeroIndex);
    }
    let rows: Vec<(u64, BigInt, BigInt)> = (1..=horizon)
        .into_par_iter()
        .map(|n| {
            let (a, b) = match n {
                1 => (BigInt::from(q - 1), BigInt::from(q + 1)),
                2 => (BigInt::one(), BigInt::zero()),
                n if n % 2 == 1 => {
                    let c = BigInt::from(necklace_count(q, n));
                    (c.clone(), c)
                }
                _ => (BigInt::zero(), BigInt::zero()),
            };
            (n, a, b)
        })
        .collect();
    let mut sol = ScenarioSolution {
        q,
        horizon,
        a: BTreeMap::new(),
        b: BTreeMap::new(),
    };
    for (n, a, b) in rows {
        sol.a.insert(n, a);
        sol.b.insert(n, b);
    }
    Ok(sol)
}

impl ScenarioSolution {
    /// Builds a solution from arbitrary user values; missing indices are 0.
    pub fn from_values(
        q: u64,
        horizon: u64,
        a: BTreeMap<u64, BigInt>,
        b: BTreeMap<u64, BigInt>,
    ) -> Result<Self, ScenarioError> {
        check_q(q)?;
        if let Some(&n) = a.keys().chain(b.keys()).find(|&&n| n == 0 || n > horizon) {
            return Err(if n == 0 {
                ScenarioError::ZeroIndex
            } else {
                ScenarioError::BeyondHorizon { n, horizon }
            });
        }
        Ok(ScenarioSolution { q, horizon, a, b })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `a(n·l₀)`.
    pub fn a(&self, n: u64) -> BigInt {
        self.a.get(&n).cloned().unwrap_or_default()
    }

    /// `b(n·l₀)`.
    pub fn b(&self, n: u64) -> BigInt {
        self.b.get(&n).cloned().unwrap_or_default()
    }

    pub fn length(&self, n: u64) -> LengthValue {
        LengthValue::log_multiple(self.q, n).expect("q ≥ 2 and n ≥ 1")
    }

    pub fn horizon_length(&self) -> LengthValue {
        self.length(self.horizon)
    }

    pub fn to_discrepancy_table(&self) -> Result<DiscrepancyTable, ScenarioError> {
        let rows = (1..=self.horizon).map(|n| (self.length(n), self.a(n), self.b(n)));
        Ok(DiscrepancyTable::new(rows, self.horizon_length())?)
    }

    /// A pair of synthetic spectra `(A, B)` whose primitive discrepancy is
    /// this solution, with all iterates up to the horizon included.
    /// Positive `a` adds preserving primitives to `A`, negative to `B`;
    /// positive `b` adds reversing primitives to `B`, negative to `A`.
    pub fn to_spectra(&self) -> Result<(LengthTwistSpectrum, LengthTwistSpectrum), ScenarioError> {
        let mut prim_a = Vec::new();
        let mut prim_b = Vec::new();
        let mult = |v: &BigInt| -> Result<u64, ScenarioError> {
            v.magnitude()
                .to_u64()
                .ok_or_else(|| ScenarioError::MultiplicityOverflow(v.clone()))
        };
        for n in 1..=self.horizon {
            let (a, b) = (self.a(n), self.b(n));
            let l = self.length(n);
            match a.sign() {
                num_bigint::Sign::Plus => {
                    prim_a.push((l.clone(), Orientation::Preserving, mult(&a)?))
                }
                num_bigint::Sign::Minus => {
                    prim_b.push((l.clone(), Orientation::Preserving, mult(&a)?))
                }
                num_bigint::Sign::NoSign => {}
            }
            match b.sign() {
                num_bigint::Sign::Plus => {
                    prim_b.push((l.clone(), Orientation::Reversing, mult(&b)?))
                }
                num_bigint::Sign::Minus => {
                    prim_a.push((l.clone(), Orientation::Reversing, mult(&b)?))
                }
                num_bigint::Sign::NoSign => {}
            }
        }
        let h = self.horizon_length();
        Ok((
            LengthTwistSpectrum::from_primitives(prim_a, h.clone(), DEFAULT_EPSILON)?,
            LengthTwistSpectrum::from_primitives(prim_b, h, DEFAULT_EPSILON)?,
        ))
    }
}

/// Left side minus right side of the equal-weight constraint at `n·l₀`:
///
/// `Σ_{k|n} a(n/k)/k − Σ_{k|n, k odd} b(n/k)·tanh(n·l₀/2)/k − Σ_{k|n, k even} b(n/k)/k`.
///
/// An odd iterate of a reversing geodesic is a reversing geodesic of length
/// `n·l₀`, so its weight carries `tanh(n·l₀/2)`, not the tanh of its root.
pub fn verify_constraint(sol: &ScenarioSolution, n: u64) -> Result<BigRational, ScenarioError> {
    if n == 0 {
        return Err(ScenarioError::ZeroIndex);
    }
    if n > sol.horizon {
        return Err(ScenarioError::BeyondHorizon {
            n,
            horizon: sol.horizon,
        });
    }
    let tanh_n = tanh_half_log_multiple(sol.q, n);
    let mut residual = BigRational::zero();
    for k in divisors(n) {
        let m = n / k;
        let inv_k = BigRational::new(BigInt::one(), BigInt::from(k));
        residual += BigRational::from_integer(sol.a(m)) * &inv_k;
        let b = BigRational::from_integer(sol.b(m)) * &inv_k;
        if k % 2 == 1 {
            residual -= b * &tanh_n;
        } else {
            residual -= b;
        }
    }
    Ok(residual)
}

/// `c_n·n/qⁿ`, which tends to 1.
pub fn asymptotic_ratio(q: u64, n: u64) -> Result<BigRational, ScenarioError> {
    check_q(q)?;
    if n < 3 || n.is_multiple_of(2) {
        return Err(ScenarioError::EvenOrSmall(n));
    }
    let c = BigInt::from(necklace_count(q, n));
    Ok(BigRational::new(
        c * BigInt::from(n),
        Pow::pow(BigInt::from(q), n),
    ))
}

/// One line of the exported scenario table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    pub n: u64,
    pub c: BigUint,
    pub a: BigInt,
    pub b: BigInt,
    pub residual: BigRational,
}

pub fn scenario_rows(sol: &ScenarioSolution) -> Result<Vec<ScenarioRow>, ScenarioError> {
    (1..=sol.horizon)
        .into_par_iter()
        .map(|n| {
            Ok(ScenarioRow {
                n,
                c: necklace_count(sol.q, n),
                a: sol.a(n),
                b: sol.b(n),
                residual: verify_constraint(sol, n)?,
            })
        })
        .collect()
}
