//! Length–twist spectra of (possibly non-orientable, possibly disconnected)
//! hyperbolic surfaces, truncated at a horizon.
//!
//! Geodesics are oriented: every unoriented closed geodesic contributes two
//! entries' worth of multiplicity. Lengths above the horizon are unknown,
//! not absent, so every comparison here is "up to the horizon".

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::length::{LengthValue, Weight, DEFAULT_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Preserving,
    Reversing,
}

impl Orientation {
    /// Orientation type of the `k`-th iterate.
    pub fn power(self, k: u32) -> Orientation {
        match self {
            Orientation::Reversing if k % 2 == 1 => Orientation::Reversing,
            _ => Orientation::Preserving,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Preserving => "preserving",
            Orientation::Reversing => "reversing",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicEntry {
    pub length: LengthValue,
    pub orientation: Orientation,
    /// Imprimitivity index: how many times the geodesic wraps its primitive.
    pub nu: u32,
    /// Number of oriented geodesics sharing these data.
    pub multiplicity: u64,
}

impl GeodesicEntry {
    pub fn new(length: LengthValue, orientation: Orientation, nu: u32, multiplicity: u64) -> Self {
        GeodesicEntry {
            length,
            orientation,
            nu,
            multiplicity,
        }
    }

    pub fn primitive(length: LengthValue, orientation: Orientation, multiplicity: u64) -> Self {
        Self::new(length, orientation, 1, multiplicity)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid entry at length {length}: {reason}")]
    InvalidEntry { length: LengthValue, reason: String },
    #[error("entry at length {length} lies beyond the horizon {horizon}")]
    EntryBeyondHorizon {
        length: LengthValue,
        horizon: LengthValue,
    },
    #[error("query at length {length} lies beyond the horizon {horizon}")]
    QueryBeyondHorizon {
        length: LengthValue,
        horizon: LengthValue,
    },
    #[error("horizons differ: {0} vs {1}")]
    HorizonMismatch(LengthValue, LengthValue),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("odd number ({multiplicity}) of oriented {orientation} geodesics with nu={nu} at length {length}")]
    OddMultiplicity {
        length: LengthValue,
        orientation: Orientation,
        nu: u32,
        multiplicity: u64,
    },
    #[error("iterates are inconsistent with primitives at length {}", .0.length)]
    ClosureViolation(Box<ConjugacyWitness>),
    #[error("multiplicity overflow")]
    MultiplicityOverflow,
}

/// Weight of one oriented geodesic: `1/ν`, times `tanh(l/2)` when the
/// geodesic reverses orientation.
pub fn weight(entry: &GeodesicEntry) -> Weight {
    let inv_nu = BigRational::new(1.into(), entry.nu.into());
    match entry.orientation {
        Orientation::Preserving => Weight::Exact(inv_nu),
        Orientation::Reversing => entry.length.tanh_half().scale(&inv_nu),
    }
}

fn entry_mass(entry: &GeodesicEntry) -> Weight {
    weight(entry).scale(&BigRational::from_integer(entry.multiplicity.into()))
}

/// Single-linkage clustering of lengths within `eps` using one sorted sweep.
/// Exact pairs merge only when exactly equal. The representative is the
/// first exact member, or the smallest member if none is exact.
pub(crate) fn cluster<T>(mut items: Vec<(LengthValue, T)>, eps: f64) -> Vec<(LengthValue, Vec<T>)> {
    items.sort_by(|a, b| a.0.sort_cmp(&b.0));
    let mut out: Vec<(LengthValue, Vec<T>, LengthValue)> = Vec::new();
    for (len, item) in items {
        match out.last_mut() {
            Some((rep, members, last)) if last.same_as(&len, eps) => {
                if !rep.is_exact() && len.is_exact() {
                    *rep = len.clone();
                }
                members.push(item);
                *last = len;
            }
            _ => out.push((len.clone(), vec![item], len)),
        }
    }
    out.into_iter()
        .map(|(rep, members, _)| (rep, members))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthTwistSpectrum {
    entries: Vec<GeodesicEntry>,
    horizon: LengthValue,
    epsilon: f64,
}

impl LengthTwistSpectrum {
    pub fn new(entries: Vec<GeodesicEntry>, horizon: LengthValue) -> Result<Self, SpectrumError> {
        Self::with_epsilon(entries, horizon, DEFAULT_EPSILON)
    }

    /// Builds a spectrum, merging entries whose lengths agree within
    /// `epsilon` and whose orientation and `nu` coincide.
    pub fn with_epsilon(
        entries: Vec<GeodesicEntry>,
        horizon: LengthValue,
        epsilon: f64,
    ) -> Result<Self, SpectrumError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(SpectrumError::InvalidEpsilon(epsilon));
        }
        for e in &entries {
            if e.nu == 0 {
                return Err(SpectrumError::InvalidEntry {
                    length: e.length.clone(),
                    reason: "nu must be at least 1".into(),
                });
            }
            if e.multiplicity == 0 {
                return Err(SpectrumError::InvalidEntry {
                    length: e.length.clone(),
                    reason: "multiplicity must be positive".into(),
                });
            }
            if e.length.cmp_within(&horizon, epsilon).is_gt() {
                return Err(SpectrumError::EntryBeyondHorizon {
                    length: e.length.clone(),
                    horizon: horizon.clone(),
                });
            }
        }
        let tagged = entries.into_iter().map(|e| (e.length.clone(), e)).collect();
        let mut merged = Vec::new();
        for (rep, members) in cluster(tagged, epsilon) {
            let mut agg: BTreeMap<(Orientation, u32), u64> = BTreeMap::new();
            for m in members {
                let slot = agg.entry((m.orientation, m.nu)).or_default();
                *slot = slot
                    .checked_add(m.multiplicity)
                    .ok_or(SpectrumError::MultiplicityOverflow)?;
            }
            merged.extend(agg.into_iter().map(|((orientation, nu), multiplicity)| {
                GeodesicEntry::new(rep.clone(), orientation, nu, multiplicity)
            }));
        }
        Ok(LengthTwistSpectrum {
            entries: merged,
            horizon,
            epsilon,
        })
    }

    /// Spectrum generated by primitive geodesics together with all their
    /// iterates up to the horizon. The `k`-th iterate of a reversing
    /// primitive is reversing for odd `k` and preserving for even `k`.
    pub fn from_primitives<I>(
        primitives: I,
        horizon: LengthValue,
        epsilon: f64,
    ) -> Result<Self, SpectrumError>
    where
        I: IntoIterator<Item = (LengthValue, Orientation, u64)>,
    {
        let mut entries = Vec::new();
        for (length, orientation, multiplicity) in primitives {
            let mut k = 1u32;
            loop {
                let lk = length.scale(k as u64);
                if lk.cmp_within(&horizon, epsilon).is_gt() {
                    break;
                }
                entries.push(GeodesicEntry::new(
                    lk,
                    orientation.power(k),
                    k,
                    multiplicity,
                ));
                k += 1;
            }
        }
        Self::with_epsilon(entries, horizon, epsilon)
    }

    pub fn empty(horizon: LengthValue) -> Self {
        LengthTwistSpectrum {
            entries: Vec::new(),
            horizon,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// Entries sorted by length, then orientation, then `nu`.
    pub fn entries(&self) -> &[GeodesicEntry] {
        &self.entries
    }

    pub fn horizon(&self) -> &LengthValue {
        &self.horizon
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries grouped by (representative) length, ascending.
    pub fn length_groups(&self) -> impl Iterator<Item = (&LengthValue, &[GeodesicEntry])> {
        self.entries
            .chunk_by(|a, b| a.length == b.length)
            .map(|chunk| (&chunk[0].length, chunk))
    }

    /// Disjoint union, i.e. the spectrum of the disconnected surface.
    pub fn union(&self, other: &LengthTwistSpectrum) -> Result<Self, SpectrumError> {
        let horizon = common_horizon(self, other)?;
        let entries = self.entries.iter().chain(&other.entries).cloned().collect();
        Self::with_epsilon(entries, horizon, self.epsilon.max(other.epsilon))
    }

    /// Total weight `W(l)`: the sum of weights of all geodesics of length `l`.
    pub fn total_weight(&self, l: &LengthValue) -> Result<Weight, SpectrumError> {
        if l.cmp_within(&self.horizon, self.epsilon).is_gt() {
            return Err(SpectrumError::QueryBeyondHorizon {
                length: l.clone(),
                horizon: self.horizon.clone(),
            });
        }
        Ok(self
            .entries
            .iter()
            .filter(|e| e.length.same_as(l, self.epsilon))
            .fold(Weight::zero(), |acc, e| acc + entry_mass(e)))
    }

    /// `(l, W(l))` for every length carrying geodesics.
    pub fn weight_profile(&self) -> Vec<(LengthValue, Weight)> {
        self.length_groups()
            .map(|(l, group)| {
                let w = group
                    .iter()
                    .fold(Weight::zero(), |acc, e| acc + entry_mass(e));
                (l.clone(), w)
            })
            .collect()
    }

    pub fn counting_function(&self) -> CountingFunction {
        CountingFunction {
            jumps: self
                .length_groups()
                .map(|(l, group)| {
                    (
                        l.clone(),
                        group.iter().map(|e| e.multiplicity as u128).sum(),
                    )
                })
                .collect(),
            horizon: self.horizon.clone(),
            epsilon: self.epsilon,
        }
    }

    /// Checks the data a real surface must satisfy: an even number of
    /// oriented geodesics for every (length, orientation, ν), and iterates
    /// exactly accounted for by primitives.
    pub fn validate_surface(&self) -> Result<(), SpectrumError> {
        if let Some(e) = self.entries.iter().find(|e| e.multiplicity % 2 == 1) {
            return Err(SpectrumError::OddMultiplicity {
                length: e.length.clone(),
                orientation: e.orientation,
                nu: e.nu,
                multiplicity: e.multiplicity,
            });
        }
        let primitives = self
            .entries
            .iter()
            .filter(|e| e.nu == 1)
            .map(|e| (e.length.clone(), e.orientation, e.multiplicity));
        let closed = Self::from_primitives(primitives, self.horizon.clone(), self.epsilon)?;
        match almost_conjugate(self, &closed)?.witness {
            None => Ok(()),
            Some(w) => Err(SpectrumError::ClosureViolation(Box::new(w))),
        }
    }
}

fn common_horizon(
    a: &LengthTwistSpectrum,
    b: &LengthTwistSpectrum,
) -> Result<LengthValue, SpectrumError> {
    let eps = a.epsilon.max(b.epsilon);
    if a.horizon.same_as(&b.horizon, eps) {
        Ok(a.horizon.clone())
    } else {
        Err(SpectrumError::HorizonMismatch(
            a.horizon.clone(),
            b.horizon.clone(),
        ))
    }
}

/// Entries of both spectra bucketed over a joint length clustering.
pub(crate) fn joint_groups<'a>(
    a: &'a LengthTwistSpectrum,
    b: &'a LengthTwistSpectrum,
) -> Vec<(LengthValue, Vec<&'a GeodesicEntry>, Vec<&'a GeodesicEntry>)> {
    let eps = a.epsilon.max(b.epsilon);
    let tagged = a
        .entries
        .iter()
        .map(|e| (e.length.clone(), (true, e)))
        .chain(b.entries.iter().map(|e| (e.length.clone(), (false, e))))
        .collect();
    cluster(tagged, eps)
        .into_iter()
        .map(|(rep, members)| {
            let (from_a, from_b): (Vec<_>, Vec<_>) =
                members.into_iter().partition(|(side, _)| *side);
            (
                rep,
                from_a.into_iter().map(|(_, e)| e).collect(),
                from_b.into_iter().map(|(_, e)| e).collect(),
            )
        })
        .collect()
}

pub(crate) fn check_horizons(
    a: &LengthTwistSpectrum,
    b: &LengthTwistSpectrum,
) -> Result<LengthValue, SpectrumError> {
    common_horizon(a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightDifference {
    pub length: LengthValue,
    pub weight_a: Weight,
    pub weight_b: Weight,
}

/// Lengths at which the total weights of `a` and `b` differ, ascending.
/// Empty exactly when `W_a = W_b` up to the common horizon.
pub fn compare_weights(
    a: &LengthTwistSpectrum,
    b: &LengthTwistSpectrum,
) -> Result<Vec<WeightDifference>, SpectrumError> {
    check_horizons(a, b)?;
    Ok(joint_groups(a, b)
        .into_iter()
        .filter_map(|(length, ea, eb)| {
            let weight_a = ea.iter().fold(Weight::zero(), |acc, e| acc + entry_mass(e));
            let weight_b = eb.iter().fold(Weight::zero(), |acc, e| acc + entry_mass(e));
            (!weight_a.matches(&weight_b)).then_some(WeightDifference {
                length,
                weight_a,
                weight_b,
            })
        })
        .collect())
}

/// First (length, orientation, ν) triple at which two spectra disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyWitness {
    pub length: LengthValue,
    pub orientation: Orientation,
    pub nu: u32,
    pub multiplicity_a: u64,
    pub multiplicity_b: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyReport {
    pub witness: Option<ConjugacyWitness>,
    pub horizon: LengthValue,
}

impl ConjugacyReport {
    pub fn almost_conjugate(&self) -> bool {
        self.witness.is_none()
    }
}

/// Whether the two spectra agree on every (length, orientation, ν) triple
/// up to the common horizon.
pub fn almost_conjugate(
    a: &LengthTwistSpectrum,
    b: &LengthTwistSpectrum,
) -> Result<ConjugacyReport, SpectrumError> {
    let horizon = check_horizons(a, b)?;
    for (length, ea, eb) in joint_groups(a, b) {
        let mut table: BTreeMap<(Orientation, u32), (u64, u64)> = BTreeMap::new();
        for e in ea {
            table.entry((e.orientation, e.nu)).or_default().0 += e.multiplicity;
        }
        for e in eb {
            table.entry((e.orientation, e.nu)).or_default().1 += e.multiplicity;
        }
        if let Some(((orientation, nu), (ma, mb))) = table.into_iter().find(|(_, (x, y))| x != y) {
            return Ok(ConjugacyReport {
                witness: Some(ConjugacyWitness {
                    length,
                    orientation,
                    nu,
                    multiplicity_a: ma,
                    multiplicity_b: mb,
                }),
                horizon,
            });
        }
    }
    Ok(ConjugacyReport {
        witness: None,
        horizon,
    })
}

/// `F(l)`, the number of oriented geodesics of length at most `l`, stored
/// through its jumps `f(l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingFunction {
    jumps: Vec<(LengthValue, u128)>,
    horizon: LengthValue,
    epsilon: f64,
}

impl CountingFunction {
    pub fn jumps(&self) -> &[(LengthValue, u128)] {
        &self.jumps
    }

    /// `F(l)`.
    pub fn cumulative(&self, l: &LengthValue) -> u128 {
        self.jumps
            .iter()
            .take_while(|(x, _)| x.cmp_within(l, self.epsilon).is_le())
            .map(|(_, f)| f)
            .sum()
    }

    /// `f(l) = F(l⁺) − F(l⁻)`.
    pub fn jump(&self, l: &LengthValue) -> u128 {
        self.jumps
            .iter()
            .filter(|(x, _)| x.same_as(l, self.epsilon))
            .map(|(_, f)| f)
            .sum()
    }

    pub fn at_horizon(&self) -> u128 {
        self.cumulative(&self.horizon)
    }

    /// Evaluates `F` just after every jump and checks it never decreases.
    pub fn is_non_decreasing(&self) -> bool {
        let values: Vec<u128> = self.jumps.iter().map(|(l, _)| self.cumulative(l)).collect();
        values.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpViolation {
    pub length: LengthValue,
    pub jump: u128,
    /// `C·e^l/l`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    pub violations: Vec<JumpViolation>,
    /// `max_l f(l)·l·e^{−l}`; 0 for an empty spectrum.
    pub max_normalized_jump: f64,
    pub non_decreasing: bool,
    pub jumps_sum_to_total: bool,
}

/// Lists lengths where the number of geodesics of exactly that length
/// exceeds `C·e^l/l`. On a compact surface this count is `o(e^l/l)`, so a
/// persistent pattern of violations rules a spectrum out.
pub fn pgt_jump_report(spec: &LengthTwistSpectrum, c: f64) -> JumpReport {
    let counting = spec.counting_function();
    let mut violations = Vec::new();
    let mut max_normalized_jump = 0.0f64;
    for (l, f) in counting.jumps() {
        let x = l.to_f64();
        let fx = f.to_f64().unwrap_or(f64::INFINITY);
        max_normalized_jump = max_normalized_jump.max(fx * x * (-x).exp());
        let envelope = c * x.exp() / x;
        if fx > envelope {
            violations.push(JumpViolation {
                length: l.clone(),
                jump: *f,
                envelope,
            });
        }
    }
    let total: u128 = counting.jumps().iter().map(|(_, f)| f).sum();
    JumpReport {
        violations,
        max_normalized_jump,
        non_decreasing: counting.is_non_decreasing(),
        jumps_sum_to_total: total == counting.at_horizon(),
    }
}
