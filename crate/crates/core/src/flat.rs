//! Laplace spectra of the square and hexagonal flat tori and of their
//! quotients by rotations about a lattice point.
//!
//! Eigenfunctions of a flat torus are plane waves indexed by dual-lattice
//! vectors `λ`, with eigenvalue proportional to the norm-form value of `λ`.
//! Both lattices are self-dual up to similarity, so eigenvalues are reported
//! as the integer norm-form value `n` (`m² + k²` or `a² + ab + b²`); the
//! common scale factor cancels in any relation within one family.
//!
//! A rotation about the origin permutes plane waves, so the eigenspace of
//! the quotient orbifold at `n` is spanned by orbit sums and its dimension is
//! the number of rotation orbits on `{λ : norm(λ) = n}`. Any other rotation
//! center gives a conjugate group and the same spectrum.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlatError {
    #[error("rotation of order {order} does not preserve the {lattice} lattice")]
    IncompatibleRotation { lattice: LatticeKind, order: u32 },
    #[error("malformed relation {text:?}: {reason}")]
    MalformedRelation { text: String, reason: String },
    #[error("unknown orbifold {0:?}")]
    UnknownOrbifold(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeKind {
    /// Norm form `m² + n²`.
    Square,
    /// Norm form `a² + ab + b²`.
    Hexagonal,
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeKind::Square => "square",
            LatticeKind::Hexagonal => "hexagonal",
        })
    }
}

impl LatticeKind {
    pub fn norm(self, x: i64, y: i64) -> u64 {
        let v = match self {
            LatticeKind::Square => x * x + y * y,
            LatticeKind::Hexagonal => x * x + x * y + y * y,
        };
        v as u64
    }

    pub fn rotation_orders(self) -> &'static [u32] {
        match self {
            LatticeKind::Square => &[1, 2, 4],
            LatticeKind::Hexagonal => &[1, 2, 3, 6],
        }
    }

    fn check_order(self, order: u32) -> Result<(), FlatError> {
        if self.rotation_orders().contains(&order) {
            Ok(())
        } else {
            Err(FlatError::IncompatibleRotation {
                lattice: self,
                order,
            })
        }
    }

    /// Generator of the order-`k` rotation group in lattice coordinates.
    /// Hexagonal coordinates use the basis `e₁ = (1, 0)`, `e₂ = (1/2, √3/2)`,
    /// on which the sixth-turn acts as `e₁ ↦ e₂`, `e₂ ↦ e₂ − e₁`.
    fn rotate(self, order: u32, (x, y): (i64, i64)) -> (i64, i64) {
        match (self, order) {
            (_, 1) => (x, y),
            (_, 2) => (-x, -y),
            (LatticeKind::Square, 4) => (-y, x),
            (LatticeKind::Hexagonal, 3) => (-x - y, x),
            (LatticeKind::Hexagonal, 6) => (-y, x + y),
            _ => unreachable!("order checked by caller"),
        }
    }

    /// Half-width of a coordinate box containing every vector of norm ≤ `max_norm`.
    fn box_radius(self, max_norm: u64) -> i64 {
        let r = match self {
            LatticeKind::Square => (max_norm as f64).sqrt(),
            // a² + ab + b² ≥ 3b²/4 and likewise for a.
            LatticeKind::Hexagonal => (4.0 * max_norm as f64 / 3.0).sqrt(),
        };
        r.floor() as i64 + 1
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Number of lattice vectors with norm-form value exactly `n`, found by
/// solving for the second coordinate along each row.
pub fn representation_count(lattice: LatticeKind, n: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    let r = lattice.box_radius(n);
    let mut count = 0;
    for y in -r..=r {
        match lattice {
            LatticeKind::Square => {
                let rest = n as i64 - y * y;
                if rest < 0 {
                    continue;
                }
                let x = isqrt(rest as u64) as i64;
                if x * x == rest {
                    count += if x == 0 { 1 } else { 2 };
                }
            }
            LatticeKind::Hexagonal => {
                // x² + yx + (y² − n) = 0, discriminant 4n − 3y².
                let disc = 4 * n as i64 - 3 * y * y;
                if disc < 0 {
                    continue;
                }
                let s = isqrt(disc as u64) as i64;
                if s * s != disc {
                    continue;
                }
                // -y + s and -y - s share parity.
                if (s - y) % 2 == 0 {
                    count += if s == 0 { 1 } else { 2 };
                }
            }
        }
    }
    count
}

/// Counts of lattice vectors per norm-form value, `0..=max_norm`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormCensus {
    lattice: LatticeKind,
    counts: Vec<u64>,
}

impl NormCensus {
    pub fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    pub fn max_norm(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn count(&self, n: u64) -> u64 {
        self.counts.get(n as usize).copied().unwrap_or(0)
    }

    /// Nonzero counts as a map `n → count`.
    pub fn to_map(&self) -> BTreeMap<u64, u64> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(n, &c)| (n as u64, c))
            .collect()
    }
}

/// Exhaustive enumeration of the coordinate box around the origin.
pub fn norm_census(lattice: LatticeKind, max_norm: u64) -> NormCensus {
    let r = lattice.box_radius(max_norm);
    let rows: Vec<Vec<u64>> = (-r..=r)
        .into_par_iter()
        .map(|y| {
            let mut row = vec![0u64; max_norm as usize + 1];
            for x in -r..=r {
                let n = lattice.norm(x, y);
                if n <= max_norm {
                    row[n as usize] += 1;
                }
            }
            row
        })
        .collect();
    let mut counts = vec![0u64; max_norm as usize + 1];
    for row in rows {
        for (c, v) in counts.iter_mut().zip(row) {
            *c += v;
        }
    }
    NormCensus { lattice, counts }
}

/// Burnside count of orbits of the order-`k` rotation group on vectors of
/// norm `n`, given their number. Only the origin is fixed by a nontrivial
/// lattice rotation.
pub fn burnside_orbits(vector_count: u64, order: u32, n: u64) -> u64 {
    let fixed = if n == 0 {
        (order as u64 - 1) * vector_count
    } else {
        0
    };
    (vector_count + fixed) / order as u64
}

/// Multiplicity of normalized eigenvalue `n` on the quotient of the torus by
/// the order-`k` rotation.
pub fn orbit_multiplicity(lattice: LatticeKind, order: u32, n: u64) -> Result<u64, FlatError> {
    lattice.check_order(order)?;
    Ok(burnside_orbits(representation_count(lattice, n), order, n))
}

fn count_orbits(lattice: LatticeKind, order: u32, vectors: &[(i64, i64)]) -> u64 {
    let mut seen: HashSet<(i64, i64)> = HashSet::with_capacity(vectors.len());
    let mut orbits = 0;
    for &v in vectors {
        if seen.contains(&v) {
            continue;
        }
        orbits += 1;
        let mut w = v;
        loop {
            seen.insert(w);
            w = lattice.rotate(order, w);
            if w == v {
                break;
            }
        }
    }
    orbits
}

/// Orbit count by explicit partition: enumerate every vector of norm `n`
/// and follow the rotation until it returns.
pub fn orbit_multiplicity_oracle(
    lattice: LatticeKind,
    order: u32,
    n: u64,
) -> Result<u64, FlatError> {
    lattice.check_order(order)?;
    let r = lattice.box_radius(n);
    let vectors: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|y| (-r..=r).map(move |x| (x, y)))
        .filter(|&(x, y)| lattice.norm(x, y) == n)
        .collect();
    Ok(count_orbits(lattice, order, &vectors))
}

/// [`orbit_multiplicity_oracle`] for every `n ≤ max_norm` from a single box
/// enumeration bucketed by norm.
pub fn orbit_multiplicity_oracle_table(
    lattice: LatticeKind,
    order: u32,
    max_norm: u64,
) -> Result<Vec<u64>, FlatError> {
    lattice.check_order(order)?;
    let r = lattice.box_radius(max_norm);
    let mut buckets: Vec<Vec<(i64, i64)>> = vec![Vec::new(); max_norm as usize + 1];
    for y in -r..=r {
        for x in -r..=r {
            let n = lattice.norm(x, y);
            if n <= max_norm {
                buckets[n as usize].push((x, y));
            }
        }
    }
    Ok(buckets
        .par_iter()
        .map(|vs| count_orbits(lattice, order, vs))
        .collect())
}

/// One of the seven torus quotients considered here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrbifoldId {
    /// Square torus.
    S1,
    /// Square 2222.
    S2,
    /// Square 244.
    S4,
    /// Hexagonal torus.
    H1,
    /// Hexagonal 2222.
    H2,
    /// Hexagonal 333.
    H3,
    /// Hexagonal 236.
    H6,
}

impl OrbifoldId {
    pub const ALL: [OrbifoldId; 7] = [
        OrbifoldId::S1,
        OrbifoldId::S2,
        OrbifoldId::S4,
        OrbifoldId::H1,
        OrbifoldId::H2,
        OrbifoldId::H3,
        OrbifoldId::H6,
    ];

    pub fn lattice(self) -> LatticeKind {
        match self {
            OrbifoldId::S1 | OrbifoldId::S2 | OrbifoldId::S4 => LatticeKind::Square,
            _ => LatticeKind::Hexagonal,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            OrbifoldId::S1 | OrbifoldId::H1 => 1,
            OrbifoldId::S2 | OrbifoldId::H2 => 2,
            OrbifoldId::H3 => 3,
            OrbifoldId::S4 => 4,
            OrbifoldId::H6 => 6,
        }
    }

    /// Conway orbifold symbol.
    pub fn conway(self) -> &'static str {
        match self {
            OrbifoldId::S1 | OrbifoldId::H1 => "o",
            OrbifoldId::S2 | OrbifoldId::H2 => "2222",
            OrbifoldId::S4 => "244",
            OrbifoldId::H3 => "333",
            OrbifoldId::H6 => "236",
        }
    }
}

impl fmt::Display for OrbifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for OrbifoldId {
    type Err = FlatError;
    fn from_str(s: &str) -> Result<Self, FlatError> {
        OrbifoldId::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| FlatError::UnknownOrbifold(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbifoldSpectrum {
    pub id: OrbifoldId,
    pub max_norm: u64,
    multiplicities: BTreeMap<u64, u64>,
}

impl OrbifoldSpectrum {
    pub fn multiplicity(&self, n: u64) -> u64 {
        self.multiplicities.get(&n).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.multiplicities.iter().map(|(&n, &m)| (n, m))
    }

    fn from_census(id: OrbifoldId, census: &NormCensus) -> Self {
        let multiplicities = census
            .to_map()
            .into_iter()
            .map(|(n, c)| (n, burnside_orbits(c, id.order(), n)))
            .filter(|&(_, m)| m > 0)
            .collect();
        OrbifoldSpectrum {
            id,
            max_norm: census.max_norm(),
            multiplicities,
        }
    }
}

pub fn orbifold_spectrum(id: OrbifoldId, max_norm: u64) -> OrbifoldSpectrum {
    OrbifoldSpectrum::from_census(id, &norm_census(id.lattice(), max_norm))
}

/// `Σ coeff·left = Σ coeff·right` as an identity of spectra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralRelation {
    pub left: Vec<(u64, OrbifoldId)>,
    pub right: Vec<(u64, OrbifoldId)>,
}

/// The three square/hexagonal identities and three consequences.
pub const FLAT_RELATIONS: [&str; 6] = [
    "S1+2S4=3S2",
    "H2+H6=2H3",
    "H1+H3+H6=3H2",
    "H1+3H3=4H2",
    "H1+4H6=5H3",
    "2H1+3H6=5H2",
];

impl SpectralRelation {
    pub fn lattice(&self) -> LatticeKind {
        self.left[0].1.lattice()
    }

    fn validate(self, text: &str) -> Result<Self, FlatError> {
        let bad = |reason: &str| FlatError::MalformedRelation {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        if self.left.is_empty() || self.right.is_empty() {
            return Err(bad("both sides need at least one term"));
        }
        if self.left.iter().chain(&self.right).any(|(c, _)| *c == 0) {
            return Err(bad("coefficients must be positive"));
        }
        let lattice = self.lattice();
        if self
            .left
            .iter()
            .chain(&self.right)
            .any(|(_, id)| id.lattice() != lattice)
        {
            return Err(bad("terms mix the square and hexagonal families"));
        }
        Ok(self)
    }

    pub fn new(
        left: Vec<(u64, OrbifoldId)>,
        right: Vec<(u64, OrbifoldId)>,
    ) -> Result<Self, FlatError> {
        SpectralRelation { left, right }.validate("<constructed>")
    }
}

impl fmt::Display for SpectralRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |terms: &[(u64, OrbifoldId)]| {
            terms
                .iter()
                .map(|(c, id)| {
                    if *c == 1 {
                        id.to_string()
                    } else {
                        format!("{c}{id}")
                    }
                })
                .collect::<Vec<_>>()
                .join("+")
        };
        write!(f, "{}={}", side(&self.left), side(&self.right))
    }
}

impl FromStr for SpectralRelation {
    type Err = FlatError;

    /// Parses e.g. `"S1+2S4=3S2"`; whitespace is ignored.
    fn from_str(text: &str) -> Result<Self, FlatError> {
        let bad = |reason: String| FlatError::MalformedRelation {
            text: text.to_string(),
            reason,
        };
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (lhs, rhs) = compact
            .split_once('=')
            .ok_or_else(|| bad("missing '='".into()))?;
        if rhs.contains('=') {
            return Err(bad("more than one '='".into()));
        }
        let parse_side = |side: &str| -> Result<Vec<(u64, OrbifoldId)>, FlatError> {
            side.split('+')
                .map(|term| {
                    let split = term
                        .find(|c: char| !c.is_ascii_digit())
                        .unwrap_or(term.len());
                    let (digits, name) = term.split_at(split);
                    let coeff = if digits.is_empty() {
                        1
                    } else {
                        digits
                            .parse()
                            .map_err(|_| bad(format!("bad coefficient in {term:?}")))?
                    };
                    let id = name
                        .parse()
                        .map_err(|_| bad(format!("unknown orbifold in {term:?}")))?;
                    Ok((coeff, id))
                })
                .collect()
        };
        SpectralRelation {
            left: parse_side(lhs)?,
            right: parse_side(rhs)?,
        }
        .validate(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationFailure {
    pub n: u64,
    pub left: u64,
    pub right: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationCheck {
    pub relation: SpectralRelation,
    pub max_norm: u64,
    pub first_failure: Option<RelationFailure>,
}

impl RelationCheck {
    pub fn holds(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Checks a relation eigenvalue by eigenvalue for every `n ≤ max_norm`.
pub fn verify_relation(rel: &SpectralRelation, max_norm: u64) -> RelationCheck {
    let census = norm_census(rel.lattice(), max_norm);
    verify_relation_with(rel, &census)
}

/// As [`verify_relation`], reusing a census of the relation's lattice.
pub fn verify_relation_with(rel: &SpectralRelation, census: &NormCensus) -> RelationCheck {
    assert_eq!(
        census.lattice(),
        rel.lattice(),
        "census of the wrong lattice"
    );
    let spectra: BTreeMap<OrbifoldId, OrbifoldSpectrum> = rel
        .left
        .iter()
        .chain(&rel.right)
        .map(|(_, id)| (*id, OrbifoldSpectrum::from_census(*id, census)))
        .collect();
    let side = |terms: &[(u64, OrbifoldId)], n: u64| -> u64 {
        terms
            .iter()
            .map(|(c, id)| c * spectra[id].multiplicity(n))
            .sum()
    };
    let first_failure = (0..=census.max_norm()).find_map(|n| {
        let (left, right) = (side(&rel.left, n), side(&rel.right, n));
        (left != right).then_some(RelationFailure { n, left, right })
    });
    RelationCheck {
        relation: rel.clone(),
        max_norm: census.max_norm(),
        first_failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_values() {
        let sq = norm_census(LatticeKind::Square, 30);
        assert_eq!(sq.count(0), 1);
        assert_eq!(sq.count(1), 4);
        assert_eq!(sq.count(5), 8);
        assert_eq!(sq.count(3), 0);
        assert_eq!(sq.count(25), 12);
        let hex = norm_census(LatticeKind::Hexagonal, 30);
        assert_eq!(hex.count(1), 6);
        assert_eq!(hex.count(3), 6);
        assert_eq!(hex.count(2), 0);
        assert_eq!(hex.count(7), 12);
    }

    #[test]
    fn row_solving_matches_census() {
        for lattice in [LatticeKind::Square, LatticeKind::Hexagonal] {
            let census = norm_census(lattice, 2000);
            for n in 0..=2000 {
                assert_eq!(
                    representation_count(lattice, n),
                    census.count(n),
                    "{lattice} {n}"
                );
            }
        }
    }

    #[test]
    fn rotations_preserve_norm_and_have_exact_order() {
        for lattice in [LatticeKind::Square, LatticeKind::Hexagonal] {
            for &k in lattice.rotation_orders() {
                for v in [(1, 0), (2, -3), (5, 7)] {
                    let mut w = v;
                    for step in 1..=k {
                        w = lattice.rotate(k, w);
                        assert_eq!(lattice.norm(w.0, w.1), lattice.norm(v.0, v.1));
                        assert_eq!(w == v, step == k, "{lattice} k={k} v={v:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_cases() {
        use LatticeKind::*;
        for (lat, k) in [(Square, 1), (Square, 4), (Hexagonal, 6), (Hexagonal, 3)] {
            assert_eq!(orbit_multiplicity(lat, k, 0).unwrap(), 1);
        }
        assert_eq!(orbit_multiplicity(Square, 2, 1).unwrap(), 2);
        assert_eq!(orbit_multiplicity(Square, 4, 1).unwrap(), 1);
        assert_eq!(orbit_multiplicity(Hexagonal, 6, 1).unwrap(), 1);
        assert_eq!(orbit_multiplicity_oracle(Square, 4, 2).unwrap(), 1);
        assert_eq!(orbit_multiplicity_oracle(Square, 2, 25).unwrap(), 6);
        assert_eq!(orbit_multiplicity_oracle(Hexagonal, 3, 3).unwrap(), 2);
        assert!(matches!(
            orbit_multiplicity(Square, 3, 1),
            Err(FlatError::IncompatibleRotation { order: 3, .. })
        ));
        assert!(orbit_multiplicity_oracle(Hexagonal, 4, 1).is_err());
    }

    #[test]
    fn spectra_of_quotients() {
        assert_eq!(orbifold_spectrum(OrbifoldId::S1, 10).multiplicity(1), 4);
        let s4 = orbifold_spectrum(OrbifoldId::S4, 10);
        assert_eq!((s4.multiplicity(0), s4.multiplicity(1)), (1, 1));
        assert_eq!(orbifold_spectrum(OrbifoldId::H3, 10).multiplicity(1), 2);
        for id in OrbifoldId::ALL {
            assert_eq!(orbifold_spectrum(id, 5).multiplicity(0), 1);
        }
    }

    #[test]
    fn parse_relations() {
        let r: SpectralRelation = "S1 + 2S4 = 3S2".parse().unwrap();
        assert_eq!(r.left, vec![(1, OrbifoldId::S1), (2, OrbifoldId::S4)]);
        assert_eq!(r.right, vec![(3, OrbifoldId::S2)]);
        assert_eq!(r.to_string(), "S1+2S4=3S2");
        for bad in [
            "S1+2S4",
            "S1=H2",
            "S1+0S4=S2",
            "S1=S2=S4",
            "X1=S2",
            "=S2",
            "S1+=S2",
        ] {
            assert!(
                matches!(
                    bad.parse::<SpectralRelation>(),
                    Err(FlatError::MalformedRelation { .. })
                ),
                "{bad}"
            );
        }
    }

    #[test]
    fn relation_values_at_small_n() {
        let r: SpectralRelation = "S1+2S4=3S2".parse().unwrap();
        let check = verify_relation(&r, 50);
        assert!(check.holds());
        let r: SpectralRelation = "H1+3H3=4H2".parse().unwrap();
        assert!(verify_relation(&r, 50).holds());
        let wrong: SpectralRelation = "S1+S4=2S2".parse().unwrap();
        let check = verify_relation(&wrong, 50);
        assert_eq!(
            check.first_failure,
            Some(RelationFailure {
                n: 1,
                left: 5,
                right: 4
            })
        );
    }
}
