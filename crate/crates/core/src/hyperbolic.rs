//! Isometries of the hyperbolic plane as 2×2 real matrices with
//! determinant ±1 (acting projectively), and a word enumerator that turns a
//! set of generators into a length–twist spectrum.
//!
//! Determinant −1 matrices reverse orientation; a translating one is a glide
//! reflection, whose closed geodesic is orientation-reversing.

use std::fmt;

use nalgebra::Matrix2;
use rayon::prelude::*;
use thiserror::Error;

use crate::length::LengthValue;
use crate::spectrum::{GeodesicEntry, LengthTwistSpectrum, Orientation, SpectrumError};

/// Allowed deviation of `|det|` from 1.
pub const DET_TOLERANCE: f64 = 1e-12;
/// Default tolerance for trace comparisons at classification boundaries.
pub const CLASSIFY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnumError {
    #[error("|det| = {0} is not 1")]
    NotUnimodular(f64),
    #[error("{0:?} element has no translation length")]
    NotTranslating(IsometryClass),
    #[error("no generators given")]
    EmptyGenerators,
    #[error("invalid enumeration config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry(Matrix2<f64>);

impl Isometry {
    pub fn new(m: Matrix2<f64>) -> Result<Self, EnumError> {
        let det = m.determinant();
        if (det.abs() - 1.0).abs() > DET_TOLERANCE || !det.is_finite() {
            return Err(EnumError::NotUnimodular(det.abs()));
        }
        Ok(Isometry(m))
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self, EnumError> {
        Self::new(Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]))
    }

    /// Rescales an invertible matrix to `|det| = 1`.
    pub fn normalized(m: Matrix2<f64>) -> Result<Self, EnumError> {
        let det = m.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(EnumError::NotUnimodular(det.abs()));
        }
        Ok(Isometry(m / det.abs().sqrt()))
    }

    pub fn identity() -> Self {
        Isometry(Matrix2::identity())
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn orientation(&self) -> Orientation {
        if self.det() > 0.0 {
            Orientation::Preserving
        } else {
            Orientation::Reversing
        }
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry(self.0 * other.0)
    }

    /// Inverse via the adjugate, using `det = ±1`.
    pub fn inverse(&self) -> Isometry {
        let m = &self.0;
        let adj = Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]);
        Isometry(adj * self.det().signum())
    }

    pub fn pow(&self, k: u32) -> Isometry {
        (0..k).fold(Isometry::identity(), |acc, _| acc.compose(self))
    }

    pub fn conjugate_by(&self, h: &Isometry) -> Isometry {
        h.compose(self).compose(&h.inverse())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IsometryClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
    GlideReflection,
    Reflection,
}

impl IsometryClass {
    pub fn is_translating(self) -> bool {
        matches!(
            self,
            IsometryClass::Hyperbolic | IsometryClass::GlideReflection
        )
    }
}

pub fn classify(g: &Isometry) -> IsometryClass {
    classify_with(g, CLASSIFY_TOLERANCE)
}

/// Trace classification; `eps` widens the boundary cases `|tr| = 2` and
/// `tr = 0`.
pub fn classify_with(g: &Isometry, eps: f64) -> IsometryClass {
    let tr = g.trace().abs();
    if g.det() > 0.0 {
        if (tr - 2.0).abs() <= eps {
            let sign = g.trace().signum();
            let off = (g.0 - Matrix2::identity() * sign).amax();
            if off <= eps {
                IsometryClass::Identity
            } else {
                IsometryClass::Parabolic
            }
        } else if tr < 2.0 {
            IsometryClass::Elliptic
        } else {
            IsometryClass::Hyperbolic
        }
    } else if tr <= eps {
        IsometryClass::Reflection
    } else {
        IsometryClass::GlideReflection
    }
}

/// Translation length along the axis: `2·arccosh(|tr|/2)` for hyperbolic
/// elements. A glide reflection `g` satisfies `g² = tr(g)·g + I`, so
/// `tr(g²) = tr(g)² + 2` and its length `l(g²)/2` equals `2·arsinh(|tr|/2)`.
pub fn translation_length(g: &Isometry) -> Result<f64, EnumError> {
    length_for_class(g, classify(g))
}

fn length_for_class(g: &Isometry, class: IsometryClass) -> Result<f64, EnumError> {
    match class {
        IsometryClass::Hyperbolic => Ok(2.0 * (g.trace().abs() / 2.0).acosh()),
        IsometryClass::GlideReflection => Ok(2.0 * (g.trace().abs() / 2.0).asinh()),
        other => Err(EnumError::NotTranslating(other)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumConfig {
    pub max_word_length: usize,
    pub length_cutoff: f64,
    pub dedup_tolerance: f64,
    pub include_reversing: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            max_word_length: 12,
            length_cutoff: 10.0,
            dedup_tolerance: 1e-9,
            include_reversing: true,
        }
    }
}

impl EnumConfig {
    fn validate(&self) -> Result<(), EnumError> {
        if self.max_word_length == 0 {
            return Err(EnumError::InvalidConfig(
                "max word length must be at least 1".into(),
            ));
        }
        if !(self.dedup_tolerance.is_finite() && self.dedup_tolerance > 0.0) {
            return Err(EnumError::InvalidConfig(
                "tolerance must be positive".into(),
            ));
        }
        if !(self.length_cutoff.is_finite() && self.length_cutoff > 0.0) {
            return Err(EnumError::InvalidConfig(
                "length cutoff must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A word in the generators: letter `2i` is generator `i`, `2i + 1` its
/// inverse. Displayed with `a, b, …` for generators and `A, B, …` for
/// inverses.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<u8>);

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            let base = if c % 2 == 0 { b'a' } else { b'A' };
            let letter = (base + (c / 2) % 26) as char;
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

fn inverse_letter(c: u8) -> u8 {
    c ^ 1
}

/// Smallest rotation of the word, compared to the word itself.
fn is_minimal_rotation(w: &[u8]) -> bool {
    (1..w.len()).all(|r| w.iter().le(w[r..].iter().chain(&w[..r])))
}

/// Shortest `p` with `w = (w[..p])^{n/p}`.
fn primitive_period(w: &[u8]) -> usize {
    let n = w.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| w[i] == w[i - p]))
        .unwrap_or(n)
}

/// One conjugacy-class candidate that translated.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedGeodesic {
    pub word: Word,
    pub length: f64,
    pub orientation: Orientation,
    pub nu: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub spectrum: LengthTwistSpectrum,
    pub geodesics: Vec<ClosedGeodesic>,
    /// Cyclic words whose element does not translate (elliptic, parabolic,
    /// reflections, identity). Excluded from the spectrum.
    pub non_translating: Vec<(Word, IsometryClass)>,
    pub words_examined: usize,
    /// Words whose length disagrees with `ν` times the length of their root.
    pub nu_mismatches: usize,
}

enum Found {
    Geodesic(ClosedGeodesic, bool),
    Other(Word, IsometryClass),
}

struct Walker<'a> {
    letters: &'a [Isometry],
    config: &'a EnumConfig,
    out: Vec<Found>,
    examined: usize,
}

impl Walker<'_> {
    fn visit(&mut self, word: &mut Vec<u8>, m: Isometry) {
        self.examined += 1;
        let first = word[0];
        let last = *word.last().expect("nonempty");
        if first != inverse_letter(last) && is_minimal_rotation(word) {
            self.record(word, &m);
        }
        if word.len() == self.config.max_word_length {
            return;
        }
        for c in 0..self.letters.len() as u8 {
            if c == inverse_letter(last) {
                continue;
            }
            word.push(c);
            let next = m.compose(&self.letters[c as usize]);
            self.visit(word, next);
            word.pop();
        }
    }

    fn record(&mut self, word: &[u8], m: &Isometry) {
        let class = classify_with(m, self.config.dedup_tolerance);
        if !class.is_translating() {
            self.out.push(Found::Other(Word(word.to_vec()), class));
            return;
        }
        let length = length_for_class(m, class).expect("translating class");
        if length > self.config.length_cutoff + self.config.dedup_tolerance {
            return;
        }
        let orientation = m.orientation();
        if orientation == Orientation::Reversing && !self.config.include_reversing {
            return;
        }
        let period = primitive_period(word);
        let nu = (word.len() / period) as u32;
        let consistent = nu == 1 || {
            let root = word[..period].iter().fold(Isometry::identity(), |acc, &c| {
                acc.compose(&self.letters[c as usize])
            });
            match translation_length(&root) {
                Ok(lr) => (length - nu as f64 * lr).abs() <= 1e-6 * length.max(1.0),
                Err(_) => false,
            }
        };
        self.out.push(Found::Geodesic(
            ClosedGeodesic {
                word: Word(word.to_vec()),
                length,
                orientation,
                nu,
            },
            consistent,
        ));
    }
}

/// Enumerates cyclically reduced words up to `max_word_length`, one per
/// rotation class, and collects the translating ones below the cutoff.
///
/// Each cyclic word and its inverse are both kept, so every unoriented
/// geodesic is counted twice. `ν` is the exponent of the word as a power of
/// a shorter word, cross-checked against the root's translation length.
/// Entries are merged by (length within tolerance, orientation, ν). For a
/// free group (e.g. a Schottky group) distinct cyclic words are distinct
/// conjugacy classes; for groups with relations the counts are an upper
/// bound. Discreteness of the group is not checked.
pub fn enumerate_geodesics(
    generators: &[Isometry],
    config: &EnumConfig,
) -> Result<Enumeration, EnumError> {
    if generators.is_empty() {
        return Err(EnumError::EmptyGenerators);
    }
    config.validate()?;
    let letters: Vec<Isometry> = generators.iter().flat_map(|g| [*g, g.inverse()]).collect();
    let shards: Vec<(Vec<Found>, usize)> = (0..letters.len() as u8)
        .into_par_iter()
        .map(|c| {
            let mut walker = Walker {
                letters: &letters,
                config,
                out: Vec::new(),
                examined: 0,
            };
            walker.visit(&mut vec![c], letters[c as usize]);
            (walker.out, walker.examined)
        })
        .collect();

    let mut geodesics = Vec::new();
    let mut non_translating = Vec::new();
    let mut words_examined = 0;
    let mut nu_mismatches = 0;
    for (found, examined) in shards {
        words_examined += examined;
        for f in found {
            match f {
                Found::Geodesic(g, consistent) => {
                    nu_mismatches += usize::from(!consistent);
                    geodesics.push(g);
                }
                Found::Other(w, class) => non_translating.push((w, class)),
            }
        }
    }
    geodesics.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.orientation.cmp(&b.orientation))
            .then(a.nu.cmp(&b.nu))
            .then_with(|| a.word.cmp(&b.word))
    });
    non_translating.sort_by(|a, b| a.0.cmp(&b.0));

    let entries = geodesics
        .iter()
        .map(|g| {
            let length = LengthValue::numeric(g.length).expect("positive translation length");
            GeodesicEntry::new(length, g.orientation, g.nu, 1)
        })
        .collect();
    let horizon = LengthValue::numeric(config.length_cutoff).expect("validated cutoff");
    let spectrum = LengthTwistSpectrum::with_epsilon(entries, horizon, config.dedup_tolerance)?;
    Ok(Enumeration {
        spectrum,
        geodesics,
        non_translating,
        words_examined,
        nu_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(a: f64, b: f64, c: f64, d: f64) -> Isometry {
        Isometry::new(Matrix2::new(a, b, c, d)).unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&Isometry::identity()), IsometryClass::Identity);
        assert_eq!(
            classify(&iso(-1.0, 0.0, 0.0, -1.0)),
            IsometryClass::Identity
        );
        assert_eq!(
            classify(&iso(2.0, 0.0, 0.0, 0.5)),
            IsometryClass::Hyperbolic
        );
        assert_eq!(
            classify(&iso(2.0, 0.0, 0.0, -0.5)),
            IsometryClass::GlideReflection
        );
        assert_eq!(classify(&iso(1.0, 1.0, 0.0, 1.0)), IsometryClass::Parabolic);
        assert_eq!(classify(&iso(0.0, -1.0, 1.0, 0.0)), IsometryClass::Elliptic);
        assert_eq!(
            classify(&iso(1.0, 0.0, 0.0, -1.0)),
            IsometryClass::Reflection
        );
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(matches!(
            Isometry::new(Matrix2::new(2.0, 0.0, 0.0, 2.0)),
            Err(EnumError::NotUnimodular(_))
        ));
        let g = Isometry::normalized(Matrix2::new(2.0, 0.0, 0.0, 2.0)).unwrap();
        assert_eq!(classify(&g), IsometryClass::Identity);
    }

    #[test]
    fn lengths() {
        let ln4 = 2.0 * 2f64.ln();
        let h = iso(2.0, 0.0, 0.0, 0.5);
        assert!((translation_length(&h).unwrap() - ln4).abs() < 1e-12);
        let g = iso(2.0, 0.0, 0.0, -0.5);
        assert!((translation_length(&g).unwrap() - ln4).abs() < 1e-12);
        let g2 = g.compose(&g);
        assert!((translation_length(&g2).unwrap() - 2.0 * ln4).abs() < 1e-12);
        let c = iso(1.0, 2.0, 1.0, 3.0);
        assert!((translation_length(&h.conjugate_by(&c)).unwrap() - ln4).abs() < 1e-9);
        assert!(matches!(
            translation_length(&Isometry::identity()),
            Err(EnumError::NotTranslating(IsometryClass::Identity))
        ));
    }

    #[test]
    fn words() {
        assert!(is_minimal_rotation(&[0, 0, 2]));
        assert!(!is_minimal_rotation(&[0, 2, 0]));
        assert!(is_minimal_rotation(&[0, 2, 0, 2]));
        assert_eq!(primitive_period(&[0, 2, 0, 2]), 2);
        assert_eq!(primitive_period(&[0, 0, 0]), 1);
        assert_eq!(primitive_period(&[0, 2, 2]), 3);
        assert_eq!(Word(vec![0, 1, 2, 3]).to_string(), "aAbB");
    }

    #[test]
    fn powers_of_one_generator() {
        let g = iso(2.0, 0.0, 0.0, 0.5);
        let config = EnumConfig {
            max_word_length: 3,
            ..EnumConfig::default()
        };
        let e = enumerate_geodesics(&[g], &config).unwrap();
        let entries = e.spectrum.entries();
        assert_eq!(entries.len(), 3);
        for (k, entry) in entries.iter().enumerate() {
            let expected = 2.0 * (k as f64 + 1.0) * 2f64.ln();
            assert!((entry.length.to_f64() - expected).abs() < 1e-9);
            assert_eq!(entry.nu, k as u32 + 1);
            assert_eq!(entry.orientation, Orientation::Preserving);
            assert_eq!(entry.multiplicity, 2);
        }
        assert_eq!(e.nu_mismatches, 0);
    }

    #[test]
    fn reversing_filter() {
        let h = iso(2.0, 0.0, 0.0, 0.5);
        let c = iso(2.0, 1.0, 1.0, 1.0);
        let glide = iso(3.0, 0.0, 0.0, -1.0 / 3.0).conjugate_by(&c);
        let mut config = EnumConfig {
            max_word_length: 4,
            length_cutoff: 8.0,
            ..EnumConfig::default()
        };
        let all = enumerate_geodesics(&[h, glide], &config).unwrap();
        assert!(all
            .spectrum
            .entries()
            .iter()
            .any(|e| e.orientation == Orientation::Reversing));
        config.include_reversing = false;
        let pres = enumerate_geodesics(&[h, glide], &config).unwrap();
        assert!(pres
            .spectrum
            .entries()
            .iter()
            .all(|e| e.orientation == Orientation::Preserving));
        assert!(enumerate_geodesics(&[], &config).is_err());
    }
}
