//! JSON interchange for spectra, discrepancy tables and generator sets.
//!
//! Lengths are encoded as `{"exact": {"q": 2, "num": 3, "den": 1}}` for
//! `(num/den)·log q`, or `{"numeric": 1.2345}`. Discrepancy values are JSON
//! integers, falling back to decimal strings beyond the 64-bit range.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::discrepancy::{DiscrepancyError, DiscrepancyTable};
use crate::hyperbolic::{EnumError, Isometry};
use crate::length::{LengthError, LengthValue, DEFAULT_EPSILON};
use crate::spectrum::{GeodesicEntry, LengthTwistSpectrum, Orientation, SpectrumError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Length(#[from] LengthError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
    #[error(transparent)]
    Generator(#[from] EnumError),
    #[error("exact length {0} does not fit the interchange format")]
    Unrepresentable(LengthValue),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum LengthJson {
    Exact { q: u64, num: u64, den: u64 },
    Numeric(f64),
}

impl TryFrom<&LengthValue> for LengthJson {
    type Error = IoError;
    fn try_from(l: &LengthValue) -> Result<Self, IoError> {
        match l {
            LengthValue::Exact { base, mult } => {
                let num = mult.numer().to_u64();
                let den = mult.denom().to_u64();
                match (num, den) {
                    (Some(num), Some(den)) => Ok(LengthJson::Exact { q: *base, num, den }),
                    _ => Err(IoError::Unrepresentable(l.clone())),
                }
            }
            LengthValue::Numeric(v) => Ok(LengthJson::Numeric(*v)),
        }
    }
}

impl TryFrom<LengthJson> for LengthValue {
    type Error = IoError;
    fn try_from(l: LengthJson) -> Result<Self, IoError> {
        Ok(match l {
            LengthJson::Exact { q, num, den } => {
                if den == 0 {
                    return Err(
                        LengthError::NonPositiveMultiplier(BigRational::from_integer(num.into()))
                            .into(),
                    );
                }
                LengthValue::exact(q, BigRational::new(num.into(), den.into()))?
            }
            LengthJson::Numeric(v) => LengthValue::numeric(v)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub length: LengthJson,
    pub orientation: Orientation,
    pub nu: u32,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumJson {
    pub horizon: LengthJson,
    pub entries: Vec<EntryJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

pub fn spectrum_to_json(spec: &LengthTwistSpectrum) -> Result<String, IoError> {
    let doc = SpectrumJson {
        horizon: spec.horizon().try_into()?,
        entries: spec
            .entries()
            .iter()
            .map(|e| {
                Ok(EntryJson {
                    length: (&e.length).try_into()?,
                    orientation: e.orientation,
                    nu: e.nu,
                    multiplicity: e.multiplicity,
                })
            })
            .collect::<Result<_, IoError>>()?,
        epsilon: (spec.epsilon() != DEFAULT_EPSILON).then_some(spec.epsilon()),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn spectrum_from_json(text: &str) -> Result<LengthTwistSpectrum, IoError> {
    let doc: SpectrumJson = serde_json::from_str(text)?;
    let entries = doc
        .entries
        .into_iter()
        .map(|e| {
            Ok(GeodesicEntry::new(
                e.length.try_into()?,
                e.orientation,
                e.nu,
                e.multiplicity,
            ))
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(LengthTwistSpectrum::with_epsilon(
        entries,
        doc.horizon.try_into()?,
        doc.epsilon.unwrap_or(DEFAULT_EPSILON),
    )?)
}

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) => s.serialize_i64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

fn de_bigint<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Int(x) => Ok(x.into()),
        Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyEntryJson {
    pub length: LengthJson,
    #[serde(serialize_with = "ser_bigint", deserialize_with = "de_bigint")]
    pub a: BigInt,
    #[serde(serialize_with = "ser_bigint", deserialize_with = "de_bigint")]
    pub b: BigInt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyJson {
    pub horizon: LengthJson,
    pub entries: Vec<DiscrepancyEntryJson>,
}

pub fn table_to_json(t: &DiscrepancyTable) -> Result<String, IoError> {
    let doc = DiscrepancyJson {
        horizon: t.horizon().try_into()?,
        entries: t
            .rows()
            .iter()
            .map(|r| {
                Ok(DiscrepancyEntryJson {
                    length: (&r.length).try_into()?,
                    a: r.a.clone(),
                    b: r.b.clone(),
                })
            })
            .collect::<Result<_, IoError>>()?,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn table_from_json(text: &str) -> Result<DiscrepancyTable, IoError> {
    let doc: DiscrepancyJson = serde_json::from_str(text)?;
    let rows = doc
        .entries
        .into_iter()
        .map(|e| Ok((e.length.try_into()?, e.a, e.b)))
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(DiscrepancyTable::new(rows, doc.horizon.try_into()?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorsJson {
    pub generators: Vec<[[f64; 2]; 2]>,
}

/// Reads `{"generators": [[[a, b], [c, d]], ...]}`.
pub fn generators_from_json(text: &str) -> Result<Vec<Isometry>, IoError> {
    let doc: GeneratorsJson = serde_json::from_str(text)?;
    Ok(doc
        .generators
        .into_iter()
        .map(Isometry::from_rows)
        .collect::<Result<_, _>>()?)
}
