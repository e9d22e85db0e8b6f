//! JSON file formats for truth tables, constitutions and vote distributions.
//!
//! Packed truth tables are hex strings read msb-first: hex digit `d` holds
//! the values at indices `4d, 4d+1, 4d+2, 4d+3` in bits 3 down to 0, a set
//! bit meaning `+1`. The string has exactly `ceil(2^n / 4)` digits and any
//! padding bits past index `2^n - 1` must be zero.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::boolfn::{BooleanFunction, BoundedFunction};
use crate::constitution::Constitution;
use crate::distribution::{VoteDistribution, Weights};
use crate::error::{Error, Result};
use crate::ranking::canonical_pairs;

pub const TABLE_ENCODING: &str = "msb-first over index 0..2^n−1";
pub const RANKING_ORDER: &str = "lex-one-line";

fn encoding_ok(s: &str) -> bool {
    s == TABLE_ENCODING || s == "msb-first over index 0..2^n-1"
}

pub fn to_hex(f: &BooleanFunction) -> String {
    let digits = f.len().div_ceil(4);
    (0..digits)
        .map(|d| {
            let nibble = (0..4)
                .filter(|&b| 4 * d + b < f.len() && f.is_plus(4 * d + b))
                .fold(0u32, |acc, b| acc | 8 >> b);
            char::from_digit(nibble, 16).expect("nibble")
        })
        .collect()
}

pub fn from_hex(n: usize, hex: &str) -> Result<BooleanFunction> {
    if n > crate::boolfn::MAX_VARS {
        return Err(Error::TooManyVariables { n, max: crate::boolfn::MAX_VARS });
    }
    let len = 1usize << n;
    if hex.len() != len.div_ceil(4) {
        return Err(Error::Format(format!("packed_bits needs {} hex digits for n = {n}, got {}", len.div_ceil(4), hex.len())));
    }
    let nibbles = hex
        .chars()
        .map(|c| c.to_digit(16).ok_or_else(|| Error::Format(format!("'{c}' is not a hex digit"))))
        .collect::<Result<Vec<u32>>>()?;
    for (d, &nib) in nibbles.iter().enumerate() {
        for b in 0..4 {
            if 4 * d + b >= len && nib & (8 >> b) != 0 {
                return Err(Error::Format("padding bits past 2^n must be zero".into()));
            }
        }
    }
    BooleanFunction::from_fn(n, |x| nibbles[x / 4] & (8 >> (x % 4)) != 0)
}

/// A truth-table file: `packed_bits` for Boolean functions, `values` for
/// bounded ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthTableFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packed_bits: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl TruthTableFile {
    pub fn boolean(f: &BooleanFunction) -> Self {
        TruthTableFile {
            n: f.n(),
            packed_bits: Some(to_hex(f)),
            encoding: Some(TABLE_ENCODING.into()),
            values: None,
        }
    }

    pub fn bounded(f: &BoundedFunction) -> Self {
        TruthTableFile { n: f.n(), packed_bits: None, encoding: None, values: Some(f.values().to_vec()) }
    }

    pub fn to_boolean(&self) -> Result<BooleanFunction> {
        match (&self.packed_bits, &self.values) {
            (Some(hex), None) => {
                if let Some(enc) = &self.encoding {
                    if !encoding_ok(enc) {
                        return Err(Error::Format(format!("unsupported encoding '{enc}'")));
                    }
                }
                from_hex(self.n, hex)
            }
            (None, Some(_)) => self
                .to_bounded()?
                .to_boolean()
                .ok_or_else(|| Error::InvalidTable("values are not all ±1".into())),
            _ => Err(Error::Format("a table needs exactly one of packed_bits or values".into())),
        }
    }

    pub fn to_bounded(&self) -> Result<BoundedFunction> {
        match (&self.packed_bits, &self.values) {
            (None, Some(v)) => BoundedFunction::new(self.n, v.clone()),
            (Some(_), None) => Ok(self.to_boolean()?.to_bounded()),
            _ => Err(Error::Format("a table needs exactly one of packed_bits or values".into())),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairEntry {
    pub a: usize,
    pub b: usize,
    pub table: TruthTableFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstitutionFile {
    pub k: usize,
    pub n: usize,
    pub pairs: Vec<PairEntry>,
}

impl ConstitutionFile {
    pub fn from_constitution(f: &Constitution) -> Self {
        let pairs = canonical_pairs(f.k())
            .into_iter()
            .zip(f.pair_functions())
            .map(|((a, b), g)| PairEntry { a, b, table: TruthTableFile::boolean(g) })
            .collect();
        ConstitutionFile { k: f.k(), n: f.n(), pairs }
    }

    pub fn to_constitution(&self) -> Result<Constitution> {
        let mut tables = BTreeMap::new();
        for entry in &self.pairs {
            if entry.a >= entry.b {
                return Err(Error::Format(format!("pair ({}, {}) must have a < b", entry.a, entry.b)));
            }
            if entry.b >= self.k {
                return Err(Error::AlternativeOutOfRange { alt: entry.b, k: self.k });
            }
            if entry.table.n != self.n {
                return Err(Error::ShapeMismatch(format!("table for ({}, {}) has n = {}", entry.a, entry.b, entry.table.n)));
            }
            if tables.insert((entry.a, entry.b), entry.table.to_boolean()?).is_some() {
                return Err(Error::Format(format!("pair ({}, {}) listed twice", entry.a, entry.b)));
            }
        }
        let pairs = canonical_pairs(self.k)
            .into_iter()
            .map(|p| tables.remove(&p).ok_or_else(|| Error::Format(format!("missing pair {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Constitution::new(self.k, self.n, pairs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntText {
    Int(i64),
    Text(String),
}

impl IntText {
    fn to_bigint(&self) -> Result<BigInt> {
        match self {
            IntText::Int(x) => Ok(BigInt::from(*x)),
            IntText::Text(s) => s.parse().map_err(|_| Error::Format(format!("'{s}' is not an integer"))),
        }
    }

    fn from_bigint(x: &BigInt) -> Self {
        match i64::try_from(x) {
            Ok(v) => IntText::Int(v),
            Err(_) => IntText::Text(x.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbEntry {
    Ratio { num: IntText, den: IntText },
    Float(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionFile {
    pub k: usize,
    pub probs: Vec<ProbEntry>,
    #[serde(default = "default_order")]
    pub order: String,
}

fn default_order() -> String {
    RANKING_ORDER.into()
}

impl DistributionFile {
    pub fn from_distribution(mu: &VoteDistribution) -> Self {
        let probs = match mu.weights() {
            Weights::Exact(p) => p
                .iter()
                .map(|q| ProbEntry::Ratio { num: IntText::from_bigint(q.numer()), den: IntText::from_bigint(q.denom()) })
                .collect(),
            Weights::Float(p) => p.iter().map(|&x| ProbEntry::Float(x)).collect(),
        };
        DistributionFile { k: mu.k(), probs, order: RANKING_ORDER.into() }
    }

    pub fn to_distribution(&self) -> Result<VoteDistribution> {
        if self.order != RANKING_ORDER {
            return Err(Error::Format(format!("unsupported ranking order '{}'", self.order)));
        }
        if self.probs.iter().all(|p| matches!(p, ProbEntry::Float(_))) {
            let probs = self.probs.iter().map(|p| if let ProbEntry::Float(x) = p { *x } else { 0.0 }).collect();
            return VoteDistribution::from_floats(self.k, probs);
        }
        let probs = self
            .probs
            .iter()
            .map(|p| match p {
                ProbEntry::Ratio { num, den } => {
                    let den = den.to_bigint()?;
                    if den.is_zero() {
                        return Err(Error::InvalidDistribution("zero denominator".into()));
                    }
                    Ok(BigRational::new(num.to_bigint()?, den))
                }
                ProbEntry::Float(_) => Err(Error::Format("probabilities mix floats and rationals".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        VoteDistribution::from_rationals(self.k, probs)
    }
}

pub fn parse_constitution(json: &str) -> Result<Constitution> {
    serde_json::from_str::<ConstitutionFile>(json)?.to_constitution()
}

pub fn parse_distribution(json: &str) -> Result<VoteDistribution> {
    serde_json::from_str::<DistributionFile>(json)?.to_distribution()
}

pub fn parse_table(json: &str) -> Result<TruthTableFile> {
    Ok(serde_json::from_str(json)?)
}
