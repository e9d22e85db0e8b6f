//! Numbers that are exact when their inputs were exact.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// A real-valued result: an exact rational when every input was rational,
/// otherwise a 64-bit float.
#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Exact(BigRational),
    Approx(f64),
}

impl Quantity {
    pub fn zero_like(exact: bool) -> Self {
        if exact {
            Quantity::Exact(BigRational::zero())
        } else {
            Quantity::Approx(0.0)
        }
    }

    pub fn one_like(exact: bool) -> Self {
        if exact {
            Quantity::Exact(BigRational::one())
        } else {
            Quantity::Approx(1.0)
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Quantity::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(r) => rational_to_f64(r),
            Quantity::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Quantity::Exact(r) => Some(r),
            Quantity::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Quantity::Exact(_))
    }

    /// `1 - self`, staying exact when possible.
    pub fn complement(&self) -> Self {
        match self {
            Quantity::Exact(r) => Quantity::Exact(BigRational::one() - r),
            Quantity::Approx(x) => Quantity::Approx(1.0 - x),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(r) => write!(f, "{r}"),
            Quantity::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Converts a big rational to the nearest-ish f64 without overflowing on
/// huge numerators and denominators.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = r.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    // Scale both sides down to about 1000 bits before dividing.
    let shift = |b: &BigInt| b.bits().saturating_sub(1000);
    let s = shift(r.numer()).max(shift(r.denom()));
    let n = (r.numer() >> s).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> s).to_f64().unwrap_or(f64::NAN);
    n / d
}

pub(crate) fn serialize_bigint<S: SerializeMap>(
    map: &mut S,
    key: &str,
    v: &BigInt,
) -> Result<(), S::Error> {
    match v.to_i64() {
        Some(x) => map.serialize_entry(key, &x),
        None => map.serialize_entry(key, &v.to_string()),
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Quantity::Exact(r) => {
                let mut map = serializer.serialize_map(Some(3))?;
                serialize_bigint(&mut map, "num", r.numer())?;
                serialize_bigint(&mut map, "den", r.denom())?;
                map.serialize_entry("float", &rational_to_f64(r))?;
                map.end()
            }
            Quantity::Approx(x) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("float", x)?;
                map.end()
            }
        }
    }
}
