//! Exact rational scalars and their string encoding.

use num::{BigInt, BigRational, One, Zero};
use std::str::FromStr;

use crate::error::Error;

/// Exact rational number. Every length, offset and coordinate in the crate is one of these.
pub type Q = BigRational;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`. Decimal notation is rejected.
pub fn parse(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let bad = || Error::Invalid(format!("not a rational literal: {s:?}"));
    if t.is_empty() || t.contains('.') || t.contains('e') || t.contains('E') {
        return Err(bad());
    }
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Invalid(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(BigInt::from_str(t).map_err(|_| bad())?)),
    }
}

/// Canonical string: reduced `p/q`, or `p` when the denominator is one.
pub fn render(q: &Q) -> String {
    q.to_string()
}

/// Integer value, if `q` is integral and fits an `i64`.
pub fn to_i64(q: &Q) -> Option<i64> {
    if q.is_integer() {
        i64::try_from(q.to_integer()).ok()
    } else {
        None
    }
}

pub fn to_f64(q: &Q) -> f64 {
    use num::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn is_integral(q: &Q) -> bool {
    q.denom().is_one()
}

/// serde adapter for a single rational stored as a string.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let raw = RawRational::deserialize(d)?;
        raw.into_q().map_err(serde::de::Error::custom)
    }

    /// Accepts `"3/2"` as well as bare JSON integers.
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum RawRational {
        Str(String),
        Int(i64),
    }

    impl RawRational {
        fn into_q(self) -> Result<Q, Error> {
            match self {
                RawRational::Str(s) => parse(&s),
                RawRational::Int(n) => Ok(int(n)),
            }
        }
    }
}
