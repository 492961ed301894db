//! Exact number formatting and serde adapters.
//!
//! Integers travel through JSON as plain numbers when they fit in 64 bits and
//! as decimal strings otherwise. Rationals always travel as `"p/q"` strings in
//! lowest terms with `q > 0`; on input a bare integer `"p"` is accepted too.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// Canonical `"p/q"` rendering. `BigRational` is always reduced, so this is
/// lowest terms with a positive denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::MalformedInput(format!("not an exact rational: {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q == BigInt::from(0) {
        return Err(Error::MalformedInput(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(p, q))
}

pub fn rational_from_int(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

/// Returns the integer value of `r` if its denominator is one.
pub fn as_integer(r: &BigRational) -> Option<BigInt> {
    r.denom().is_one().then(|| r.numer().clone())
}

fn serialize_bigint<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match n.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&n.to_string()),
    }
}

struct BigIntVisitor;

impl<'de> Visitor<'de> for BigIntVisitor {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal integer string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BigInt, E> {
        v.trim()
            .parse()
            .map_err(|_| E::custom(format!("not an integer: {v:?}")))
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = BigRational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a rational string \"p/q\" or an integer")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BigRational, E> {
        Ok(BigRational::from_integer(v.into()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BigRational, E> {
        Ok(BigRational::from_integer(v.into()))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BigRational, E> {
        parse_rational(v).map_err(E::custom)
    }
}

pub mod int {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_bigint(n, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        d.deserialize_any(BigIntVisitor)
    }
}

pub mod int_vec {
    use super::*;

    struct Wrap<'a>(&'a BigInt);

    impl serde::Serialize for Wrap<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            serialize_bigint(self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for n in v {
            seq.serialize_element(&Wrap(n))?;
        }
        seq.end()
    }

    struct Owned(BigInt);

    impl<'de> serde::Deserialize<'de> for Owned {
        fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
            d.deserialize_any(BigIntVisitor).map(Owned)
        }
    }

    struct VecVisitor;

    impl<'de> Visitor<'de> for VecVisitor {
        type Value = Vec<BigInt>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a list of integers")
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut a: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some(Owned(n)) = a.next_element()? {
                out.push(n);
            }
            Ok(out)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigInt>, D::Error> {
        d.deserialize_seq(VecVisitor)
    }
}

pub mod int_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;

    use super::*;

    struct Wrap<'a>(&'a BigInt);

    impl serde::Serialize for Wrap<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            serialize_bigint(self.0, s)
        }
    }

    struct Owned(BigInt);

    impl<'de> serde::Deserialize<'de> for Owned {
        fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
            d.deserialize_any(BigIntVisitor).map(Owned)
        }
    }

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<usize, BigInt>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(&k.to_string(), &Wrap(v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<usize, BigInt>, D::Error> {
        let raw: BTreeMap<String, Owned> = serde::Deserialize::deserialize(d)?;
        raw.into_iter()
            .map(|(k, Owned(v))| {
                k.trim()
                    .parse::<usize>()
                    .map(|k| (k, v))
                    .map_err(|_| de::Error::custom(format!("map key {k:?} is not a vertex index")))
            })
            .collect()
    }
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }
}

pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    struct Owned(BigRational);

    impl<'de> serde::Deserialize<'de> for Owned {
        fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
            d.deserialize_any(RationalVisitor).map(Owned)
        }
    }

    struct VecVisitor;

    impl<'de> Visitor<'de> for VecVisitor {
        type Value = Vec<BigRational>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a list of rationals")
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut a: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some(Owned(r)) = a.next_element()? {
                out.push(r);
            }
            Ok(out)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        d.deserialize_seq(VecVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_format_in_lowest_terms() {
        let r = BigRational::new(BigInt::from(6), BigInt::from(-4));
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(format_rational(&BigRational::from_integer(4.into())), "4/1");
    }

    #[test]
    fn parse_accepts_bare_integers_and_fractions() {
        assert_eq!(parse_rational("7").unwrap(), BigRational::from_integer(7.into()));
        assert_eq!(
            parse_rational(" 10/4 ").unwrap(),
            BigRational::new(BigInt::from(5), BigInt::from(2))
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn large_integers_round_trip_as_strings() {
        #[derive(serde::Serialize, serde::Deserialize, PartialEq, Debug)]
        struct W {
            #[serde(with = "int")]
            n: BigInt,
        }
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let json = serde_json::to_string(&W { n: big.clone() }).unwrap();
        assert_eq!(json, r#"{"n":"123456789012345678901234567890"}"#);
        let back: W = serde_json::from_str(&json).unwrap();
        assert_eq!(back.n, big);
        let small: W = serde_json::from_str(r#"{"n":-5}"#).unwrap();
        assert_eq!(small.n, BigInt::from(-5));
    }
}
