//! Decimal-string encodings for big numbers in structured text records.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Parses `"p/q"`, an integer, or a plain decimal such as `"-0.125"`.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {s:?}"))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let mut num: BigInt = digits.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        if neg {
            num = -num;
        }
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(BigRational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad number {s:?}"))?;
    Ok(BigRational::from_integer(n))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub mod bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(serde::de::Error::custom)
    }
}

pub mod bigint_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.trim().parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod opt_rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&super::format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| super::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod opt_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| s.trim().parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(parse_rational("1/2").unwrap(), half);
        assert_eq!(parse_rational("0.5").unwrap(), half);
        assert_eq!(parse_rational("-0.5").unwrap(), -half.clone());
        assert_eq!(
            parse_rational(" 7 ").unwrap(),
            BigRational::from_integer(7.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn format_round_trips() {
        for s in ["3", "-22/7", "1618/1000"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
