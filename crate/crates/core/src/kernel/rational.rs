//! Exact scalars and small vector helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

pub type Q = BigRational;
pub type Vector = Vec<Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qvec(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| q(x)).collect()
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"0.25"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((int, dec)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), dec);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), dec.len());
        let v = Q::new(n, d);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Q::from_integer)
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn fmt_vec(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_q).collect();
    format!("[{}]", parts.join(", "))
}

/// Parses `"[1, 1/2]"` or `"1,1/2"`.
pub fn parse_vec(s: &str) -> Option<Vector> {
    let s = s.trim();
    let inner = match (s.strip_prefix('['), s.ends_with(']')) {
        (Some(rest), true) => &rest[..rest.len() - 1],
        (None, false) => s,
        _ => return None,
    };
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(parse_q).collect()
}

pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Nearest rational with the given denominator.
pub fn round_to(x: f64, denom: i64) -> Q {
    frac((x * denom as f64).round() as i64, denom)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    let mut s = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn add(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Q, a: &[Q]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn neg(a: &[Q]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn zeros(n: usize) -> Vector {
    vec![Q::zero(); n]
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = zeros(n);
    v[i] = Q::one();
    v
}

pub fn is_zero_vec(a: &[Q]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn l1(a: &[Q]) -> Q {
    a.iter().map(|x| x.abs()).fold(Q::zero(), |s, x| s + x)
}

pub fn max_q<'a>(it: impl IntoIterator<Item = &'a Q>) -> Option<Q> {
    it.into_iter().max().cloned()
}

/// Sign of the first nonzero entry.
pub fn leading_sign(a: &[Q]) -> Ordering {
    for x in a {
        if x.is_positive() {
            return Ordering::Greater;
        }
        if x.is_negative() {
            return Ordering::Less;
        }
    }
    Ordering::Equal
}

/// Scales a nonzero vector to a primitive integer vector with the same direction.
pub fn primitive(a: &[Q]) -> Vector {
    use num_integer::Integer;
    let mut l = BigInt::one();
    for x in a {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = a.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return a.to_vec();
    }
    ints.into_iter().map(|x| Q::from_integer(x / &g)).collect()
}

pub mod serde_q {
    use super::{fmt_q, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        super::value_to_q(&v).ok_or_else(|| D::Error::custom(format!("not a rational: {v}")))
    }
}

pub mod serde_vec {
    use super::{fmt_q, Q};
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter()
            .map(|x| super::value_to_q(x).ok_or_else(|| D::Error::custom(format!("not a rational: {x}"))))
            .collect()
    }
}

pub mod serde_mat {
    use super::{fmt_q, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(fmt_q).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
        let v = Vec::<Vec<serde_json::Value>>::deserialize(d)?;
        v.iter()
            .map(|r| {
                r.iter()
                    .map(|x| super::value_to_q(x).ok_or_else(|| D::Error::custom(format!("not a rational: {x}"))))
                    .collect()
            })
            .collect()
    }
}

pub mod serde_opt_mat {
    use super::Q;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<Vec<Vec<Q>>>, s: S) -> Result<S::Ok, S::Error> {
        match m {
            Some(m) => super::serde_mat::serialize(m, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Vec<Q>>>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "super::serde_mat")] Vec<Vec<Q>>);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

pub mod serde_opt_q {
    use super::Q;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => super::serde_q::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "super::serde_q")] Q);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

pub mod serde_opt_vec {
    use super::Q;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Vec<Q>>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => super::serde_vec::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Q>>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "super::serde_vec")] Vec<Q>);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

/// Accepts `"p/q"` strings as well as JSON integers.
pub fn value_to_q(v: &serde_json::Value) -> Option<Q> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) => n.as_i64().map(q).or_else(|| parse_q(&n.to_string())),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_q("3/6"), Some(frac(1, 2)));
        assert_eq!(parse_q("-0.25"), Some(frac(-1, 4)));
        assert_eq!(parse_q("7"), Some(q(7)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_vec("[1, 1/2]"), Some(vec![q(1), frac(1, 2)]));
        assert_eq!(parse_vec("[1"), None);
        assert_eq!(parse_vec("1, 2"), Some(vec![q(1), q(2)]));
    }

    #[test]
    fn primitive_direction() {
        assert_eq!(primitive(&[frac(1, 2), frac(-3, 4)]), qvec(&[2, -3]));
        assert_eq!(primitive(&[q(4), q(6)]), qvec(&[2, 3]));
    }
}
