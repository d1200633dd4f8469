//! Exact rationals stored unreduced and serialized as `"num/den"` strings.

use num_rational::Ratio;

pub type Rational = Ratio<i64>;

/// Parses `"a/b"`, an integer, or a plain decimal such as `"0.5"`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Ratio::new_raw(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return None;
        }
        let den = 10i64.pow(frac.len() as u32);
        let negative = whole.starts_with('-');
        let whole: i64 = if whole.is_empty() || whole == "-" { 0 } else { whole.parse().ok()? };
        let frac: i64 = frac.parse().ok()?;
        let mag = whole.abs().checked_mul(den)?.checked_add(frac)?;
        return Some(Ratio::new(if negative { -mag } else { mag }, den));
    }
    text.parse::<i64>().ok().map(Ratio::from_integer)
}

/// Always `num/den`, even for integers.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub mod as_str {
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(de)?;
        parse_rational(&text).ok_or_else(|| D::Error::custom(format!("bad rational {text:?}")))
    }
}
