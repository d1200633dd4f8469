//! Big integers as decimal strings in JSON.

use num_bigint::BigUint;
use serde::{de::Error, Deserialize, Deserializer, Serializer};

fn parse<E: Error>(text: &str) -> Result<BigUint, E> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(E::custom(format!("bad decimal integer {text:?}")));
    }
    BigUint::parse_bytes(text.as_bytes(), 10).ok_or_else(|| E::custom("bad decimal integer"))
}

pub mod dec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigUint, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&x.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BigUint, D::Error> {
        parse(&String::deserialize(de)?)
    }
}

pub mod dec_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[BigUint], ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&x.to_str_radix(10))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(de)?.iter().map(|t| parse(t)).collect()
    }
}
