//! Complex numbers travel as `[re, im]` pairs in every JSON document.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Deserializer};

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn from_pair([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

pub fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&z.re)?;
    seq.serialize_element(&z.im)?;
    seq.end()
}

pub fn ser_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&pair(*z))?;
    }
    seq.end()
}

pub fn ser_vecs<S: Serializer>(v: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
    let pairs: Vec<Vec<[f64; 2]>> = v.iter().map(|p| p.iter().map(|z| pair(*z)).collect()).collect();
    serde::Serialize::serialize(&pairs, s)
}

pub fn de_complex<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    <[f64; 2]>::deserialize(d).map(from_pair)
}

pub fn de_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
    Vec::<[f64; 2]>::deserialize(d).map(|v| v.into_iter().map(from_pair).collect())
}

pub fn de_vecs<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
    Vec::<Vec<[f64; 2]>>::deserialize(d)
        .map(|v| v.into_iter().map(|p| p.into_iter().map(from_pair).collect()).collect())
}

/// Parses a point given as `[[re, im], ...]`.
pub fn parse_point(text: &str) -> crate::Result<Vec<Complex64>> {
    let raw: Vec<[f64; 2]> = serde_json::from_str(text)?;
    Ok(raw.into_iter().map(from_pair).collect())
}
