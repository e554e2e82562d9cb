//! JSON encodings: complex numbers as `[re, im]`, matrices as rows of those.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::linalg::{c, CMat, C64};

pub fn complex_to_value(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_value(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_value(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn vector_to_value(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| complex_to_value(z)).collect())
}

/// Accepts `[re, im]` or a bare real number.
pub fn complex_from_value(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| c(x, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(c(a[0].as_f64()?, a[1].as_f64()?)),
        _ => None,
    }
}

pub fn vector_from_value(v: &Value) -> Option<Vec<C64>> {
    v.as_array()?.iter().map(complex_from_value).collect()
}

pub fn matrix_from_value(v: &Value) -> Option<CMat> {
    let rows = v.as_array()?;
    let parsed: Vec<Vec<C64>> = rows.iter().map(vector_from_value).collect::<Option<_>>()?;
    let r = parsed.len();
    let cols = parsed.first().map_or(0, Vec::len);
    if parsed.iter().any(|row| row.len() != cols) {
        return None;
    }
    Some(CMat::from_fn(r, cols, |i, j| parsed[i][j]))
}

/// `#[serde(with = "crate::json::cmat")]`
pub mod cmat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_value(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let v = Value::deserialize(d)?;
        matrix_from_value(&v).ok_or_else(|| D::Error::custom("expected rows of [re, im] pairs"))
    }
}

/// `#[serde(with = "crate::json::cvec")]`
pub mod cvec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        vector_to_value(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let v = Value::deserialize(d)?;
        vector_from_value(&v).ok_or_else(|| D::Error::custom("expected an array of [re, im] pairs"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = CMat::from_fn(2, 3, |i, j| c(i as f64, -(j as f64)));
        let v = matrix_to_value(&m);
        assert_eq!(v[1][2], json!([1.0, -2.0]));
        assert_eq!(matrix_from_value(&v).unwrap(), m);
    }

    #[test]
    fn real_entries_are_accepted() {
        let v: Value = serde_json::from_str("[[1, [0, 2]], [3.5, 0]]").unwrap();
        let m = matrix_from_value(&v).unwrap();
        assert_eq!(m[(0, 1)], c(0.0, 2.0));
        assert_eq!(m[(1, 0)], c(3.5, 0.0));
    }
}
