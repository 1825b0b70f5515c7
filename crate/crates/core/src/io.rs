//! Serialization helpers: square matrices are written as arrays of rows.

use nalgebra::{SMatrix, SVector};
use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub fn rows<const N: usize>(m: &SMatrix<f64, N, N>) -> Vec<Vec<f64>> {
    (0..N).map(|i| (0..N).map(|j| m[(i, j)]).collect()).collect()
}

pub fn from_rows<const N: usize>(r: &[Vec<f64>]) -> Option<SMatrix<f64, N, N>> {
    if r.len() != N || r.iter().any(|row| row.len() != N) {
        return None;
    }
    Some(SMatrix::from_fn(|i, j| r[i][j]))
}

/// `#[serde(with = "crate::io::matrix")]`
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer, const N: usize>(m: &SMatrix<f64, N, N>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(rows(m))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<SMatrix<f64, N, N>, D::Error> {
        let r = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&r).ok_or_else(|| D::Error::custom(format!("expected {N}x{N} matrix")))
    }
}

/// `#[serde(with = "crate::io::vector")]`
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer, const N: usize>(v: &SVector<f64, N>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<SVector<f64, N>, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.len() != N {
            return Err(D::Error::custom(format!("expected vector of length {N}")));
        }
        Ok(SVector::from_column_slice(&v))
    }
}
