//! Dense real vectors with a finiteness invariant.
//!
//! Every constructor and every arithmetic operation that produces a new
//! [`Vector`] rejects NaN or infinite entries, so any `Vector` in hand is
//! known to be finite. Dimension is fixed at construction.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Wraps `entries`, rejecting an empty vector or non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        Self::checked(entries, "vector entries")
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Vector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        Self::checked(vec![value; dim], "fill value")
    }

    fn checked(entries: Vec<f64>, what: &'static str) -> Result<Self> {
        if entries.iter().all(|x| x.is_finite()) {
            Ok(Vector(entries))
        } else {
            Err(Error::NonFinite { what })
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        other.ensure_dim(self.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &Vector) -> Result<Vector> {
        other.ensure_dim(self.dim())?;
        let out = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Self::checked(out, "axpy result")
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.axpy(1.0, other)
    }

    pub fn scaled(&self, factor: f64) -> Result<Vector> {
        Self::checked(self.0.iter().map(|x| factor * x).collect(), "scaled vector")
    }

    /// Entry-wise map; the closure result must stay finite.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<Vector> {
        Self::checked(self.0.iter().map(|&x| f(x)).collect(), "mapped vector")
    }

    /// Entry-wise combination of two vectors of equal dimension.
    pub fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Result<Vector> {
        other.ensure_dim(self.dim())?;
        Self::checked(
            self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect(),
            "combined vector",
        )
    }

    pub fn distance(&self, other: &Vector) -> Result<f64> {
        other.ensure_dim(self.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Vector::new(vec![]).is_err());
    }

    #[test]
    fn overflow_in_arithmetic_is_rejected() {
        let big = Vector::new(vec![f64::MAX]).unwrap();
        assert!(matches!(big.scaled(2.0), Err(Error::NonFinite { .. })));
        assert!(big.add(&big).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let a = Vector::zeros(2);
        let b = Vector::zeros(3);
        assert!(matches!(
            a.dot(&b),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn norms() {
        let v = Vector::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(v.norm(), 5.0);
        assert_eq!(v.norm_sq(), 25.0);
        let w = v.axpy(-1.0, &v).unwrap();
        assert_eq!(w.norm(), 0.0);
    }

    #[test]
    fn serde_roundtrip_validates() {
        let v: Vector = serde_json::from_str("[1.0, 2.5]").unwrap();
        assert_eq!(v.dim(), 2);
        assert!(serde_json::from_str::<Vector>("[]").is_err());
    }
}
