//! Finite-dimensional real inner-product space primitives.
//!
//! `Vector` stands in for an element of a real Hilbert space: coordinates in
//! ℝᵈ with the Euclidean dot product.

use std::ops::Index;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Element of ℝᵈ. Coordinates are finite on construction and never mutated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Vector<T> {
    /// Builds a vector, rejecting empty input and NaN/infinite coordinates.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { coords })
    }

    /// Builds a vector without the finiteness check. Used for intermediate
    /// iterates, whose finiteness is checked by the caller.
    pub(crate) fn from_raw(coords: Vec<T>) -> Self {
        debug_assert!(!coords.is_empty());
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(vec![T::zero(); dim.max(1)])
    }

    pub fn filled(dim: usize, value: T) -> Self {
        Self::from_raw(vec![value; dim.max(1)])
    }

    /// Builds a vector from `f64` values, converting into `T`.
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| T::lit(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub(crate) fn check_dim(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context,
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        inner(self, other)
    }

    pub fn norm(&self) -> T {
        norm(self)
    }

    pub fn norm_squared(&self) -> T {
        self.coords.iter().fold(T::zero(), |acc, &c| acc + c * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "vector addition", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "vector subtraction", |a, b| a - b)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|a| c * a)
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.norm())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.coords.iter().map(|&c| f(c)).collect())
    }

    pub(crate) fn zip_with(
        &self,
        other: &Self,
        context: &'static str,
        f: impl Fn(T, T) -> T,
    ) -> Result<Self> {
        self.check_dim(other, context)?;
        Ok(Self::from_raw(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

/// Euclidean inner product Σᵢ xᵢyᵢ.
pub fn inner<T: Scalar>(x: &Vector<T>, y: &Vector<T>) -> Result<T> {
    x.check_dim(y, "inner product")?;
    Ok(x.coords
        .iter()
        .zip(&y.coords)
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b))
}

/// Induced norm sqrt(⟨x, x⟩).
pub fn norm<T: Scalar>(x: &Vector<T>) -> T {
    x.norm_squared().sqrt()
}

/// Affine combination a·x + (1−a)·y. Any real `a` is accepted.
pub fn combine<T: Scalar>(a: T, x: &Vector<T>, y: &Vector<T>) -> Result<Vector<T>> {
    let b = T::one() - a;
    x.zip_with(y, "combine", |xi, yi| a * xi + b * yi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector<f64> {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn inner_examples() {
        assert_eq!(inner(&v(&[1.0, 2.0]), &v(&[3.0, 4.0])).unwrap(), 11.0);
        assert_eq!(inner(&v(&[0.0, 0.0]), &v(&[5.0, 7.0])).unwrap(), 0.0);
        assert_eq!(inner(&v(&[3.0]), &v(&[3.0])).unwrap(), 9.0);
    }

    #[test]
    fn inner_dimension_mismatch_names_both_dims() {
        let err = inner(&v(&[1.0]), &v(&[1.0, 2.0])).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                context: "inner product",
                left: 1,
                right: 2
            }
        );
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&v(&[3.0, 4.0])), 5.0);
        assert_eq!(norm(&v(&[0.0, 0.0, 0.0])), 0.0);
        assert_eq!(norm(&v(&[-2.0])), 2.0);
    }

    #[test]
    fn combine_examples() {
        assert_eq!(combine(0.5, &v(&[2.0]), &v(&[4.0])).unwrap(), v(&[3.0]));
        assert_eq!(combine(1.0, &v(&[2.0]), &v(&[4.0])).unwrap(), v(&[2.0]));
        let c = combine(1.0 / 3.0, &v(&[0.1]), &v(&[0.775])).unwrap();
        assert!((c[0] - 0.55).abs() < 1e-15);
        assert!(combine(0.5, &v(&[1.0]), &v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(Vector::<f64>::new(vec![]), Err(Error::EmptyVector));
        assert_eq!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let x = Vector::<f32>::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(x.norm(), 5.0f32);
        assert_eq!(x.inner(&x).unwrap(), 25.0f32);
    }
}
