//! Points of ℝⁿ and the handful of dense kernels the solver needs.

use alloc::vec::Vec;
use core::ops::Index;

use crate::{Error, Result};

/// A finite point of ℝⁿ, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { coords })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional vector");
        Self {
            coords: alloc::vec![0.0; dim],
        }
    }

    /// Unit vector along `axis`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coords[axis] = 1.0;
        v
    }

    // Callers guarantee finiteness; used on freshly computed images.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Self { coords }
    }

    pub(crate) fn checked(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.coords, &other.coords)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector::from_raw(sub(&self.coords, &other.coords))
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        norm(&sub(&self.coords, &other.coords))
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            })
        }
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm, scaled by the largest magnitude so that it neither
/// underflows nor overflows. Exact when a single coordinate is nonzero.
pub fn norm(a: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ssq: f64 = a
        .iter()
        .map(|x| {
            let t = x / scale;
            t * t
        })
        .sum();
    scale * libm::sqrt(ssq)
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert_eq!(Vector::new(vec![]), Err(Error::EmptyVector));
        assert_eq!(Vector::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(1)));
        assert_eq!(Vector::new(vec![f64::INFINITY]), Err(Error::NonFinite(0)));
    }

    #[test]
    fn norm_is_exact_for_single_coordinate() {
        for e in [-1074, -600, -100, 0, 300, 1000] {
            let y = libm::ldexp(1.0, e);
            assert_eq!(norm(&[0.0, y]), y);
            assert_eq!(norm(&[-y, 0.0]), y);
        }
        assert_eq!(norm(&[3.0, 4.0]), 5.0);
        assert_eq!(norm(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::default();
        for v in [1.0, 1e100, 1.0, -1e100] {
            s.add(v);
        }
        assert_eq!(s.value(), 2.0);
    }
}
