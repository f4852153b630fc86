//! Dense complex operators on a truncated Fock space.

use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A dense complex square matrix on an `N`-level truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(Array2<C64>);

impl OperatorMatrix {
    pub fn new(entries: Array2<C64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::DimensionMismatch { expected: r, found: c });
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Array2::zeros((dim, dim)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Array2::from_diag_elem(dim, C64::new(1.0, 0.0)))
    }

    pub fn from_real_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self(Array2::from_shape_fn((dim, dim), |(i, j)| C64::new(f(i, j), 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.0
    }

    pub fn as_array_mut(&mut self) -> &mut Array2<C64> {
        &mut self.0
    }

    pub fn into_array(self) -> Array2<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[[i, j]]
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.t().mapv(|z| z.conj()))
    }

    pub fn dot(&self, other: &Self) -> Self {
        Self(self.0.dot(&other.0))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = out.dot(self);
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.0.diag().sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |O - O†|` over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in i..n {
                err = err.max((self.0[[i, j]] - self.0[[j, i]].conj()).norm());
            }
        }
        err
    }

    /// Top-left `dim x dim` block.
    pub fn truncate(&self, dim: usize) -> Self {
        assert!(dim <= self.dim(), "cannot truncate to a larger dimension");
        Self(self.0.slice(s![..dim, ..dim]).to_owned())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self(&self.0 * C64::new(c, 0.0))
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        Ok(())
    }

    /// Hermitian part `(O + O†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let d = self.dagger();
        Self((&self.0 + &d.0) * C64::new(0.5, 0.0))
    }

    /// `max |A - B|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// `[A, B] = AB - BA`
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix(a.0.dot(&b.0) - b.0.dot(&a.0))
}

/// `{A, B} = AB + BA`
pub fn anticommutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix(a.0.dot(&b.0) + b.0.dot(&a.0))
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(self.0 + rhs.0)
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(self.0 - rhs.0)
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-self.0)
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale_real(rhs)
    }
}

impl Mul<C64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        OperatorMatrix(self.0 * rhs)
    }
}

impl Mul<f64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        OperatorMatrix(self.0 * C64::new(rhs, 0.0))
    }
}

impl From<OperatorMatrix> for Array2<C64> {
    fn from(op: OperatorMatrix) -> Self {
        op.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_square_rejected() {
        let a = Array2::<C64>::zeros((2, 3));
        assert!(OperatorMatrix::new(a).is_err());
    }

    #[test]
    fn commutator_of_identity_vanishes() {
        let a = OperatorMatrix::from_real_fn(3, |i, j| (i * 3 + j) as f64);
        let id = OperatorMatrix::identity(3);
        assert_eq!(commutator(&a, &id).max_abs(), 0.0);
        assert_eq!(anticommutator(&a, &id).max_abs_diff(&(&a * 2.0)), 0.0);
    }
}
