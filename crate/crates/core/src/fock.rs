//! Truncated Fock-space representations of the canonical operators.
//!
//! Natural units `m = hbar = 1` throughout; the bare frequency `omega0` sets
//! the oscillator length. Polynomials of `x` are assembled on a space padded by
//! the polynomial degree and truncated afterwards, so the retained `N x N` block
//! carries no truncation corner error.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;

/// An `N`-level truncated harmonic-oscillator basis with frequency `omega0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockSpace {
    dim: usize,
    omega0: f64,
}

impl FockSpace {
    pub fn new(dim: usize, omega0: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega0",
                reason: format!("must be positive and finite, got {omega0}"),
            });
        }
        Ok(Self { dim, omega0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// The same basis with `extra` additional levels.
    pub fn padded(&self, extra: usize) -> Self {
        Self { dim: self.dim + extra, omega0: self.omega0 }
    }

    /// Annihilation operator `a`, with `a|n> = sqrt(n)|n-1>`.
    pub fn annihilation(&self) -> OperatorMatrix {
        OperatorMatrix::from_real_fn(self.dim, |i, j| {
            if j == i + 1 {
                (j as f64).sqrt()
            } else {
                0.0
            }
        })
    }

    /// `x = (a + a†)/sqrt(2 omega0)`
    pub fn x(&self) -> OperatorMatrix {
        let c = 1.0 / (2.0 * self.omega0).sqrt();
        OperatorMatrix::from_real_fn(self.dim, |i, j| {
            if j == i + 1 {
                c * (j as f64).sqrt()
            } else if i == j + 1 {
                c * (i as f64).sqrt()
            } else {
                0.0
            }
        })
    }

    /// `p = i sqrt(omega0/2) (a† - a)`
    pub fn p(&self) -> OperatorMatrix {
        let c = (self.omega0 / 2.0).sqrt();
        let mut p = OperatorMatrix::zeros(self.dim);
        let arr = p.as_array_mut();
        for n in 1..self.dim {
            let s = c * (n as f64).sqrt();
            // <n|a†|n-1> = sqrt(n), <n-1|a|n> = sqrt(n)
            arr[[n, n - 1]] = C64::new(0.0, s);
            arr[[n - 1, n]] = C64::new(0.0, -s);
        }
        p
    }

    /// Diagonal number operator `a† a`.
    pub fn number(&self) -> OperatorMatrix {
        OperatorMatrix::from_real_fn(self.dim, |i, j| if i == j { i as f64 } else { 0.0 })
    }

    /// `sum_j coeffs[j] x^j`, assembled with padding equal to the degree.
    pub fn poly_of_x(&self, coeffs: &[f64]) -> OperatorMatrix {
        let degree = coeffs.len().saturating_sub(1);
        self.poly_of_x_padded(coeffs, degree)
    }

    /// `sum_j coeffs[j] x^j` assembled at `dim + pad` and truncated to `dim`.
    pub fn poly_of_x_padded(&self, coeffs: &[f64], pad: usize) -> OperatorMatrix {
        let big = self.padded(pad);
        let x = big.x();
        let mut acc = OperatorMatrix::zeros(big.dim);
        let mut power = OperatorMatrix::identity(big.dim);
        for (j, &c) in coeffs.iter().enumerate() {
            if j > 0 {
                power = power.dot(&x);
            }
            if c != 0.0 {
                acc = &acc + &power.scale_real(c);
            }
        }
        acc.truncate(self.dim)
    }
}

/// Canonical position and momentum at truncation `n`.
pub fn build_xp(n: usize, omega0: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let space = FockSpace::new(n, omega0)?;
    Ok((space.x(), space.p()))
}

/// Polynomial of `x` on `space`, see [`FockSpace::poly_of_x`].
pub fn poly_of_x(space: &FockSpace, coeffs: &[f64]) -> OperatorMatrix {
    space.poly_of_x(coeffs)
}
