use std::ops::Deref;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::linalg::hermitian_eigenvalues;
use crate::operator::OperatorMatrix;

/// A Hermitian, unit-trace state on the truncated Fock space. Positivity is
/// monitored, not enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(OperatorMatrix);

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;

impl DensityMatrix {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("not Hermitian ({herm:e})") });
        }
        let tr = op.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("trace {tr} differs from 1") });
        }
        Ok(Self(op))
    }

    pub(crate) fn from_raw(op: OperatorMatrix) -> Self {
        Self(op)
    }

    /// Bose-Einstein state of the bare oscillator, renormalized on the truncated space.
    pub fn thermal(dim: usize, n_th: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(n_th >= 0.0) {
            return Err(Error::InvalidParameter { name: "n_th", reason: format!("must be >= 0, got {n_th}") });
        }
        let q = n_th / (1.0 + n_th);
        let w: Vec<f64> = (0..dim).map(|n| q.powi(n as i32)).collect();
        let z: f64 = w.iter().sum();
        Ok(Self(OperatorMatrix::from_real_fn(dim, |i, j| if i == j { w[i] / z } else { 0.0 })))
    }

    pub fn fock(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::TooFewLevels { found: dim, needed: k + 1 });
        }
        Ok(Self(OperatorMatrix::from_real_fn(dim, |i, j| if i == k && j == k { 1.0 } else { 0.0 })))
    }

    /// `|psi><psi|` for a state vector, normalized.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if psi.len() < 2 || !(norm2 > 0.0) {
            return Err(Error::InvalidDimension(psi.len()));
        }
        let n = psi.len();
        let a = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj() / norm2);
        Ok(Self(OperatorMatrix::new(a)?))
    }

    /// Coherent state `|alpha>`, renormalized on the truncated space.
    pub fn coherent(space: &FockSpace, alpha: C64) -> Self {
        let mut psi = Vec::with_capacity(space.dim());
        let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..space.dim() {
            if n > 0 {
                c = c * alpha / (n as f64).sqrt();
            }
            psi.push(c);
        }
        Self::pure(&psi).expect("coherent amplitudes are normalizable")
    }

    /// Coherent state centred at `(x0, p0)` in phase space.
    pub fn displaced_vacuum(space: &FockSpace, x0: f64, p0: f64) -> Self {
        let w = space.omega0();
        let alpha = C64::new(x0, p0 / w) * (w / 2.0).sqrt();
        Self::coherent(space, alpha)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_operator(&self) -> &OperatorMatrix {
        &self.0
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.0
    }

    pub fn trace_real(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr(rho O)`.
    pub fn expect(&self, op: &OperatorMatrix) -> C64 {
        let (r, o) = (self.0.as_array(), op.as_array());
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += r[[i, j]] * o[[j, i]];
            }
        }
        acc
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)[0]
    }

    /// `<psi|rho|psi>` for a normalized `psi`.
    pub fn overlap(&self, psi: &[C64]) -> f64 {
        let r = self.0.as_array();
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += psi[i].conj() * r[[i, j]] * psi[j];
            }
        }
        acc.re
    }
}

impl Deref for DensityMatrix {
    type Target = OperatorMatrix;
    fn deref(&self) -> &OperatorMatrix {
        &self.0
    }
}
