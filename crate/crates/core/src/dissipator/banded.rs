//! Square matrices stored by their non-zero diagonals.

use ndarray::Array2;
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
struct Diagonal {
    offset: isize,
    /// `values[r] = A[start + r, start + r + offset]`, `start = max(0, -offset)`
    values: Vec<C64>,
}

impl Diagonal {
    fn start(&self) -> usize {
        (-self.offset).max(0) as usize
    }
}

/// A banded `N x N` matrix. Only diagonals with a non-zero entry are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    diags: Vec<Diagonal>,
}

impl BandedMatrix {
    pub fn from_dense(a: &Array2<C64>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "banded storage needs a square matrix");
        let mut diags = Vec::new();
        for offset in -(n as isize - 1)..(n as isize) {
            let start = (-offset).max(0) as usize;
            let len = n - offset.unsigned_abs();
            let values: Vec<C64> =
                (0..len).map(|r| a[[start + r, ((start + r) as isize + offset) as usize]]).collect();
            if values.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                diags.push(Diagonal { offset, values });
            }
        }
        Self { dim: n, diags }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored diagonals.
    pub fn bandwidth(&self) -> usize {
        self.diags.len()
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut a = Array2::zeros((self.dim, self.dim));
        for d in &self.diags {
            let s = d.start();
            for (r, v) in d.values.iter().enumerate() {
                a[[s + r, (s + r).wrapping_add(d.offset as usize)]] = *v;
            }
        }
        a
    }

    /// `out += c * self * m`, all matrices row-major `N x N`.
    pub fn left_mul_add(&self, c: C64, m: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert!(m.len() == n * n && out.len() == n * n);
        for d in &self.diags {
            let s = d.start();
            for (r, v) in d.values.iter().enumerate() {
                let i = s + r;
                let j = i.wrapping_add(d.offset as usize);
                let a = c * v;
                let src = &m[j * n..(j + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (o, x) in dst.iter_mut().zip(src) {
                    *o += a * x;
                }
            }
        }
    }

    /// `out += c * m * self`, all matrices row-major `N x N`.
    pub fn right_mul_add(&self, c: C64, m: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert!(m.len() == n * n && out.len() == n * n);
        let scaled: Vec<(usize, usize, Vec<C64>)> = self
            .diags
            .iter()
            .map(|d| {
                let s = d.start();
                let col0 = s.wrapping_add(d.offset as usize);
                (s, col0, d.values.iter().map(|v| c * v).collect())
            })
            .collect();
        for i in 0..n {
            let src = &m[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            // (m A)[i, k + offset] += m[i, k] A[k, k + offset]
            for (s, col0, vals) in &scaled {
                let len = vals.len();
                let src_seg = &src[*s..*s + len];
                let dst_seg = &mut dst[*col0..*col0 + len];
                for ((o, x), v) in dst_seg.iter_mut().zip(src_seg).zip(vals) {
                    *o += x * v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, offsets: &[isize], rng: &mut ChaCha8Rng) -> Array2<C64> {
        Array2::from_shape_fn((n, n), |(i, j)| {
            if offsets.contains(&(j as isize - i as isize)) {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn round_trip_and_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 9;
        let a = random_banded(n, &[-3, -1, 0, 2], &mut rng);
        let m = random_banded(n, &(-8..9).collect::<Vec<_>>(), &mut rng);
        let b = BandedMatrix::from_dense(&a);
        assert_eq!(b.bandwidth(), 4);
        assert_eq!(b.to_dense(), a);

        let c = C64::new(0.3, -1.2);
        let mut left = Array2::zeros((n, n));
        b.left_mul_add(c, m.as_slice().unwrap(), left.as_slice_mut().unwrap());
        let mut right = Array2::zeros((n, n));
        b.right_mul_add(c, m.as_slice().unwrap(), right.as_slice_mut().unwrap());
        let el = a.dot(&m) * c;
        let er = m.dot(&a) * c;
        for (x, y) in left.iter().zip(el.iter()).chain(right.iter().zip(er.iter())) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_matrix_has_no_diagonals() {
        let b = BandedMatrix::from_dense(&Array2::zeros((4, 4)));
        assert_eq!(b.bandwidth(), 0);
    }
}
