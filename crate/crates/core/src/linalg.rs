//! Dense decompositions, delegated to nalgebra.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::operator::OperatorMatrix;

pub(crate) fn to_nalgebra(a: &Array2<C64>) -> DMatrix<C64> {
    let (r, c) = a.dim();
    DMatrix::from_fn(r, c, |i, j| a[[i, j]])
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a Hermitian matrix.
/// Only the Hermitian part of `op` is used.
pub fn hermitian_eigen(op: &OperatorMatrix) -> (Vec<f64>, Array2<C64>) {
    let m = to_nalgebra(op.hermitian_part().as_array());
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let n = op.dim();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(op: &OperatorMatrix) -> Vec<f64> {
    let m = to_nalgebra(op.hermitian_part().as_array());
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Right singular vector for the smallest singular value, together with the two
/// smallest singular values `(s_min, s_next)`.
pub(crate) fn null_vector(a: &DMatrix<C64>) -> (Vec<C64>, f64, f64) {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let k = order[0];
    let s_min = svd.singular_values[k];
    let s_next = order.get(1).map_or(f64::INFINITY, |&i| svd.singular_values[i]);
    // rows of v_t are conjugated right singular vectors
    let v = v_t.row(k).iter().map(|z| z.conj()).collect();
    (v, s_min, s_next)
}
