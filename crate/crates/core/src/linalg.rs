//! Small dense helpers for subspaces: spans, kernels, intersections.
//!
//! Subspaces are represented by matrices whose columns form an orthonormal
//! basis. The zero subspace of `R^d` is a `d x 0` matrix.

use nalgebra::{DMatrix, DVector};

/// Orthonormal basis of the column span of `vectors`.
///
/// A singular value counts when it exceeds `eps_rank * max(1, sigma_max)`.
pub fn orthonormal_span(vectors: &DMatrix<f64>, eps_rank: f64) -> DMatrix<f64> {
    let d = vectors.nrows();
    if vectors.ncols() == 0 || d == 0 {
        return DMatrix::zeros(d, 0);
    }
    let svd = vectors.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma_max = svd.singular_values.max();
    let threshold = eps_rank * sigma_max.max(1.0);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > threshold)
        .collect();
    let mut basis = DMatrix::zeros(d, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &u.column(i));
    }
    basis
}

pub fn rank(vectors: &DMatrix<f64>, eps_rank: f64) -> usize {
    orthonormal_span(vectors, eps_rank).ncols()
}

/// Column-wise concatenation.
pub fn hstack(blocks: &[&DMatrix<f64>], nrows: usize) -> DMatrix<f64> {
    let ncols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(nrows, ncols);
    let mut c = 0;
    for b in blocks {
        for j in 0..b.ncols() {
            out.set_column(c, &b.column(j));
            c += 1;
        }
    }
    out
}

pub fn from_columns(cols: &[DVector<f64>], nrows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Infinity-norm distance from `v` to the span of the orthonormal `basis`.
pub fn distance_to_span(v: &DVector<f64>, basis: &DMatrix<f64>) -> f64 {
    if basis.ncols() == 0 {
        return v.amax();
    }
    let coeffs = basis.tr_mul(v);
    (v - basis * coeffs).amax()
}

/// Dimension of the intersection of two subspaces given by orthonormal bases.
pub fn intersection_dim(a: &DMatrix<f64>, b: &DMatrix<f64>, eps_rank: f64) -> usize {
    let sum = rank(&hstack(&[a, b], a.nrows()), eps_rank);
    (a.ncols() + b.ncols()).saturating_sub(sum)
}

/// Orthonormal basis for the `k`-dimensional subspace spanned by the right
/// singular vectors of the `k` smallest singular values of `m`.
///
/// Used when the kernel dimension is known in advance (algebraic
/// multiplicity), which avoids a threshold decision.
pub fn kernel_of_dim(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = m.ncols();
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    // Pad to square so that V^T always has n rows.
    let mut square = DMatrix::zeros(n.max(m.nrows()), n);
    square.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut basis = DMatrix::zeros(n, k);
    for (c, &i) in order.iter().take(k).enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    basis
}

/// Largest principal-angle distance between two subspaces of equal
/// dimension, measured as `||P_a - P_b||_max` on the projectors.
pub fn projector_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    let pa = a * a.transpose();
    let pb = b * b.transpose();
    (pa - pb).amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_drops_dependent_columns() {
        let m = DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(rank(&m, 1e-8), 2);
    }

    #[test]
    fn zero_vectors_span_nothing() {
        let m = DMatrix::<f64>::zeros(4, 2);
        assert_eq!(orthonormal_span(&m, 1e-8).ncols(), 0);
    }

    #[test]
    fn intersection_of_coordinate_planes() {
        let xy = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let yz = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(intersection_dim(&xy, &yz, 1e-8), 1);
    }

    #[test]
    fn kernel_of_rank_deficient_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let k = kernel_of_dim(&m, 1);
        assert!((&m * &k).amax() < 1e-12);
    }
}
