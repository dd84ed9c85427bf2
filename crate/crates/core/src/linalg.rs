//! Small dense linear-algebra helpers built on nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold used for numerical rank decisions.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > rel_tol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis of the right null space of `m`, as columns.
///
/// Singular values at or below `rel_tol * sigma_max` count as zero. A zero
/// matrix has the whole space as kernel.
pub fn kernel(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 || m.iter().all(|&v| v == 0.0) {
        return DMatrix::identity(n, n);
    }
    // Pad to at least square so that V^T is complete.
    let rows = m.nrows().max(n);
    let mut a = DMatrix::zeros(rows, n);
    a.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.max();
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rel_tol * top)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    svd.solve(b, top * 1e-14).expect("U and V^T were computed")
}

/// Euclidean norm of `a ∧ b` for 4-vectors.
pub fn wedge_norm(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let w = a[i] * b[j] - a[j] * b[i];
            s += w * w;
        }
    }
    s.sqrt()
}

pub fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel_of_projection() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(numerical_rank(&m, RANK_REL_TOL), 2);
        let k = kernel(&m, RANK_REL_TOL);
        assert_eq!(k.ncols(), 1);
        assert!((k[(2, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let m = DMatrix::zeros(3, 4);
        assert_eq!(numerical_rank(&m, RANK_REL_TOL), 0);
        assert_eq!(kernel(&m, RANK_REL_TOL).ncols(), 4);
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![3.0, 5.0, 7.0]);
        let x = lstsq(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wedge_of_parallel_vectors_vanishes() {
        assert_eq!(wedge_norm(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]), 0.0);
        assert_eq!(wedge_norm(&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]), 1.0);
    }
}
