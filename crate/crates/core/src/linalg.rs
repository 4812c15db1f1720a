//! Small dense helpers on top of nalgebra.
//!
//! Matrices are vectorized column-major throughout: `vec(X)` stacks the
//! columns of `X` into one long vector, which is also nalgebra's storage
//! order.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative cut-off used to decide numerical rank.
pub const RANK_RTOL: f64 = 1e-9;

pub fn vectorize(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &DVector<f64>, n1: usize, n2: usize) -> Result<DMatrix<f64>> {
    if v.len() != n1 * n2 {
        return Err(Error::param(format!(
            "vector of length {} cannot be reshaped to {n1}x{n2}",
            v.len()
        )));
    }
    Ok(DMatrix::from_column_slice(n1, n2, v.as_slice()))
}

/// Frobenius inner product `tr(Aᵀ B)`.
pub fn frobenius_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Singular values in non-increasing order.
pub fn singular_values(x: &DMatrix<f64>) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = x
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rtol * sigma_max`.
pub fn numerical_rank(x: &DMatrix<f64>, rtol: f64) -> usize {
    let s = singular_values(x);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&v| v > rtol * smax).count(),
        _ => 0,
    }
}

/// Column order chosen by Householder QR with column pivoting.
///
/// At each step the remaining column with the largest residual norm is
/// moved to the front; ties go to the lowest original index. Only the first
/// `k` pivots are computed.
pub fn pivoted_qr_order(x: &DMatrix<f64>, k: usize) -> Vec<usize> {
    let (m, n) = x.shape();
    let k = k.min(n).min(m);
    let mut a = x.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for step in 0..k {
        // Residual norms are recomputed rather than downdated; the matrices
        // here are small and this keeps ties exact.
        let mut best = step;
        let mut best_norm = -1.0;
        for j in step..n {
            let norm: f64 = (step..m).map(|i| a[(i, j)] * a[(i, j)]).sum();
            let better = norm > best_norm || (norm == best_norm && perm[j] < perm[best]);
            if better {
                best = j;
                best_norm = norm;
            }
        }
        if best != step {
            a.swap_columns(step, best);
            perm.swap(step, best);
        }

        // Householder reflector annihilating a[step+1.., step].
        let alpha: f64 = (step..m)
            .map(|i| a[(i, step)] * a[(i, step)])
            .sum::<f64>()
            .sqrt();
        if alpha == 0.0 {
            continue;
        }
        let sign = if a[(step, step)] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (step..m).map(|i| a[(i, step)]).collect();
        v[0] += sign * alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in step..n {
            let dot: f64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| vt * a[(step + t, j)])
                .sum();
            let f = 2.0 * dot / vnorm2;
            for (t, vt) in v.iter().enumerate() {
                a[(step + t, j)] -= f * vt;
            }
        }
    }
    perm.truncate(k);
    perm
}

/// Least-squares solution of `a * x ≈ b` for a full-column-rank `a`.
pub fn least_squares(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::param("least squares: row mismatch"));
    }
    if a.ncols() == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    let svd = a.clone().svd(true, true);
    svd.solve(b, RANK_RTOL * svd.singular_values.max())
        .map_err(|e| Error::degenerate(format!("least squares failed: {e}")))
}

/// Horizontal concatenation of equally tall blocks.
pub fn hcat(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        out.view_mut((0, c0), (rows, b.ncols())).copy_from(*b);
        c0 += b.ncols();
    }
    out
}

/// True if every diagonal of `a` is constant (bitwise).
pub fn is_toeplitz(a: &DMatrix<f64>) -> bool {
    let (m, n) = a.shape();
    for i in 1..m {
        for j in 1..n {
            if a[(i, j)] != a[(i - 1, j - 1)] {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivot_prefers_largest_then_lowest_index() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 3.0, 3.0, 0.0, 0.0, 0.0]);
        assert_eq!(pivoted_qr_order(&x, 1), vec![1]);
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(pivoted_qr_order(&x, 2), vec![0, 1]);
    }

    #[test]
    fn pivoting_skips_dependent_column() {
        // column 1 = 2 * column 0, column 2 independent but smaller
        let x = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.5]);
        assert_eq!(pivoted_qr_order(&x, 2), vec![1, 2]);
    }

    #[test]
    fn toeplitz_detector() {
        let t = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 1.0, 4.0, 3.0]);
        assert!(is_toeplitz(&t));
        let mut u = t.clone();
        u[(2, 1)] = 0.0;
        assert!(!is_toeplitz(&u));
    }

    #[test]
    fn rank_of_outer_product() {
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let v = DVector::from_vec(vec![1.0, -1.0]);
        assert_eq!(numerical_rank(&(&u * v.transpose()), RANK_RTOL), 1);
        assert_eq!(numerical_rank(&DMatrix::zeros(2, 2), RANK_RTOL), 0);
    }
}
