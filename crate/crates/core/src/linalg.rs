//! Small dense linear algebra helpers: an LU solve for the Newton-Raphson
//! Jacobian and a cyclic Jacobi eigensolver for PCA covariance matrices.
//!
//! Everything here is deliberately allocation-simple; the matrices involved
//! are tens of rows, not thousands.

use ndarray::{Array1, Array2};

/// Solves `a * x = b` in place via Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot is (numerically) zero, i.e. the
/// matrix is singular to working precision.
pub fn solve_dense(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = b.len();
    assert_eq!(a.nrows(), n, "matrix/rhs dimension mismatch");
    assert_eq!(a.ncols(), n, "matrix must be square");

    let mut m = a.clone();
    let mut x = b.clone();

    for col in 0..n {
        // partial pivot
        let mut pivot_row = col;
        let mut pivot_val = m[(col, col)].abs();
        for row in (col + 1)..n {
            let v = m[(row, col)].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < 1e-12 {
            return None;
        }
        if pivot_row != col {
            for k in col..n {
                let tmp = m[(col, k)];
                m[(col, k)] = m[(pivot_row, k)];
                m[(pivot_row, k)] = tmp;
            }
            x.swap(col, pivot_row);
        }

        for row in (col + 1)..n {
            let factor = m[(row, col)] / m[(col, col)];
            if factor == 0.0 {
                continue;
            }
            for k in (col + 1)..n {
                m[(row, k)] -= factor * m[(col, k)];
            }
            m[(row, col)] = 0.0;
            x[row] -= factor * x[col];
        }
    }

    // back substitution
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in (col + 1)..n {
            acc -= m[(col, k)] * x[k];
        }
        x[col] = acc / m[(col, col)];
    }
    Some(x)
}

/// Eigen decomposition of a real symmetric matrix by the cyclic Jacobi
/// method. Returns `(eigenvalues, eigenvectors)` sorted by descending
/// eigenvalue; eigenvectors are the columns of the returned matrix.
///
/// Off-diagonal elements are annihilated sweep by sweep until the sum of
/// their magnitudes falls below `1e-12` times the Frobenius norm.
pub fn eigen_symmetric(matrix: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");

    let mut a = matrix.clone();
    let mut v = Array2::<f64>::eye(n);

    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-12 * fro.max(1.0);

    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].abs();
            }
        }
        if off < tol {
            break;
        }

        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let diff = a[(q, q)] - a[(p, p)];
                // rotation angle from Numerical Recipes' stable formula
                let t = if diff.abs() < 1e-300 {
                    1.0_f64.copysign(apq)
                } else {
                    let theta = diff / (2.0 * apq);
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, new_col)] = v[(row, old_col)];
        }
    }
    (eigenvalues, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn solves_identity() {
        let a = Array2::eye(3);
        let b = array![1.0, -2.0, 3.0];
        let x = solve_dense(&a, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn solves_known_system() {
        // [2 1; 1 3] x = [3; 5]  =>  x = [4/5, 7/5]
        let a = array![[2.0, 1.0], [1.0, 3.0]];
        let b = array![3.0, 5.0];
        let x = solve_dense(&a, &b).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12);
        assert!((x[1] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn rejects_singular() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        let b = array![1.0, 2.0];
        assert!(solve_dense(&a, &b).is_none());
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = array![[0.0, 1.0], [1.0, 0.0]];
        let b = array![2.0, 3.0];
        let x = solve_dense(&a, &b).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_diagonal_matrix() {
        let a = array![[3.0, 0.0], [0.0, 1.0]];
        let (vals, vecs) = eigen_symmetric(&a);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vecs[(0, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_known_2x2() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = eigen_symmetric(&a);
        assert!((vals[0] - 3.0).abs() < 1e-10);
        assert!((vals[1] - 1.0).abs() < 1e-10);
        // residual ||A v - lambda v||
        for j in 0..2 {
            for i in 0..2 {
                let av: f64 = (0..2).map(|k| a[(i, k)] * vecs[(k, j)]).sum();
                assert!((av - vals[j] * vecs[(i, j)]).abs() < 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn lu_residual_is_small(entries in proptest::collection::vec(-10.0f64..10.0, 16), rhs in proptest::collection::vec(-10.0f64..10.0, 4)) {
            let a = Array2::from_shape_vec((4, 4), entries).unwrap();
            let b = Array1::from_vec(rhs);
            if let Some(x) = solve_dense(&a, &b) {
                let r = a.dot(&x) - &b;
                let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                prop_assert!(r.iter().all(|v| v.abs() < 1e-7 * scale));
            }
        }

        #[test]
        fn jacobi_orthonormal_and_accurate(entries in proptest::collection::vec(-5.0f64..5.0, 25)) {
            let m = Array2::from_shape_vec((5, 5), entries).unwrap();
            let a = &m + &m.t(); // symmetrize
            let (vals, vecs) = eigen_symmetric(&a);
            // descending order
            for w in vals.windows(2) {
                prop_assert!(w[0] >= w[1] - 1e-9);
            }
            // columns orthonormal
            for i in 0..5 {
                for j in 0..5 {
                    let dot: f64 = (0..5).map(|k| vecs[(k, i)] * vecs[(k, j)]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((dot - expect).abs() < 1e-9);
                }
            }
            // eigen residual
            let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            for j in 0..5 {
                for i in 0..5 {
                    let av: f64 = (0..5).map(|k| a[(i, k)] * vecs[(k, j)]).sum();
                    prop_assert!((av - vals[j] * vecs[(i, j)]).abs() <= 1e-8 * fro.max(1.0));
                }
            }
        }
    }
}
