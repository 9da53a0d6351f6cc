//! Minimal dense routines for the small symmetric systems that arise from
//! Gram matrices of monomial bases (sizes are a few dozen at most).

use num_complex::Complex64;

/// Cholesky factor L (lower triangular, row-major) of a symmetric
/// positive-definite matrix. Returns `None` if a pivot is not positive.
pub(crate) fn cholesky(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solve L Lᵀ x = b in place for a complex right-hand side.
pub(crate) fn cholesky_solve(n: usize, l: &[f64], b: &mut [Complex64]) {
    debug_assert_eq!(b.len(), n);
    // forward: L y = b
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    // backward: Lᵀ x = y
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solve L X = B for an n×m right-hand side in place (forward substitution).
pub(crate) fn lower_solve_matrix(n: usize, l: &[f64], b: &mut [f64], m: usize) {
    debug_assert_eq!(b.len(), n * m);
    for i in 0..n {
        for c in 0..m {
            let mut s = b[i * m + c];
            for k in 0..i {
                s -= l[i * n + k] * b[k * m + c];
            }
            b[i * m + c] = s / l[i * n + i];
        }
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    let mut m = a.to_vec();
    let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = (frob * 1e-15).max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q].abs();
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= stop / (n * n) as f64 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = 0.5 * (2.0 * apq).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        // A = Lc Lcᵀ for a hand-picked Lc
        let lc = [2.0, 0.0, 0.0, 1.0, 3.0, 0.0, 0.5, -1.0, 1.5];
        let n = 3;
        let mut a = vec![0.0; 9];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    a[i * n + j] += lc[i * n + k] * lc[j * n + k];
                }
            }
        }
        let l = cholesky(n, &a).expect("spd");
        for (x, y) in l.iter().zip(lc.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0]; // eigenvalues 3, -1
        assert!(cholesky(2, &a).is_none());
    }

    #[test]
    fn solve_matches_direct_inverse() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let l = cholesky(2, &a).unwrap();
        let mut b = [Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0)];
        cholesky_solve(2, &l, &mut b);
        // check A x = rhs
        let rhs0 = 4.0 * b[0] + 1.0 * b[1];
        let rhs1 = 1.0 * b[0] + 3.0 * b[1];
        assert!((rhs0 - Complex64::new(1.0, 2.0)).norm() < 1e-13);
        assert!((rhs1 - Complex64::new(0.0, -1.0)).norm() < 1e-13);
    }

    #[test]
    fn jacobi_finds_known_spectrum() {
        // diag(1, 5) conjugated by a rotation of 30 degrees
        let th: f64 = std::f64::consts::PI / 6.0;
        let (s, c) = th.sin_cos();
        let a = [
            c * c + 5.0 * s * s,
            c * s * 4.0,
            c * s * 4.0,
            s * s + 5.0 * c * c,
        ];
        let mut eigs = symmetric_eigenvalues(2, &a);
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn empty_matrix_is_fine() {
        assert!(cholesky(0, &[]).is_some());
        assert!(symmetric_eigenvalues(0, &[]).is_empty());
    }
}
