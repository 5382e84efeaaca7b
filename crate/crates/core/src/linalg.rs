//! Small dense linear algebra: fixed-size solves and symmetric eigen-decomposition.

use num_traits::Float;

use crate::error::Error;
use crate::scalar::Scalar;

/// Solves `a x = b` for a 3x3 system by Gaussian elimination with partial pivoting.
///
/// Fails with [`Error::SingularSystem`] when a pivot falls below `1e-13` relative
/// to the largest entry of `a` (scaled for `f32`).
pub fn solve3<T: Scalar>(a: [[T; 3]; 3], b: [T; 3]) -> Result<[T; 3], Error> {
    let mut m = a;
    let mut r = b;
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(T::zero(), |s, v| Float::max(s, v.mag()));
    if scale == T::zero() {
        return Err(Error::SingularSystem);
    }
    let threshold = scale * Float::max(T::lit(1e-13), T::epsilon() * T::lit(16.0));
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].mag().partial_cmp(&m[j][col].mag()).unwrap())
            .unwrap();
        if m[pivot][col].mag() <= threshold {
            return Err(Error::SingularSystem);
        }
        m.swap(col, pivot);
        r.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] = m[row][k] - f * m[col][k];
            }
            r[row] = r[row] - f * r[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut s = r[row];
        for k in row + 1..3 {
            s = s - m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Ok(x)
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns (`vectors[i][j]` is component `i` of eigenvector `j`).
pub fn symmetric_eigen<T: Scalar>(a: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut v = vec![vec![T::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let total: T = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off <= T::epsilon() * T::epsilon() * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (two * m[p][q]);
                let t = theta.signum() / (theta.mag() + Float::sqrt(theta * theta + T::one()));
                let c = T::one() / Float::sqrt(t * t + T::one());
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).unwrap());
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = (0..n)
        .map(|row| order.iter().map(|&col| v[row][col]).collect())
        .collect();
    (values, vectors)
}

/// Orthonormal basis (columns) of the orthogonal complement of `span(basis)` in `R^dim`.
pub fn orthogonal_complement<T: Scalar>(basis: &[Vec<T>], dim: usize) -> Vec<Vec<T>> {
    let mut kept: Vec<Vec<T>> = basis.to_vec();
    let mut out = Vec::new();
    for e in 0..dim {
        let mut w = vec![T::zero(); dim];
        w[e] = T::one();
        for _ in 0..2 {
            for q in &kept {
                let proj: T = q.iter().zip(&w).map(|(a, b)| *a * *b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi = *wi - proj * *qi;
                }
            }
        }
        let nrm = Float::sqrt(w.iter().map(|x| *x * *x).sum::<T>());
        if nrm > T::lit(1e-6) {
            let w: Vec<T> = w.into_iter().map(|x| x / nrm).collect();
            kept.push(w.clone());
            out.push(w);
        }
    }
    out
}

/// `x^T m y` for a dense square matrix.
pub fn bilinear<T: Scalar>(m: &[Vec<T>], x: &[T], y: &[T]) -> T {
    m.iter()
        .zip(x)
        .map(|(row, xi)| *xi * row.iter().zip(y).map(|(a, b)| *a * *b).sum::<T>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve3_recovers_known_solution() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, -1.0], [0.5, -1.0, 2.0]];
        let x = [1.0, -2.0, 0.25];
        let b = [
            a[0][0] * x[0] + a[0][1] * x[1] + a[0][2] * x[2],
            a[1][0] * x[0] + a[1][1] * x[1] + a[1][2] * x[2],
            a[2][0] * x[0] + a[2][1] * x[1] + a[2][2] * x[2],
        ];
        let got = solve3(a, b).unwrap();
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn solve3_rejects_singular() {
        let a = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]];
        assert!(matches!(solve3(a, [1.0, 1.0, 1.0]), Err(Error::SingularSystem)));
    }

    #[test]
    fn jacobi_matches_diagonalization() {
        let a = vec![
            vec![2.0, -1.0, 0.0, 0.3],
            vec![-1.0, 2.0, -1.0, 0.0],
            vec![0.0, -1.0, 2.0, 0.1],
            vec![0.3, 0.0, 0.1, 5.0],
        ];
        let (vals, vecs) = symmetric_eigen(&a);
        for j in 0..4 {
            let col: Vec<f64> = (0..4).map(|i| vecs[i][j]).collect();
            for i in 0..4 {
                let av: f64 = (0..4).map(|k| a[i][k] * col[k]).sum();
                assert!((av - vals[j] * col[i]).abs() < 1e-12);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn complement_is_orthonormal() {
        let s = 1.0 / 2f64.sqrt();
        let basis = vec![vec![s, -s, 0.0]];
        let comp = orthogonal_complement(&basis, 3);
        assert_eq!(comp.len(), 2);
        for c in &comp {
            let d: f64 = c.iter().zip(&basis[0]).map(|(a, b)| a * b).sum();
            assert!(d.abs() < 1e-14);
        }
    }
}
