//! Dense symmetric eigensolver used by the polariton diagonalization.
//!
//! Cyclic Jacobi with a fixed sweep order: deterministic, quadratically
//! convergent, and accurate to machine precision for the small matrices
//! (dimension N+1 with N phonon modes) that arise here.

use crate::Real;
use ndarray::Array2;

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as the columns of the second result. The input is expected
/// symmetric; only the full matrix entries are read, no symmetrizing is
/// performed.
pub fn symmetric_eigen<T: Real>(a: &Array2<T>) -> (Vec<T>, Array2<T>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut m = a.clone();
    let mut v = Array2::<T>::eye(n);
    if n > 1 {
        let scale = frobenius(&m).max(T::min_positive_value());
        let tol = T::epsilon() * scale;
        let mut sweeps = 0usize;
        while off_diagonal_norm(&m) > tol && sweeps < 60 {
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut m, &mut v, p, q);
                }
            }
            sweeps += 1;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).expect("finite eigenvalues"));
    let values: Vec<T> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vectors = Array2::<T>::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = v[[row, src]];
        }
    }
    (values, vectors)
}

fn frobenius<T: Real>(m: &Array2<T>) -> T {
    m.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn off_diagonal_norm<T: Real>(m: &Array2<T>) -> T {
    let n = m.nrows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[[i, j]] * m[[i, j]];
            }
        }
    }
    s.sqrt()
}

fn rotate<T: Real>(m: &mut Array2<T>, v: &mut Array2<T>, p: usize, q: usize) {
    let apq = m[[p, q]];
    let small = T::epsilon() * (m[[p, p]].abs() + m[[q, q]].abs());
    if apq.abs() <= small {
        m[[p, q]] = T::zero();
        m[[q, p]] = T::zero();
        return;
    }
    let theta = (m[[q, q]] - m[[p, p]]) / (apq + apq);
    let root = (T::one() + theta * theta).sqrt();
    let t = if theta >= T::zero() {
        T::one() / (theta + root)
    } else {
        T::one() / (theta - root)
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    let n = m.nrows();

    let app = m[[p, p]];
    let aqq = m[[q, q]];
    m[[p, p]] = app - t * apq;
    m[[q, q]] = aqq + t * apq;
    m[[p, q]] = T::zero();
    m[[q, p]] = T::zero();
    for i in 0..n {
        if i != p && i != q {
            let aip = m[[i, p]];
            let aiq = m[[i, q]];
            m[[i, p]] = c * aip - s * aiq;
            m[[p, i]] = m[[i, p]];
            m[[i, q]] = s * aip + c * aiq;
            m[[q, i]] = m[[i, q]];
        }
    }
    for i in 0..n {
        let vip = v[[i, p]];
        let viq = v[[i, q]];
        v[[i, p]] = c * vip - s * viq;
        v[[i, q]] = s * vip + c * viq;
    }
}
