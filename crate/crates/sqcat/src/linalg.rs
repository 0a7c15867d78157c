//! Small dense complex linear algebra: LU solves, Hermitian eigensolver,
//! Cholesky factorization. Everything here operates on matrices of dimension
//! at most a few hundred, so simple O(n^3) routines are used throughout.

use crate::{CMat, CVec, C64};
use ndarray::Array1;

/// Solve A X = B by Gaussian elimination with partial pivoting.
/// A and B are consumed as working storage.
pub fn solve_linear(mut a: CMat, mut b: CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "solve_linear: A must be square");
    assert_eq!(n, b.nrows(), "solve_linear: shape mismatch");
    let m = b.ncols();

    for col in 0..n {
        let mut max_val = 0.0;
        let mut max_row = col;
        for row in col..n {
            let v = a[[row, col]].norm_sqr();
            if v > max_val {
                max_val = v;
                max_row = row;
            }
        }
        if max_row != col {
            for j in 0..n {
                let t = a[[col, j]];
                a[[col, j]] = a[[max_row, j]];
                a[[max_row, j]] = t;
            }
            for j in 0..m {
                let t = b[[col, j]];
                b[[col, j]] = b[[max_row, j]];
                b[[max_row, j]] = t;
            }
        }
        let pivot = a[[col, col]];
        assert!(pivot.norm() > 1e-300, "solve_linear: singular matrix");
        for row in (col + 1)..n {
            let factor = a[[row, col]] / pivot;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a[[col, j]];
                a[[row, j]] -= factor * v;
            }
            for j in 0..m {
                let v = b[[col, j]];
                b[[row, j]] -= factor * v;
            }
        }
    }

    let mut x = CMat::zeros((n, m));
    for col in (0..n).rev() {
        let pivot = a[[col, col]];
        for j in 0..m {
            let mut sum = b[[col, j]];
            for k in (col + 1)..n {
                sum -= a[[col, k]] * x[[k, j]];
            }
            x[[col, j]] = sum / pivot;
        }
    }
    x
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Returns (eigenvalues ascending, eigenvectors as columns). Intended for the
/// recovery matrices (<=16x16), density-matrix positivity checks, and trace
/// norms; accuracy is ~1e-14 relative for well-scaled input.
pub fn eigh(a: &CMat) -> (Array1<f64>, CMat) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    // enforce Hermiticity of working copy
    for i in 0..n {
        m[[i, i]] = C64::new(m[[i, i]].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]].conj());
            m[[i, j]] = avg;
            m[[j, i]] = avg.conj();
        }
    }
    let mut v = CMat::eye(n);

    let off = |m: &CMat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[[i, j]].norm_sqr();
                }
            }
        }
        s
    };
    let scale: f64 = (0..n).map(|i| m[[i, i]].re.abs()).fold(1e-300, f64::max);
    let tol = (n as f64) * (n as f64) * 1e-32 * scale * scale;

    for _sweep in 0..60 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.norm_sqr() <= 1e-64 * scale * scale {
                    continue;
                }
                // complex Jacobi rotation zeroing m[p,q]
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let abs_apq = apq.norm();
                let phase = apq / C64::new(abs_apq, 0.0);
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotation: rows/cols p,q with G = [[c, s*phase],[-s*conj(phase), c]]
                let sp = C64::new(s, 0.0) * phase;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = mkp * c - mkq * sp.conj();
                    m[[k, q]] = mkp * sp + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = mpk * c - mqk * sp;
                    m[[q, k]] = mpk * sp.conj() + mqk * c;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * c - vkq * sp.conj();
                    v[[k, q]] = vkp * sp + vkq * c;
                }
                m[[p, q]] = C64::new(0.0, 0.0);
                m[[q, p]] = C64::new(0.0, 0.0);
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    idx.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let mut w = Array1::zeros(n);
    let mut vec = CMat::zeros((n, n));
    for (newcol, &old) in idx.iter().enumerate() {
        w[newcol] = evals[old];
        for r in 0..n {
            vec[[r, newcol]] = v[[r, old]];
        }
    }
    (w, vec)
}

/// Cholesky factor L with A = L L^dagger. Fails if A is not positive definite.
pub fn cholesky(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let mut l = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]].conj();
            }
            if i == j {
                let d = sum.re;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[[i, i]] = C64::new(d.sqrt(), 0.0);
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Solve L x = b with lower-triangular L.
pub fn forward_sub(l: &CMat, b: &CVec) -> CVec {
    let n = l.nrows();
    let mut x = CVec::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[[i, k]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    x
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMat) -> f64 {
    let (w, _) = eigh(a);
    w.iter().map(|x| x.abs()).sum()
}

/// Max absolute entry.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kahan-compensated sum.
pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
