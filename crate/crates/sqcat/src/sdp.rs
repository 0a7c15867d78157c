//! Primal-dual interior-point solver for small complex-Hermitian
//! semidefinite programs in standard form:
//!
//!   maximize   <C, X>        (Frobenius inner product, C Hermitian)
//!   subject to <G_k, X> = b_k  (G_k Hermitian, b real)
//!              X >= 0.
//!
//! The solver follows the infeasible path with the HKM (XZ-linearized)
//! direction: the reduced m x m system for the multiplier step is assembled
//! densely, and step lengths come from a Cholesky-whitened eigenvalue bound.
//! Problem sizes here are tiny (d <= 16, m <= 64), so everything is dense.

use crate::linalg::{cholesky, eigh, max_abs, solve_linear};
use crate::{CMat, C64, Error, Result};

/// Solver report.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal optimizer (Hermitian PSD).
    pub x: CMat,
    /// Dual multipliers.
    pub y: Vec<f64>,
    /// Objective <C, X>.
    pub objective: f64,
    /// Complementarity gap <X, Z> at exit.
    pub gap: f64,
    /// Max constraint violation |<G_k, X> - b_k| at exit.
    pub primal_residual: f64,
    pub iterations: usize,
}

pub struct SdpProblem<'a> {
    pub c: &'a CMat,
    pub constraints: &'a [CMat],
    pub b: &'a [f64],
}

fn frob(a: &CMat, b: &CMat) -> f64 {
    // <A, B> = Re Tr(A^dag B) for Hermitian operands
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        s += x.re * y.re + x.im * y.im;
    }
    s
}

fn hermitize(a: &CMat) -> CMat {
    let ah = a.t().mapv(|z| z.conj());
    (a + &ah).mapv(|z| z * C64::new(0.5, 0.0))
}

/// Largest step alpha in [0, 1] keeping M + alpha dM positive definite,
/// via the minimum eigenvalue of L^{-1} dM L^{-dag}.
fn max_step(m: &CMat, dm: &CMat) -> f64 {
    let d = m.nrows();
    let jitter = 1e-13 * (0..d).map(|i| m[[i, i]].re).sum::<f64>().abs().max(1.0) / d as f64;
    let mut shifted = m.clone();
    for i in 0..d {
        shifted[[i, i]] += C64::new(jitter, 0.0);
    }
    let l = match cholesky(&shifted) {
        Some(l) => l,
        None => return 0.0,
    };
    // B = L^{-1} dM L^{-dag}: solve L Y = dM, then L W = Y^dag, B = W^dag
    let y = solve_linear(l.clone(), dm.clone());
    let w = solve_linear(l, y.t().mapv(|z| z.conj()));
    let b = hermitize(&w.t().mapv(|z| z.conj()));
    let (evals, _) = eigh(&b);
    let lmin = evals[0];
    if lmin >= -1e-14 {
        1.0
    } else {
        (-0.98 / lmin).min(1.0)
    }
}

/// Solve the SDP. `x0` may supply a strictly feasible primal start.
pub fn solve(problem: &SdpProblem, x0: Option<CMat>) -> Result<SdpSolution> {
    let d = problem.c.nrows();
    let m = problem.constraints.len();
    if problem.b.len() != m {
        return Err(Error::Sdp("constraint/rhs length mismatch".into()));
    }
    // internally minimize <Cmin, X> with Cmin = -C
    let cmin = problem.c.mapv(|z| -z);

    let a_op = |x: &CMat| -> Vec<f64> {
        problem.constraints.iter().map(|g| frob(g, x)).collect()
    };
    let a_star = |y: &[f64]| -> CMat {
        let mut out = CMat::zeros((d, d));
        for (yk, g) in y.iter().zip(problem.constraints.iter()) {
            out.scaled_add(C64::new(*yk, 0.0), g);
        }
        out
    };

    let mut x = x0.unwrap_or_else(|| CMat::eye(d));
    let mut y = vec![0.0f64; m];
    let zscale = max_abs(&cmin).max(1.0) * 2.0;
    let mut z = CMat::eye(d).mapv(|v| v * C64::new(zscale, 0.0));

    let mut gap = f64::INFINITY;
    let mut primal_res = f64::INFINITY;
    let mut iterations = 0;

    for it in 0..200 {
        iterations = it + 1;
        let mu = frob(&x, &z) / d as f64;
        let ax = a_op(&x);
        let rp: Vec<f64> = problem.b.iter().zip(ax.iter()).map(|(b, a)| b - a).collect();
        let rd = &cmin - &z - &a_star(&y);
        gap = mu * d as f64;
        primal_res = rp.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let dual_res = max_abs(&rd);
        if gap < 1e-9 && primal_res < 1e-10 && dual_res < 1e-9 {
            break;
        }

        let sigma = if it < 3 { 0.5 } else { 0.15 };
        // Z^{-1} via solve against the identity
        let zi = solve_linear(z.clone(), CMat::eye(d));

        // reduced system L[dy] = rhs with
        // L(dy) = A( sym(X A*(dy) Z^{-1}) )
        let mut lmat = vec![0.0f64; m * m];
        for k in 0..m {
            let t = x.dot(&problem.constraints[k]).dot(&zi);
            let t = hermitize(&t);
            let col = a_op(&t);
            for r in 0..m {
                lmat[r * m + k] = col[r];
            }
        }
        let t0 = {
            let sm = zi.mapv(|v| v * C64::new(sigma * mu, 0.0));
            let t = &sm - &x - &x.dot(&rd).dot(&zi);
            hermitize(&t)
        };
        let at0 = a_op(&t0);
        let rhs: Vec<f64> = rp.iter().zip(at0.iter()).map(|(r, a)| r - a).collect();

        // solve the small real system with partial pivoting
        let dy = solve_real(&mut lmat.clone(), m, &rhs)?;

        let dz = &rd - &a_star(&dy);
        let dx = {
            let sm = zi.mapv(|v| v * C64::new(sigma * mu, 0.0));
            let t = &sm - &x - &x.dot(&dz).dot(&zi);
            hermitize(&t)
        };

        let ap = max_step(&x, &dx);
        let ad = max_step(&z, &dz);
        if ap < 1e-12 && ad < 1e-12 {
            return Err(Error::Sdp(format!("stalled at iteration {it}, gap {gap:.2e}")));
        }
        x.scaled_add(C64::new(ap, 0.0), &dx);
        for k in 0..m {
            y[k] += ad * dy[k];
        }
        z.scaled_add(C64::new(ad, 0.0), &dz);
    }

    if gap > 1e-6 || primal_res > 1e-7 {
        return Err(Error::Sdp(format!(
            "did not converge: gap {gap:.2e}, primal residual {primal_res:.2e}"
        )));
    }

    let xh = hermitize(&x);
    let objective = frob(problem.c, &xh);
    Ok(SdpSolution {
        x: xh,
        y,
        objective,
        gap,
        primal_residual: primal_res,
        iterations,
    })
}

fn solve_real(a: &mut [f64], n: usize, b: &[f64]) -> Result<Vec<f64>> {
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut mx = 0.0;
        let mut mr = col;
        for row in col..n {
            let v = a[row * n + col].abs();
            if v > mx {
                mx = v;
                mr = row;
            }
        }
        if mx < 1e-300 {
            return Err(Error::Sdp("singular reduced system".into()));
        }
        if mr != col {
            for j in 0..n {
                a.swap(col * n + j, mr * n + j);
            }
            rhs.swap(col, mr);
        }
        let piv = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / piv;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut xv = vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut s = rhs[col];
        for k in (col + 1)..n {
            s -= a[col * n + k] * xv[k];
        }
        xv[col] = s / a[col * n + col];
    }
    Ok(xv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_bound() {
        // maximize x subject to x = 3, x >= 0 (1x1)
        let c = CMat::eye(1);
        let g = CMat::eye(1);
        let sol = solve(
            &SdpProblem { c: &c, constraints: &[g], b: &[3.0] },
            None,
        )
        .unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-8);
    }

    #[test]
    fn trace_constrained_max_eigenvalue() {
        // maximize <C, X> s.t. Tr X = 1, X >= 0: optimum is lambda_max(C)
        let mut c = CMat::zeros((3, 3));
        c[[0, 0]] = C64::new(1.0, 0.0);
        c[[1, 1]] = C64::new(-0.5, 0.0);
        c[[2, 2]] = C64::new(0.25, 0.0);
        c[[0, 2]] = C64::new(0.3, 0.4);
        c[[2, 0]] = C64::new(0.3, -0.4);
        let g = CMat::eye(3);
        let sol = solve(
            &SdpProblem { c: &c, constraints: &[g], b: &[1.0] },
            None,
        )
        .unwrap();
        let (w, _) = eigh(&c);
        assert!(
            (sol.objective - w[2]).abs() < 1e-7,
            "{} vs {}",
            sol.objective,
            w[2]
        );
        assert!(sol.gap < 1e-9 && sol.primal_residual < 1e-10);
    }

    #[test]
    fn objective_scales_linearly() {
        let mut c = CMat::zeros((2, 2));
        c[[0, 0]] = C64::new(2.0, 0.0);
        c[[1, 1]] = C64::new(1.0, 0.0);
        c[[0, 1]] = C64::new(0.0, 0.5);
        c[[1, 0]] = C64::new(0.0, -0.5);
        let g = CMat::eye(2);
        let s1 = solve(&SdpProblem { c: &c, constraints: &[g.clone()], b: &[1.0] }, None).unwrap();
        let c3 = c.mapv(|z| z * C64::new(3.0, 0.0));
        let s3 = solve(&SdpProblem { c: &c3, constraints: &[g], b: &[1.0] }, None).unwrap();
        assert!((s3.objective - 3.0 * s1.objective).abs() < 1e-6);
        // same argmax
        assert!(max_abs(&(&s3.x - &s1.x)) < 1e-5);
    }
}
