//! The loss + dephasing noise channel.
//!
//! Generator: L rho = k1 D[a] rho + k2 D[n] rho with D[J] rho =
//! J rho J^dag - {J^dag J, rho}/2, integrated over one period so only the
//! dimensionless products k1*tau, k2*tau enter.
//!
//! Both jump operators are number-basis local, so the right-hand side is an
//! entrywise expression: the dephasing part decays coherences at rate
//! k2 (i-j)^2 / 2 and the loss part couples each entry to its upper-left
//! neighbor. That structure also gives the channel in closed form: in the
//! frame where the local decay is factored out, the remaining generator is a
//! nilpotent ladder shift whose exponential is a finite, binomially-stable
//! series (`apply_exact`). `evolve` integrates the same generator with an
//! adaptive embedded Runge-Kutta pair; the two routes are cross-checked in
//! the tests and at audited sweep cells.

use crate::fock::{DensityMatrix, FockOperator, StateVector};
use crate::{CMat, C64, Error, Result};

/// Dimensionless loss/dephasing strengths for one recovery period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub kappa1_tau: f64,
    pub kappa2_tau: f64,
}

impl NoiseParams {
    pub fn new(kappa1_tau: f64, kappa2_tau: f64) -> Result<Self> {
        if kappa1_tau < 0.0 || kappa2_tau < 0.0 || !kappa1_tau.is_finite() || !kappa2_tau.is_finite()
        {
            return Err(Error::InvalidArgument(
                "noise rates must be finite and non-negative".into(),
            ));
        }
        Ok(NoiseParams { kappa1_tau, kappa2_tau })
    }

    pub fn is_zero(&self) -> bool {
        self.kappa1_tau == 0.0 && self.kappa2_tau == 0.0
    }

    pub fn scaled(&self, f: f64) -> NoiseParams {
        NoiseParams {
            kappa1_tau: self.kappa1_tau * f,
            kappa2_tau: self.kappa2_tau * f,
        }
    }
}

/// Lindblad right-hand side on a raw matrix (works for non-Hermitian blocks,
/// which the process-matrix assembly needs).
pub fn lindblad_rhs_mat(rho: &CMat, p: &NoiseParams) -> Result<CMat> {
    let n = rho.nrows();
    if n != rho.ncols() {
        return Err(Error::InvalidArgument("lindblad_rhs: matrix not square".into()));
    }
    let (k1, k2) = (p.kappa1_tau, p.kappa2_tau);
    let mut out = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut v = C64::new(0.0, 0.0);
            if i + 1 < n && j + 1 < n {
                v += C64::new(k1 * (((i + 1) * (j + 1)) as f64).sqrt(), 0.0) * rho[[i + 1, j + 1]];
            }
            let decay = 0.5 * k1 * (i + j) as f64 + 0.5 * k2 * ((i as f64 - j as f64).powi(2));
            v -= C64::new(decay, 0.0) * rho[[i, j]];
            out[[i, j]] = v;
        }
    }
    Ok(out)
}

/// Lindblad right-hand side of a density matrix.
pub fn lindblad_rhs(rho: &DensityMatrix, p: &NoiseParams) -> Result<CMat> {
    lindblad_rhs_mat(&rho.matrix, p)
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate d rho/ds = L rho from s = 0 to 1 with an adaptive embedded
/// Dormand-Prince pair at absolute/relative tolerance 1e-10.
pub fn evolve_mat(rho0: &CMat, p: &NoiseParams) -> Result<CMat> {
    const ATOL: f64 = 1e-10;
    const RTOL: f64 = 1e-10;
    if p.is_zero() {
        return Ok(rho0.clone());
    }
    let n = rho0.nrows();
    let scale0 = rho0.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let mut y = rho0.clone();
    let mut s = 0.0f64;
    // conservative initial step against the stiffest coherence decay
    let lam_max = p.kappa1_tau * n as f64 + 0.5 * p.kappa2_tau * (n as f64).powi(2);
    let mut h = (0.5 / lam_max.max(1e-12)).min(1.0);
    let mut k: Vec<CMat> = vec![CMat::zeros((n, n)); 7];
    let mut steps = 0usize;

    while s < 1.0 {
        if h < 1e-14 {
            return Err(Error::IntegratorFailure(format!(
                "step underflow at s = {s:.6e} (h = {h:.2e})"
            )));
        }
        if s + h > 1.0 {
            h = 1.0 - s;
        }
        k[0] = lindblad_rhs_mat(&y, p)?;
        for stage in 1..7 {
            let mut arg = y.clone();
            for (j, kj) in k.iter().enumerate().take(stage) {
                let aij = DP_A[stage][j];
                if aij != 0.0 {
                    arg.scaled_add(C64::new(h * aij, 0.0), kj);
                }
            }
            let _ = DP_C[stage];
            k[stage] = lindblad_rhs_mat(&arg, p)?;
        }
        let mut y5 = y.clone();
        let mut err = CMat::zeros((n, n));
        for (j, kj) in k.iter().enumerate() {
            if DP_B5[j] != 0.0 {
                y5.scaled_add(C64::new(h * DP_B5[j], 0.0), kj);
            }
            let db = DP_B5[j] - DP_B4[j];
            if db != 0.0 {
                err.scaled_add(C64::new(h * db, 0.0), kj);
            }
        }
        let scale = ATOL + RTOL * scale0.max(y5.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let errnorm = err.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
        if errnorm <= 1.0 {
            s += h;
            y = y5;
            steps += 1;
            if steps > 2_000_000 {
                return Err(Error::IntegratorFailure("step budget exhausted".into()));
            }
        }
        let factor = if errnorm > 0.0 {
            (0.9 * errnorm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok(y)
}

/// Noise channel on a density matrix via adaptive integration; Hermiticity
/// and trace are restored to working precision on output.
pub fn evolve(rho: &DensityMatrix, p: &NoiseParams) -> Result<DensityMatrix> {
    let out = evolve_mat(&rho.matrix, p)?;
    let n = out.nrows();
    let herm = {
        let dag = out.t().mapv(|z| z.conj());
        (out + dag).mapv(|z| z * C64::new(0.5, 0.0))
    };
    let dm = DensityMatrix { matrix: herm, cutoff: n - 1 };
    let tr = dm.trace();
    if (tr.re - rho.trace().re).abs() > 1e-8 {
        return Err(Error::IntegratorFailure(format!(
            "trace drift {:.2e}",
            (tr.re - rho.trace().re).abs()
        )));
    }
    Ok(dm)
}

/// Closed-form application of the same channel.
///
/// With sigma_{ij} = rho_{ij} e^{(k1 (i+j)/2 + k2 (i-j)^2/2) s} the generator
/// reduces to d sigma_{ij}/ds = k1 e^{-k1 s} sqrt((i+1)(j+1)) sigma_{i+1,j+1},
/// a nilpotent shift, so the exact propagator is the finite series
/// rho'_{ij} = e^{-k2 (i-j)^2/2} sum_k c_k(i,j) rho_{i+k,j+k} with
/// c_0 = eta^{(i+j)/2}, c_{k+1}/c_k = theta sqrt((i+k+1)(j+k+1))/(k+1),
/// eta = e^{-k1}, theta = 1 - eta. Trace preservation is exact:
/// sum_k binom(n,k) theta^k eta^{n-k} = 1.
pub fn apply_exact(rho0: &CMat, p: &NoiseParams) -> CMat {
    let n1 = rho0.nrows();
    let eta = (-p.kappa1_tau).exp();
    let theta = 1.0 - eta;
    let mut out = CMat::zeros((n1, n1));
    let half_eta: Vec<f64> = (0..n1).map(|i| eta.powf(0.5 * i as f64)).collect();

    // k = 0 term with the diagonal decay folded in
    let mut coef = vec![0.0f64; n1 * n1];
    for i in 0..n1 {
        for j in 0..n1 {
            coef[i * n1 + j] = half_eta[i] * half_eta[j];
            out[[i, j]] = C64::new(coef[i * n1 + j], 0.0) * rho0[[i, j]];
        }
    }
    if theta > 0.0 {
        for k in 1..n1 {
            let lim = n1 - k;
            let mut alive = false;
            for i in 0..lim {
                for j in 0..lim {
                    let c = coef[i * n1 + j] * theta
                        * (((i + k) * (j + k)) as f64).sqrt()
                        / k as f64;
                    coef[i * n1 + j] = c;
                    if c > 1e-18 {
                        alive = true;
                        out[[i, j]] += C64::new(c, 0.0) * rho0[[i + k, j + k]];
                    }
                }
            }
            if !alive {
                break;
            }
        }
    }
    if p.kappa2_tau > 0.0 {
        for i in 0..n1 {
            for j in 0..n1 {
                let d = i as f64 - j as f64;
                out[[i, j]] *= C64::new((-0.5 * p.kappa2_tau * d * d).exp(), 0.0);
            }
        }
    }
    out
}

/// Leading-order Kraus set of the channel.
#[derive(Debug, Clone)]
pub struct LeadingKraus {
    pub k0: FockOperator,
    pub k1: FockOperator,
    pub k2: FockOperator,
    /// Set when k1*tau + k2*tau exceeds the leading-order regime bound.
    pub regime_warning: bool,
}

impl LeadingKraus {
    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = self.k0.matrix.dot(rho).dot(&self.k0.dagger().matrix);
        out += &self.k1.matrix.dot(rho).dot(&self.k1.dagger().matrix);
        out += &self.k2.matrix.dot(rho).dot(&self.k2.dagger().matrix);
        out
    }

    /// sum_i K_i^dag K_i - 1 (diagonal; returned as the diagonal entries).
    pub fn completeness_residual(&self) -> Vec<f64> {
        let n = self.k0.dim();
        let mut s = self.k0.dagger().matrix.dot(&self.k0.matrix);
        s += &self.k1.dagger().matrix.dot(&self.k1.matrix);
        s += &self.k2.dagger().matrix.dot(&self.k2.matrix);
        (0..n).map(|i| (s[[i, i]] - C64::new(1.0, 0.0)).re).collect()
    }
}

/// K0 = 1 - (k1/2) n - (k2/2) n^2, K1 = sqrt(k1) a, K2 = sqrt(k2) n.
pub fn leading_kraus(p: &NoiseParams, cutoff: usize) -> Result<LeadingKraus> {
    let a = crate::fock::destroy(cutoff)?;
    let dim = cutoff + 1;
    let mut k0 = CMat::eye(dim);
    let mut k2m = CMat::zeros((dim, dim));
    for n in 0..dim {
        let nf = n as f64;
        k0[[n, n]] -= C64::new(0.5 * p.kappa1_tau * nf + 0.5 * p.kappa2_tau * nf * nf, 0.0);
        k2m[[n, n]] = C64::new(p.kappa2_tau.sqrt() * nf, 0.0);
    }
    let k1m = a.matrix.mapv(|z| z * C64::new(p.kappa1_tau.sqrt(), 0.0));
    Ok(LeadingKraus {
        k0: FockOperator::new(k0, cutoff),
        k1: FockOperator::new(k1m, cutoff),
        k2: FockOperator::new(k2m, cutoff),
        regime_warning: p.kappa1_tau + p.kappa2_tau > 0.2,
    })
}

/// Average channel fidelity of a map on one logical qubit:
/// F = (1/4) sum_{m,n} <c_m| E(|c_m><c_n|) |c_n>.
pub fn channel_fidelity_direct<F>(c0: &StateVector, c1: &StateVector, mut channel: F) -> Result<f64>
where
    F: FnMut(&CMat) -> Result<CMat>,
{
    for s in [c0, c1] {
        if (s.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(
                "channel_fidelity_direct: codewords must be normalized".into(),
            ));
        }
    }
    let words = [c0, c1];
    let mut f = 0.0;
    for m in 0..2 {
        for n in 0..2 {
            let unit = crate::states::outer(&words[m].amplitudes, &words[n].amplitudes);
            let img = channel(&unit)?;
            let mut v = C64::new(0.0, 0.0);
            for i in 0..=c0.cutoff {
                for j in 0..=c0.cutoff {
                    v += words[m].amplitudes[i].conj() * img[[i, j]] * words[n].amplitudes[j];
                }
            }
            f += v.re;
        }
    }
    Ok(f / 4.0)
}
