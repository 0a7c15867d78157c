//! Quantum-jump Monte Carlo unraveling of the stroboscopic recovery
//! protocol.
//!
//! Between jumps the state follows the non-Hermitian drift
//! H_eff = -i (k1/2) n - i (k2/2) n^2 (diagonal in the number basis),
//! integrated with fixed-step RK4 at `steps_per_period` resolution. Jumps
//! are sampled by the waiting-time construction: draw u uniform, evolve the
//! unnormalized state until its squared norm crosses u (the crossing is
//! refined by bisection inside the step), then pick loss or dephasing by
//! the instantaneous rates and renormalize. At every period boundary the
//! recovery channel acts stochastically: one of its Kraus branches (or the
//! outside-subspace projector) is selected by the Born rule, which keeps the
//! trajectory pure while reproducing the recovery channel on average.
//!
//! The RNG is a counter-based ChaCha generator; ensembles split one seed
//! into per-trajectory streams, so results are independent of scheduling.

use crate::fock::{apply_destroy, apply_number, inner, StateVector};
use crate::linalg::kahan_sum;
use crate::noise::NoiseParams;
use crate::recovery::RecoveryChannel;
use crate::{CVec, C64, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Configuration of one trajectory run.
#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub initial: StateVector,
    pub p: NoiseParams,
    pub recovery: RecoveryChannel,
    pub n_periods: usize,
    pub seed: u64,
    pub steps_per_period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    Loss,
    Dephasing,
}

/// Sampled trajectory: P(t) on the step grid plus jump/recovery markers.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    /// times in units of t/tau
    pub times: Vec<f64>,
    pub p_values: Vec<f64>,
    pub jumps: Vec<(f64, JumpKind)>,
    pub recoveries: Vec<f64>,
}

struct DriftTable {
    /// RK4 amplitude factor per Fock level for one full step
    full: Vec<f64>,
    /// decay rates d_n = (k1 n + k2 n^2)/2
    rates: Vec<f64>,
    /// internal substeps keeping every level inside the RK4 stability region
    substeps: usize,
}

impl DriftTable {
    fn new(p: &NoiseParams, dim: usize, h: f64) -> Self {
        let rates: Vec<f64> = (0..dim)
            .map(|n| 0.5 * (p.kappa1_tau * n as f64 + p.kappa2_tau * (n * n) as f64))
            .collect();
        let dmax = rates.last().copied().unwrap_or(0.0);
        let substeps = ((dmax * h / 0.5).ceil() as usize).max(1);
        let full = rates
            .iter()
            .map(|&d| rk4_factor(-d * h / substeps as f64).powi(substeps as i32))
            .collect();
        DriftTable { full, rates, substeps }
    }

    fn factor_for(&self, frac: f64, h: f64) -> Vec<f64> {
        let m = self.substeps as f64;
        self.rates
            .iter()
            .map(|&d| rk4_factor(-d * h * frac / m).powi(self.substeps as i32))
            .collect()
    }
}

#[inline]
fn rk4_factor(x: f64) -> f64 {
    1.0 + x + x * x / 2.0 + x * x * x / 6.0 + x * x * x * x / 24.0
}

fn norm_sqr(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn normalize(v: &mut CVec) {
    let n = norm_sqr(v).sqrt();
    if n > 0.0 {
        v.mapv_inplace(|z| z / C64::new(n, 0.0));
    }
}

/// Deterministic single-trajectory run (stream 0 of the seed).
pub fn run_trajectory(cfg: &TrajectoryConfig) -> Result<TrajectoryRecord> {
    run_stream(cfg, 0)
}

fn run_stream(cfg: &TrajectoryConfig, stream: u64) -> Result<TrajectoryRecord> {
    if cfg.steps_per_period < 100 {
        return Err(Error::InvalidArgument(
            "steps_per_period must be at least 100".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);

    let dim = cfg.initial.cutoff + 1;
    let h = 1.0 / cfg.steps_per_period as f64;
    let drift = DriftTable::new(&cfg.p, dim, h);
    let reference = &cfg.initial.amplitudes;

    let mut phi = cfg.initial.amplitudes.clone(); // unnormalized survivor
    let mut u: f64 = rng.gen_range(1e-300..1.0f64);
    let total_steps = cfg.n_periods * cfg.steps_per_period;
    let mut times = Vec::with_capacity(total_steps + 1);
    let mut p_values = Vec::with_capacity(total_steps + 1);
    let mut jumps = Vec::new();
    let mut recoveries = Vec::new();

    let record = |phi: &CVec, t: f64, times: &mut Vec<f64>, ps: &mut Vec<f64>| {
        let n2 = norm_sqr(phi);
        let ov = inner(reference, phi).norm_sqr() / n2.max(1e-300);
        times.push(t);
        ps.push((1.0 - ov).max(0.0));
    };
    record(&phi, 0.0, &mut times, &mut p_values);

    for step in 0..total_steps {
        let t0 = step as f64 * h;
        // advance one step, resolving any jumps inside it
        let mut frac_done = 0.0f64;
        loop {
            let remaining = 1.0 - frac_done;
            let trial: Vec<f64> = if remaining == 1.0 {
                drift.full.clone()
            } else {
                drift.factor_for(remaining, h)
            };
            let mut cand = phi.clone();
            for k in 0..dim {
                cand[k] *= C64::new(trial[k], 0.0);
            }
            if norm_sqr(&cand) > u {
                phi = cand;
                break;
            }
            // bisect the crossing time inside [frac_done, 1]
            let mut lo = 0.0f64;
            let mut hi = remaining;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let f = drift.factor_for(mid, h);
                let mut n2 = 0.0;
                for k in 0..dim {
                    n2 += (phi[k] * C64::new(f[k], 0.0)).norm_sqr();
                }
                if n2 > u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let fstar = drift.factor_for(hi, h);
            for k in 0..dim {
                phi[k] *= C64::new(fstar[k], 0.0);
            }
            normalize(&mut phi);
            // pick the jump type from the instantaneous rates
            let w1 = cfg.p.kappa1_tau * phi.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum::<f64>();
            let w2 = cfg.p.kappa2_tau
                * phi.iter().enumerate().map(|(n, z)| (n * n) as f64 * z.norm_sqr()).sum::<f64>();
            if w1 + w2 <= 0.0 {
                return Err(Error::IntegratorFailure(
                    "jump sampled from a dark state".into(),
                ));
            }
            let kind = if rng.gen_range(0.0..w1 + w2) < w1 {
                phi = apply_destroy(&phi);
                JumpKind::Loss
            } else {
                phi = apply_number(&phi);
                JumpKind::Dephasing
            };
            let nn = norm_sqr(&phi);
            if nn < 1e-280 {
                return Err(Error::IntegratorFailure("norm underflow after jump".into()));
            }
            normalize(&mut phi);
            frac_done += hi;
            jumps.push((t0 + frac_done * h, kind));
            u = rng.gen_range(1e-300..1.0f64);
            if frac_done >= 1.0 {
                break;
            }
        }

        let t1 = (step + 1) as f64 * h;
        let at_boundary = (step + 1) % cfg.steps_per_period == 0;
        if at_boundary {
            normalize(&mut phi);
            phi = sample_recovery(&cfg.recovery, &phi, &mut rng)?;
            u = rng.gen_range(1e-300..1.0f64);
            recoveries.push(t1);
        }
        record(&phi, t1, &mut times, &mut p_values);
    }

    Ok(TrajectoryRecord { times, p_values, jumps, recoveries })
}

/// Born-rule branch selection over {R_r} + the outside projector Q.
fn sample_recovery(rec: &RecoveryChannel, psi: &CVec, rng: &mut ChaCha8Rng) -> Result<CVec> {
    if rec.kraus.is_empty() && rec.modeled.is_empty() {
        return Ok(psi.clone());
    }
    let dim = psi.len();
    let mut branches: Vec<(f64, CVec)> = Vec::with_capacity(rec.kraus.len() + 1);
    for k in &rec.kraus {
        let cu = inner(&k.u_plus, psi);
        let cm = inner(&k.u_minus, psi);
        let mut out = CVec::zeros(dim);
        for i in 0..dim {
            out[i] = cu * rec.code_plus[i] + cm * rec.code_minus[i];
        }
        branches.push((norm_sqr(&out), out));
    }
    // Q branch
    let mut q = psi.clone();
    for b in &rec.modeled {
        let ov = inner(b, &q);
        for i in 0..dim {
            let bi = b[i];
            q[i] -= ov * bi;
        }
    }
    branches.push((norm_sqr(&q), q));

    let total: f64 = branches.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return Err(Error::IntegratorFailure("recovery annihilated the state".into()));
    }
    let mut pick = rng.gen_range(0.0..total);
    for (w, mut out) in branches {
        if pick < w || w == total {
            normalize(&mut out);
            return Ok(out);
        }
        pick -= w;
    }
    unreachable!("branch selection exhausted")
}

/// Ensemble mean and standard error of P(t) over `n_traj` trajectories.
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub fn ensemble_average(cfg: &TrajectoryConfig, n_traj: usize) -> Result<EnsembleResult> {
    if n_traj < 100 {
        return Err(Error::InvalidArgument("ensemble needs at least 100 trajectories".into()));
    }
    let records: Vec<Result<Vec<f64>>> = (0..n_traj as u64)
        .into_par_iter()
        .map(|i| run_stream(cfg, i).map(|r| r.p_values))
        .collect();
    let mut all = Vec::with_capacity(n_traj);
    for r in records {
        all.push(r?);
    }
    let npts = all[0].len();
    let times: Vec<f64> = (0..npts)
        .map(|j| j as f64 / cfg.steps_per_period as f64)
        .collect();
    let m = n_traj as f64;
    let mut mean = Vec::with_capacity(npts);
    let mut stderr = Vec::with_capacity(npts);
    for j in 0..npts {
        let mu = kahan_sum(all.iter().map(|tr| tr[j])) / m;
        let var = kahan_sum(all.iter().map(|tr| (tr[j] - mu) * (tr[j] - mu))) / (m - 1.0).max(1.0);
        mean.push(mu);
        stderr.push((var / m).sqrt());
    }
    Ok(EnsembleResult { times, mean, stderr })
}

/// Deterministic master-equation reference: P(t) = 1 - <ref| rho(t) |ref>
/// with the channel integrated over each sub-step and the recovery applied
/// at period boundaries.
pub fn master_equation_p(
    initial: &StateVector,
    p: &NoiseParams,
    recovery: &RecoveryChannel,
    n_periods: usize,
    steps_per_period: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = initial.cutoff + 1;
    let h = 1.0 / steps_per_period as f64;
    let sub = p.scaled(h);
    let mut rho = crate::states::outer(&initial.amplitudes, &initial.amplitudes);
    let mut times = Vec::new();
    let mut ps = Vec::new();
    let overlap = |rho: &ndarray::Array2<C64>| -> f64 {
        let mut v = C64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                v += initial.amplitudes[i].conj() * rho[[i, j]] * initial.amplitudes[j];
            }
        }
        v.re
    };
    times.push(0.0);
    ps.push(0.0);
    for step in 0..n_periods * steps_per_period {
        rho = crate::noise::apply_exact(&rho, &sub);
        let t1 = (step + 1) as f64 * h;
        if (step + 1) % steps_per_period == 0 {
            rho = recovery.apply(&rho);
        }
        times.push(t1);
        ps.push((1.0 - overlap(&rho)).max(0.0));
    }
    Ok((times, ps))
}
