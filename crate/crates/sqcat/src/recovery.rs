//! Optimal recovery: process matrix, recovery SDP, Kraus extraction, the
//! full recovery channel, and the nested encoding optimization with the
//! plain-cat and single-rail baselines.
//!
//! For a recovery basis {B_i} and noise channel N, the process matrix is
//! W_ij = sum_k Tr{B_i K_k} conj(Tr{B_j K_k}) evaluated without a Kraus
//! decomposition: every B_i maps the modeled subspace into the code space,
//! so W reduces to sandwiches of the four evolved code matrix units,
//! W_ij = sum_{a,b} <w_i^a| N(|C_a><C_b|) |w_j^b>. The recovery is the SDP
//!   max Tr(X W)/4   s.t.  sum_ij X_ij B_i^dag B_j = 1 (modeled subspace),
//!                         X >= 0,
//! and Kraus operators come from the eigendecomposition of the solution.

use crate::fock::{inner, StateVector};
use crate::linalg::eigh;
use crate::noise::{apply_exact, NoiseParams};
use crate::sdp::{solve, SdpProblem, SdpSolution};
use crate::states::{outer, SCParams};
use crate::subspaces::{build_error_subspaces, recovery_basis, CodePair, RecoveryBasis};
use crate::{CMat, CVec, C64, Error, Result};
use rayon::prelude::*;

/// Hermitian PSD process matrix in the recovery-operator basis.
#[derive(Debug, Clone)]
pub struct ProcessMatrix {
    pub w: CMat,
}

/// How the noise channel is applied when assembling W.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelRoute {
    /// Closed-form ladder propagator (default; exact).
    Exact,
    /// Adaptive Runge-Kutta integration of the Lindblad generator; used to
    /// audit the exact route.
    Integrated,
}

/// W_ij for the full noise channel restricted to the modeled subspace.
pub fn process_matrix(code: &CodePair, basis: &RecoveryBasis, p: &NoiseParams) -> Result<ProcessMatrix> {
    process_matrix_via(code, basis, p, ChannelRoute::Exact)
}

pub fn process_matrix_via(
    code: &CodePair,
    basis: &RecoveryBasis,
    p: &NoiseParams,
    route: ChannelRoute,
) -> Result<ProcessMatrix> {
    let cw = &code.codewords;
    // evolved code matrix units: N(|C_a><C_b|), with the (1,0) unit obtained
    // from the adjoint of (0,1)
    let mut evolved: Vec<Vec<CMat>> = vec![vec![CMat::zeros((1, 1)); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            if a == 1 && b == 0 {
                continue;
            }
            let unit = outer(&cw[a].amplitudes, &cw[b].amplitudes);
            evolved[a][b] = match route {
                ChannelRoute::Exact => apply_exact(&unit, p),
                ChannelRoute::Integrated => crate::noise::evolve_mat(&unit, p)?,
            };
        }
    }
    evolved[1][0] = evolved[0][1].t().mapv(|z| z.conj());

    let d = basis.ops.len();
    // pre-apply each evolved unit to every w vector
    let mut applied: Vec<Vec<Vec<CVec>>> = vec![vec![Vec::with_capacity(d); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for op in &basis.ops {
                let wb = if b == 0 { &op.w_plus } else { &op.w_minus };
                applied[a][b].push(evolved[a][b].dot(wb));
            }
        }
    }
    let mut w = CMat::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let mut v = C64::new(0.0, 0.0);
            for a in 0..2 {
                let wa = if a == 0 { &basis.ops[i].w_plus } else { &basis.ops[i].w_minus };
                for b in 0..2 {
                    v += inner(wa, &applied[a][b][j]);
                }
            }
            w[[i, j]] = v;
            w[[j, i]] = v.conj();
        }
    }
    Ok(ProcessMatrix { w })
}

/// One extracted recovery Kraus operator R = |C+><u+| + |C-><u-|.
#[derive(Debug, Clone)]
pub struct RecoveryKraus {
    pub u_plus: CVec,
    pub u_minus: CVec,
}

/// Solved recovery: the SDP optimizer, its diagnostics, and the extracted
/// Kraus operators.
#[derive(Debug, Clone)]
pub struct RecoverySolution {
    pub x: CMat,
    pub fidelity: f64,
    pub gap: f64,
    pub tp_residual: f64,
    pub kraus: Vec<RecoveryKraus>,
    pub iterations: usize,
}

/// Assemble the trace-preservation constraints and solve the recovery SDP.
pub fn solve_sdp(w: &ProcessMatrix, code: &CodePair, basis: &RecoveryBasis) -> Result<RecoverySolution> {
    let d = basis.ops.len();
    let modeled = code.modeled_basis();
    let s = modeled.len();

    // overlaps <w_i^pm | psi_k>
    let mut ovp = vec![vec![C64::new(0.0, 0.0); s]; d];
    let mut ovm = vec![vec![C64::new(0.0, 0.0); s]; d];
    for (i, op) in basis.ops.iter().enumerate() {
        for (k, psi) in modeled.iter().enumerate() {
            ovp[i][k] = inner(&op.w_plus, &psi.amplitudes);
            ovm[i][k] = inner(&op.w_minus, &psi.amplitudes);
        }
    }

    // Constraint sum_ij X_ij <a| Bi^dag Bj |b> = delta_ab for a <= b.
    // With M_ij = <a|Bi^dag Bj|b> = conj(ovp[i][a]) ovp[j][b] + (minus part),
    // <F, X> = sum_ij conj(F_ij) X_ij picks F = conj(M); realified into the
    // Hermitian and anti-Hermitian parts.
    let mut constraints: Vec<CMat> = Vec::with_capacity(s * s);
    let mut b_vec: Vec<f64> = Vec::with_capacity(s * s);
    for a in 0..s {
        for bb in a..s {
            let mut mab = CMat::zeros((d, d));
            for i in 0..d {
                for j in 0..d {
                    mab[[i, j]] = (ovp[i][a].conj() * ovp[j][bb] + ovm[i][a].conj() * ovm[j][bb])
                        .conj();
                }
            }
            let mh = mab.t().mapv(|z| z.conj());
            let herm = (&mab + &mh).mapv(|z| z * C64::new(0.5, 0.0));
            constraints.push(herm);
            b_vec.push(if a == bb { 1.0 } else { 0.0 });
            if a != bb {
                let anti = (&mab - &mh).mapv(|z| z * C64::new(0.0, -0.5));
                constraints.push(anti);
                b_vec.push(0.0);
            }
        }
    }

    let c = w.w.mapv(|z| z * C64::new(0.25, 0.0));
    // X = I/4 satisfies the constraints exactly (each retained subspace
    // carries four basis operators)
    let x0 = CMat::eye(d).mapv(|v| v * C64::new(0.25, 0.0));
    let sol: SdpSolution = solve(
        &SdpProblem { c: &c, constraints: &constraints, b: &b_vec },
        Some(x0),
    )?;

    let kraus = extract_kraus(&sol.x, basis);
    let tp_residual = tp_residual(&kraus, &modeled);
    Ok(RecoverySolution {
        fidelity: sol.objective,
        gap: sol.gap,
        tp_residual,
        kraus,
        iterations: sol.iterations,
        x: sol.x,
    })
}

/// R_r = sqrt(sigma_r) sum_i conj(V_ir) B_i from X = V Sigma V^dag;
/// components below 1e-12 are discarded.
pub fn extract_kraus(x: &CMat, basis: &RecoveryBasis) -> Vec<RecoveryKraus> {
    let d = basis.ops.len();
    let (evals, evecs) = eigh(x);
    let nn = basis.ops[0].w_plus.len();
    let mut out = Vec::new();
    for r in 0..d {
        if evals[r] <= 1e-12 {
            continue;
        }
        let scale = C64::new(evals[r].sqrt(), 0.0);
        let mut up = CVec::zeros(nn);
        let mut um = CVec::zeros(nn);
        for i in 0..d {
            // ket coefficients conjugate the bra weights: |u> = s V_ir |w_i>
            let coef = scale * evecs[[i, r]];
            for k in 0..nn {
                up[k] += coef * basis.ops[i].w_plus[k];
                um[k] += coef * basis.ops[i].w_minus[k];
            }
        }
        out.push(RecoveryKraus { u_plus: up, u_minus: um });
    }
    out
}

/// Max |sum_r R_r^dag R_r - 1| on the modeled subspace.
fn tp_residual(kraus: &[RecoveryKraus], modeled: &[&StateVector]) -> f64 {
    let s = modeled.len();
    let mut acc = vec![vec![C64::new(0.0, 0.0); s]; s];
    for k in kraus {
        let cu: Vec<C64> = modeled.iter().map(|p| inner(&k.u_plus, &p.amplitudes)).collect();
        let cm: Vec<C64> = modeled.iter().map(|p| inner(&k.u_minus, &p.amplitudes)).collect();
        for a in 0..s {
            for b in 0..s {
                acc[a][b] += cu[a].conj() * cu[b] + cm[a].conj() * cm[b];
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..s {
        for b in 0..s {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((acc[a][b] - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// The full recovery channel: rho -> sum_r R_r rho R_r^dag + Q rho Q with Q
/// projecting onto the complement of the modeled subspace.
#[derive(Debug, Clone)]
pub struct RecoveryChannel {
    pub kraus: Vec<RecoveryKraus>,
    pub code_plus: CVec,
    pub code_minus: CVec,
    /// Orthonormal basis of the modeled subspace.
    pub modeled: Vec<CVec>,
}

impl RecoveryChannel {
    pub fn from_solution(sol: &RecoverySolution, code: &CodePair) -> Self {
        RecoveryChannel {
            kraus: sol.kraus.clone(),
            code_plus: code.codewords[0].amplitudes.clone(),
            code_minus: code.codewords[1].amplitudes.clone(),
            modeled: code.modeled_basis().iter().map(|s| s.amplitudes.clone()).collect(),
        }
    }

    /// Identity recovery on the trivial (empty) modeled subspace.
    pub fn identity(cutoff: usize) -> Self {
        RecoveryChannel {
            kraus: Vec::new(),
            code_plus: CVec::zeros(cutoff + 1),
            code_minus: CVec::zeros(cutoff + 1),
            modeled: Vec::new(),
        }
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let n = rho.nrows();
        // Q rho Q = rho - P rho - rho P + P rho P
        let mut out = rho.clone();
        if !self.modeled.is_empty() {
            let s = self.modeled.len();
            // rv_k = rho |psi_k>, lv_k = rho^dag |psi_k>, g_ab = <psi_a|rho|psi_b>
            let rho_dag = rho.t().mapv(|z| z.conj());
            let rv: Vec<CVec> = self.modeled.iter().map(|p| rho.dot(p)).collect();
            let lv: Vec<CVec> = self.modeled.iter().map(|p| rho_dag.dot(p)).collect();
            let mut g = vec![vec![C64::new(0.0, 0.0); s]; s];
            for a in 0..s {
                for b in 0..s {
                    g[a][b] = inner(&self.modeled[a], &rv[b]);
                }
            }
            // subtract P rho + rho P - P rho P
            for a in 0..s {
                let pa = &self.modeled[a];
                for i in 0..n {
                    for j in 0..n {
                        // (P rho)_ij = psi_a[i] <psi_a|rho|j> = psi_a[i] conj(lv_a[j])
                        out[[i, j]] -= pa[i] * lv[a][j].conj();
                        out[[i, j]] -= rv[a][i] * pa[j].conj();
                    }
                }
            }
            for a in 0..s {
                for b in 0..s {
                    let w = g[a][b];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            out[[i, j]] += self.modeled[a][i] * w * self.modeled[b][j].conj();
                        }
                    }
                }
            }
        }
        // + sum_r R rho R^dag, built from code-space dyads
        for k in &self.kraus {
            let ru = rho.dot(&k.u_plus);
            let rm = rho.dot(&k.u_minus);
            let upp = inner(&k.u_plus, &ru);
            let umm = inner(&k.u_minus, &rm);
            let upm = inner(&k.u_plus, &rm);
            let ump = inner(&k.u_minus, &ru);
            for i in 0..n {
                for j in 0..n {
                    out[[i, j]] += upp * self.code_plus[i] * self.code_plus[j].conj()
                        + umm * self.code_minus[i] * self.code_minus[j].conj()
                        + upm * self.code_plus[i] * self.code_minus[j].conj()
                        + ump * self.code_minus[i] * self.code_plus[j].conj();
                }
            }
        }
        out
    }
}

/// Result of an encoding optimization.
#[derive(Debug, Clone)]
pub struct EncodingResult {
    pub alpha_opt: f64,
    pub xi_opt: f64,
    pub fidelity_opt: f64,
    pub mean_photons: f64,
    pub cutoff: usize,
    pub sdp_gap: f64,
    pub tp_residual: f64,
    /// Cells skipped by the grid search, with reasons.
    pub skipped: Vec<(f64, f64, String)>,
}

/// Evaluate the optimal-recovery fidelity of one (alpha, xi) encoding.
pub fn encoding_fidelity(alpha: f64, xi: f64, p: &NoiseParams) -> Result<(f64, CodePair, RecoverySolution)> {
    let cutoff = crate::fock::choose_cutoff(C64::new(alpha, 0.0), C64::new(xi, 0.0), 1.0)?;
    let code = build_error_subspaces(&SCParams::real(alpha, xi, cutoff))?;
    let basis = recovery_basis(&code);
    let w = process_matrix(&code, &basis, p)?;
    let sol = solve_sdp(&w, &code, &basis)?;
    Ok((sol.fidelity, code, sol))
}

/// Fidelity of the single-rail limit point evaluated through the same SDP
/// pipeline (codewords |0>, |1>, code-space-only recovery family).
fn rail_limit_fidelity(p: &NoiseParams) -> Result<(f64, CodePair, RecoverySolution)> {
    let code = crate::subspaces::single_rail_code(16);
    let basis = recovery_basis(&code);
    let w = process_matrix(&code, &basis, p)?;
    let sol = solve_sdp(&w, &code, &basis)?;
    Ok((sol.fidelity, code, sol))
}

const ALPHA_MIN: f64 = 0.05;
const ALPHA_MAX: f64 = 2.5;
const N_ALPHA: usize = 21;
const N_XI: usize = 11;

fn alpha_grid() -> Vec<f64> {
    // log spacing over [0.05, 2.5]
    (0..N_ALPHA)
        .map(|i| {
            let t = i as f64 / (N_ALPHA - 1) as f64;
            ALPHA_MIN * (ALPHA_MAX / ALPHA_MIN).powf(t)
        })
        .collect()
}

struct Candidate {
    alpha: f64,
    xi: f64,
    fidelity: f64,
    mean_photons: f64,
    cutoff: usize,
    gap: f64,
    tp: f64,
}

fn evaluate_candidate(alpha: f64, xi: f64, p: &NoiseParams) -> Result<Candidate> {
    if alpha == 0.0 {
        let (f, code, sol) = rail_limit_fidelity(p)?;
        return Ok(Candidate {
            alpha,
            xi,
            fidelity: f,
            mean_photons: code.mean_photons(),
            cutoff: code.cutoff(),
            gap: sol.gap,
            tp: sol.tp_residual,
        });
    }
    let (f, code, sol) = encoding_fidelity(alpha, xi, p)?;
    Ok(Candidate {
        alpha,
        xi,
        fidelity: f,
        mean_photons: code.mean_photons(),
        cutoff: code.cutoff(),
        gap: sol.gap,
        tp: sol.tp_residual,
    })
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    // prefer higher fidelity; break near-ties toward fewer photons
    if a.fidelity > b.fidelity + 1e-12 {
        return true;
    }
    if (a.fidelity - b.fidelity).abs() <= 1e-12 {
        return a.mean_photons < b.mean_photons;
    }
    false
}

/// Grid search over (alpha, xi) followed by bounded Nelder-Mead refinement.
///
/// The candidate set includes the alpha -> 0 single-rail limit of the
/// family, so the optimized code is never worse than its own degenerate
/// limit (the noise keeps rail states inside the code space, where the
/// code-projector recovery acts as the identity).
pub fn optimize_encoding(p: &NoiseParams, xi_max: f64) -> Result<EncodingResult> {
    if xi_max < 0.0 {
        return Err(Error::InvalidArgument("xi_max must be >= 0".into()));
    }
    let xis: Vec<f64> = if xi_max == 0.0 {
        vec![0.0]
    } else {
        (0..N_XI).map(|i| xi_max * i as f64 / (N_XI - 1) as f64).collect()
    };
    let mut cells: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for &a in &alpha_grid() {
        for &x in &xis {
            cells.push((a, x));
        }
    }

    let evals: Vec<std::result::Result<Candidate, (f64, f64, String)>> = cells
        .par_iter()
        .map(|&(a, x)| evaluate_candidate(a, x, p).map_err(|e| (a, x, e.to_string())))
        .collect();

    let mut best: Option<Candidate> = None;
    let mut skipped = Vec::new();
    for ev in evals {
        match ev {
            Ok(cand) => {
                if best.as_ref().map_or(true, |b| better(&cand, b)) {
                    best = Some(cand);
                }
            }
            Err(info) => skipped.push(info),
        }
    }
    let mut best = best.ok_or_else(|| Error::Sdp("all grid cells failed".into()))?;

    // local refinement (skipped for the degenerate rail optimum)
    if best.alpha > 0.0 && !p.is_zero() {
        let clamp = |a: f64, x: f64| -> (f64, f64) {
            (a.clamp(ALPHA_MIN, ALPHA_MAX), x.clamp(0.0, xi_max))
        };
        let f = |a: f64, x: f64| -> Option<Candidate> { evaluate_candidate(a, x, p).ok() };
        let refined = nelder_mead_2d(
            (best.alpha, best.xi),
            (0.1 * best.alpha.max(0.1), 0.1 * xi_max.max(0.1)),
            40,
            clamp,
            f,
        );
        if let Some(r) = refined {
            if better(&r, &best) {
                best = r;
            }
        }
    }

    Ok(EncodingResult {
        alpha_opt: best.alpha,
        xi_opt: best.xi,
        fidelity_opt: best.fidelity,
        mean_photons: best.mean_photons,
        cutoff: best.cutoff,
        sdp_gap: best.gap,
        tp_residual: best.tp,
        skipped,
    })
}

fn nelder_mead_2d<C, F>(
    start: (f64, f64),
    scale: (f64, f64),
    iters: usize,
    clamp: C,
    mut eval: F,
) -> Option<Candidate>
where
    C: Fn(f64, f64) -> (f64, f64),
    F: FnMut(f64, f64) -> Option<Candidate>,
{
    let mut pts: Vec<Candidate> = Vec::new();
    for (da, dx) in [(0.0, 0.0), (scale.0, 0.0), (0.0, scale.1)] {
        let (a, x) = clamp(start.0 + da, start.1 + dx);
        pts.push(eval(a, x)?);
    }
    for _ in 0..iters {
        pts.sort_by(|u, v| v.fidelity.partial_cmp(&u.fidelity).unwrap());
        let spread = (pts[0].alpha - pts[2].alpha).abs() + (pts[0].xi - pts[2].xi).abs();
        if spread < 1e-3 {
            break;
        }
        let cen = (
            0.5 * (pts[0].alpha + pts[1].alpha),
            0.5 * (pts[0].xi + pts[1].xi),
        );
        let worst = &pts[2];
        let (ra, rx) = clamp(2.0 * cen.0 - worst.alpha, 2.0 * cen.1 - worst.xi);
        let refl = eval(ra, rx);
        match refl {
            Some(r) if r.fidelity > pts[0].fidelity => {
                // try expansion
                let (ea, ex) = clamp(cen.0 + 2.0 * (ra - cen.0), cen.1 + 2.0 * (rx - cen.1));
                let exp = eval(ea, ex);
                pts[2] = match exp {
                    Some(e) if e.fidelity > r.fidelity => e,
                    _ => r,
                };
            }
            Some(r) if r.fidelity > pts[1].fidelity => pts[2] = r,
            _ => {
                // contraction toward the centroid
                let (ca, cx) = clamp(
                    0.5 * (cen.0 + worst.alpha),
                    0.5 * (cen.1 + worst.xi),
                );
                match eval(ca, cx) {
                    Some(cdd) if cdd.fidelity > worst.fidelity => pts[2] = cdd,
                    _ => {
                        // shrink toward the best point
                        for k in 1..3 {
                            let (sa, sx) = clamp(
                                0.5 * (pts[0].alpha + pts[k].alpha),
                                0.5 * (pts[0].xi + pts[k].xi),
                            );
                            if let Some(sp) = eval(sa, sx) {
                                pts[k] = sp;
                            }
                        }
                    }
                }
            }
        }
    }
    pts.sort_by(|u, v| v.fidelity.partial_cmp(&u.fidelity).unwrap());
    pts.into_iter().next()
}

/// The plain-cat baseline: the same pipeline pinned to xi = 0 (the loss
/// subspace degenerates away), optimizing alpha alone.
pub fn cat_baseline(p: &NoiseParams) -> Result<EncodingResult> {
    optimize_encoding(p, 0.0)
}

/// The single-rail baseline: codewords |0>, |1> under the bare noise channel
/// with no recovery at all.
pub fn single_rail_baseline(p: &NoiseParams) -> Result<f64> {
    let c0 = StateVector::basis_state(0, 16);
    let c1 = StateVector::basis_state(1, 16);
    crate::noise::channel_fidelity_direct(&c0, &c1, |rho| Ok(apply_exact(rho, p)))
}

/// One cell of the channel-fidelity sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub kappa1_tau: f64,
    pub kappa2_tau: f64,
    pub sc: EncodingResult,
    pub cat: EncodingResult,
    pub rail_fidelity: f64,
}

/// Log-spaced grid over [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            lo * (hi / lo).powf(t)
        })
        .collect()
}

/// Sweep the (k1 tau, k2 tau) grid; cells run concurrently and are returned
/// in row-major order. The squeezed-cat optimum is floored at the cat
/// optimum (its xi = 0 restriction).
pub fn sweep(k1s: &[f64], k2s: &[f64], xi_max: f64) -> Result<Vec<SweepCell>> {
    let cells: Vec<(f64, f64)> = k1s
        .iter()
        .flat_map(|&k1| k2s.iter().map(move |&k2| (k1, k2)))
        .collect();
    let out: Vec<Result<SweepCell>> = cells
        .par_iter()
        .map(|&(k1, k2)| {
            let p = NoiseParams::new(k1, k2)?;
            let cat = cat_baseline(&p)?;
            let mut sc = optimize_encoding(&p, xi_max)?;
            if cat.fidelity_opt > sc.fidelity_opt {
                sc = EncodingResult { ..cat.clone() };
            }
            let rail = single_rail_baseline(&p)?;
            Ok(SweepCell {
                kappa1_tau: k1,
                kappa2_tau: k2,
                sc,
                cat,
                rail_fidelity: rail,
            })
        })
        .collect();
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::choose_cutoff;
    use crate::noise::channel_fidelity_direct;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn setup(alpha: f64, xi: f64) -> (CodePair, RecoveryBasis) {
        let n = choose_cutoff(c(alpha), c(xi), 1.0).unwrap();
        let code = build_error_subspaces(&SCParams::real(alpha, xi, n)).unwrap();
        let basis = recovery_basis(&code);
        (code, basis)
    }

    #[test]
    fn process_matrix_identity_channel() {
        let (code, basis) = setup(0.5, 1.0);
        let p0 = NoiseParams::new(0.0, 0.0).unwrap();
        let w = process_matrix(&code, &basis, &p0).unwrap();
        // W_ij = Tr(B_i) conj(Tr(B_j))
        let traces: Vec<C64> = basis.ops.iter().map(|b| b.trace(&code)).collect();
        for i in 0..basis.ops.len() {
            for j in 0..basis.ops.len() {
                let want = traces[i] * traces[j].conj();
                assert!((w.w[[i, j]] - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn process_matrix_is_psd_and_routes_agree() {
        let (code, basis) = setup(0.5, 1.0);
        let p = NoiseParams::new(1e-3, 1e-3).unwrap();
        let w = process_matrix(&code, &basis, &p).unwrap();
        let (evals, _) = eigh(&w.w);
        assert!(evals[0] > -1e-9, "min eig {:.2e}", evals[0]);
        // exact ladder route vs integrated route
        let w2 = process_matrix_via(&code, &basis, &p, ChannelRoute::Integrated).unwrap();
        let d = crate::linalg::max_abs(&(&w.w - &w2.w));
        assert!(d < 1e-8, "routes differ by {d:.2e}");
    }

    #[test]
    fn leading_kraus_cross_check_on_w() {
        // W from the full channel vs W from the truncated Kraus set agree to
        // second order in the rates (moderate squeezing keeps the expansion
        // valid)
        let (code, basis) = setup(0.4, 0.4);
        let p = NoiseParams::new(1e-3, 1e-3).unwrap();
        let w = process_matrix(&code, &basis, &p).unwrap();
        let lk = crate::noise::leading_kraus(&p, code.cutoff()).unwrap();
        let d = basis.ops.len();
        let mut wk = CMat::zeros((d, d));
        let tr = |op: &crate::subspaces::BasisOp, k: &CMat| -> C64 {
            // Tr(B K) = <w+|K|C+> + <w-|K|C->
            inner(&op.w_plus, &k.dot(&code.codewords[0].amplitudes))
                + inner(&op.w_minus, &k.dot(&code.codewords[1].amplitudes))
        };
        for i in 0..d {
            for j in 0..d {
                let mut v = C64::new(0.0, 0.0);
                for k in [&lk.k0.matrix, &lk.k1.matrix, &lk.k2.matrix] {
                    v += tr(&basis.ops[i], k) * tr(&basis.ops[j], k).conj();
                }
                wk[[i, j]] = v;
            }
        }
        let bound = 10.0 * (p.kappa1_tau + p.kappa2_tau).powi(2);
        let worst = crate::linalg::max_abs(&(&w.w - &wk));
        assert!(worst < bound, "entrywise {worst:.2e} vs bound {bound:.2e}");
    }

    #[test]
    fn identity_channel_recovery_is_perfect() {
        let (code, basis) = setup(0.5, 1.0);
        let p0 = NoiseParams::new(0.0, 0.0).unwrap();
        let w = process_matrix(&code, &basis, &p0).unwrap();
        let sol = solve_sdp(&w, &code, &basis).unwrap();
        assert!((sol.fidelity - 1.0).abs() < 1e-7, "F = {}", sol.fidelity);
        assert!(sol.tp_residual < 1e-8);
    }

    #[test]
    fn sdp_beats_projection_recovery() {
        // the bare code projector (X selecting P_0^0) is feasible, so the
        // optimum can only improve on it
        let (code, basis) = setup(0.4, 1.2);
        let p = NoiseParams::new(1e-3, 0.0).unwrap();
        let w = process_matrix(&code, &basis, &p).unwrap();
        let sol = solve_sdp(&w, &code, &basis).unwrap();
        let d = basis.ops.len();
        let mut x_proj = CMat::zeros((d, d));
        for (i, op) in basis.ops.iter().enumerate() {
            if op.n == 0 {
                x_proj[[i, i]] = C64::new(1.0, 0.0);
            }
        }
        let f_proj = {
            let mut v = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    v += x_proj[[i, j]] * w.w[[j, i]];
                }
            }
            v.re / 4.0
        };
        assert!(sol.fidelity >= f_proj - 1e-9, "{} < {}", sol.fidelity, f_proj);
    }

    #[test]
    fn kraus_and_direct_fidelity_agree() {
        let (code, basis) = setup(0.5, 1.0);
        let p = NoiseParams::new(1e-3, 1e-3).unwrap();
        let w = process_matrix(&code, &basis, &p).unwrap();
        let sol = solve_sdp(&w, &code, &basis).unwrap();
        assert!(sol.gap < 1e-7 && sol.tp_residual < 1e-8);
        let chan = RecoveryChannel::from_solution(&sol, &code);
        let f = channel_fidelity_direct(&code.codewords[0], &code.codewords[1], |rho| {
            Ok(chan.apply(&apply_exact(rho, &p)))
        })
        .unwrap();
        assert!(
            (f - sol.fidelity).abs() < 1e-6,
            "direct {f} vs sdp {}",
            sol.fidelity
        );
    }

    #[test]
    fn recovery_channel_structure() {
        let (code, basis) = setup(0.5, 0.9);
        let p = NoiseParams::new(2e-3, 1e-3).unwrap();
        let w = process_matrix(&code, &basis, &p).unwrap();
        let sol = solve_sdp(&w, &code, &basis).unwrap();
        let chan = RecoveryChannel::from_solution(&sol, &code);

        // trace preservation on an arbitrary mixed state
        let dim = code.cutoff() + 1;
        let mut rho = CMat::zeros((dim, dim));
        for i in 0..6 {
            rho[[i, i]] = C64::new(1.0 / 6.0, 0.0);
            if i + 1 < 6 {
                rho[[i, i + 1]] = C64::new(0.05, 0.02);
                rho[[i + 1, i]] = C64::new(0.05, -0.02);
            }
        }
        let out = chan.apply(&rho);
        let tr: C64 = (0..dim).map(|i| out[[i, i]]).sum();
        assert!((tr.re - 1.0).abs() < 1e-9, "trace {}", tr.re);

        // maximally mixed state on the modeled subspace maps into the code space
        let s = code.modeled_dim();
        let mut rho_sub = CMat::zeros((dim, dim));
        for b in code.modeled_basis() {
            for i in 0..dim {
                for j in 0..dim {
                    rho_sub[[i, j]] +=
                        b.amplitudes[i] * b.amplitudes[j].conj() / C64::new(s as f64, 0.0);
                }
            }
        }
        let out = chan.apply(&rho_sub);
        // support check: <v|out|v> = 0 for v orthogonal to the code space
        let probe = &code.error_basis[0].plus;
        let mut v = C64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                v += probe.amplitudes[i].conj() * out[[i, j]] * probe.amplitudes[j];
            }
        }
        assert!(v.norm() < 1e-9, "leakage {v}");

        // states fully inside the modeled subspace pick up no Q contribution:
        // the output trace is carried entirely by the Kraus part
        let tr_out: C64 = (0..dim).map(|i| out[[i, i]]).sum();
        assert!((tr_out.re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sdp_optimality_against_random_feasible_points() {
        let (code, basis) = setup(0.5, 1.1);
        let p = NoiseParams::new(2e-3, 2e-3).unwrap();
        let w = process_matrix(&code, &basis, &p).unwrap();
        let sol = solve_sdp(&w, &code, &basis).unwrap();
        let d = basis.ops.len();

        // feasible points: random PSD matrices projected onto the affine TP
        // set, then mixed toward the strictly feasible I/4 until PSD again
        let modeled = code.modeled_basis();
        let s = modeled.len();
        let mut ovp = vec![vec![C64::new(0.0, 0.0); s]; d];
        let mut ovm = vec![vec![C64::new(0.0, 0.0); s]; d];
        for (i, op) in basis.ops.iter().enumerate() {
            for (k, psi) in modeled.iter().enumerate() {
                ovp[i][k] = inner(&op.w_plus, &psi.amplitudes);
                ovm[i][k] = inner(&op.w_minus, &psi.amplitudes);
            }
        }
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let fidelity_of = |x: &CMat| -> f64 {
            let mut v = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    v += x[[i, j]] * w.w[[j, i]];
                }
            }
            v.re / 4.0
        };
        for _trial in 0..20 {
            let mut r = CMat::zeros((d, d));
            for i in 0..d {
                for j in 0..d {
                    r[[i, j]] = C64::new(next(), next());
                }
            }
            let psd = r.dot(&r.t().mapv(|z| z.conj()));
            // project onto the TP constraint by rescaling the subspace action:
            // mix with I/4 so that A(X) ~ I, then verify with the tp map
            let mut t = 1.0;
            let xr = loop {
                let xr: CMat = psd.mapv(|z| z * C64::new(1.0 - t, 0.0))
                    + CMat::eye(d).mapv(|v| v * C64::new(0.25 * t, 0.0));
                // enforce TP by normalizing against the constraint Gram:
                // compute A(X) and rescale
                let mut axnorm = 0.0f64;
                for a in 0..s {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..d {
                        for j in 0..d {
                            acc += xr[[i, j]]
                                * (ovp[i][a].conj() * ovp[j][a] + ovm[i][a].conj() * ovm[j][a]);
                        }
                    }
                    axnorm = axnorm.max((acc.re - 1.0).abs());
                }
                if axnorm < 0.9 {
                    break xr;
                }
                t = 0.5 + 0.5 * t;
                if t > 0.999 {
                    break CMat::eye(d).mapv(|v| v * C64::new(0.25, 0.0));
                }
            };
            // exact projection onto the affine set is involved; contracting
            // toward I/4 keeps X in the spectrahedron's interior, and any
            // shortfall from exact TP only shrinks the objective further
            let f = fidelity_of(&xr);
            assert!(
                sol.fidelity >= f - 1e-9,
                "random feasible beat the optimum: {f} > {}",
                sol.fidelity
            );
        }
    }

    #[test]
    fn rail_baseline_values() {
        let p0 = NoiseParams::new(0.0, 0.0).unwrap();
        assert!((single_rail_baseline(&p0).unwrap() - 1.0).abs() < 1e-12);
        // closed forms
        for (k1, k2) in [(0.05, 0.0), (0.0, 0.01), (0.02, 0.03)] {
            let p = NoiseParams::new(k1, k2).unwrap();
            let want = (1.0 + (-k1).exp() + 2.0 * (-(k1 + k2) / 2.0).exp()) / 4.0;
            assert!((single_rail_baseline(&p).unwrap() - want).abs() < 1e-12);
        }
        // monotone decreasing in dephasing
        let f1 = single_rail_baseline(&NoiseParams::new(0.0, 0.01).unwrap()).unwrap();
        let f2 = single_rail_baseline(&NoiseParams::new(0.0, 0.02).unwrap()).unwrap();
        assert!(f2 < f1 && f1 < 1.0);
    }

    #[test]
    fn rail_limit_matches_no_recovery() {
        // the rail-limit SDP cell reproduces the bare-channel fidelity: the
        // noise keeps rail states in the code space, where the projector
        // recovery is the identity
        for (k1, k2) in [(1e-3, 1e-3), (0.1, 1e-4), (1e-4, 0.1)] {
            let p = NoiseParams::new(k1, k2).unwrap();
            let (f, _, _) = rail_limit_fidelity(&p).unwrap();
            let bare = single_rail_baseline(&p).unwrap();
            assert!(f >= bare - 1e-9, "({k1},{k2}): {f} vs {bare}");
        }
    }
}
