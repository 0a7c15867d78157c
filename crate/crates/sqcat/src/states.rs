//! State constructors: coherent, squeezed-displaced, two-component cats,
//! squeezed cats, approximate GKP codewords, plus Wigner maps, the
//! incremental generation sequence, and gate lifting between the cat and
//! squeezed-cat bases.
//!
//! Squeezed-displaced amplitudes are built by the three-term recurrence that
//! follows from (cosh r * a + e^{i theta} sinh r * a^dag)|alpha,xi> =
//! gamma |alpha,xi>; both solutions of the recurrence decay like
//! tanh(r)^{n/2}, so upward iteration is stable, and the closed-form seed
//! fixes the global phase.

use crate::fock::{
    apply_destroy, displacement, squeeze, DensityMatrix, FockOperator, StateVector,
};
use crate::{CMat, CVec, C64, Error, Result};

/// Parity label for cat codewords.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Displacement/squeezing parameters of a squeezed-cat codeword.
#[derive(Debug, Clone, Copy)]
pub struct SCParams {
    pub alpha: C64,
    pub xi: C64,
    pub cutoff: usize,
}

impl SCParams {
    pub fn real(alpha: f64, xi: f64, cutoff: usize) -> Self {
        SCParams {
            alpha: C64::new(alpha, 0.0),
            xi: C64::new(xi, 0.0),
            cutoff,
        }
    }
}

/// Amplitudes derived from (alpha, xi).
///
/// `gamma` is the squeezed displacement: D(alpha) S(xi) = S(xi) D(gamma), the
/// effective 2-cat amplitude after pulling the squeeze to the left. `zeta` is
/// the amplitude for the opposite move, S(xi) D(alpha) = D(zeta) S(xi).
#[derive(Debug, Clone, Copy)]
pub struct DerivedAmplitudes {
    pub gamma: C64,
    pub zeta: C64,
    pub norm_plus: f64,
    pub norm_minus: f64,
}

impl DerivedAmplitudes {
    pub fn from_params(alpha: C64, xi: C64) -> Self {
        let r = xi.norm();
        let phase = if r > 0.0 { xi / C64::new(r, 0.0) } else { C64::new(1.0, 0.0) };
        let gamma = alpha * r.cosh() + phase * alpha.conj() * r.sinh();
        let zeta = alpha * r.cosh() - phase * alpha.conj() * r.sinh();
        let g2 = gamma.norm_sqr();
        DerivedAmplitudes {
            gamma,
            zeta,
            norm_plus: (2.0 * (1.0 + (-2.0 * g2).exp())).sqrt(),
            norm_minus: (2.0 * (1.0 - (-2.0 * g2).exp())).sqrt(),
        }
    }

    pub fn norm(&self, parity: Parity) -> f64 {
        match parity {
            Parity::Even => self.norm_plus,
            Parity::Odd => self.norm_minus,
        }
    }
}

/// Coherent state |alpha>.
pub fn coherent(alpha: C64, cutoff: usize) -> Result<StateVector> {
    let mut v = CVec::zeros(cutoff + 1);
    v[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        v[n + 1] = v[n] * alpha / C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    let state = StateVector { amplitudes: v, cutoff };
    // eigenvalue residual doubles as the tail check
    let res = eigen_residual(&state, alpha);
    if res > 1e-8 || state.norm() < 1.0 - 1e-9 {
        return Err(Error::CutoffInsufficient {
            cutoff,
            reason: format!("coherent |alpha|={:.3}: residual {res:.2e}", alpha.norm()),
        });
    }
    Ok(StateVector::normalized(state.amplitudes, cutoff))
}

fn eigen_residual(psi: &StateVector, alpha: C64) -> f64 {
    let a_psi = apply_destroy(&psi.amplitudes);
    let mut s = 0.0;
    for n in 0..=psi.cutoff {
        s += (a_psi[n] - alpha * psi.amplitudes[n]).norm_sqr();
    }
    s.sqrt()
}

/// Raw squeezed-displaced amplitudes, not normalized (norm ~1 up to tail).
fn squeezed_displaced_raw(alpha: C64, xi: C64, cutoff: usize) -> CVec {
    let r = xi.norm();
    if r == 0.0 {
        let mut v = CVec::zeros(cutoff + 1);
        v[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..cutoff {
            v[n + 1] = v[n] * alpha / C64::new(((n + 1) as f64).sqrt(), 0.0);
        }
        return v;
    }
    let phase = xi / C64::new(r, 0.0);
    let gamma = alpha * r.cosh() + phase * alpha.conj() * r.sinh();
    let ch = C64::new(r.cosh(), 0.0);
    let sh = phase * r.sinh();
    let mut v = CVec::zeros(cutoff + 1);
    let log_pref = -0.5 * alpha.norm_sqr();
    v[0] = ((C64::new(log_pref, 0.0) - C64::new(0.5 * r.tanh(), 0.0) * phase * alpha.conj() * alpha.conj())
        .exp())
        / C64::new(r.cosh().sqrt(), 0.0);
    if cutoff >= 1 {
        v[1] = gamma * v[0] / ch;
    }
    for n in 1..cutoff {
        v[n + 1] = (gamma * v[n] - sh * C64::new((n as f64).sqrt(), 0.0) * v[n - 1])
            / (ch * C64::new(((n + 1) as f64).sqrt(), 0.0));
    }
    v
}

/// Squeezed-displaced state |alpha, xi> = D(alpha) S(xi) |0>.
pub fn squeezed_displaced(params: &SCParams) -> Result<StateVector> {
    let v = squeezed_displaced_raw(params.alpha, params.xi, params.cutoff);
    let state = StateVector { amplitudes: v, cutoff: params.cutoff };
    let tail = state.tail_population(params.cutoff.saturating_sub(2));
    if tail > 1e-10 || state.norm() < 1.0 - 1e-6 {
        return Err(Error::CutoffInsufficient {
            cutoff: params.cutoff,
            reason: format!("squeezed-displaced tail {tail:.2e}"),
        });
    }
    Ok(StateVector::normalized(state.amplitudes, params.cutoff))
}

/// Two-component cat (|alpha> +/- |-alpha>)/N.
pub fn cat(alpha: C64, parity_sign: Parity, cutoff: usize) -> Result<StateVector> {
    squeezed_cat(
        &SCParams { alpha, xi: C64::new(0.0, 0.0), cutoff },
        parity_sign,
    )
}

/// Squeezed-cat codeword (|alpha,xi> +/- |-alpha,xi>)/N.
///
/// Built by masking the squeezed-displaced amplitudes to one parity sector,
/// which is exact: the two branches differ entry-wise only by (-1)^n.
pub fn squeezed_cat(params: &SCParams, parity_sign: Parity) -> Result<StateVector> {
    if parity_sign == Parity::Odd && params.alpha.norm() == 0.0 {
        return Err(Error::DegenerateInput(
            "odd cat at alpha = 0: normalization vanishes".into(),
        ));
    }
    let mut v = squeezed_displaced_raw(params.alpha, params.xi, params.cutoff);
    let keep_even = parity_sign == Parity::Even;
    for n in 0..=params.cutoff {
        if (n % 2 == 0) != keep_even {
            v[n] = C64::new(0.0, 0.0);
        }
    }
    let state = StateVector { amplitudes: v, cutoff: params.cutoff };
    let tail = state.tail_population(params.cutoff / 2);
    if tail > 1e-10 * state.norm().powi(2) {
        return Err(Error::CutoffInsufficient {
            cutoff: params.cutoff,
            reason: format!("squeezed-cat tail population {tail:.2e} above cutoff/2"),
        });
    }
    Ok(StateVector::normalized(state.amplitudes, params.cutoff))
}

/// Approximate GKP codeword parameters.
#[derive(Debug, Clone, Copy)]
pub struct GKPParams {
    /// Envelope width; the squeezing identification is xi = -ln(delta).
    pub delta: f64,
    /// Codeword label, 0 or 1.
    pub mu: u8,
    /// Lattice sum runs over |2n + mu| <= 2*lattice_cutoff + 1.
    pub lattice_cutoff: usize,
    pub cutoff: usize,
}

/// Approximate GKP codeword: a Gaussian-weighted comb of squeezed-displaced
/// peaks, sum_n w_n D(sqrt(pi/2)(2n+mu)) S(-ln delta)|0>, normalized.
pub fn gkp_codeword(params: &GKPParams) -> Result<StateVector> {
    if params.delta <= 0.0 || params.delta > 1.0 {
        return Err(Error::InvalidArgument("gkp: delta must lie in (0, 1]".into()));
    }
    if params.mu > 1 {
        return Err(Error::InvalidArgument("gkp: mu must be 0 or 1".into()));
    }
    let xi = -params.delta.ln();
    let kmax = 2 * params.lattice_cutoff as i64 + params.mu as i64;
    let dropped = (-(std::f64::consts::PI / 2.0)
        * params.delta.powi(2)
        * ((kmax + 2) as f64).powi(2))
    .exp();
    if dropped > 1e-14 {
        return Err(Error::CutoffInsufficient {
            cutoff: params.lattice_cutoff,
            reason: format!("gkp lattice cutoff drops weight {dropped:.2e} > 1e-14"),
        });
    }
    let mut v = CVec::zeros(params.cutoff + 1);
    let nmax = params.lattice_cutoff as i64;
    for n in -nmax - 1..=nmax {
        let k = 2 * n + params.mu as i64;
        if k.abs() > kmax {
            continue;
        }
        let w = (-(std::f64::consts::PI / 2.0) * params.delta.powi(2) * (k as f64).powi(2)).exp();
        let c = (std::f64::consts::PI / 2.0).sqrt() * k as f64;
        let term = squeezed_displaced_raw(C64::new(c, 0.0), C64::new(xi, 0.0), params.cutoff);
        // each peak is unit-norm up to the Fock tail; re-normalize the term
        let tn = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..=params.cutoff {
            v[i] += term[i] * C64::new(w / tn, 0.0);
        }
    }
    let state = StateVector { amplitudes: v, cutoff: params.cutoff };
    let nn = state.norm();
    let tail = state.tail_population(params.cutoff.saturating_sub(2)) / (nn * nn);
    if tail > 1e-10 {
        return Err(Error::CutoffInsufficient {
            cutoff: params.cutoff,
            reason: format!("gkp Fock tail {tail:.2e}"),
        });
    }
    Ok(StateVector::normalized(state.amplitudes, params.cutoff))
}

/// Fock cutoff adequate for a GKP codeword at the given envelope width.
pub fn gkp_default_cutoffs(delta: f64) -> (usize, usize) {
    // lattice: largest |2n+mu| with weight > 1e-14
    let kmax = (32.3 / (std::f64::consts::PI / 2.0) / (delta * delta)).sqrt();
    let lattice = ((kmax as usize) / 2 + 1).max(2);
    let c2 = std::f64::consts::PI / 2.0 * kmax * kmax;
    let xi = -delta.ln();
    let fock = (c2 + 12.0 * (c2 + 1.0).sqrt() + 40.0 / (-(xi.tanh().ln())).max(0.05) + 32.0) as usize;
    (lattice, (fock + 7) / 8 * 8)
}

/// Wigner map samples with the raw grid marginals.
#[derive(Debug, Clone)]
pub struct WignerMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// w[iy][ix] = W(x, y)
    pub w: Vec<Vec<f64>>,
    /// integral of W over y at each x (trapezoidal)
    pub marginal_x: Vec<f64>,
    /// integral of W over x at each y
    pub marginal_y: Vec<f64>,
}

/// Wigner function W(x, y) = (2/pi) Tr[ D(beta)^dag rho D(beta) Pi ] with
/// beta = x + i y, evaluated by the displaced-parity expectation.
///
/// rho is eigendecomposed and the map accumulated over its pure components,
/// so near-pure inputs cost a single pass.
pub fn wigner(rho: &DensityMatrix, xs: &[f64], ys: &[f64]) -> Result<WignerMap> {
    let cutoff = rho.cutoff;
    let rmax2 = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| x * x + y * y))
        .fold(0.0f64, f64::max);
    if rmax2 > cutoff as f64 / 4.0 {
        return Err(Error::GridOutOfRange(format!(
            "wigner grid radius^2 {rmax2:.1} exceeds cutoff/4 = {}",
            cutoff as f64 / 4.0
        )));
    }
    let (evals, evecs) = crate::linalg::eigh(&rho.matrix);
    let mut components: Vec<(f64, CVec)> = Vec::new();
    for k in 0..=cutoff {
        if evals[k] > 1e-12 {
            components.push((evals[k], evecs.column(k).to_owned()));
        }
    }

    // displacement along x by grid steps: D(x + iy)^dag = e^{ixy} D(x)^dag D(iy)^dag
    let mut w = vec![vec![0.0f64; xs.len()]; ys.len()];
    let dx_ops: Vec<FockOperator> = xs
        .iter()
        .map(|&x| displacement(C64::new(x, 0.0), cutoff))
        .collect::<Result<_>>()?;
    let parities: Vec<f64> = (0..=cutoff).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    for (iy, &y) in ys.iter().enumerate() {
        let dy = displacement(C64::new(0.0, y), cutoff)?;
        let dy_dag = dy.dagger();
        for (lam, v) in &components {
            let phi_y = dy_dag.matrix.dot(v);
            for (ix, dxo) in dx_ops.iter().enumerate() {
                let chi = dxo.dagger().matrix.dot(&phi_y);
                let par: f64 = chi
                    .iter()
                    .zip(parities.iter())
                    .map(|(z, p)| p * z.norm_sqr())
                    .sum();
                w[iy][ix] += lam * 2.0 / std::f64::consts::PI * par;
            }
        }
    }

    let trapz = |vals: &[f64], grid: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 1..grid.len() {
            s += 0.5 * (vals[i] + vals[i - 1]) * (grid[i] - grid[i - 1]);
        }
        s
    };
    let marginal_x: Vec<f64> = (0..xs.len())
        .map(|ix| {
            let col: Vec<f64> = (0..ys.len()).map(|iy| w[iy][ix]).collect();
            trapz(&col, ys)
        })
        .collect();
    let marginal_y: Vec<f64> = (0..ys.len()).map(|iy| trapz(&w[iy], xs)).collect();

    Ok(WignerMap {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        w,
        marginal_x,
        marginal_y,
    })
}

/// Decompose D(alpha)S(xi) into n_steps equal squeeze factors with stepwise
/// displacements: D(alpha)S(xi) = prod_m D(alpha_m) S(xi/n).
///
/// Passing D(alpha_m) leftward through one squeeze factor shrinks its
/// amplitude, so the per-step amplitudes must grow by the inverse map,
/// alpha_m = alpha_{m-1} cosh(r) + e^{i theta} alpha*_{m-1} sinh(r).
pub fn generation_sequence(alpha: C64, xi: C64, n_steps: usize) -> Result<Vec<(C64, C64)>> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("generation_sequence: n_steps >= 1".into()));
    }
    let r = xi.norm() / n_steps as f64;
    let phase = if xi.norm() > 0.0 {
        xi / C64::new(xi.norm(), 0.0)
    } else {
        C64::new(1.0, 0.0)
    };
    let step_xi = phase * C64::new(r, 0.0);
    let mut out = Vec::with_capacity(n_steps);
    let mut a = alpha / C64::new(n_steps as f64, 0.0);
    for _ in 0..n_steps {
        out.push((a, step_xi));
        a = a * C64::new(r.cosh(), 0.0) + phase * a.conj() * C64::new(r.sinh(), 0.0);
    }
    Ok(out)
}

/// Conjugate a cat-basis gate into the squeezed-cat basis: S(xi) G S(xi)^dag.
pub fn lift_gate(cat_gate: &FockOperator, xi: C64) -> Result<FockOperator> {
    let s = squeeze(xi, cat_gate.cutoff)?;
    let lifted = s.matrix.dot(&cat_gate.matrix).dot(&s.dagger().matrix);
    Ok(FockOperator::new(lifted, cat_gate.cutoff))
}

/// Outer product |u><v| as a matrix.
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    let n = u.len();
    let mut m = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = u[i] * v[j].conj();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_create, choose_cutoff, inner, parity};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn coherent_basics() {
        let v = coherent(c(0.0), 16).unwrap();
        assert!((v.amplitudes[0].re - 1.0).abs() < 1e-15);
        // <alpha|-alpha> = e^{-2|alpha|^2}
        let p = coherent(c(1.0), 40).unwrap();
        let m = coherent(c(-1.0), 40).unwrap();
        assert!((p.inner(&m).re - (-2.0f64).exp()).abs() < 1e-12);
        // <n> = |alpha|^2
        let h = coherent(c(0.5), 32).unwrap();
        assert!((h.mean_photons() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn squeezed_displaced_matches_operator_route() {
        for (al, xi, n) in [(0.5, 1.0, 320), (0.3, 0.6, 160), (0.0, 0.0, 16)] {
            let p = SCParams::real(al, xi, n);
            let v = squeezed_displaced(&p).unwrap();
            if xi == 0.0 {
                let cst = coherent(c(al), n).unwrap();
                let d = (&v.amplitudes - &cst.amplitudes).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(d < 1e-13);
                continue;
            }
            let dop = displacement(c(al), n).unwrap();
            let sop = squeeze(c(xi), n).unwrap();
            let vac = StateVector::basis_state(0, n);
            let direct = dop.apply(&sop.apply(&vac));
            let mut worst = 0.0f64;
            for k in 0..=n {
                worst = worst.max((v.amplitudes[k] - direct.amplitudes[k]).norm());
            }
            assert!(worst < 1e-10, "recurrence vs operators at ({al},{xi}): {worst:.2e}");
        }
    }

    #[test]
    fn squeezed_displaced_overlap_formula() {
        // <alpha,xi|-alpha,xi> = exp(-2 alpha^2 e^{2 xi}) for real parameters
        let n = choose_cutoff(c(0.5), c(1.0), 1.0).unwrap();
        let p = squeezed_displaced(&SCParams::real(0.5, 1.0, n)).unwrap();
        let m = squeezed_displaced(&SCParams::real(-0.5, 1.0, n)).unwrap();
        let want = (-2.0 * 0.25 * (2.0f64).exp().powi(1)).exp();
        let got = p.inner(&m);
        assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12,
            "overlap {got} vs {want}");
    }

    #[test]
    fn cat_basics() {
        // (N-/N+)^2 = tanh(|alpha|^2) at |alpha|^2 = 1
        let da = DerivedAmplitudes::from_params(c(1.0), c(0.0));
        let ratio2 = (da.norm_minus / da.norm_plus).powi(2);
        assert!((ratio2 - 1.0f64.tanh()).abs() < 1e-12);

        // parity eigenstate
        let n = 48;
        let even = cat(c(1.0), Parity::Even, n).unwrap();
        let podd: f64 = even
            .amplitudes
            .iter()
            .skip(1)
            .step_by(2)
            .map(|z| z.norm_sqr())
            .sum();
        assert_eq!(podd, 0.0);

        // odd cat at alpha = 0 is rejected
        assert!(matches!(
            cat(c(0.0), Parity::Odd, 16),
            Err(Error::DegenerateInput(_))
        ));

        // <n> -> |alpha|^2 for a large even cat
        let n = choose_cutoff(c(4.0), c(0.0), 1.0).unwrap();
        let big = cat(c(4.0), Parity::Even, n).unwrap();
        assert!((big.mean_photons() - 16.0).abs() < 1e-6);
    }

    #[test]
    fn cat_normalization_two_ways() {
        // formula norm vs direct inner-product norm, to 1e-10
        for al in [0.4, 0.9, 1.7] {
            let n = choose_cutoff(c(al), c(0.0), 1.0).unwrap();
            let da = DerivedAmplitudes::from_params(c(al), c(0.0));
            let p = coherent(c(al), n).unwrap();
            let m = coherent(c(-al), n).unwrap();
            for (parity, sign) in [(Parity::Even, 1.0), (Parity::Odd, -1.0)] {
                let mut sup = CVec::zeros(n + 1);
                for k in 0..=n {
                    sup[k] = p.amplitudes[k] + c(sign) * m.amplitudes[k];
                }
                let direct = sup.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!((direct - da.norm(parity)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn squeezed_cat_equals_squeezed_2cat() {
        let (al, xi) = (0.5, 1.0);
        let n = 480;
        let p = SCParams::real(al, xi, n);
        let da = DerivedAmplitudes::from_params(p.alpha, p.xi);
        let sop = squeeze(c(xi), n).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let sc = squeezed_cat(&p, parity).unwrap();
            let catg = cat(da.gamma, parity, n).unwrap();
            let via = sop.apply(&catg);
            let mut worst = 0.0f64;
            for k in 0..=n {
                worst = worst.max((sc.amplitudes[k] - via.amplitudes[k]).norm());
            }
            assert!(worst < 1e-8, "squeeze(cat(gamma)) mismatch {worst:.2e}");
        }
        // xi = 0 reduces to the plain cat
        let p0 = SCParams::real(0.7, 0.0, 32);
        let sc0 = squeezed_cat(&p0, Parity::Even).unwrap();
        let c0 = cat(c(0.7), Parity::Even, 32).unwrap();
        assert!((sc0.inner(&c0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn commutation_identities() {
        // D(a) S(x) = S(x) D(gamma) and S(x) D(a) = D(zeta) S(x), half-block
        let (al, xi) = (0.4, 0.7);
        let n = 480;
        let da = DerivedAmplitudes::from_params(c(al), c(xi));
        assert!((da.gamma.re - al * xi.exp()).abs() < 1e-14);
        assert!((da.zeta.re - al * (-xi).exp()).abs() < 1e-14);
        let d = displacement(c(al), n).unwrap();
        let s = squeeze(c(xi), n).unwrap();
        let lhs = d.matrix.dot(&s.matrix);
        let rhs = s.matrix.dot(&displacement(da.gamma, n).unwrap().matrix);
        let k = 60;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((lhs[[i, j]] - rhs[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-8, "D S = S D(gamma) residual {worst:.2e}");

        let lhs2 = s.matrix.dot(&d.matrix);
        let rhs2 = displacement(da.zeta, n).unwrap().matrix.dot(&s.matrix);
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((lhs2[[i, j]] - rhs2[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-8, "S D = D(zeta) S residual {worst:.2e}");
    }

    #[test]
    fn gkp_codewords() {
        let (lat, fock) = gkp_default_cutoffs(0.3);
        let g0 = gkp_codeword(&GKPParams { delta: 0.3, mu: 0, lattice_cutoff: lat, cutoff: fock }).unwrap();
        let g1 = gkp_codeword(&GKPParams { delta: 0.3, mu: 1, lattice_cutoff: lat, cutoff: fock }).unwrap();
        assert!((g0.norm() - 1.0).abs() < 1e-10);
        assert!(g0.inner(&g1).norm() < 1e-3, "mu overlap {:.2e}", g0.inner(&g1).norm());

        // delta -> 1: dominated by the n = 0 squeezed-vacuum-like term
        let g = gkp_codeword(&GKPParams { delta: 0.999, mu: 0, lattice_cutoff: 4, cutoff: 64 }).unwrap();
        let vac = StateVector::basis_state(0, 64);
        assert!(g.inner(&vac).norm_sqr() > 0.99);

        // lattice cutoff too small is rejected
        assert!(gkp_codeword(&GKPParams { delta: 0.2, mu: 0, lattice_cutoff: 3, cutoff: 512 }).is_err());
    }

    #[test]
    fn gkp_translation_trend() {
        // <D(sqrt(2 pi))> on |0(delta)> increases monotonically as delta shrinks
        let eta = (2.0 * std::f64::consts::PI).sqrt();
        let mut prev = -1.0;
        for delta in [0.5, 0.4, 0.3] {
            let (lat, fock) = gkp_default_cutoffs(delta);
            let g0 = gkp_codeword(&GKPParams { delta, mu: 0, lattice_cutoff: lat, cutoff: fock }).unwrap();
            let d = displacement(c(eta), fock).unwrap();
            let v = g0.inner(&d.apply(&g0)).re;
            assert!(v > prev, "not increasing at delta={delta}: {v} <= {prev}");
            prev = v;
        }
    }

    #[test]
    fn wigner_values() {
        let vac = StateVector::basis_state(0, 48);
        let rho = DensityMatrix::from_pure(&vac);
        let m = wigner(&rho, &[0.0], &[0.0]).unwrap();
        assert!((m.w[0][0] - 2.0 / std::f64::consts::PI).abs() < 1e-10);

        // normalization over a wide grid
        let xs: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let m = wigner(&rho, &xs, &xs).unwrap();
        let total: f64 = {
            let mut s = 0.0;
            for i in 1..xs.len() {
                s += 0.5 * (m.marginal_y[i] + m.marginal_y[i - 1]) * (xs[i] - xs[i - 1]);
            }
            s
        };
        assert!((total - 1.0).abs() < 1e-3, "wigner integral {total}");

        // odd squeezed cat at the origin: parity expectation -1
        let n = choose_cutoff(c(0.5), c(0.8), 1.0).unwrap();
        let sc = squeezed_cat(&SCParams::real(0.5, 0.8, n), Parity::Odd).unwrap();
        let m = wigner(&DensityMatrix::from_pure(&sc), &[0.0], &[0.0]).unwrap();
        assert!((m.w[0][0] + 2.0 / std::f64::consts::PI).abs() < 1e-9);

        // grid outside the trusted region is rejected
        assert!(wigner(&rho, &[4.0], &[0.0]).is_err());
    }

    #[test]
    fn generation_sequence_product() {
        // n = 1 returns the original pair
        let seq = generation_sequence(c(0.5), c(0.8), 1).unwrap();
        assert_eq!(seq.len(), 1);
        assert!((seq[0].0 - c(0.5)).norm() < 1e-15);

        // xi = 0: equal displacement steps
        let seq = generation_sequence(c(0.9), c(0.0), 3).unwrap();
        for (a, x) in &seq {
            assert!((a - c(0.3)).norm() < 1e-15 && x.norm() == 0.0);
        }

        // product of factors equals the direct operator on the lower block
        let (al, xi, nst) = (0.5, 0.8, 4);
        let n = 640;
        let seq = generation_sequence(c(al), c(xi), nst).unwrap();
        let mut prod = CMat::eye(n + 1);
        for (a, x) in &seq {
            let f = displacement(*a, n).unwrap().matrix.dot(&squeeze(*x, n).unwrap().matrix);
            prod = prod.dot(&f);
        }
        let direct = displacement(c(al), n).unwrap().matrix.dot(&squeeze(c(xi), n).unwrap().matrix);
        let k = 60;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((prod[[i, j]] - direct[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-6, "generation product residual {worst:.2e}");
    }

    #[test]
    fn lift_gate_maps_cat_gate() {
        let (al, xi) = (0.5, 1.0);
        let n = 480;
        // xi = 0: unchanged
        let par = parity(16);
        let l0 = lift_gate(&par, c(0.0)).unwrap();
        let d = (&l0.matrix - &parity(16).matrix).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(d < 1e-13);

        // parity commutes with squeezing
        let lp = lift_gate(&parity(n), c(xi)).unwrap();
        let k = n / 2;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((lp.matrix[[i, j]] - parity(n).matrix[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-8);

        // cat-basis Z gate lifts to the squeezed-cat Z gate
        let da = DerivedAmplitudes::from_params(c(al), c(xi));
        let cp = cat(da.gamma, Parity::Even, n).unwrap();
        let cm = cat(da.gamma, Parity::Odd, n).unwrap();
        let g = outer(&cp.amplitudes, &cp.amplitudes) - outer(&cm.amplitudes, &cm.amplitudes);
        let lifted = lift_gate(&FockOperator::new(g, n), c(xi)).unwrap();
        let scp = squeezed_cat(&SCParams::real(al, xi, n), Parity::Even).unwrap();
        let scm = squeezed_cat(&SCParams::real(al, xi, n), Parity::Odd).unwrap();
        let zp = inner(&scp.amplitudes, &lifted.matrix.dot(&scp.amplitudes));
        let zm = inner(&scm.amplitudes, &lifted.matrix.dot(&scm.amplitudes));
        let zx = inner(&scp.amplitudes, &lifted.matrix.dot(&scm.amplitudes));
        assert!((zp.re - 1.0).abs() < 1e-8 && (zm.re + 1.0).abs() < 1e-8 && zx.norm() < 1e-8);
    }

    #[test]
    fn translation_invariance_exact_form() {
        // <C+| D(i eta) |C+> = e^{-eta^2 e^{-2 xi}/2} (cos(2 a eta) + e^{-2 g^2})
        //                      / (1 + e^{-2 g^2}) for real parameters
        for xi in [0.5, 1.0, 1.5] {
            let al = 0.5;
            let n = choose_cutoff(c(al), c(xi), 1.0).unwrap();
            let sc = squeezed_cat(&SCParams::real(al, xi, n), Parity::Even).unwrap();
            let g2 = (al * xi.exp()).powi(2);
            for eta in [0.5, 1.5, 3.0] {
                let d = displacement(C64::new(0.0, eta), n).unwrap();
                let got = sc.inner(&d.apply(&sc));
                let want = (-0.5 * (-2.0 * xi).exp() * eta * eta).exp()
                    * ((2.0 * al * eta).cos() + (-2.0 * g2).exp())
                    / (1.0 + (-2.0 * g2).exp());
                assert!(
                    (got.re - want).abs() < 1e-9 && got.im.abs() < 1e-9,
                    "xi={xi} eta={eta}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn stabilizer_annihilates_codewords() {
        // ||(b^2 - gamma^2)|C+->|| small; gamma is the squeezed displacement
        let (al, xi) = (0.5, 1.5);
        let n = 704;
        let da = DerivedAmplitudes::from_params(c(al), c(xi));
        let g2 = da.gamma * da.gamma;
        for parity in [Parity::Even, Parity::Odd] {
            let sc = squeezed_cat(&SCParams::real(al, xi, n), parity).unwrap();
            let ch = xi.cosh();
            let sh = xi.sinh();
            let bpsi = |v: &CVec| -> CVec {
                let mut out = apply_destroy(v);
                let up = apply_create(v);
                for k in 0..v.len() {
                    out[k] = c(ch) * out[k] + c(sh) * up[k];
                }
                out
            };
            let b2 = bpsi(&bpsi(&sc.amplitudes));
            let mut res = 0.0f64;
            for k in 0..=n {
                res += (b2[k] - g2 * sc.amplitudes[k]).norm_sqr();
            }
            assert!(res.sqrt() < 1e-7, "stabilizer residual {:.2e}", res.sqrt());
        }
    }
}
