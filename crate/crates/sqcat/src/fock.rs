//! Truncated Fock-space operators and states.
//!
//! Everything lives on the number basis {|0>, ..., |cutoff>}. Truncation
//! corrupts the top of the basis by construction, so operator identities are
//! only ever asserted on the lower half-block of indices, and states must
//! keep their population tail below the cutoff midpoint.

use crate::expm::matrix_exp;
use crate::{CMat, CVec, C64, Error, Result};

/// Dense operator on the truncated number basis.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub matrix: CMat,
    pub cutoff: usize,
}

/// Pure state on the truncated number basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub amplitudes: CVec,
    pub cutoff: usize,
}

/// Hermitian positive-semidefinite density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: CMat,
    pub cutoff: usize,
}

impl FockOperator {
    pub fn new(matrix: CMat, cutoff: usize) -> Self {
        assert_eq!(matrix.nrows(), cutoff + 1);
        assert_eq!(matrix.ncols(), cutoff + 1);
        FockOperator { matrix, cutoff }
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn identity(cutoff: usize) -> Self {
        FockOperator::new(CMat::eye(cutoff + 1), cutoff)
    }

    pub fn dagger(&self) -> Self {
        FockOperator::new(self.matrix.t().mapv(|z| z.conj()), self.cutoff)
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        assert_eq!(self.cutoff, psi.cutoff);
        StateVector {
            amplitudes: self.matrix.dot(&psi.amplitudes),
            cutoff: self.cutoff,
        }
    }

    /// Max |(U^dag U - 1)_{ij}| over the lower half-block of indices.
    pub fn unitarity_residual(&self) -> f64 {
        let udag_u = self.dagger().matrix.dot(&self.matrix);
        let k = self.dim() / 2;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((udag_u[[i, j]] - C64::new(want, 0.0)).norm());
            }
        }
        worst
    }
}

impl StateVector {
    /// Wrap amplitudes, normalizing to unit norm.
    pub fn normalized(mut amplitudes: CVec, cutoff: usize) -> Self {
        assert_eq!(amplitudes.len(), cutoff + 1);
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "cannot normalize a zero vector");
        amplitudes.mapv_inplace(|z| z / C64::new(norm, 0.0));
        StateVector { amplitudes, cutoff }
    }

    pub fn basis_state(n: usize, cutoff: usize) -> Self {
        assert!(n <= cutoff);
        let mut v = CVec::zeros(cutoff + 1);
        v[n] = C64::new(1.0, 0.0);
        StateVector { amplitudes: v, cutoff }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <self|other>
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.cutoff, other.cutoff);
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// Population above index `n`.
    pub fn tail_population(&self, n: usize) -> f64 {
        self.amplitudes
            .iter()
            .skip(n + 1)
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// <a^dag a>
    pub fn mean_photons(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.norm_sqr())
            .sum()
    }

    /// Re-embed into a (possibly larger) cutoff.
    pub fn resized(&self, cutoff: usize) -> StateVector {
        let mut v = CVec::zeros(cutoff + 1);
        for n in 0..=self.cutoff.min(cutoff) {
            v[n] = self.amplitudes[n];
        }
        StateVector { amplitudes: v, cutoff }
    }
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let n = psi.cutoff + 1;
        let mut m = CMat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = psi.amplitudes[i] * psi.amplitudes[j].conj();
            }
        }
        DensityMatrix { matrix: m, cutoff: psi.cutoff }
    }

    pub fn trace(&self) -> C64 {
        (0..=self.cutoff).map(|i| self.matrix[[i, i]]).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=self.cutoff {
            for j in i..=self.cutoff {
                worst = worst.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue (positivity check).
    pub fn min_eigenvalue(&self) -> f64 {
        let (w, _) = crate::linalg::eigh(&self.matrix);
        w[0]
    }
}

/// <u|v> with the physics convention (conjugate-linear in the first slot).
pub fn inner(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Annihilation operator: entry (n-1, n) = sqrt(n).
pub fn destroy(cutoff: usize) -> Result<FockOperator> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("destroy: cutoff must be >= 1".into()));
    }
    let mut m = CMat::zeros((cutoff + 1, cutoff + 1));
    for n in 1..=cutoff {
        m[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(FockOperator::new(m, cutoff))
}

/// Creation operator a^dag.
pub fn create(cutoff: usize) -> Result<FockOperator> {
    Ok(destroy(cutoff)?.dagger())
}

/// Number operator a^dag a (diagonal).
pub fn number(cutoff: usize) -> FockOperator {
    let mut m = CMat::zeros((cutoff + 1, cutoff + 1));
    for n in 0..=cutoff {
        m[[n, n]] = C64::new(n as f64, 0.0);
    }
    FockOperator::new(m, cutoff)
}

/// Photon-number parity, diagonal entries (-1)^n.
pub fn parity(cutoff: usize) -> FockOperator {
    let mut m = CMat::zeros((cutoff + 1, cutoff + 1));
    for n in 0..=cutoff {
        m[[n, n]] = C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    FockOperator::new(m, cutoff)
}

/// Displacement D(alpha) = exp(alpha a^dag - alpha* a).
pub fn displacement(alpha: C64, cutoff: usize) -> Result<FockOperator> {
    let aa = alpha.norm();
    if (aa * aa + 8.0 * aa) > cutoff as f64 {
        return Err(Error::CutoffInsufficient {
            cutoff,
            reason: format!("displacement amplitude |alpha| = {aa:.3} needs a larger basis"),
        });
    }
    let a = destroy(cutoff.max(1))?;
    let gen = a.dagger().matrix.mapv(|z| z * alpha) - a.matrix.mapv(|z| z * alpha.conj());
    Ok(FockOperator::new(matrix_exp(&gen), cutoff))
}

/// Squeeze S(xi) = exp((xi* a^2 - xi a^dag^2)/2).
pub fn squeeze(xi: C64, cutoff: usize) -> Result<FockOperator> {
    let r = xi.norm();
    if r > 2.0 {
        return Err(Error::UnsupportedRegime(format!(
            "squeeze: |xi| = {r:.3} > 2 not supported"
        )));
    }
    let need = (20.0 * (2.0 * r).exp()).ceil() as usize;
    if r > 0.0 && cutoff < need {
        return Err(Error::CutoffInsufficient {
            cutoff,
            reason: format!("squeeze |xi| = {r:.3} needs cutoff >= {need}"),
        });
    }
    let a = destroy(cutoff.max(1))?;
    let a2 = a.matrix.dot(&a.matrix);
    let ad2 = a.dagger().matrix.dot(&a.dagger().matrix);
    let gen = a2.mapv(|z| z * (0.5 * xi.conj())) - ad2.mapv(|z| z * (0.5 * xi));
    Ok(FockOperator::new(matrix_exp(&gen), cutoff))
}

/// Squeezed-frame (Bogoliubov) mode b = cosh(r) a + sinh(r) e^{i theta} a^dag.
pub fn bogoliubov_mode(xi: C64, cutoff: usize) -> Result<FockOperator> {
    let r = xi.norm();
    let phase = if r > 0.0 { xi / C64::new(r, 0.0) } else { C64::new(1.0, 0.0) };
    let a = destroy(cutoff)?;
    let m = a.matrix.mapv(|z| z * C64::new(r.cosh(), 0.0))
        + a.dagger().matrix.mapv(|z| z * (C64::new(r.sinh(), 0.0) * phase));
    Ok(FockOperator::new(m, cutoff))
}

/// Apply a to the amplitude vector: (a psi)_n = sqrt(n+1) psi_{n+1}.
pub fn apply_destroy(psi: &CVec) -> CVec {
    let n = psi.len();
    let mut out = CVec::zeros(n);
    for k in 1..n {
        out[k - 1] = C64::new((k as f64).sqrt(), 0.0) * psi[k];
    }
    out
}

/// Apply a^dag; the amplitude raised past the cutoff is dropped.
pub fn apply_create(psi: &CVec) -> CVec {
    let n = psi.len();
    let mut out = CVec::zeros(n);
    for k in 0..n - 1 {
        out[k + 1] = C64::new(((k + 1) as f64).sqrt(), 0.0) * psi[k];
    }
    out
}

/// Apply the number operator.
pub fn apply_number(psi: &CVec) -> CVec {
    CVec::from_iter(
        psi.iter()
            .enumerate()
            .map(|(n, z)| C64::new(n as f64, 0.0) * z),
    )
}

/// Smallest supported squeezing-tail decay rate used by `choose_cutoff`.
/// Population of a squeezed state falls off like tanh(r)^n.
fn squeeze_tail_quantile(r: f64) -> f64 {
    if r < 1e-3 {
        return 0.0;
    }
    let rate = -r.tanh().ln(); // population e-folding per photon
    // population < 1e-12 (plus a slowly-varying prefactor margin)
    30.0 / rate
}

/// Pick a basis size for squeezed-cat work at displacement `alpha` and
/// squeezing `xi`.
///
/// Returns an even bound N such that the codeword population above N/2 is
/// below 1e-12. The bound is a monotone closed form in (|alpha|, |xi|), not
/// the exact smallest such N; the doubling convention (re-run with 2N and
/// compare) is the convergence contract checked by the tests.
pub fn choose_cutoff(alpha: C64, xi: C64, safety: f64) -> Result<usize> {
    if safety < 1.0 {
        return Err(Error::InvalidArgument("choose_cutoff: safety must be >= 1".into()));
    }
    let r = xi.norm();
    if r > 2.0 {
        return Err(Error::UnsupportedRegime(format!(
            "choose_cutoff: |xi| = {r:.3} > 2 unsupported at default safety"
        )));
    }
    let g2 = (alpha.norm() * r.exp()).powi(2);
    let half = g2 + 10.0 * g2.sqrt() + squeeze_tail_quantile(r) + 8.0;
    let n = (2.0 * half * safety).ceil() as usize;
    Ok(((n + 7) / 8 * 8).max(16))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn destroy_entries() {
        let a = destroy(2).unwrap();
        assert!((a.matrix[[0, 1]].re - 1.0).abs() < 1e-15);
        assert!((a.matrix[[1, 2]].re - 2.0f64.sqrt()).abs() < 1e-15);
        assert!(destroy(0).is_err());
        // a |0> = 0
        let vac = StateVector::basis_state(0, 2);
        assert!(a.apply(&vac).norm() < 1e-15);
    }

    #[test]
    fn displacement_basics() {
        let d0 = displacement(C64::new(0.0, 0.0), 16).unwrap();
        assert!(max_abs(&(&d0.matrix - &CMat::eye(17))) < 1e-13);

        let d = displacement(C64::new(1.0, 0.0), 48).unwrap();
        // |<0|D(1)|0>| = e^{-1/2}
        assert!((d.matrix[[0, 0]].norm() - (-0.5f64).exp()).abs() < 1e-12);
        assert!(d.unitarity_residual() < 1e-10);

        // D(a) D(-a) = 1 on the lower half-block
        let dm = displacement(C64::new(-1.0, 0.0), 48).unwrap();
        let prod = d.matrix.dot(&dm.matrix);
        let k = 24;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[[i, j]] - C64::new(want, 0.0)).norm());
            }
        }
        assert!(worst < 1e-10);

        assert!(displacement(C64::new(9.0, 0.0), 32).is_err());
    }

    #[test]
    fn squeeze_basics() {
        let s0 = squeeze(C64::new(0.0, 0.0), 16).unwrap();
        assert!(max_abs(&(&s0.matrix - &CMat::eye(17))) < 1e-13);

        let s = squeeze(C64::new(1.0, 0.0), 160).unwrap();
        // |<0|S(1)|0>|^2 = 1/cosh(1)
        let p0 = s.matrix[[0, 0]].norm_sqr();
        assert!((p0 - 1.0 / 1.0f64.cosh()).abs() < 1e-12);
        assert!(s.unitarity_residual() < 1e-10);

        // <n> on S(r)|0> = sinh^2(r)
        let s05 = squeeze(C64::new(0.5, 0.0), 56).unwrap();
        let vac = StateVector::basis_state(0, 56);
        let sv = s05.apply(&vac);
        assert!((sv.mean_photons() - 0.5f64.sinh().powi(2)).abs() < 1e-10);

        assert!(squeeze(C64::new(1.0, 0.0), 32).is_err());
        assert!(matches!(
            squeeze(C64::new(2.5, 0.0), 4096),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn bogoliubov_matches_conjugated_destroy() {
        let xi = C64::new(0.3, 0.0);
        let n = 800;
        let b = bogoliubov_mode(xi, n).unwrap();
        assert!((b.matrix[[0, 1]].re - 0.3f64.cosh()).abs() < 1e-12);

        // b = S a S^dag on the lower half-block
        let s = squeeze(xi, n).unwrap();
        let a = destroy(n).unwrap();
        let sas = s.matrix.dot(&a.matrix).dot(&s.dagger().matrix);
        let k = n / 2;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((sas[[i, j]] - b.matrix[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-8, "S a S^dag residual {worst:.2e}");

        // [b, b^dag] = 1 on the lower half-block
        let comm = b.matrix.dot(&b.dagger().matrix) - b.dagger().matrix.dot(&b.matrix);
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((comm[[i, j]] - C64::new(want, 0.0)).norm());
            }
        }
        assert!(worst < 1e-8);

        // xi = 0 degenerates to a exactly
        let b0 = bogoliubov_mode(C64::new(0.0, 0.0), 8).unwrap();
        assert!(max_abs(&(&b0.matrix - &destroy(8).unwrap().matrix)) < 1e-15);
    }

    #[test]
    fn parity_properties() {
        let p = parity(7);
        assert!((p.matrix[[0, 0]].re - 1.0).abs() < 1e-15);
        assert!((p.matrix[[3, 3]].re + 1.0).abs() < 1e-15);
        let p2 = p.matrix.dot(&p.matrix);
        assert!(max_abs(&(&p2 - &CMat::eye(8))) < 1e-15);
        // Pi a + a Pi = 0 exactly in the truncated matrices
        let a = destroy(7).unwrap();
        let anti = p.matrix.dot(&a.matrix) + a.matrix.dot(&p.matrix);
        assert_eq!(max_abs(&anti), 0.0);
    }

    #[test]
    fn choose_cutoff_contract() {
        // floor at vacuum
        assert_eq!(choose_cutoff(C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1.0).unwrap(), 16);
        // coherent alpha = 1: Poisson tail above N is < 1e-12 from N = 14 on
        let n = choose_cutoff(C64::new(1.0, 0.0), C64::new(0.0, 0.0), 1.0).unwrap();
        assert!(n >= 14);
        let mut tail = 1.0f64;
        let mut term = (-1.0f64).exp();
        for k in 0..=n {
            tail -= term;
            term /= (k + 1) as f64;
        }
        assert!(tail.abs() < 1e-12, "poisson tail {tail:.2e} at N={n}");
        // unsupported regime
        assert!(choose_cutoff(C64::new(0.1, 0.0), C64::new(2.4, 0.0), 1.0).is_err());
    }

    #[test]
    fn choose_cutoff_monotone() {
        let mut prev = 0;
        for i in 0..12 {
            let al = 0.2 * i as f64;
            let n = choose_cutoff(C64::new(al, 0.0), C64::new(0.8, 0.0), 1.0).unwrap();
            assert!(n >= prev, "not monotone in alpha at {al}");
            prev = n;
        }
        let mut prev = 0;
        for i in 0..10 {
            let xi = 0.2 * i as f64;
            let n = choose_cutoff(C64::new(0.6, 0.0), C64::new(xi, 0.0), 1.0).unwrap();
            assert!(n >= prev, "not monotone in xi at {xi}");
            prev = n;
        }
    }
}
