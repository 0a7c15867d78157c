//! Code space and single-error subspaces.
//!
//! Applying {1, a, a^dag a, (a^dag a)^2} to the codewords spans an
//! (up to) 8-dimensional modeled subspace. Twice-iterated Gram-Schmidt
//! against the code space and previously accepted vectors yields orthonormal
//! error subspaces; candidates whose residual drops below 1e-8 of their
//! original norm are dropped (at xi = 0 the loss pair collapses into the
//! code space, which is exactly the plain-cat limit). Error subspaces are
//! kept pair-granular: both parity partners survive or the pair is dropped.

use crate::fock::{apply_destroy, apply_number, inner, StateVector};
use crate::states::{squeezed_cat, Parity, SCParams};
use crate::{CVec, C64, Error, Result};

/// Label of a retained error subspace: 1 = loss, 2 = dephasing,
/// 3 = second-order dephasing.
pub type ErrorIndex = usize;

/// One retained error-subspace pair. `plus` descends from the even codeword,
/// `minus` from the odd one; for the loss subspace the parities are flipped
/// relative to the source codeword.
#[derive(Debug, Clone)]
pub struct ErrorPair {
    pub m: ErrorIndex,
    pub plus: StateVector,
    pub minus: StateVector,
}

/// The code space, retained error subspaces, and bookkeeping.
#[derive(Debug, Clone)]
pub struct CodePair {
    pub codewords: [StateVector; 2],
    pub error_basis: Vec<ErrorPair>,
    pub params: SCParams,
    /// (m, parity-slot) entries removed for degeneracy.
    pub dropped_dims: Vec<(ErrorIndex, Parity)>,
}

impl CodePair {
    /// Orthonormal basis of the modeled subspace: codewords first, then the
    /// retained pairs in ascending m, plus before minus.
    pub fn modeled_basis(&self) -> Vec<&StateVector> {
        let mut v = vec![&self.codewords[0], &self.codewords[1]];
        for p in &self.error_basis {
            v.push(&p.plus);
            v.push(&p.minus);
        }
        v
    }

    pub fn modeled_dim(&self) -> usize {
        2 + 2 * self.error_basis.len()
    }

    pub fn cutoff(&self) -> usize {
        self.codewords[0].cutoff
    }

    /// Mean photon number of the maximally mixed code state.
    pub fn mean_photons(&self) -> f64 {
        0.5 * (self.codewords[0].mean_photons() + self.codewords[1].mean_photons())
    }
}

fn project_out(v: &mut CVec, basis: &[CVec]) {
    for b in basis {
        let ov = inner(b, v);
        for k in 0..v.len() {
            let bk = b[k];
            v[k] -= ov * bk;
        }
    }
}

fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Build the code pair and its orthonormalized single-error subspaces.
pub fn build_error_subspaces(params: &SCParams) -> Result<CodePair> {
    if params.alpha.norm() == 0.0 {
        return Err(Error::DegenerateInput(
            "error subspaces need alpha != 0 (odd codeword undefined)".into(),
        ));
    }
    let cp = squeezed_cat(params, Parity::Even)?;
    let cm = squeezed_cat(params, Parity::Odd)?;

    let n2 = |v: &CVec| apply_number(&apply_number(v));
    let generators: [(ErrorIndex, Box<dyn Fn(&CVec) -> CVec>); 3] = [
        (1, Box::new(|v: &CVec| apply_destroy(v))),
        (2, Box::new(|v: &CVec| apply_number(v))),
        (3, Box::new(n2)),
    ];

    let mut accepted: Vec<CVec> = vec![cp.amplitudes.clone(), cm.amplitudes.clone()];
    let mut error_basis = Vec::new();
    let mut dropped = Vec::new();

    for (m, gen) in generators.iter() {
        let mut pair = Vec::with_capacity(2);
        let mut survived = true;
        let mut trial = accepted.clone();
        for (src, parity) in [(&cp, Parity::Even), (&cm, Parity::Odd)] {
            let mut w = gen(&src.amplitudes);
            let norm0 = vec_norm(&w);
            if norm0 == 0.0 {
                survived = false;
                dropped.push((*m, parity));
                break;
            }
            // twice-iterated Gram-Schmidt for numerical stability
            project_out(&mut w, &trial);
            project_out(&mut w, &trial);
            let norm = vec_norm(&w);
            if norm < 1e-8 * norm0 {
                survived = false;
                dropped.push((*m, parity));
                break;
            }
            for k in 0..w.len() {
                w[k] /= C64::new(norm, 0.0);
            }
            trial.push(w.clone());
            pair.push(w);
        }
        if survived {
            accepted = trial;
            error_basis.push(ErrorPair {
                m: *m,
                plus: StateVector { amplitudes: pair[0].clone(), cutoff: params.cutoff },
                minus: StateVector { amplitudes: pair[1].clone(), cutoff: params.cutoff },
            });
        } else {
            // drop the whole pair so the recovery basis keeps its 4-per-m shape
            let seen: Vec<Parity> = dropped.iter().filter(|d| d.0 == *m).map(|d| d.1).collect();
            for p in [Parity::Even, Parity::Odd] {
                if !seen.contains(&p) {
                    dropped.push((*m, p));
                }
            }
        }
    }

    Ok(CodePair {
        codewords: [cp, cm],
        error_basis,
        params: *params,
        dropped_dims: dropped,
    })
}

/// The code pair of the single-rail limit: codewords |0>, |1>, no error
/// subspaces. This is the alpha -> 0 closure of the cat family; the recovery
/// family built on it contains the code projector, which acts as the
/// identity on everything the noise produces from rail states.
pub fn single_rail_code(cutoff: usize) -> CodePair {
    CodePair {
        codewords: [
            StateVector::basis_state(0, cutoff),
            StateVector::basis_state(1, cutoff),
        ],
        error_basis: Vec::new(),
        params: SCParams::real(0.0, 0.0, cutoff),
        dropped_dims: vec![
            (1, Parity::Even),
            (1, Parity::Odd),
            (2, Parity::Even),
            (2, Parity::Odd),
            (3, Parity::Even),
            (3, Parity::Odd),
        ],
    }
}

/// One recovery basis operator B = |C+><w+| + |C-><w-|, stored through the
/// ket forms of the two bras.
#[derive(Debug, Clone)]
pub struct BasisOp {
    pub m: ErrorIndex,
    pub n: usize,
    pub w_plus: CVec,
    pub w_minus: CVec,
}

impl BasisOp {
    /// Tr B = <w+|C+> + <w-|C->.
    pub fn trace(&self, code: &CodePair) -> C64 {
        inner(&self.w_plus, &code.codewords[0].amplitudes)
            + inner(&self.w_minus, &code.codewords[1].amplitudes)
    }

    /// B |psi> expressed as the pair of code-space coefficients
    /// (<w+|psi>, <w-|psi>).
    pub fn project(&self, psi: &CVec) -> (C64, C64) {
        (inner(&self.w_plus, psi), inner(&self.w_minus, psi))
    }
}

/// The recovery operator basis: for each retained subspace m (including the
/// code space itself as m = 0), the four operators
///   P_m^0 = |C+><p+| + |C-><p->,   P_m^1 = |C+><p-| + |C-><p+|,
///   P_m^2 = i|C+><p-| - i|C-><p+|, P_m^3 = |C+><p+| - |C-><p->.
#[derive(Debug, Clone)]
pub struct RecoveryBasis {
    pub ops: Vec<BasisOp>,
}

pub fn recovery_basis(code: &CodePair) -> RecoveryBasis {
    let i = C64::new(0.0, 1.0);
    let mut ops = Vec::with_capacity(4 * (1 + code.error_basis.len()));
    let mut push_quad = |m: ErrorIndex, pp: &CVec, pm: &CVec| {
        ops.push(BasisOp { m, n: 0, w_plus: pp.clone(), w_minus: pm.clone() });
        ops.push(BasisOp { m, n: 1, w_plus: pm.clone(), w_minus: pp.clone() });
        // bra coefficients i and -i become -i and +i on the kets
        ops.push(BasisOp {
            m,
            n: 2,
            w_plus: pm.mapv(|z| z * (-i)),
            w_minus: pp.mapv(|z| z * i),
        });
        ops.push(BasisOp { m, n: 3, w_plus: pp.clone(), w_minus: pm.mapv(|z| -z) });
    };
    push_quad(0, &code.codewords[0].amplitudes, &code.codewords[1].amplitudes);
    for pair in &code.error_basis {
        push_quad(pair.m, &pair.plus.amplitudes, &pair.minus.amplitudes);
    }
    RecoveryBasis { ops }
}
