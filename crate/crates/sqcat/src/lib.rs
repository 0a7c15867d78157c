//! Simulation toolkit for the squeezed-cat bosonic code.
//!
//! A logical qubit is stored in even/odd superpositions of squeezed-displaced
//! oscillator states. The crate builds the codewords and their single-error
//! subspaces, evolves density matrices under the loss + dephasing Lindblad
//! channel, checks Knill-Laflamme conditions against closed-form oracles,
//! finds optimal recovery operations by semidefinite programming, and
//! unravels the stroboscopic recovery protocol into quantum-jump Monte Carlo
//! trajectories.
//!
//! Entry points:
//! - [`fock`]: truncated Fock-space operators and states
//! - [`states`]: coherent / cat / squeezed-cat / GKP constructors, Wigner maps
//! - [`noise`]: the loss+dephasing channel and its leading-order Kraus form
//! - [`subspaces`]: Gram-Schmidt error subspaces and the recovery operator basis
//! - [`kl`]: Knill-Laflamme tensors, closed-form oracles, KL cost function
//! - [`recovery`]: process matrix, recovery SDP, encoding optimization, sweeps
//! - [`trajectory`]: quantum-jump unraveling with periodic recovery
//! - [`cli`]: the command front end used by the `sqcat` binary

pub mod cli;
pub mod dd;
pub mod expm;
pub mod fock;
pub mod kl;
pub mod linalg;
pub mod noise;
pub mod recovery;
pub mod sdp;
pub mod states;
pub mod subspaces;
pub mod trajectory;

use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMat = ndarray::Array2<C64>;
/// Dense complex vector.
pub type CVec = ndarray::Array1<C64>;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cutoff {cutoff} insufficient: {reason}")]
    CutoffInsufficient { cutoff: usize, reason: String },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),
    #[error("grid out of range: {0}")]
    GridOutOfRange(String),
    #[error("sdp solver: {0}")]
    Sdp(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
