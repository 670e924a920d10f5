//! Exact numerics for M-body entanglement in systems of N indistinguishable
//! fermions on D <= 63 modes.
//!
//! Slater determinants are bitmasks (`u64`); mode `i` occupied means bit `i`
//! set. Amplitudes are stored in the ascending creation-string convention,
//! and every matrix axis over M-mode subsets is ordered by lexicographic
//! subset rank. The crate covers the (M, N-M) coefficient matrix and M-body
//! reduced density matrices, Schmidt decomposition, entropies and
//! majorization, measurement channels and bipartite transfer maps, and
//! closed-form spectra used as oracles in the test suite.

pub mod channels;
pub mod dm;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod oracles;
pub mod states;

pub use channels::{BipartiteState, MeasurementOutcome, OutcomeLabel, TransferMap};
pub use dm::{GammaMatrix, MBodyDM, SchmidtDecomposition};
pub use entanglement::{EntropyFunctional, MajorizationReport, MajorizationVerdict, Spectrum};
pub use error::{Error, Result};
pub use fock::{Mask, NSectorDensityOperator, PureState};
