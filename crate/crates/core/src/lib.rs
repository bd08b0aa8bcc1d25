//! Pauli twirling, generalized Pauli-Lindblad (PL) channels and
//! channel-semigroup Markovianity (CSM).
//!
//! - [`pauli`]: Pauli words, canonical ordering, Walsh-Hadamard transforms.
//! - [`channel`]: channel representations, CPTP checks, twirling.
//! - [`plmodel`]: PL parameters λ, the λ ↔ f bijection, CSM for Pauli channels, fitting.
//! - [`lindblad`]: GKSL generators, propagation, gate frame, general CSM test.
//! - [`scenarios`]: Hadamard and `R_x(ϑ)` examples and the CSM phase diagram.
//! - [`qem`]: noise scaling and quasi-probability sampling.
//! - [`io`]: JSON and CSV formats.
//!
//! Word index convention: qubit 0 is the leftmost label character, and the
//! index of a word is `x | z << n`, so single-qubit order is `I, X, Z, Y`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lindblad;
pub mod pauli;
pub mod plmodel;
pub mod qem;
pub mod random;
pub mod scenarios;
pub mod superop;

pub use error::{Error, Result};

pub use channel::{twirl, Channel, PauliChannel, ReprKind, Representation, Tolerances};
pub use lindblad::{csm_test_general, LindbladGenerator};
pub use pauli::{PauliVector, PauliWord};
pub use plmodel::{classify_pauli, lambda_from_f, CsmVerdict, PLParams, Witness};
pub use qem::{build_plan, mitigation_estimate, Estimate, SamplingPlan};
pub use scenarios::{GridSpec, QubitLambda, Region, SweepResult};
