//! Exact simulation of entangled identical-particle pairs read in either of
//! their two dual labelings.
//!
//! A pair of identical particles prepared in
//! `(α c†_{A1,B1} c†_{A2,B2} + β c†_{A1,B2} c†_{A2,B1})|0>` can be labelled by
//! `A` (then it is entangled in `B`) or by `B` (then it is entangled in `A`,
//! with the second term picking up the exchange sign). The crate builds such
//! states ([`fock`]), produces both readings ([`dual`]), runs CHSH tests on
//! them ([`bell`]), simulates a photonic routing-and-coincidence experiment
//! ([`optics`]) and models environment-induced loss of the dual coherence
//! ([`decoherence`]).
//!
//! Data-parallel loops run on rayon when the `parallel` feature (default) is
//! enabled; see [`Execution`].

pub mod bell;
pub mod decoherence;
pub mod dual;
pub mod error;
pub mod exec;
pub mod fock;
pub mod optics;
mod optimize;

pub use bell::{BellSettings, ChshResult, PseudoSpinSetting};
pub use dual::{LabeledBipartiteState, TwoSpeciesState};
pub use error::{DualismError, Result};
pub use exec::Execution;
pub use fock::{Mode, Statistics, TwoParticleState, Variable, VariableSpec};

/// Absolute tolerance for amplitude and normalization checks.
pub const TOL: f64 = 1e-12;
