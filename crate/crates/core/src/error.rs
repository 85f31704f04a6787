use serde::Serialize;
use thiserror::Error;

use crate::fock::Mode;

/// The particle species occupying a tensor slot of a two-species state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    C,
    D,
}

/// Why a two-species state has no label-swapped form.
///
/// The slot is the B-value used as the which-particle label; the two terms
/// place different species there, so a single slot would have to hold a
/// superposition of species.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeciesConflict {
    pub slot_b_index: u8,
    pub term1_species: Species,
    pub term2_species: Species,
    pub term1_mode: Mode,
    pub term2_mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DualismError {
    #[error("both amplitudes are zero; the state cannot be normalized")]
    ZeroState,

    #[error("two fermions cannot occupy mode {0}")]
    ExclusionViolation(Mode),

    #[error("states have different exchange statistics")]
    StatisticsMismatch,

    #[error("state has support outside the two-term EPR configurations ({0})")]
    NotEprForm(String),

    #[error(
        "label slot B{} would hold species {:?} in one term and {:?} in the other; \
         superposing species in one slot is not allowed",
        .0.slot_b_index, .0.term1_species, .0.term2_species
    )]
    SpeciesSuperpositionForbidden(SpeciesConflict),

    #[error("setting `{0}` is not in the x-y plane (theta must be pi/2)")]
    SettingsNotInPlane(&'static str),

    #[error("settings pair {pair} has {available} usable coincidences; at least 2 required")]
    InsufficientShots { pair: usize, available: u64 },

    #[error("Bell expectation of the A-labeled form vanishes; the sign ratio is undefined")]
    DegenerateExpectation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl DualismError {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            DualismError::ZeroState => "ZeroState",
            DualismError::ExclusionViolation(_) => "ExclusionViolation",
            DualismError::StatisticsMismatch => "StatisticsMismatch",
            DualismError::NotEprForm(_) => "NotEprForm",
            DualismError::SpeciesSuperpositionForbidden(_) => "SpeciesSuperpositionForbidden",
            DualismError::SettingsNotInPlane(_) => "SettingsNotInPlane",
            DualismError::InsufficientShots { .. } => "InsufficientShots",
            DualismError::DegenerateExpectation => "DegenerateExpectation",
            DualismError::InvalidParameter(_) => "InvalidParameter",
        }
    }
}

pub type Result<T> = std::result::Result<T, DualismError>;
