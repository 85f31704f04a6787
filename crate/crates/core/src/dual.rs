//! The two bipartite readings of an EPR-form pair of identical particles.
//!
//! Labelling the particles by their value of `A` leaves a state entangled in
//! `B`; labelling them by `B` leaves one entangled in `A`. The second reading
//! requires reordering creation operators and so carries the exchange sign.
//! For two different species only the first reading exists.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DualismError, Result, Species, SpeciesConflict};
use crate::fock::{order_by_label, Mode, Statistics, TwoParticleState, Variable, VariableSpec, EPR_TERM_ALPHA, EPR_TERM_BETA};
use crate::TOL;

/// A two-term bipartite state `c1 |1>|2> + c2 |2>|1>` where slot `k` is the
/// particle whose `label_variable` has eigenvalue `k`, and `|v>` is the value
/// of the entangled variable carried by that particle.
///
/// As a two-qubit vector, term 1 is `|01>` and term 2 is `|10>`, with qubit
/// value 0 standing for the first eigenvalue of the entangled variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledBipartiteState {
    label_variable: Variable,
    c1: Complex64,
    c2: Complex64,
}

impl LabeledBipartiteState {
    /// Requires `|c1|^2 + |c2|^2 = 1` within 1e-12.
    pub fn new(label_variable: Variable, c1: Complex64, c2: Complex64) -> Result<Self> {
        let n = c1.norm_sqr() + c2.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > TOL {
            return Err(DualismError::InvalidParameter(format!(
                "bipartite amplitudes must be normalized, |c1|^2+|c2|^2 = {n}"
            )));
        }
        Ok(LabeledBipartiteState { label_variable, c1, c2 })
    }

    pub fn normalized(label_variable: Variable, c1: Complex64, c2: Complex64) -> Result<Self> {
        let n = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        if n == 0.0 {
            return Err(DualismError::ZeroState);
        }
        if !n.is_finite() {
            return Err(DualismError::InvalidParameter("non-finite amplitude".into()));
        }
        Ok(LabeledBipartiteState { label_variable, c1: c1 / n, c2: c2 / n })
    }

    pub fn label_variable(&self) -> Variable {
        self.label_variable
    }

    pub fn entangled_variable(&self) -> Variable {
        self.label_variable.other()
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    pub fn c2(&self) -> Complex64 {
        self.c2
    }

    /// Amplitudes in the basis `|00>, |01>, |10>, |11>` (slot 1 most significant).
    pub fn two_qubit_vector(&self) -> [Complex64; 4] {
        let zero = Complex64::new(0.0, 0.0);
        [zero, self.c1, self.c2, zero]
    }

    /// `2 |c1 c2|`.
    pub fn concurrence(&self) -> f64 {
        2.0 * (self.c1 * self.c2).norm()
    }

    /// Same state with the two slots exchanged.
    ///
    /// Reordering identical particles costs the exchange sign; it is a global
    /// phase and kept only so the amplitudes stay consistent with operator order.
    pub fn swap_parties(&self, stats: Statistics) -> LabeledBipartiteState {
        let s = stats.exchange_sign();
        LabeledBipartiteState { label_variable: self.label_variable, c1: self.c2 * s, c2: self.c1 * s }
    }

    /// Rebuilds the second-quantized state this reading came from.
    pub fn to_two_particle(&self, spec: VariableSpec, stats: Statistics) -> Result<TwoParticleState> {
        let label = self.label_variable;
        let term = |q1: u8, q2: u8, amp| {
            (Mode::from_label(label, 1, q1 + 1), Mode::from_label(label, 2, q2 + 1), amp)
        };
        TwoParticleState::from_terms(spec, stats, &[term(0, 1, self.c1), term(1, 0, self.c2)])
    }

    /// Human-readable ket, e.g. `0.7071|H>_{-k}|V>_{k} + 0.7071|V>_{-k}|H>_{k}`.
    pub fn render(&self, spec: &VariableSpec) -> String {
        let label = self.label_variable;
        let value = self.entangled_variable();
        let mut out = String::new();
        for (k, (amp, (v1, v2))) in [(self.c1, (1, 2)), (self.c2, (2, 1))].into_iter().enumerate() {
            if k > 0 {
                out.push_str(" + ");
            }
            let _ = write!(
                out,
                "({:.6}{:+.6}i)|{}>_{{{}}}|{}>_{{{}}}",
                amp.re,
                amp.im,
                spec.label(value, v1),
                spec.label(label, 1),
                spec.label(value, v2),
                spec.label(label, 2)
            );
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct Cx {
    re: f64,
    im: f64,
}

impl From<Complex64> for Cx {
    fn from(c: Complex64) -> Self {
        Cx { re: c.re, im: c.im }
    }
}

#[derive(Serialize, Deserialize)]
struct BipartiteDoc {
    label_variable: Variable,
    entangled_variable: Variable,
    c1: Cx,
    c2: Cx,
}

impl Serialize for LabeledBipartiteState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        BipartiteDoc {
            label_variable: self.label_variable,
            entangled_variable: self.entangled_variable(),
            c1: self.c1.into(),
            c2: self.c2.into(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabeledBipartiteState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = BipartiteDoc::deserialize(deserializer)?;
        if doc.label_variable == doc.entangled_variable {
            return Err(serde::de::Error::custom("label and entangled variable must differ"));
        }
        LabeledBipartiteState::new(
            doc.label_variable,
            Complex64::new(doc.c1.re, doc.c1.im),
            Complex64::new(doc.c2.re, doc.c2.im),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Reads `s` with `label_var` as the which-particle label.
pub fn relabel(s: &TwoParticleState, label_var: Variable) -> Result<LabeledBipartiteState> {
    let (alpha, beta) = s.epr_amplitudes()?;
    let other = label_var.other();
    let mut v = [Complex64::new(0.0, 0.0); 4];
    for ((m1, m2), amp) in [(EPR_TERM_ALPHA, alpha), (EPR_TERM_BETA, beta)] {
        let (first, second, sign) = order_by_label(m1, m2, s.statistics(), label_var)?;
        debug_assert_eq!((first.index_of(label_var), second.index_of(label_var)), (1, 2));
        let q1 = usize::from(first.index_of(other) - 1);
        let q2 = usize::from(second.index_of(other) - 1);
        v[2 * q1 + q2] += amp * sign;
    }
    debug_assert!(v[0].norm() == 0.0 && v[3].norm() == 0.0);
    LabeledBipartiteState::normalized(label_var, v[1], v[2])
}

/// Particles labelled by `A`, entangled in `B`: returns `(alpha, beta)`.
pub fn relabel_by_a(s: &TwoParticleState) -> Result<LabeledBipartiteState> {
    relabel(s, Variable::A)
}

/// Particles labelled by `B`, entangled in `A`: returns `(alpha, ±beta)`.
pub fn relabel_by_b(s: &TwoParticleState) -> Result<LabeledBipartiteState> {
    relabel(s, Variable::B)
}

/// Relabels `s` by `via` and rebuilds the second-quantized state.
pub fn round_trip(s: &TwoParticleState, via: Variable) -> Result<TwoParticleState> {
    relabel(s, via)?.to_two_particle(s.spec().clone(), s.statistics())
}

/// Two particles of different species: amplitudes over ordered pairs
/// `(c-species mode, d-species mode)`, index `4 * c.ordinal() + d.ordinal()`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSpeciesState {
    amplitudes: [Complex64; 16],
}

impl TwoSpeciesState {
    pub fn from_amplitudes(mut amplitudes: [Complex64; 16]) -> Result<Self> {
        let n = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(DualismError::ZeroState);
        }
        for a in &mut amplitudes {
            *a /= n;
        }
        Ok(TwoSpeciesState { amplitudes })
    }

    /// `alpha c†_{A1,B1} d†_{A2,B2} + beta c†_{A1,B2} d†_{A2,B1}`, normalized.
    pub fn epr_analogue(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 16];
        amplitudes[Self::index(EPR_TERM_ALPHA.0, EPR_TERM_ALPHA.1)] = alpha;
        amplitudes[Self::index(EPR_TERM_BETA.0, EPR_TERM_BETA.1)] = beta;
        Self::from_amplitudes(amplitudes)
    }

    fn index(c_mode: Mode, d_mode: Mode) -> usize {
        4 * c_mode.ordinal() + d_mode.ordinal()
    }

    pub fn amplitude(&self, c_mode: Mode, d_mode: Mode) -> Complex64 {
        self.amplitudes[Self::index(c_mode, d_mode)]
    }

    /// Labelled by `A` the state is an ordinary bipartite state, species
    /// fixed per slot (slot A1 holds `c`, slot A2 holds `d`).
    pub fn relabel_by_a(&self) -> Result<LabeledBipartiteState> {
        let (alpha, beta) = self.epr_amplitudes()?;
        LabeledBipartiteState::normalized(Variable::A, alpha, beta)
    }

    fn epr_amplitudes(&self) -> Result<(Complex64, Complex64)> {
        let ia = Self::index(EPR_TERM_ALPHA.0, EPR_TERM_ALPHA.1);
        let ib = Self::index(EPR_TERM_BETA.0, EPR_TERM_BETA.1);
        for (i, amp) in self.amplitudes.iter().enumerate() {
            if i != ia && i != ib && amp.norm() > TOL {
                return Err(DualismError::NotEprForm(format!(
                    "amplitude {amp} on (c: {}, d: {})",
                    Mode::ALL[i / 4],
                    Mode::ALL[i % 4]
                )));
            }
        }
        Ok((self.amplitudes[ia], self.amplitudes[ib]))
    }
}

/// Attempts the `B`-labelled reading of a two-species state.
///
/// Fails with [`DualismError::SpeciesSuperpositionForbidden`] whenever both
/// terms are present; succeeds only for the two product edge cases.
pub fn attempt_relabel_by_b_nip(s: &TwoSpeciesState) -> Result<LabeledBipartiteState> {
    let (alpha, beta) = s.epr_amplitudes()?;
    // For each present term: which species sits in slot B1, and at which mode.
    let mut occupant: Option<(Species, Mode)> = None;
    let mut v = [Complex64::new(0.0, 0.0); 4];
    for ((c_mode, d_mode), amp) in [(EPR_TERM_ALPHA, alpha), (EPR_TERM_BETA, beta)] {
        if amp.norm() <= TOL {
            continue;
        }
        let (slot1, slot2) = if c_mode.b_index() == 1 {
            ((Species::C, c_mode), d_mode)
        } else {
            ((Species::D, d_mode), c_mode)
        };
        match occupant {
            Some((species, mode)) if species != slot1.0 => {
                return Err(DualismError::SpeciesSuperpositionForbidden(SpeciesConflict {
                    slot_b_index: 1,
                    term1_species: species,
                    term2_species: slot1.0,
                    term1_mode: mode,
                    term2_mode: slot1.1,
                }));
            }
            _ => occupant = Some(slot1),
        }
        let q1 = usize::from(slot1.1.a_index() - 1);
        let q2 = usize::from(slot2.a_index() - 1);
        v[2 * q1 + q2] += amp;
    }
    LabeledBipartiteState::normalized(Variable::B, v[1], v[2])
}
