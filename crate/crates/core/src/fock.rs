//! Two-particle states of identical bosons or fermions over the four modes
//! `|A_i, B_j>`, stored in the two-particle sector of Fock space.
//!
//! Configurations are unordered pairs of modes kept in canonical order
//! (lexicographic on `(a_index, b_index)`); every exchange sign in the crate
//! is measured relative to that order.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DualismError, Result};
use crate::TOL;

/// One of the two dynamical variables of a [`VariableSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variable {
    A,
    B,
}

impl Variable {
    pub fn other(self) -> Variable {
        match self {
            Variable::A => Variable::B,
            Variable::B => Variable::A,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::A => f.write_str("A"),
            Variable::B => f.write_str("B"),
        }
    }
}

/// Names and eigenvalue labels for the labelling variable and the
/// entangled variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableSpec {
    pub name_a: String,
    pub name_b: String,
    pub eigenlabels_a: [String; 2],
    pub eigenlabels_b: [String; 2],
}

impl VariableSpec {
    pub fn new(
        name_a: impl Into<String>,
        name_b: impl Into<String>,
        eigenlabels_a: [&str; 2],
        eigenlabels_b: [&str; 2],
    ) -> Result<Self> {
        let spec = VariableSpec {
            name_a: name_a.into(),
            name_b: name_b.into(),
            eigenlabels_a: eigenlabels_a.map(String::from),
            eigenlabels_b: eigenlabels_b.map(String::from),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.name_a == self.name_b {
            return Err(DualismError::InvalidParameter(format!(
                "variable names must differ (both are `{}`)",
                self.name_a
            )));
        }
        for (name, labels) in [(&self.name_a, &self.eigenlabels_a), (&self.name_b, &self.eigenlabels_b)] {
            if labels[0] == labels[1] {
                return Err(DualismError::InvalidParameter(format!(
                    "eigenlabels of `{name}` must be distinct"
                )));
            }
        }
        Ok(())
    }

    /// Photon pair emitted along `-k`/`k` and entangled in polarization.
    pub fn photonic() -> Self {
        VariableSpec::new("momentum", "polarization", ["-k", "k"], ["H", "V"])
            .expect("static labels are valid")
    }

    /// Two trapped particles whose internal spin is entangled.
    pub fn trapped_spins() -> Self {
        VariableSpec::new("trap", "spin", ["psi1", "psi2"], ["up", "down"])
            .expect("static labels are valid")
    }

    pub fn name(&self, var: Variable) -> &str {
        match var {
            Variable::A => &self.name_a,
            Variable::B => &self.name_b,
        }
    }

    /// Label of eigenvalue `index` (1 or 2) of `var`.
    pub fn label(&self, var: Variable, index: u8) -> &str {
        let labels = match var {
            Variable::A => &self.eigenlabels_a,
            Variable::B => &self.eigenlabels_b,
        };
        &labels[usize::from(index - 1)]
    }
}

impl Default for VariableSpec {
    fn default() -> Self {
        VariableSpec::new("A", "B", ["A1", "A2"], ["B1", "B2"]).expect("static labels are valid")
    }
}

impl<'de> Deserialize<'de> for VariableSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            name_a: String,
            name_b: String,
            eigenlabels_a: [String; 2],
            eigenlabels_b: [String; 2],
        }
        let raw = Raw::deserialize(deserializer)?;
        let spec = VariableSpec {
            name_a: raw.name_a,
            name_b: raw.name_b,
            eigenlabels_a: raw.eigenlabels_a,
            eigenlabels_b: raw.eigenlabels_b,
        };
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    /// Sign picked up when two creation operators are exchanged.
    pub fn exchange_sign(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Boson => f.write_str("boson"),
            Statistics::Fermion => f.write_str("fermion"),
        }
    }
}

/// Single-particle mode `|A_a, B_b>`; both indices are 1 or 2.
///
/// The derived ordering is lexicographic on `(a_index, b_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    a_index: u8,
    b_index: u8,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::new(1, 1), Mode::new(1, 2), Mode::new(2, 1), Mode::new(2, 2)];

    /// # Panics
    /// If either index is not 1 or 2.
    pub const fn new(a_index: u8, b_index: u8) -> Self {
        assert!(a_index == 1 || a_index == 2, "a_index must be 1 or 2");
        assert!(b_index == 1 || b_index == 2, "b_index must be 1 or 2");
        Mode { a_index, b_index }
    }

    pub fn try_new(a_index: u8, b_index: u8) -> Result<Self> {
        if matches!(a_index, 1 | 2) && matches!(b_index, 1 | 2) {
            Ok(Mode { a_index, b_index })
        } else {
            Err(DualismError::InvalidParameter(format!(
                "mode indices must be 1 or 2, got ({a_index},{b_index})"
            )))
        }
    }

    pub fn a_index(self) -> u8 {
        self.a_index
    }

    pub fn b_index(self) -> u8 {
        self.b_index
    }

    pub fn index_of(self, var: Variable) -> u8 {
        match var {
            Variable::A => self.a_index,
            Variable::B => self.b_index,
        }
    }

    /// Position in [`Mode::ALL`].
    pub fn ordinal(self) -> usize {
        usize::from((self.a_index - 1) * 2 + (self.b_index - 1))
    }

    /// Mode holding eigenvalue `label` of `label_var` and `value` of the other variable.
    pub(crate) fn from_label(label_var: Variable, label: u8, value: u8) -> Mode {
        match label_var {
            Variable::A => Mode::new(label, value),
            Variable::B => Mode::new(value, label),
        }
    }

    /// Sort key when the particles are ordered by `label_var` first.
    fn key(self, label_var: Variable) -> (u8, u8) {
        match label_var {
            Variable::A => (self.a_index, self.b_index),
            Variable::B => (self.b_index, self.a_index),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a_index, self.b_index)
    }
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a_index, self.b_index].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Mode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[u8; 2]>::deserialize(deserializer)?;
        Mode::try_new(a, b).map_err(serde::de::Error::custom)
    }
}

/// Unordered pair of occupied modes, stored in canonical (nondecreasing) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    first: Mode,
    second: Mode,
}

impl Configuration {
    pub fn modes(self) -> (Mode, Mode) {
        (self.first, self.second)
    }

    pub fn is_doubly_occupied(self) -> bool {
        self.first == self.second
    }

    /// Canonical two-particle basis: 10 configurations for bosons, 6 for fermions.
    pub fn basis(stats: Statistics) -> Vec<Configuration> {
        let mut out = Vec::with_capacity(10);
        for (i, &first) in Mode::ALL.iter().enumerate() {
            for &second in &Mode::ALL[i..] {
                if stats == Statistics::Fermion && first == second {
                    continue;
                }
                out.push(Configuration { first, second });
            }
        }
        out
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.first, self.second].serialize(serializer)
    }
}

/// Brings `c†_{mode1} c†_{mode2}` into canonical order, returning the
/// configuration and the sign picked up on the way.
pub fn apply_pair_normal_ordered(
    mode1: Mode,
    mode2: Mode,
    stats: Statistics,
) -> Result<(Configuration, f64)> {
    let (first, second, sign) = order_by_label(mode1, mode2, stats, Variable::A)?;
    Ok((Configuration { first, second }, sign))
}

/// Orders a pair of creation operators so the one with the smaller value of
/// `label_var` comes first (ties broken by the other variable).
pub(crate) fn order_by_label(
    mode1: Mode,
    mode2: Mode,
    stats: Statistics,
    label_var: Variable,
) -> Result<(Mode, Mode, f64)> {
    if stats == Statistics::Fermion && mode1 == mode2 {
        return Err(DualismError::ExclusionViolation(mode1));
    }
    if mode1.key(label_var) <= mode2.key(label_var) {
        Ok((mode1, mode2, 1.0))
    } else {
        Ok((mode2, mode1, stats.exchange_sign()))
    }
}

/// Normalized two-particle state with dense amplitudes over the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleState {
    spec: VariableSpec,
    statistics: Statistics,
    amplitudes: Vec<Complex64>,
}

/// The configuration `{(1,1),(2,2)}` carrying `alpha`.
pub const EPR_TERM_ALPHA: (Mode, Mode) = (Mode::new(1, 1), Mode::new(2, 2));
/// The configuration `{(1,2),(2,1)}` carrying `beta`.
pub const EPR_TERM_BETA: (Mode, Mode) = (Mode::new(1, 2), Mode::new(2, 1));

impl TwoParticleState {
    /// Builds a state from products `c†_{m1} c†_{m2}` with amplitudes, reordering
    /// each product canonically (with its sign) and normalizing the result.
    pub fn from_terms(
        spec: VariableSpec,
        statistics: Statistics,
        terms: &[(Mode, Mode, Complex64)],
    ) -> Result<Self> {
        let basis = Configuration::basis(statistics);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        for &(m1, m2, amp) in terms {
            let (config, sign) = apply_pair_normal_ordered(m1, m2, statistics)?;
            let slot = basis.iter().position(|c| *c == config).expect("canonical config is in basis");
            // c†_m c†_m |0> = sqrt(2) |2_m>
            let occupation = if config.is_doubly_occupied() { std::f64::consts::SQRT_2 } else { 1.0 };
            amplitudes[slot] += amp * sign * occupation;
        }
        Self::from_amplitudes(spec, statistics, amplitudes)
    }

    /// Takes amplitudes already in canonical basis order and normalizes them.
    pub fn from_amplitudes(
        spec: VariableSpec,
        statistics: Statistics,
        mut amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let dim = Configuration::basis(statistics).len();
        if amplitudes.len() != dim {
            return Err(DualismError::InvalidParameter(format!(
                "expected {dim} amplitudes for {statistics}s, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(DualismError::InvalidParameter("non-finite amplitude".into()));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(DualismError::ZeroState);
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(TwoParticleState { spec, statistics, amplitudes })
    }

    pub fn spec(&self) -> &VariableSpec {
        &self.spec
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn basis(&self) -> Vec<Configuration> {
        Configuration::basis(self.statistics)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of the configuration `{m1, m2}` (in either order, no sign applied).
    pub fn amplitude(&self, m1: Mode, m2: Mode) -> Complex64 {
        let config = Configuration { first: m1.min(m2), second: m1.max(m2) };
        self.basis()
            .iter()
            .position(|c| *c == config)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Configuration, Complex64)> + '_ {
        self.basis().into_iter().zip(self.amplitudes.iter().copied())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitudes `(alpha, beta)` if the state lives on the two EPR configurations only.
    pub fn epr_amplitudes(&self) -> Result<(Complex64, Complex64)> {
        let alpha_cfg = Configuration { first: EPR_TERM_ALPHA.0, second: EPR_TERM_ALPHA.1 };
        let beta_cfg = Configuration { first: EPR_TERM_BETA.0, second: EPR_TERM_BETA.1 };
        let mut alpha = Complex64::new(0.0, 0.0);
        let mut beta = Complex64::new(0.0, 0.0);
        for (config, amp) in self.iter() {
            if config == alpha_cfg {
                alpha = amp;
            } else if config == beta_cfg {
                beta = amp;
            } else if amp.norm() > TOL {
                return Err(DualismError::NotEprForm(format!(
                    "amplitude {amp} on configuration {{{}, {}}}",
                    config.first, config.second
                )));
            }
        }
        Ok((alpha, beta))
    }
}

/// `alpha c†_{A1,B1} c†_{A2,B2} + beta c†_{A1,B2} c†_{A2,B1}` acting on the vacuum, normalized.
pub fn build_epr_state(
    spec: VariableSpec,
    alpha: Complex64,
    beta: Complex64,
    stats: Statistics,
) -> Result<TwoParticleState> {
    if alpha.norm_sqr() + beta.norm_sqr() == 0.0 {
        return Err(DualismError::ZeroState);
    }
    TwoParticleState::from_terms(
        spec,
        stats,
        &[(EPR_TERM_ALPHA.0, EPR_TERM_ALPHA.1, alpha), (EPR_TERM_BETA.0, EPR_TERM_BETA.1, beta)],
    )
}

/// `<s1|s2>`, conjugate-linear in `s1`.
pub fn inner_product(s1: &TwoParticleState, s2: &TwoParticleState) -> Result<Complex64> {
    if s1.statistics != s2.statistics {
        return Err(DualismError::StatisticsMismatch);
    }
    Ok(s1.amplitudes.iter().zip(&s2.amplitudes).map(|(a, b)| a.conj() * b).sum())
}

/// Amplitudes over ordered pairs of single-particle modes for two
/// pseudo-labelled particles, index `4 * m1.ordinal() + m2.ordinal()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstQuantizedState {
    pub statistics: Statistics,
    pub amplitudes: [Complex64; 16],
}

impl FirstQuantizedState {
    pub fn amplitude(&self, m1: Mode, m2: Mode) -> Complex64 {
        self.amplitudes[4 * m1.ordinal() + m2.ordinal()]
    }

    /// Exchanges the two pseudo-labels.
    pub fn swap_labels(&self) -> FirstQuantizedState {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 16];
        for i in 0..4 {
            for j in 0..4 {
                amplitudes[4 * j + i] = self.amplitudes[4 * i + j];
            }
        }
        FirstQuantizedState { statistics: self.statistics, amplitudes }
    }

    pub fn inner(&self, other: &FirstQuantizedState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest deviation from `swap = ±self`.
    pub fn exchange_defect(&self) -> f64 {
        let sign = self.statistics.exchange_sign();
        self.swap_labels()
            .amplitudes
            .iter()
            .zip(&self.amplitudes)
            .map(|(s, a)| (s - a * sign).norm())
            .fold(0.0, f64::max)
    }
}

/// (Anti)symmetrized first-quantized image of a second-quantized state.
pub fn to_first_quantized(s: &TwoParticleState) -> FirstQuantizedState {
    let sign = s.statistics.exchange_sign();
    let mut amplitudes = [Complex64::new(0.0, 0.0); 16];
    for (config, amp) in s.iter() {
        let (m, n) = config.modes();
        if m == n {
            amplitudes[4 * m.ordinal() + m.ordinal()] += amp;
        } else {
            let w = amp * std::f64::consts::FRAC_1_SQRT_2;
            amplitudes[4 * m.ordinal() + n.ordinal()] += w;
            amplitudes[4 * n.ordinal() + m.ordinal()] += w * sign;
        }
    }
    FirstQuantizedState { statistics: s.statistics, amplitudes }
}

#[derive(Serialize, Deserialize)]
struct AmplitudeEntry {
    modes: [Mode; 2],
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    statistics: Statistics,
    variable_spec: VariableSpec,
    amplitudes: Vec<AmplitudeEntry>,
}

impl Serialize for TwoParticleState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateDoc {
            statistics: self.statistics,
            variable_spec: self.spec.clone(),
            amplitudes: self
                .iter()
                .map(|(c, a)| AmplitudeEntry { modes: [c.first, c.second], re: a.re, im: a.im })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TwoParticleState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = StateDoc::deserialize(deserializer)?;
        let basis = Configuration::basis(doc.statistics);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        for entry in doc.amplitudes {
            let [m1, m2] = entry.modes;
            if m1 == m2 && doc.statistics == Statistics::Fermion {
                return Err(serde::de::Error::custom(DualismError::ExclusionViolation(m1)));
            }
            let config = Configuration { first: m1.min(m2), second: m1.max(m2) };
            let slot = basis.iter().position(|c| *c == config).expect("config is in basis");
            amplitudes[slot] = Complex64::new(entry.re, entry.im);
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > TOL {
            return Err(serde::de::Error::custom(format!("amplitudes are not normalized (sum |a|^2 = {norm_sqr})")));
        }
        Ok(TwoParticleState { spec: doc.variable_spec, statistics: doc.statistics, amplitudes })
    }
}
