//! The photonic test of the dual (momentum) entanglement.
//!
//! A polarizing beam splitter sends each photon of a polarization-entangled
//! pair towards Charlie or Diana according to its polarization, so the two
//! receivers share a state entangled in the `±k` momentum. Each receiver
//! measures a pseudo-spin observable on that momentum with a tunable beam
//! splitter and two detectors; coincidences give the CHSH correlators.
//!
//! Sampling uses ChaCha8 (`rand_chacha`), keyed by `seed_from_u64(seed)`.
//! Settings pair `k` in CHSH order `(a,b), (a,b'), (a',b), (a',b')` draws
//! from stream `k`. Each shot consumes one uniform `f64` to pick the outcome
//! cell by inverse CDF over `(++, +-, -+, --)`; with detector efficiency
//! below 1 it then consumes one uniform per detector, Charlie's first.

use nalgebra::{Matrix2, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{chsh_combination, BellSettings, Correlators, PseudoSpinSetting};
use crate::dual::{relabel_by_b, LabeledBipartiteState};
use crate::error::{DualismError, Result};
use crate::exec::Execution;
use crate::fock::TwoParticleState;
use crate::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum YDirection {
    #[serde(rename = "+y")]
    PlusY,
    #[serde(rename = "-y")]
    MinusY,
}

impl YDirection {
    pub fn opposite(self) -> YDirection {
        match self {
            YDirection::PlusY => YDirection::MinusY,
            YDirection::MinusY => YDirection::PlusY,
        }
    }
}

/// Polarization value, `H` being the first eigenvalue of the `B` variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Geometry of the polarizing beam splitters. Charlie sits on `+y`,
/// Diana on `-y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RoutingDoc", try_from = "RoutingDoc")]
pub struct RoutingConvention {
    v_direction: YDirection,
}

impl RoutingConvention {
    /// `V` deflected to `+y` (Charlie), `H` to `-y` (Diana).
    pub fn v_to_charlie() -> Self {
        RoutingConvention { v_direction: YDirection::PlusY }
    }

    /// `H` reaches Charlie, `V` reaches Diana.
    pub fn h_to_charlie() -> Self {
        RoutingConvention { v_direction: YDirection::MinusY }
    }

    pub fn v_direction(&self) -> YDirection {
        self.v_direction
    }

    pub fn h_direction(&self) -> YDirection {
        self.v_direction.opposite()
    }

    pub fn charlie_receives(&self) -> Polarization {
        match self.v_direction {
            YDirection::PlusY => Polarization::V,
            YDirection::MinusY => Polarization::H,
        }
    }
}

impl Default for RoutingConvention {
    fn default() -> Self {
        RoutingConvention::v_to_charlie()
    }
}

#[derive(Serialize, Deserialize)]
struct RoutingDoc {
    v_direction: YDirection,
    h_direction: YDirection,
    charlie_receives: Polarization,
}

impl From<RoutingConvention> for RoutingDoc {
    fn from(r: RoutingConvention) -> Self {
        RoutingDoc { v_direction: r.v_direction, h_direction: r.h_direction(), charlie_receives: r.charlie_receives() }
    }
}

impl TryFrom<RoutingDoc> for RoutingConvention {
    type Error = DualismError;

    fn try_from(doc: RoutingDoc) -> Result<Self> {
        let r = RoutingConvention { v_direction: doc.v_direction };
        if doc.h_direction == doc.v_direction || doc.charlie_receives != r.charlie_receives() {
            return Err(DualismError::InvalidParameter("inconsistent routing convention".into()));
        }
        Ok(r)
    }
}

/// The two-party momentum state after the polarizing beam splitters.
/// Slot 1 of `state` is Charlie's photon, slot 2 Diana's.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutedPair {
    pub convention: RoutingConvention,
    pub charlie_label: String,
    pub diana_label: String,
    pub state: LabeledBipartiteState,
    /// Probability that both particles end up with the same receiver.
    pub same_party_probability: f64,
}

/// Weight on configurations whose two particles share a `B` value and would
/// therefore leave the beam splitter towards the same receiver.
pub fn same_party_probability(s: &TwoParticleState) -> f64 {
    s.iter()
        .filter(|(cfg, _)| {
            let (m1, m2) = cfg.modes();
            m1.b_index() == m2.b_index()
        })
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

pub fn route_through_pbs(s: &TwoParticleState, conv: RoutingConvention) -> Result<RoutedPair> {
    let dual = relabel_by_b(s)?;
    let p_same = same_party_probability(s);
    if p_same > TOL {
        return Err(DualismError::NotEprForm(format!("both particles reach one party with probability {p_same}")));
    }
    let spec = s.spec();
    let (h, v) = (spec.eigenlabels_b[0].clone(), spec.eigenlabels_b[1].clone());
    let (state, charlie_label, diana_label) = match conv.charlie_receives() {
        Polarization::H => (dual, h, v),
        Polarization::V => (dual.swap_parties(s.statistics()), v, h),
    };
    Ok(RoutedPair { convention: conv, charlie_label, diana_label, state, same_party_probability: p_same })
}

/// Beam splitter with power reflectivity `R` and phase `φ`, followed by two
/// detectors. Transfer matrix `[[√R, e^{-iφ}√(1-R)], [√(1-R), -e^{-iφ}√R]]`;
/// detector 0 reports `+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterElement {
    reflectivity: f64,
    phase: f64,
}

impl BeamSplitterElement {
    pub fn new(reflectivity: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflectivity) || !phase.is_finite() {
            return Err(DualismError::InvalidParameter(format!(
                "reflectivity must lie in [0,1] (got {reflectivity}) and phase must be finite"
            )));
        }
        Ok(BeamSplitterElement { reflectivity, phase })
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn transfer_matrix(&self) -> Matrix2<Complex64> {
        let r = Complex64::from(self.reflectivity.sqrt());
        let t = Complex64::from((1.0 - self.reflectivity).sqrt());
        let e = Complex64::from_polar(1.0, -self.phase);
        Matrix2::new(r, e * t, t, -e * r)
    }
}

/// Beam splitter whose which-detector readout measures `n·σ`.
pub fn setting_to_beamsplitter(s: PseudoSpinSetting) -> BeamSplitterElement {
    // fold into theta in [0, pi]
    let s = PseudoSpinSetting::from_direction(&s.direction());
    let half = s.theta / 2.0;
    BeamSplitterElement { reflectivity: half.cos().powi(2), phase: s.phi }
}

/// `p(++), p(+-), p(-+), p(--)` for Charlie measuring `sa` and Diana `sb`,
/// propagated through both beam splitters.
pub fn joint_probabilities(state: &LabeledBipartiteState, sa: PseudoSpinSetting, sb: PseudoSpinSetting) -> [f64; 4] {
    let u = setting_to_beamsplitter(sa).transfer_matrix().kronecker(&setting_to_beamsplitter(sb).transfer_matrix());
    let out = u * Vector4::from(state.two_qubit_vector());
    [out[0].norm_sqr(), out[1].norm_sqr(), out[2].norm_sqr(), out[3].norm_sqr()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairCounts {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
    /// Shots where at least one detector stayed dark.
    pub lost: u64,
}

impl PairCounts {
    pub fn coincidences(&self) -> u64 {
        self.pp + self.pm + self.mp + self.mm
    }

    pub fn as_array(&self) -> [u64; 4] {
        [self.pp, self.pm, self.mp, self.mm]
    }
}

pub const PAIR_NAMES: [&str; 4] = ["ab", "ab_prime", "a_prime_b", "a_prime_b_prime"];
pub const OUTCOME_NAMES: [&str; 4] = ["++", "+-", "-+", "--"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRecord {
    pub settings: BellSettings,
    pub shots: u64,
    pub seed: u64,
    pub efficiency: f64,
    /// In CHSH order `(a,b), (a,b'), (a',b), (a',b')`.
    pub counts: [PairCounts; 4],
}

#[derive(Serialize)]
struct CsvRow<'a> {
    settings_pair: &'a str,
    outcome: &'a str,
    count: u64,
    shots: u64,
    seed: u64,
}

impl CoincidenceRecord {
    /// Columns `settings_pair,outcome,count,shots,seed`. A `none` row per pair
    /// records lost shots when the efficiency is below 1.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (name, counts) in PAIR_NAMES.iter().zip(&self.counts) {
            for (outcome, count) in OUTCOME_NAMES.iter().zip(counts.as_array()) {
                w.serialize(CsvRow { settings_pair: name, outcome, count, shots: self.shots, seed: self.seed })
                    .expect("in-memory csv write");
            }
            if self.efficiency < 1.0 {
                w.serialize(CsvRow { settings_pair: name, outcome: "none", count: counts.lost, shots: self.shots, seed: self.seed })
                    .expect("in-memory csv write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
    }
}

pub fn sample_coincidences(
    state: &LabeledBipartiteState,
    settings: &BellSettings,
    shots: u64,
    seed: u64,
) -> Result<CoincidenceRecord> {
    sample_coincidences_with(state, settings, shots, seed, 1.0, Execution::default())
}

pub fn sample_coincidences_with(
    state: &LabeledBipartiteState,
    settings: &BellSettings,
    shots: u64,
    seed: u64,
    efficiency: f64,
    exec: Execution,
) -> Result<CoincidenceRecord> {
    if shots == 0 {
        return Err(DualismError::InvalidParameter("shots must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(DualismError::InvalidParameter(format!("efficiency must lie in [0,1], got {efficiency}")));
    }
    let pairs = settings.pairs();
    let counts = exec.map_range(4, |k| {
        let (sa, sb) = pairs[k];
        let p = joint_probabilities(state, sa, sb);
        sample_pair(&p, shots, seed, k as u64, efficiency)
    });
    Ok(CoincidenceRecord {
        settings: *settings,
        shots,
        seed,
        efficiency,
        counts: [counts[0], counts[1], counts[2], counts[3]],
    })
}

fn sample_pair(p: &[f64; 4], shots: u64, seed: u64, stream: u64, efficiency: f64) -> PairCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut cdf = [0.0; 4];
    let mut acc = 0.0;
    for (c, pk) in cdf.iter_mut().zip(p) {
        acc += pk;
        *c = acc;
    }
    // rounding can leave the cdf short of 1; the remainder goes to the last
    // cell that actually carries weight
    let fallback = p.iter().rposition(|&x| x > 0.0).unwrap_or(3);
    let mut cells = [0u64; 4];
    let mut lost = 0;
    for _ in 0..shots {
        let u: f64 = rng.random();
        let cell = cdf.iter().position(|&c| u < c).unwrap_or(fallback);
        if efficiency < 1.0 {
            let charlie: f64 = rng.random();
            let diana: f64 = rng.random();
            if charlie >= efficiency || diana >= efficiency {
                lost += 1;
                continue;
            }
        }
        cells[cell] += 1;
    }
    PairCounts { pp: cells[0], pm: cells[1], mp: cells[2], mm: cells[3], lost }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshEstimate {
    pub s_hat: f64,
    pub stderr: f64,
    pub correlators: Correlators,
}

/// Correlators `(n++ + n-- - n+- - n-+)/n` with binomial variance `(1 - E²)/n`.
pub fn estimate_chsh(rec: &CoincidenceRecord) -> Result<ChshEstimate> {
    let mut e = [0.0; 4];
    let mut var = 0.0;
    for (k, c) in rec.counts.iter().enumerate() {
        let n = c.coincidences();
        if n < 2 {
            return Err(DualismError::InsufficientShots { pair: k, available: n });
        }
        let nf = n as f64;
        e[k] = ((c.pp + c.mm) as f64 - (c.pm + c.mp) as f64) / nf;
        var += (1.0 - e[k] * e[k]) / nf;
    }
    Ok(ChshEstimate { s_hat: chsh_combination(e), stderr: var.sqrt(), correlators: Correlators::from_array(e) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{bell_expectation, correlator, pauli};
    use crate::fock::{build_epr_state, Statistics, VariableSpec};
    use crate::Variable;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> LabeledBipartiteState {
        LabeledBipartiteState::new(Variable::B, c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).unwrap()
    }

    fn photonic(alpha: f64, beta: f64) -> TwoParticleState {
        build_epr_state(VariableSpec::photonic(), c(alpha, 0.0), c(beta, 0.0), Statistics::Boson).unwrap()
    }

    fn same_pairs(s: PseudoSpinSetting) -> BellSettings {
        BellSettings { a: s, a_prime: s, b: s, b_prime: s }
    }

    #[test]
    fn routing_gives_momentum_entanglement() {
        let routed = route_through_pbs(&photonic(FRAC_1_SQRT_2, FRAC_1_SQRT_2), RoutingConvention::default()).unwrap();
        assert_eq!(routed.charlie_label, "V");
        assert_eq!(routed.diana_label, "H");
        assert_eq!(routed.same_party_probability, 0.0);
        assert!((routed.state.c1() - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((routed.state.c2() - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert_eq!(routed.state.entangled_variable(), Variable::A);
    }

    #[test]
    fn routing_product_input() {
        let routed = route_through_pbs(&photonic(1.0, 0.0), RoutingConvention::h_to_charlie()).unwrap();
        assert_eq!(routed.charlie_label, "H");
        assert_eq!(routed.state.concurrence(), 0.0);
    }

    #[test]
    fn flipping_the_convention_swaps_parties_only() {
        let s = photonic(0.6, 0.8);
        let v_first = route_through_pbs(&s, RoutingConvention::v_to_charlie()).unwrap();
        let h_first = route_through_pbs(&s, RoutingConvention::h_to_charlie()).unwrap();
        assert_eq!((v_first.state.c1(), v_first.state.c2()), (h_first.state.c2(), h_first.state.c1()));
        let canon = BellSettings::canonical();
        let swapped = BellSettings { a: canon.b, a_prime: canon.b_prime, b: canon.a, b_prime: canon.a_prime };
        let s_v = bell_expectation(&v_first.state, &canon).bell_expectation;
        let s_h = bell_expectation(&h_first.state, &swapped).bell_expectation;
        assert!((s_v - s_h).abs() < 1e-12);
    }

    #[test]
    fn routing_convention_json() {
        let v = serde_json::to_value(RoutingConvention::v_to_charlie()).unwrap();
        assert_eq!(v, serde_json::json!({"v_direction": "+y", "h_direction": "-y", "charlie_receives": "V"}));
        let bad = serde_json::json!({"v_direction": "+y", "h_direction": "+y", "charlie_receives": "V"});
        assert!(serde_json::from_value::<RoutingConvention>(bad).is_err());
    }

    #[test]
    fn beam_splitter_settings() {
        let z = setting_to_beamsplitter(PseudoSpinSetting::sigma_z());
        assert_eq!(z.reflectivity(), 1.0);
        let x = setting_to_beamsplitter(PseudoSpinSetting::sigma_x());
        assert!((x.reflectivity() - 0.5).abs() < 1e-15 && x.phase() == 0.0);
        let y = setting_to_beamsplitter(PseudoSpinSetting::sigma_y());
        assert!((y.reflectivity() - 0.5).abs() < 1e-15 && (y.phase() - FRAC_PI_2).abs() < 1e-15);

        let [sx, sy, _] = pauli();
        let sz = pauli()[2];
        let ux = x.transfer_matrix();
        assert!((ux.adjoint() * sz * ux - sx).norm() < 1e-12);
        let uy = y.transfer_matrix();
        assert!((uy.adjoint() * sz * uy - sy).norm() < 1e-12);
    }

    #[test]
    fn beam_splitter_realizes_every_direction() {
        let sz = pauli()[2];
        for i in 0..12 {
            for j in 0..12 {
                let s = PseudoSpinSetting::new(i as f64 * 0.3 - 0.5, j as f64 * 0.6 - 3.0);
                let u = setting_to_beamsplitter(s).transfer_matrix();
                assert!((u.adjoint() * u - Matrix2::identity()).norm() < 1e-12);
                assert!((u.adjoint() * sz * u - s.observable()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn beam_splitter_rejects_bad_reflectivity() {
        assert!(BeamSplitterElement::new(1.5, 0.0).is_err());
        assert!(BeamSplitterElement::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn joint_probabilities_reproduce_correlators() {
        let s = LabeledBipartiteState::normalized(Variable::B, c(0.3, 0.2), c(-0.6, 0.4)).unwrap();
        let sa = PseudoSpinSetting::new(0.7, 1.9);
        let sb = PseudoSpinSetting::new(2.1, -0.4);
        let p = joint_probabilities(&s, sa, sb);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let e = p[0] + p[3] - p[1] - p[2];
        assert!((e - correlator(&s, sa, sb)).abs() < 1e-12);
    }

    #[test]
    fn bell_state_sigma_z_never_agrees() {
        for seed in [0, 1, 99] {
            let rec = sample_coincidences(&bell(), &same_pairs(PseudoSpinSetting::sigma_z()), 2000, seed).unwrap();
            for counts in rec.counts {
                assert_eq!(counts.pp, 0);
                assert_eq!(counts.mm, 0);
                assert_eq!(counts.coincidences(), 2000);
            }
        }
    }

    #[test]
    fn product_state_is_deterministic() {
        let product = LabeledBipartiteState::new(Variable::B, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let rec = sample_coincidences(&product, &same_pairs(PseudoSpinSetting::sigma_z()), 500, 7).unwrap();
        for counts in rec.counts {
            assert_eq!(counts.pm, 500);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic_and_mode_independent() {
        let canon = BellSettings::canonical();
        let a = sample_coincidences_with(&bell(), &canon, 5000, 42, 1.0, Execution::Sequential).unwrap();
        let b = sample_coincidences_with(&bell(), &canon, 5000, 42, 1.0, Execution::default()).unwrap();
        assert_eq!(a, b);
        let c = sample_coincidences_with(&bell(), &canon, 5000, 43, 1.0, Execution::Sequential).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn canonical_chsh_within_four_standard_errors() {
        let rec = sample_coincidences(&bell(), &BellSettings::canonical(), 100_000, 2024).unwrap();
        let est = estimate_chsh(&rec).unwrap();
        assert!((est.s_hat - 2.0 * SQRT_2).abs() < 4.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn estimator_on_expected_counts() {
        let settings = BellSettings::canonical();
        let shots = 1_000_000u64;
        let counts = settings.pairs().map(|(sa, sb)| {
            let p = joint_probabilities(&bell(), sa, sb).map(|x| (x * shots as f64).round() as u64);
            PairCounts { pp: p[0], pm: p[1], mp: p[2], mm: p[3], lost: 0 }
        });
        let rec = CoincidenceRecord { settings, shots, seed: 0, efficiency: 1.0, counts };
        let est = estimate_chsh(&rec).unwrap();
        assert!((est.s_hat - 2.0 * SQRT_2).abs() < 1e-5);
    }

    #[test]
    fn estimator_local_ceiling_and_guard() {
        let agree = PairCounts { pp: 10, mm: 10, ..Default::default() };
        let rec = CoincidenceRecord { settings: BellSettings::canonical(), shots: 20, seed: 0, efficiency: 1.0, counts: [agree; 4] };
        let est = estimate_chsh(&rec).unwrap();
        assert_eq!(est.s_hat, 2.0);
        assert_eq!(est.stderr, 0.0);

        let mut short = rec.clone();
        short.counts[2] = PairCounts { pp: 1, ..Default::default() };
        assert_eq!(estimate_chsh(&short), Err(DualismError::InsufficientShots { pair: 2, available: 1 }));
    }

    #[test]
    fn lossy_detectors_drop_shots() {
        let rec = sample_coincidences_with(&bell(), &BellSettings::canonical(), 10_000, 5, 0.5, Execution::Sequential).unwrap();
        for counts in rec.counts {
            assert_eq!(counts.coincidences() + counts.lost, 10_000);
            // both detectors at 0.5: about a quarter survive
            assert!((counts.coincidences() as f64 / 10_000.0 - 0.25).abs() < 0.02);
        }
        assert!(rec.to_csv().contains(",none,"));
        assert!(sample_coincidences_with(&bell(), &BellSettings::canonical(), 10, 5, 1.2, Execution::Sequential).is_err());
    }

    #[test]
    fn csv_layout() {
        let rec = sample_coincidences(&bell(), &BellSettings::canonical(), 10, 3).unwrap();
        let csv = rec.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "settings_pair,outcome,count,shots,seed");
        assert_eq!(lines.len(), 1 + 16);
        assert!(lines[1].starts_with("ab,++,"));
        assert!(lines[16].starts_with("a_prime_b_prime,--,"));
        assert!(lines[1].ends_with(",10,3"));
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(sample_coincidences(&bell(), &BellSettings::canonical(), 0, 1).is_err());
    }
}
