//! Pseudo-spin observables on a dichotomic variable, CHSH correlators and the
//! signed Bell-operator expectation.
//!
//! The CHSH combination is `S = E(a,b) + E(a,b') + E(a',b) - E(a',b')`,
//! reported without taking the modulus.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dual::{relabel_by_a, relabel_by_b};
use crate::error::{DualismError, Result};
use crate::exec::Execution;
use crate::fock::{Statistics, TwoParticleState};
use crate::optimize::nelder_mead_max;
use crate::{LabeledBipartiteState, TOL};

/// Pauli matrices `(σx, σy, σz)` in the basis `|0>, |1>`.
pub fn pauli() -> [Matrix2<Complex64>; 3] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::new(z, one, one, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(one, z, z, -one),
    ]
}

/// Anything with a two-qubit expectation value: pure dual forms and reduced
/// density matrices.
pub trait TwoQubitSystem {
    /// `<O>` for a Hermitian operator `O` on the two slots (slot 1 most significant).
    fn expectation(&self, op: &Matrix4<Complex64>) -> f64;
}

impl TwoQubitSystem for LabeledBipartiteState {
    fn expectation(&self, op: &Matrix4<Complex64>) -> f64 {
        let psi = Vector4::from(self.two_qubit_vector());
        psi.dotc(&(op * psi)).re
    }
}

/// Measurement direction `n = (sinθ cosφ, sinθ sinφ, cosθ)` for the
/// observable `n·σ`. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoSpinSetting {
    pub theta: f64,
    pub phi: f64,
}

impl PseudoSpinSetting {
    pub fn new(theta: f64, phi: f64) -> Self {
        PseudoSpinSetting { theta, phi }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        PseudoSpinSetting { theta: theta_deg.to_radians(), phi: phi_deg.to_radians() }
    }

    /// In the x-y plane at azimuth `phi`.
    pub fn in_plane(phi: f64) -> Self {
        PseudoSpinSetting { theta: FRAC_PI_2, phi }
    }

    pub fn sigma_z() -> Self {
        PseudoSpinSetting { theta: 0.0, phi: 0.0 }
    }

    pub fn sigma_x() -> Self {
        Self::in_plane(0.0)
    }

    pub fn sigma_y() -> Self {
        Self::in_plane(FRAC_PI_2)
    }

    pub fn direction(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Setting pointing along `v` (need not be normalized; zero maps to +z).
    pub fn from_direction(v: &Vector3<f64>) -> Self {
        let n = v.norm();
        if n == 0.0 {
            return Self::sigma_z();
        }
        let theta = (v.z / n).clamp(-1.0, 1.0).acos();
        let phi = if v.x == 0.0 && v.y == 0.0 { 0.0 } else { v.y.atan2(v.x) };
        PseudoSpinSetting { theta, phi }
    }

    pub fn is_in_plane(&self) -> bool {
        (self.theta - FRAC_PI_2).abs() <= TOL
    }

    /// `n·σ`.
    pub fn observable(&self) -> Matrix2<Complex64> {
        let n = self.direction();
        let [sx, sy, sz] = pauli();
        sx * Complex64::from(n.x) + sy * Complex64::from(n.y) + sz * Complex64::from(n.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellSettings {
    pub a: PseudoSpinSetting,
    pub a_prime: PseudoSpinSetting,
    pub b: PseudoSpinSetting,
    pub b_prime: PseudoSpinSetting,
}

impl BellSettings {
    /// All in the x-y plane: `φa = 0, φa' = π/2, φb = π/4, φb' = -π/4`.
    pub fn canonical() -> Self {
        BellSettings {
            a: PseudoSpinSetting::in_plane(0.0),
            a_prime: PseudoSpinSetting::in_plane(FRAC_PI_2),
            b: PseudoSpinSetting::in_plane(FRAC_PI_4),
            b_prime: PseudoSpinSetting::in_plane(-FRAC_PI_4),
        }
    }

    /// The four settings pairs in CHSH order `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(PseudoSpinSetting, PseudoSpinSetting); 4] {
        [(self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime)]
    }

    pub fn all_in_plane(&self) -> Result<()> {
        for (name, s) in [("a", self.a), ("a_prime", self.a_prime), ("b", self.b), ("b_prime", self.b_prime)] {
            if !s.is_in_plane() {
                return Err(DualismError::SettingsNotInPlane(name));
            }
        }
        Ok(())
    }
}

/// Combines four correlators in CHSH order into the signed Bell expectation.
pub fn chsh_combination(e: [f64; 4]) -> f64 {
    e[0] + e[1] + e[2] - e[3]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlators {
    pub ab: f64,
    pub ab_prime: f64,
    pub a_prime_b: f64,
    pub a_prime_b_prime: f64,
}

impl Correlators {
    pub fn as_array(&self) -> [f64; 4] {
        [self.ab, self.ab_prime, self.a_prime_b, self.a_prime_b_prime]
    }

    pub fn from_array(e: [f64; 4]) -> Self {
        Correlators { ab: e[0], ab_prime: e[1], a_prime_b: e[2], a_prime_b_prime: e[3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub settings: BellSettings,
    pub correlators: Correlators,
    /// Signed `S`.
    pub bell_expectation: f64,
}

/// `<(na·σ) ⊗ (nb·σ)>`.
pub fn correlator<S: TwoQubitSystem + ?Sized>(state: &S, sa: PseudoSpinSetting, sb: PseudoSpinSetting) -> f64 {
    let op = sa.observable().kronecker(&sb.observable());
    state.expectation(&op).clamp(-1.0, 1.0)
}

pub fn bell_expectation<S: TwoQubitSystem + ?Sized>(state: &S, settings: &BellSettings) -> ChshResult {
    let e = settings.pairs().map(|(sa, sb)| correlator(state, sa, sb));
    ChshResult { settings: *settings, correlators: Correlators::from_array(e), bell_expectation: chsh_combination(e) }
}

/// `T_ij = <σi ⊗ σj>`.
pub fn correlation_matrix<S: TwoQubitSystem + ?Sized>(state: &S) -> Matrix3<f64> {
    let p = pauli();
    Matrix3::from_fn(|i, j| state.expectation(&p[i].kronecker(&p[j])))
}

/// `2 sqrt(s1^2 + s2^2)` from the two largest singular values of `T`.
pub fn max_chsh_from_correlation_matrix(t: &Matrix3<f64>) -> f64 {
    let mut s: Vec<f64> = t.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    2.0 * (s[0] * s[0] + s[1] * s[1]).sqrt()
}

/// Maximal `|S|` obtained two independent ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshOptimum {
    /// Singular-value criterion on the correlation matrix.
    pub analytic: f64,
    /// `|S|` evaluated directly at the settings found by grid search and refinement.
    pub searched: f64,
    pub settings: BellSettings,
    pub result: ChshResult,
}

impl ChshOptimum {
    pub fn max_abs_s(&self) -> f64 {
        self.analytic
    }

    pub fn discrepancy(&self) -> f64 {
        (self.analytic - self.searched).abs()
    }
}

pub fn chsh_optimal<S: TwoQubitSystem + Sync + ?Sized>(state: &S) -> ChshOptimum {
    chsh_optimal_with(state, Execution::default())
}

// c and -c give the same objective, so the azimuth only needs half a turn;
// likewise c' and -c'.
const GRID_THETA: usize = 181; // 0..=180 degrees
const GRID_PHI: usize = 180; // 0..180 degrees
const GRID_PSI: usize = 180; // 0..180 degrees

/// Orthonormal frame `(c, e1, e2)` at polar angles `(theta, phi)`.
fn frame(theta: f64, phi: f64) -> [Vector3<f64>; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        Vector3::new(st * cp, st * sp, ct),
        Vector3::new(ct * cp, ct * sp, -st),
        Vector3::new(-sp, cp, 0.0),
    ]
}

/// Alice's two settings combine as `a ± a' = 2cosβ c, 2sinβ c'` for an
/// orthonormal pair `(c, c')`; Bob then aligns with `Tᵀc` and `Tᵀc'`, which
/// leaves `|S| = 2 sqrt(|Tᵀc|^2 + |Tᵀc'|^2)` to maximize over the pair.
fn pair_objective(tt: &Matrix3<f64>, theta: f64, phi: f64, psi: f64) -> f64 {
    let [c, e1, e2] = frame(theta, phi);
    let (sp, cp) = psi.sin_cos();
    let c_perp = e1 * cp + e2 * sp;
    (tt * c).norm_squared() + (tt * c_perp).norm_squared()
}

pub fn chsh_optimal_with<S: TwoQubitSystem + Sync + ?Sized>(state: &S, exec: Execution) -> ChshOptimum {
    let t = correlation_matrix(state);
    let analytic = max_chsh_from_correlation_matrix(&t);

    let tt = t.transpose();
    let deg = 1f64.to_radians();
    let psi_table: Vec<(f64, f64)> = (0..GRID_PSI).map(|k| (k as f64 * deg).sin_cos()).collect();
    let (cell, _) = exec
        .argmax(GRID_THETA * GRID_PHI, |cell| {
            let theta = (cell / GRID_PHI) as f64 * deg;
            let phi = (cell % GRID_PHI) as f64 * deg;
            let [c, e1, e2] = frame(theta, phi);
            let u = (tt * c).norm_squared();
            let (u1, u2) = (tt * e1, tt * e2);
            // |cos ψ u1 + sin ψ u2|^2 as a quadratic form in (cos ψ, sin ψ)
            let (p11, p22, p12) = (u1.norm_squared(), u2.norm_squared(), 2.0 * u1.dot(&u2));
            let best = psi_table
                .iter()
                .map(|&(sp, cp)| u + cp * cp * p11 + sp * sp * p22 + sp * cp * p12)
                .fold(f64::NEG_INFINITY, f64::max);
            Some(best)
        })
        .expect("grid is non-empty");
    let theta0 = (cell / GRID_PHI) as f64 * deg;
    let phi0 = (cell % GRID_PHI) as f64 * deg;
    // first ψ attaining the cell maximum
    let psi0 = (0..GRID_PSI)
        .map(|k| k as f64 * deg)
        .fold((0.0, f64::NEG_INFINITY), |best, psi| {
            let v = pair_objective(&tt, theta0, phi0, psi);
            if v > best.1 {
                (psi, v)
            } else {
                best
            }
        })
        .0;

    let (x, _) = nelder_mead_max(|p: &[f64; 3]| pair_objective(&tt, p[0], p[1], p[2]), [theta0, phi0, psi0], deg, 1e-10, 4000);

    let settings = settings_for_pair(&tt, x[0], x[1], x[2]);
    let result = bell_expectation(state, &settings);
    ChshOptimum { analytic, searched: result.bell_expectation.abs(), settings, result }
}

/// Explicit four settings realizing the pair objective at `(theta, phi, psi)`.
fn settings_for_pair(tt: &Matrix3<f64>, theta: f64, phi: f64, psi: f64) -> BellSettings {
    let [c, e1, e2] = frame(theta, phi);
    let (sp, cp) = psi.sin_cos();
    let c_perp = e1 * cp + e2 * sp;
    let u = tt * c;
    let v = tt * c_perp;
    let beta = v.norm().atan2(u.norm());
    let (sb, cb) = beta.sin_cos();
    let a = c * cb + c_perp * sb;
    let a_prime = c * cb - c_perp * sb;
    let b = if u.norm() > 0.0 { u } else { c };
    let b_prime = if v.norm() > 0.0 { v } else { c_perp };
    BellSettings {
        a: PseudoSpinSetting::from_direction(&a),
        a_prime: PseudoSpinSetting::from_direction(&a_prime),
        b: PseudoSpinSetting::from_direction(&b),
        b_prime: PseudoSpinSetting::from_direction(&b_prime),
    }
}

/// Bell expectations of the two dual readings of one state under the same settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignDifferenceReport {
    pub statistics: Statistics,
    pub s_a: f64,
    pub s_b: f64,
    /// Sign of `s_b / s_a`.
    pub ratio_sign: i8,
    pub a_form: ChshResult,
    pub b_form: ChshResult,
}

/// Runs the same in-plane CHSH test on the `A`-labelled and `B`-labelled readings.
pub fn sign_difference_report(s: &TwoParticleState, settings: &BellSettings) -> Result<SignDifferenceReport> {
    settings.all_in_plane()?;
    let a_form = bell_expectation(&relabel_by_a(s)?, settings);
    let b_form = bell_expectation(&relabel_by_b(s)?, settings);
    let (s_a, s_b) = (a_form.bell_expectation, b_form.bell_expectation);
    if s_a.abs() <= TOL || s_b.abs() <= TOL {
        return Err(DualismError::DegenerateExpectation);
    }
    let ratio_sign = if s_a * s_b > 0.0 { 1 } else { -1 };
    Ok(SignDifferenceReport { statistics: s.statistics(), s_a, s_b, ratio_sign, a_form, b_form })
}

/// [`chsh_optimal`] over a batch of states.
pub fn chsh_optimal_batch(states: &[LabeledBipartiteState], exec: Execution) -> Vec<ChshOptimum> {
    // Parallelize across states; each search runs sequentially.
    exec.map(states, |s| chsh_optimal_with(s, Execution::Sequential))
}
