//! Loss of the dual coherence when the two traps imprint different
//! environment states on their particles.
//!
//! Each particle carries the state `χ1` or `χ2` of the residual degrees of
//! freedom of the trap it sits in. The environments are realized as vectors
//! in a 2-dimensional space with `<χ1|χ2> = γ e^{iφ}` and traced out
//! explicitly. Labelling by trap (the `A` variable) the environment factors
//! out; labelling by `B` the two superposition terms carry the environments
//! in opposite slots, so their coherence is multiplied by
//! `<χ2|χ1><χ1|χ2> = γ²`. The phase of the overlap drops out.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell::{bell_expectation, chsh_optimal_with, BellSettings, ChshResult, TwoQubitSystem};
use crate::dual::{relabel, LabeledBipartiteState};
use crate::error::{DualismError, Result};
use crate::exec::Execution;
use crate::fock::{TwoParticleState, Variable};
use crate::TOL;

/// `<χ1(t)|χ2(t)> = gamma · e^{i phi_env}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentOverlap {
    gamma: f64,
    phi_env: f64,
}

impl EnvironmentOverlap {
    pub fn new(gamma: f64, phi_env: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(DualismError::InvalidParameter(format!("gamma must lie in [0,1], got {gamma}")));
        }
        if !phi_env.is_finite() {
            return Err(DualismError::InvalidParameter("phi_env must be finite".into()));
        }
        Ok(EnvironmentOverlap { gamma, phi_env })
    }

    pub fn identical() -> Self {
        EnvironmentOverlap { gamma: 1.0, phi_env: 0.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn phi_env(&self) -> f64 {
        self.phi_env
    }

    /// `exp(-t / tau)`.
    pub fn from_time(t: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && t >= 0.0) {
            return Err(DualismError::InvalidParameter(format!("need t >= 0 and tau > 0, got t={t}, tau={tau}")));
        }
        Self::new((-t / tau).exp(), 0.0)
    }

    /// `(χ1, χ2)` as vectors in a 2-dimensional environment space.
    pub fn embedding(&self) -> [[Complex64; 2]; 2] {
        let chi1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let chi2 = [
            Complex64::from_polar(self.gamma, self.phi_env),
            Complex64::new((1.0 - self.gamma * self.gamma).max(0.0).sqrt(), 0.0),
        ];
        [chi1, chi2]
    }
}

/// Two-slot density matrix in the basis `|00>, |01>, |10>, |11>` of a
/// labelled reading.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    rho: Matrix4<Complex64>,
    label_variable: Variable,
}

impl ReducedDensityMatrix {
    /// Checks Hermiticity, unit trace and positivity (min eigenvalue ≥ -1e-10).
    pub fn new(rho: Matrix4<Complex64>, label_variable: Variable) -> Result<Self> {
        let herm = (rho - rho.adjoint()).norm();
        if herm > TOL {
            return Err(DualismError::InvalidParameter(format!("density matrix not Hermitian (defect {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TOL {
            return Err(DualismError::InvalidParameter(format!("density matrix trace is {tr}")));
        }
        let min_eig = rho.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(DualismError::InvalidParameter(format!("density matrix has eigenvalue {min_eig}")));
        }
        Ok(ReducedDensityMatrix { rho, label_variable })
    }

    pub fn from_pure(state: &LabeledBipartiteState) -> Self {
        let v = nalgebra::Vector4::from(state.two_qubit_vector());
        ReducedDensityMatrix { rho: v * v.adjoint(), label_variable: state.label_variable() }
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    pub fn label_variable(&self) -> Variable {
        self.label_variable
    }

    pub fn entangled_variable(&self) -> Variable {
        self.label_variable.other()
    }

    /// `<01|ρ|10>`, the coherence between the two superposition terms.
    pub fn coherence(&self) -> Complex64 {
        self.rho[(1, 2)]
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }
}

impl TwoQubitSystem for ReducedDensityMatrix {
    fn expectation(&self, op: &Matrix4<Complex64>) -> f64 {
        (self.rho * op).trace().re
    }
}

/// Density matrix of the `dual` reading (particles labelled by `dual`) after
/// tracing out per-trap environments with overlap `env`.
pub fn dephase_dual_form(s: &TwoParticleState, env: EnvironmentOverlap, dual: Variable) -> Result<ReducedDensityMatrix> {
    let form = relabel(s, dual)?;
    let chi = env.embedding();
    // psi[q][e] with q the two-slot index and e = 2*e1 + e2 the environment index
    let mut psi = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (q1, q2, amp) in [(0usize, 1usize, form.c1()), (1, 0, form.c2())] {
        // trap holding each slot's particle
        let (t1, t2) = match dual {
            Variable::A => (0, 1),
            Variable::B => (q1, q2),
        };
        for e1 in 0..2 {
            for e2 in 0..2 {
                psi[2 * q1 + q2][2 * e1 + e2] += amp * chi[t1][e1] * chi[t2][e2];
            }
        }
    }
    let rho = Matrix4::from_fn(|q, r| (0..4).map(|e| psi[q][e] * psi[r][e].conj()).sum());
    ReducedDensityMatrix::new(rho, dual)
}

pub fn chsh_from_dm(rho: &ReducedDensityMatrix, settings: &BellSettings) -> ChshResult {
    bell_expectation(rho, settings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingsMode {
    /// Signed `S` at [`BellSettings::canonical`].
    FixedCanonical,
    /// Maximal `|S|` over all settings.
    Optimal,
}

impl SettingsMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SettingsMode::FixedCanonical => "fixed-canonical",
            SettingsMode::Optimal => "optimal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    /// Trap-labelled reading (entangled in the internal variable).
    pub s_spin: f64,
    /// Internally-labelled reading (entangled in the trap/momentum variable).
    pub s_momentum: f64,
    pub settings_mode: SettingsMode,
}

pub fn sweep_transition(s: &TwoParticleState, gammas: &[f64], mode: SettingsMode) -> Result<Vec<SweepRow>> {
    sweep_transition_with(s, gammas, mode, Execution::default())
}

pub fn sweep_transition_with(
    s: &TwoParticleState,
    gammas: &[f64],
    mode: SettingsMode,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let envs = gammas.iter().map(|&g| EnvironmentOverlap::new(g, 0.0)).collect::<Result<Vec<_>>>()?;
    relabel(s, Variable::A)?;
    let evaluate = |rho: &ReducedDensityMatrix| match mode {
        SettingsMode::FixedCanonical => chsh_from_dm(rho, &BellSettings::canonical()).bell_expectation,
        SettingsMode::Optimal => chsh_optimal_with(rho, Execution::Sequential).max_abs_s(),
    };
    exec.map(&envs, |env| {
        let spin = dephase_dual_form(s, *env, Variable::A)?;
        let momentum = dephase_dual_form(s, *env, Variable::B)?;
        Ok(SweepRow { gamma: env.gamma(), s_spin: evaluate(&spin), s_momentum: evaluate(&momentum), settings_mode: mode })
    })
    .into_iter()
    .collect()
}

#[derive(Serialize)]
struct CsvRow {
    gamma: f64,
    s_spin: f64,
    s_momentum: f64,
    settings_mode: &'static str,
}

/// Columns `gamma,s_spin,s_momentum,settings_mode`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(CsvRow { gamma: r.gamma, s_spin: r.s_spin, s_momentum: r.s_momentum, settings_mode: r.settings_mode.as_str() })
            .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}
