//! Resolved run configuration. Every flag is filled in before anything runs,
//! so a dumped config reproduces the run exactly.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::PathBuf;

use dualism::bell::PseudoSpinSetting;
use dualism::optics::RoutingConvention;
use dualism::{BellSettings, Statistics, VariableSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Dualize,
    Chsh,
    SignReport,
    Sample,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StatePreset {
    /// Amplitudes from `--alpha`/`--beta`.
    Custom,
    /// `alpha = beta = 1/sqrt(2)`.
    Bell,
    /// `alpha = 1, beta = 0`.
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StatsArg {
    Boson,
    Fermion,
}

impl From<StatsArg> for Statistics {
    fn from(s: StatsArg) -> Self {
        match s {
            StatsArg::Boson => Statistics::Boson,
            StatsArg::Fermion => Statistics::Fermion,
        }
    }
}

/// Physical reading of the two variables, used for labels only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    /// Momentum `{-k, k}` labels, polarization `{H, V}`.
    Photonic,
    /// Trap `{psi1, psi2}` labels, spin `{up, down}`.
    TrappedSpins,
    /// Generic `A`/`B` variables.
    Abstract,
}

impl System {
    pub fn spec(self) -> VariableSpec {
        match self {
            System::Photonic => VariableSpec::photonic(),
            System::TrappedSpins => VariableSpec::trapped_spins(),
            System::Abstract => VariableSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// Labelled by `A`, entangled in `B`.
    A,
    /// Labelled by `B`, entangled in `A`.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Routing {
    /// `V` to Charlie on `+y`, `H` to Diana.
    VToCharlie,
    /// `H` to Charlie, `V` to Diana.
    HToCharlie,
}

impl From<Routing> for RoutingConvention {
    fn from(r: Routing) -> Self {
        match r {
            Routing::VToCharlie => RoutingConvention::v_to_charlie(),
            Routing::HToCharlie => RoutingConvention::h_to_charlie(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// `(theta, phi)` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleDeg {
    pub theta: f64,
    pub phi: f64,
}

impl AngleDeg {
    fn setting(self) -> PseudoSpinSetting {
        PseudoSpinSetting::from_degrees(self.theta, self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingsChoice {
    Canonical,
    Optimal,
    Explicit { a: AngleDeg, a_prime: AngleDeg, b: AngleDeg, b_prime: AngleDeg },
}

impl SettingsChoice {
    /// Explicit settings in radians; `None` for `optimal`.
    pub fn fixed(&self) -> Option<BellSettings> {
        match *self {
            SettingsChoice::Canonical => Some(BellSettings::canonical()),
            SettingsChoice::Optimal => None,
            SettingsChoice::Explicit { a, a_prime, b, b_prime } => Some(BellSettings {
                a: a.setting(),
                a_prime: a_prime.setting(),
                b: b.setting(),
                b_prime: b_prime.setting(),
            }),
        }
    }
}

/// `canonical`, `optimal`, or eight comma-separated degrees
/// `θa,φa,θa',φa',θb,φb,θb',φb'`.
pub fn parse_settings(s: &str) -> Result<SettingsChoice, String> {
    match s {
        "canonical" => return Ok(SettingsChoice::Canonical),
        "optimal" => return Ok(SettingsChoice::Optimal),
        _ => {}
    }
    let v = parse_list(s)?;
    let [ta, pa, tap, pap, tb, pb, tbp, pbp] = v[..] else {
        return Err(format!("expected `canonical`, `optimal` or 8 angles in degrees, got {} values", v.len()));
    };
    let at = |theta, phi| AngleDeg { theta, phi };
    Ok(SettingsChoice::Explicit { a: at(ta, pa), a_prime: at(tap, pap), b: at(tb, pb), b_prime: at(tbp, pbp) })
}

/// Comma-separated numbers, or an inclusive range `start:stop:step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        [_] => parse_list(s),
        [start, stop, step] => {
            let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0 && stop >= start) {
                return Err(format!("range needs step > 0 and stop >= start, got {s}"));
            }
            let n = (stop - start) / step;
            let steps = n.round();
            if (n - steps).abs() > 1e-9 * steps.max(1.0) {
                return Err(format!("step {step} does not divide [{start}, {stop}]"));
            }
            let steps = steps as usize;
            Ok((0..=steps).map(|i| start + (stop - start) * i as f64 / steps.max(1) as f64).collect())
        }
        _ => Err(format!("expected a list or start:stop:step, got `{s}`")),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub preset: StatePreset,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub statistics: StatsArg,
    pub system: System,
}

impl StateConfig {
    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        match self.preset {
            StatePreset::Custom => (Complex64::new(self.alpha_re, self.alpha_im), Complex64::new(self.beta_re, self.beta_im)),
            StatePreset::Bell => (Complex64::from(FRAC_1_SQRT_2), Complex64::from(FRAC_1_SQRT_2)),
            StatePreset::Product => (Complex64::from(1.0), Complex64::from(0.0)),
        }
    }
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig {
            preset: StatePreset::Custom,
            alpha_re: FRAC_1_SQRT_2,
            alpha_im: 0.0,
            beta_re: FRAC_1_SQRT_2,
            beta_im: 0.0,
            statistics: StatsArg::Boson,
            system: System::Photonic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub state: StateConfig,
    /// `dualize` only: build the two-species analogue instead.
    pub nip: bool,
    /// `chsh` only: which reading to test.
    pub form: Form,
    pub settings: SettingsChoice,
    pub shots: u64,
    pub seed: u64,
    pub efficiency: f64,
    /// `sweep` only: overlaps, or `times` with `tau` mapped through `exp(-t/tau)`.
    pub gammas: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub tau: Option<f64>,
    pub routing: Routing,
    pub format: Format,
    /// Stdout when absent.
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: &str| Err(ConfigError(m.to_string()));
        let finite = [self.state.alpha_re, self.state.alpha_im, self.state.beta_re, self.state.beta_im];
        if finite.iter().any(|x| !x.is_finite()) {
            return err("amplitudes must be finite");
        }
        if let SettingsChoice::Explicit { a, a_prime, b, b_prime } = self.settings {
            if [a, a_prime, b, b_prime].iter().any(|x| !x.theta.is_finite() || !x.phi.is_finite()) {
                return err("angles must be finite");
            }
        }
        if self.nip && self.command != CommandKind::Dualize {
            return err("--nip applies to `dualize` only");
        }
        match self.command {
            CommandKind::SignReport if self.settings == SettingsChoice::Optimal => {
                return err("sign-report needs fixed in-plane settings, not `optimal`");
            }
            CommandKind::Sample => {
                if self.shots == 0 {
                    return err("--shots must be at least 1");
                }
                if !(0.0..=1.0).contains(&self.efficiency) {
                    return err("--efficiency must lie in [0, 1]");
                }
            }
            CommandKind::Sweep => {
                if matches!(self.settings, SettingsChoice::Explicit { .. }) {
                    return err("sweep supports `canonical` or `optimal` settings");
                }
                match (&self.gammas, &self.times, self.tau) {
                    (Some(g), None, None) if !g.is_empty() => {
                        if g.iter().any(|x| !(0.0..=1.0).contains(x)) {
                            return err("gammas must lie in [0, 1]");
                        }
                    }
                    (None, Some(t), Some(tau)) if !t.is_empty() => {
                        if !(tau > 0.0 && t.iter().all(|x| *x >= 0.0)) {
                            return err("--tau must be positive and --times nonnegative");
                        }
                    }
                    _ => return err("sweep needs either --gammas or both --times and --tau"),
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The overlaps to sweep, in the given order.
    pub fn sweep_gammas(&self) -> Vec<f64> {
        match (&self.gammas, &self.times, self.tau) {
            (Some(g), _, _) => g.clone(),
            (None, Some(t), Some(tau)) => t.iter().map(|t| (-t / tau).exp()).collect(),
            _ => Vec::new(),
        }
    }
}
