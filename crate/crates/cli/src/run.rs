use dualism::bell::{bell_expectation, chsh_optimal, sign_difference_report, ChshResult};
use dualism::decoherence::{sweep_to_csv, sweep_transition, SettingsMode};
use dualism::dual::{attempt_relabel_by_b_nip, relabel, relabel_by_a, relabel_by_b};
use dualism::fock::build_epr_state;
use dualism::optics::{estimate_chsh, route_through_pbs, sample_coincidences_with, ChshEstimate, CoincidenceRecord, RoutedPair};
use dualism::{DualismError, Execution, LabeledBipartiteState, Statistics, TwoParticleState, TwoSpeciesState, Variable, VariableSpec};
use serde::Serialize;

use crate::config::{CommandKind, ConfigError, Form, Format, RunConfig, SettingsChoice};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Domain(DualismError),
    Io(std::io::Error),
}

impl From<DualismError> for RunError {
    fn from(e: DualismError) -> Self {
        RunError::Domain(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Runs the pipeline and renders its output document.
pub fn execute(config: &RunConfig) -> Result<String> {
    config.validate()?;
    match config.command {
        CommandKind::Dualize if config.nip => dualize_nip(config),
        CommandKind::Dualize => dualize(config),
        CommandKind::Chsh => chsh(config),
        CommandKind::SignReport => sign_report(config),
        CommandKind::Sample => sample(config),
        CommandKind::Sweep => sweep(config),
    }
}

fn build_state(config: &RunConfig) -> Result<TwoParticleState> {
    let (alpha, beta) = config.state.amplitudes();
    Ok(build_epr_state(config.state.system.spec(), alpha, beta, config.state.statistics.into())?)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output documents serialize");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct FormDoc<'a> {
    #[serde(flatten)]
    state: &'a LabeledBipartiteState,
    ket: String,
}

impl<'a> FormDoc<'a> {
    fn new(state: &'a LabeledBipartiteState, spec: &VariableSpec) -> Self {
        FormDoc { state, ket: state.render(spec) }
    }
}

fn form_rows(forms: &[(&str, &LabeledBipartiteState)]) -> String {
    let rows: Vec<Vec<String>> = forms
        .iter()
        .map(|(name, s)| {
            vec![
                name.to_string(),
                s.label_variable().to_string(),
                s.entangled_variable().to_string(),
                s.c1().re.to_string(),
                s.c1().im.to_string(),
                s.c2().re.to_string(),
                s.c2().im.to_string(),
            ]
        })
        .collect();
    csv_table(&["form", "label_variable", "entangled_variable", "c1_re", "c1_im", "c2_re", "c2_im"], &rows)
}

fn dualize(config: &RunConfig) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        state: &'a TwoParticleState,
        a_form: FormDoc<'a>,
        b_form: FormDoc<'a>,
        /// `c2` of the B-form over `c2` of the A-form.
        exchange_sign: f64,
    }
    let s = build_state(config)?;
    let (a, b) = (relabel_by_a(&s)?, relabel_by_b(&s)?);
    Ok(match config.format {
        Format::Json => json(&Doc {
            state: &s,
            a_form: FormDoc::new(&a, s.spec()),
            b_form: FormDoc::new(&b, s.spec()),
            exchange_sign: s.statistics().exchange_sign(),
        }),
        Format::Csv => form_rows(&[("a", &a), ("b", &b)]),
    })
}

fn dualize_nip(config: &RunConfig) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        species: [&'static str; 2],
        a_form: FormDoc<'a>,
        b_form: FormDoc<'a>,
    }
    let (alpha, beta) = config.state.amplitudes();
    let s = TwoSpeciesState::epr_analogue(alpha, beta)?;
    let a = s.relabel_by_a()?;
    let b = attempt_relabel_by_b_nip(&s)?;
    let spec = config.state.system.spec();
    Ok(match config.format {
        Format::Json => json(&Doc { species: ["c", "d"], a_form: FormDoc::new(&a, &spec), b_form: FormDoc::new(&b, &spec) }),
        Format::Csv => form_rows(&[("a", &a), ("b", &b)]),
    })
}

fn settings_mode(choice: &SettingsChoice) -> &'static str {
    match choice {
        SettingsChoice::Canonical => "canonical",
        SettingsChoice::Optimal => "optimal",
        SettingsChoice::Explicit { .. } => "explicit",
    }
}

fn chsh(config: &RunConfig) -> Result<String> {
    #[derive(Serialize)]
    struct Doc {
        form: Form,
        statistics: Statistics,
        settings_mode: &'static str,
        result: ChshResult,
        #[serde(skip_serializing_if = "Option::is_none")]
        max_abs_s_analytic: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        max_abs_s_searched: Option<f64>,
    }
    let s = build_state(config)?;
    let label = match config.form {
        Form::A => Variable::A,
        Form::B => Variable::B,
    };
    let dual = relabel(&s, label)?;
    let (result, analytic, searched) = match config.settings.fixed() {
        Some(settings) => (bell_expectation(&dual, &settings), None, None),
        None => {
            let opt = chsh_optimal(&dual);
            (opt.result, Some(opt.analytic), Some(opt.searched))
        }
    };
    let doc = Doc {
        form: config.form,
        statistics: s.statistics(),
        settings_mode: settings_mode(&config.settings),
        result,
        max_abs_s_analytic: analytic,
        max_abs_s_searched: searched,
    };
    Ok(match config.format {
        Format::Json => json(&doc),
        Format::Csv => {
            let e = doc.result.correlators.as_array();
            let row = vec![
                format!("{:?}", doc.form).to_lowercase(),
                statistics_name(doc.statistics).to_string(),
                doc.settings_mode.to_string(),
                e[0].to_string(),
                e[1].to_string(),
                e[2].to_string(),
                e[3].to_string(),
                doc.result.bell_expectation.to_string(),
                analytic.map(|x| x.to_string()).unwrap_or_default(),
            ];
            csv_table(
                &["form", "statistics", "settings_mode", "e_ab", "e_ab_prime", "e_a_prime_b", "e_a_prime_b_prime", "s", "max_abs_s"],
                &[row],
            )
        }
    })
}

fn statistics_name(s: Statistics) -> &'static str {
    match s {
        Statistics::Boson => "boson",
        Statistics::Fermion => "fermion",
    }
}

fn sign_report(config: &RunConfig) -> Result<String> {
    let s = build_state(config)?;
    let settings = config.settings.fixed().expect("validated: fixed settings");
    let report = sign_difference_report(&s, &settings)?;
    Ok(match config.format {
        Format::Json => json(&report),
        Format::Csv => csv_table(
            &["statistics", "s_a", "s_b", "ratio_sign"],
            &[vec![
                statistics_name(report.statistics).to_string(),
                report.s_a.to_string(),
                report.s_b.to_string(),
                report.ratio_sign.to_string(),
            ]],
        ),
    })
}

fn sample(config: &RunConfig) -> Result<String> {
    #[derive(Serialize)]
    struct Doc {
        routed: RoutedPair,
        exact_s: f64,
        estimate: ChshEstimate,
        record: CoincidenceRecord,
    }
    let s = build_state(config)?;
    let routed = route_through_pbs(&s, config.routing.into())?;
    let settings = match config.settings.fixed() {
        Some(settings) => settings,
        None => chsh_optimal(&routed.state).settings,
    };
    let record = sample_coincidences_with(&routed.state, &settings, config.shots, config.seed, config.efficiency, Execution::default())?;
    let estimate = estimate_chsh(&record)?;
    let exact_s = bell_expectation(&routed.state, &settings).bell_expectation;
    Ok(match config.format {
        Format::Json => json(&Doc { routed, exact_s, estimate, record }),
        Format::Csv => record.to_csv(),
    })
}

fn sweep(config: &RunConfig) -> Result<String> {
    let s = build_state(config)?;
    let mode = match config.settings {
        SettingsChoice::Canonical => SettingsMode::FixedCanonical,
        _ => SettingsMode::Optimal,
    };
    let rows = sweep_transition(&s, &config.sweep_gammas(), mode)?;
    Ok(match config.format {
        Format::Json => json(&rows),
        Format::Csv => sweep_to_csv(&rows),
    })
}
