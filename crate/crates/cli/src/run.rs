//! Pipelines behind `dce run`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dce_core::{
    asymptotic_for, asymptotic_n, classify_regime, converged_pdf, covariance_at, covariance_from_summary,
    distribution_moments, evolve_summary, exact_pdf, invariant_squeezing, number_variance, pulse_coefficients,
    resonance_period, simulate, CovarianceState, Error, IntegrationOptions, PhotonDistribution, PulseTrain, Warning,
};
use rayon::prelude::*;
use thiserror::Error as ThisError;

use crate::config::{ConfigError, ExperimentConfig, Mode, Period, StateSpec};
use crate::table::{config_hash, fmt_value, header};

pub const SUMMARY_COLUMNS: &[&str] = &[
    "tau",
    "delta",
    "N",
    "S",
    "sigma_N",
    "mu",
    "nu",
    "lambda",
    "phi",
    "N_asymptote",
    "T",
    "n",
    "G",
    "G0",
];

#[derive(Debug, ThisError)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{error}\n  while: {stage}\n  remedy: {}", remedy(.error))]
    Core { error: Error, stage: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

fn remedy(e: &Error) -> &'static str {
    match e {
        Error::Domain { .. } => "bring the named parameter into its allowed range",
        Error::InvalidState { .. } => "supply a physical state: positive variances and Delta >= 1/4",
        Error::Precondition { .. } => "adjust the inputs named in the message",
        Error::Integration { .. } => "check the pulse shape, the period and t_end",
        Error::NumericalConsistency { .. } => "use smaller pulses or the pulsetrain closed form",
        Error::Regime { .. } => "use the exact distribution or parameters inside the formula's regime",
        Error::Precision { .. } => "lower m_max or the photon number",
        Error::Truncation { .. } => "turn the oracle column off or lower the photon number",
        Error::Range { .. } => "reduce n or nu so that 2 n nu stays below about 700",
    }
}

impl RunError {
    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io(_) => 3,
            RunError::Pool(_) => 4,
            RunError::Core { error, .. } => match error {
                Error::Domain { .. } => 10,
                Error::InvalidState { .. } => 11,
                Error::Precondition { .. } => 12,
                Error::Integration { .. } => 13,
                Error::NumericalConsistency { .. } => 14,
                Error::Regime { .. } => 15,
                Error::Precision { .. } => 16,
                Error::Truncation { .. } => 17,
                Error::Range { .. } => 18,
            },
        }
    }
}

trait Stage<T> {
    fn at(self, stage: &str) -> Result<T, RunError>;
}

impl<T> Stage<T> for dce_core::Result<T> {
    fn at(self, stage: &str) -> Result<T, RunError> {
        self.map_err(|error| RunError::Core {
            error,
            stage: stage.into(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Sweep worker count; `None` uses every core.
    pub workers: Option<usize>,
}

/// Distribution tables of one point.
#[derive(Debug, Clone)]
pub struct Distributions {
    pub exact: PhotonDistribution,
    pub asymptotic: Option<(PhotonDistribution, &'static str)>,
    pub oracle: Option<PhotonDistribution>,
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone)]
pub struct Point {
    pub state: CovarianceState,
    /// Values in [`SUMMARY_COLUMNS`] order followed by the moments.
    pub summary: Vec<Option<f64>>,
    pub distributions: Option<Distributions>,
    /// `(pulse index, t, N, Delta, S)` at each pulse start and the end.
    pub trajectory: Option<Vec<(usize, f64, f64, f64, f64)>>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub points: Vec<Point>,
    pub hash: String,
}

struct TrainRun {
    state: CovarianceState,
    nu: f64,
    lambda: f64,
    phi: f64,
    period: f64,
    n: u64,
    trajectory: Option<Vec<(usize, f64, f64, f64, f64)>>,
}

fn note_all(notes: &mut Vec<String>, w: &[Warning]) {
    notes.extend(w.iter().map(|w| w.to_string()));
}

fn train_run(cfg: &ExperimentConfig, source: Mode, notes: &mut Vec<String>) -> Result<TrainRun, RunError> {
    let n = cfg.n.expect("validated");
    let (nu, lambda, phi) = match &cfg.pulse {
        Some(p) => {
            note_all(notes, &p.warnings());
            let c = pulse_coefficients(p, cfg.omega0).at("pulse coefficients (pulse shape, omega0)")?;
            (c.nu, c.lambda, c.phi)
        }
        None => {
            let (nu, lambda) = cfg.coefficients.expect("validated");
            (nu, lambda, cfg.phi.unwrap_or(0.0))
        }
    };
    let resonant = resonance_period(cfg.omega0, phi, cfg.resonance_m).at("resonance period (omega0, phi, resonance_m)")?;
    let period = match cfg.period {
        Period::Auto => resonant,
        Period::Fixed(t) => t,
    };
    if source == Mode::Pulsetrain {
        if (period - resonant).abs() > 1e-12 * resonant {
            notes.push(format!("the closed form assumes the resonant period T = {resonant:?}, not {period:?}"));
        }
        let s = evolve_summary(nu, lambda, cfg.g, cfg.g0, n)
            .at("pulse-train closed form (nu, lambda, G, G0, n)")?
            .with_phi(phi);
        note_all(notes, &s.warnings);
        let state = covariance_from_summary(&s).at("pulse-train covariance (nu, lambda, n)")?;
        return Ok(TrainRun {
            state,
            nu,
            lambda,
            phi,
            period,
            n,
            trajectory: None,
        });
    }
    let pulse = cfg.pulse.clone().expect("validated");
    let train = PulseTrain::new(pulse, period, n as usize).at("pulse train (period, n)")?;
    let t_end = cfg.t_end.unwrap_or_else(|| train.end_time());
    let traj = simulate(&train, cfg.omega0, cfg.g, t_end, &IntegrationOptions::default())
        .at("mode dynamics (pulse shape, period, n, G, t_end)")?;
    note_all(notes, &traj.warnings);
    let mut times: Vec<(usize, f64)> = (0..train.count())
        .map(|k| (k, train.pulse_start(k)))
        .filter(|&(_, t)| t < t_end)
        .collect();
    times.push((train.count(), t_end));
    let mut rows = Vec::with_capacity(times.len());
    for (k, t) in times {
        let s = covariance_at(&traj, t, cfg.g0).at("covariance assembly (G0)")?;
        rows.push((k, t, s.mean_photons(), s.delta(), invariant_squeezing(&s).s));
    }
    let state = covariance_at(&traj, t_end, cfg.g0).at("covariance assembly (G0)")?;
    Ok(TrainRun {
        state,
        nu,
        lambda,
        phi,
        period,
        n,
        trajectory: Some(rows),
    })
}

fn direct_state(spec: &StateSpec) -> dce_core::Result<CovarianceState> {
    match *spec {
        StateSpec::Thermal { n_mean } => CovarianceState::thermal(n_mean),
        StateSpec::Squeezed { r } => CovarianceState::squeezed_vacuum(r),
        StateSpec::Invariants { tau, delta } => CovarianceState::from_invariants(tau, delta),
        StateSpec::Covariance {
            sigma_xx,
            sigma_pp,
            sigma_xp,
        } => CovarianceState::new(sigma_xx, sigma_pp, sigma_xp),
        StateSpec::Pulsetrain | StateSpec::Dynamics => unreachable!("train sources are run, not built"),
    }
}

/// Run the pipeline of a single-point config.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Point, RunError> {
    let mut notes = Vec::new();
    let source = match (cfg.mode, &cfg.state) {
        (Mode::Dynamics | Mode::Pulsetrain, _) => Some(cfg.mode),
        (_, Some(StateSpec::Pulsetrain)) => Some(Mode::Pulsetrain),
        (_, Some(StateSpec::Dynamics)) => Some(Mode::Dynamics),
        _ => None,
    };
    let train = match source {
        Some(m) => Some(train_run(cfg, m, &mut notes)?),
        None => None,
    };
    let state = match &train {
        Some(t) => t.state,
        None => direct_state(cfg.state.as_ref().expect("validated")).at("state construction (state keys)")?,
    };

    let wants_pdf = matches!(cfg.mode, Mode::Pdf | Mode::Compare) || cfg.moments > 0;
    let distributions = if wants_pdf {
        let exact = exact_pdf(&state, cfg.m_max).at("exact distribution (state, m_max)")?;
        note_all(&mut notes, &exact.warnings);
        let (asymptotic, oracle) = if cfg.mode == Mode::Compare {
            let a = asymptotic_for(&state, exact.m_max()).at("asymptotic distribution (state, m_max)")?;
            note_all(&mut notes, &a.warnings);
            let o = if cfg.oracle {
                Some(converged_pdf(&state, exact.m_max(), 1e-10, 1e-12).at("Fock-space oracle (state, m_max)")?)
            } else {
                None
            };
            (Some((a, classify_regime(&state).name())), o)
        } else {
            (None, None)
        };
        Some(Distributions {
            exact,
            asymptotic,
            oracle,
        })
    } else {
        None
    };

    let report = invariant_squeezing(&state);
    let n_asym = match &train {
        Some(t) => match asymptotic_n(t.nu, t.lambda, cfg.g, cfg.g0, t.n) {
            Ok(e) => {
                note_all(&mut notes, &e.warnings);
                Some(e.value)
            }
            Err(e @ Error::Regime { .. }) => {
                notes.push(format!("no growth asymptote: {e}"));
                None
            }
            Err(e) => return Err(e).at("photon-number asymptote (nu, lambda, n)"),
        },
        None => None,
    };
    let t = train.as_ref();
    let mut summary = vec![
        Some(state.tau()),
        Some(state.delta()),
        Some(state.mean_photons()),
        Some(report.s),
        Some(number_variance(&state)),
        Some(state.derived().purity),
        t.map(|t| t.nu),
        t.map(|t| t.lambda),
        t.map(|t| t.phi),
        n_asym,
        t.map(|t| t.period),
        t.map(|t| t.n as f64),
        Some(cfg.g),
        Some(cfg.g0),
    ];
    if let Some(d) = &distributions {
        for k in 1..=cfg.moments {
            let m = distribution_moments(&d.exact, k).at("distribution moments (moments, m_max)")?;
            summary.push(Some(m.value));
        }
    }
    Ok(Point {
        state,
        summary,
        distributions,
        trajectory: train.and_then(|t| t.trajectory),
        notes,
    })
}

fn summary_columns(cfg: &ExperimentConfig) -> String {
    let mut cols: Vec<String> = SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend((1..=cfg.moments).map(|k| format!("m{k}")));
    cols.join(",")
}

fn row(values: &[Option<f64>]) -> String {
    values.iter().map(|v| fmt_value(*v)).collect::<Vec<_>>().join(",")
}

fn distribution_table(d: &Distributions) -> String {
    let mut out = String::from("m,f_exact");
    if d.asymptotic.is_some() {
        out.push_str(",f_asymptotic,regime,abs_diff");
    }
    if d.oracle.is_some() {
        out.push_str(",f_oracle");
    }
    out.push('\n');
    for (m, &f) in d.exact.values.iter().enumerate() {
        write!(out, "{m},{}", fmt_value(Some(f))).unwrap();
        if let Some((a, regime)) = &d.asymptotic {
            let fa = a.values[m];
            write!(out, ",{},{regime},{}", fmt_value(Some(fa)), fmt_value(Some((f - fa).abs()))).unwrap();
        }
        if let Some(o) = &d.oracle {
            write!(out, ",{}", fmt_value(o.values.get(m).copied())).unwrap();
        }
        out.push('\n');
    }
    out
}

fn dedup(notes: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in notes {
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

fn write(path: &Path, text: &str, files: &mut Vec<PathBuf>) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    files.push(path.to_path_buf());
    Ok(())
}

/// Evaluate the config and write its tables under `opts.out_dir`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let canonical = cfg.canonical();
    let hash = config_hash(&canonical, cfg.pulse_text());
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| RunError::Io(format!("{}: {e}", opts.out_dir.display())))?;
    let out = |suffix: &str| opts.out_dir.join(format!("{}_{suffix}.csv", cfg.name));
    let mut files = Vec::new();

    if let Some(sweep) = &cfg.sweep {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers.unwrap_or(0))
            .build()
            .map_err(|e| RunError::Pool(e.to_string()))?;
        let results: Vec<Result<Point, RunError>> =
            pool.install(|| sweep.points.par_iter().map(|(_, p)| evaluate(p)).collect());
        let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        let notes = dedup(
            sweep
                .points
                .iter()
                .zip(&points)
                .flat_map(|((v, _), p)| p.notes.iter().map(move |n| format!("{} = {v}: {n}", sweep.key))),
        );
        let mut text = header(&hash, &canonical, &notes);
        let first = &sweep.points.first().expect("sweep has points").1;
        writeln!(text, "{},{}", sweep.key, summary_columns(first)).unwrap();
        for ((v, _), p) in sweep.points.iter().zip(&points) {
            writeln!(text, "{v},{}", row(&p.summary)).unwrap();
        }
        write(&out("sweep"), &text, &mut files)?;
        return Ok(RunReport { files, points, hash });
    }

    let point = evaluate(cfg)?;
    let notes = dedup(point.notes.iter().cloned());
    let head = header(&hash, &canonical, &notes);
    let summary = format!("{head}{}\n{}\n", summary_columns(cfg), row(&point.summary));
    write(&out("summary"), &summary, &mut files)?;
    if matches!(cfg.mode, Mode::Pdf | Mode::Compare) {
        let d = point.distributions.as_ref().expect("pdf modes build distributions");
        write(&out("pdf"), &format!("{head}{}", distribution_table(d)), &mut files)?;
    }
    if let Some(rows) = &point.trajectory {
        let mut text = format!("{head}pulse,t,N,delta,S\n");
        for &(k, t, n, d, s) in rows {
            writeln!(text, "{k},{}", row(&[Some(t), Some(n), Some(d), Some(s)])).unwrap();
        }
        write(&out("trajectory"), &text, &mut files)?;
    }
    Ok(RunReport {
        files,
        points: vec![point],
        hash,
    })
}
