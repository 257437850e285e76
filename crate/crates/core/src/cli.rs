//! Batch commands behind the `qgspec` binary.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigDoc, ConfigError, Problem};
use crate::graph::GraphError;
use crate::oracle::{verify_spectrum, VerificationReport, DEFAULT_OVERSAMPLING};
use crate::series::{SeriesError, SpectralSeries, DEFAULT_MARGIN};
use crate::solver::{build_chain, descend, SolverError, Window};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

/// Grid points per leading half-period used by `sample`.
pub const DEFAULT_SAMPLE_DENSITY: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Series,
    Verify,
    Sample,
}

/// Command-line overrides of the document's window and options.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub kmin: Option<f64>,
    pub kmax: Option<f64>,
    pub margin: Option<f64>,
    pub oversampling: Option<usize>,
    pub density: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(SolverError::DegenerateSpectrum { .. })
            | CliError::Solver(SolverError::DegenerateEndpoint { .. }) => EXIT_DEGENERATE,
            CliError::Io(_) => EXIT_FAILURE,
            _ => EXIT_CONFIG,
        }
    }
}

struct Settings {
    window: Option<Window>,
    margin: f64,
    oversampling: usize,
    density: usize,
}

impl Settings {
    fn resolve(doc: &ConfigDoc, o: &Overrides) -> Result<Self, CliError> {
        let window = match (o.kmin, o.kmax, doc.window) {
            (None, None, w) => w,
            (lo, hi, w) => {
                let lo = lo.or(w.map(|w| w.lo)).unwrap_or(0.0);
                let hi = hi.or(w.map(|w| w.hi)).ok_or_else(|| {
                    CliError::Usage("--kmax is required when the config has no window".into())
                })?;
                Some(Window::new(lo, hi))
            }
        };
        if let Some(w) = window {
            w.validate()?;
        }
        let margin = o.margin.or(doc.margin).unwrap_or(DEFAULT_MARGIN);
        if !(margin > 0.0 && margin < 1.0) {
            return Err(SeriesError::InvalidMargin(margin).into());
        }
        let oversampling = o
            .oversampling
            .or(doc.oversampling)
            .unwrap_or(DEFAULT_OVERSAMPLING);
        if oversampling < 8 {
            return Err(CliError::Usage("oversampling must be at least 8".into()));
        }
        let density = o.density.unwrap_or(DEFAULT_SAMPLE_DENSITY);
        if density == 0 {
            return Err(CliError::Usage("density must be positive".into()));
        }
        Ok(Self {
            window,
            margin,
            oversampling,
            density,
        })
    }

    fn window(&self) -> Result<Window, CliError> {
        self.window.ok_or_else(|| {
            CliError::Usage("a window is required (config \"window\" or --kmin/--kmax)".into())
        })
    }
}

fn level_zero(doc: &ConfigDoc) -> Result<SpectralSeries, CliError> {
    Ok(match &doc.problem {
        Problem::Graph(g) => g.secular_series()?,
        Problem::Series(s) => s.clone(),
    })
}

/// Formats a float with 17 significant digits.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct SeriesBody {
    s0: f64,
    phi0: f64,
    terms: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct WindowBody {
    kmin: f64,
    kmax: f64,
}

#[derive(Serialize)]
struct OptionsBody {
    margin: f64,
}

#[derive(Serialize)]
struct SeriesReport {
    series: SeriesBody,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<WindowBody>,
    options: OptionsBody,
    regularization_order: usize,
    regularity_sum: f64,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    #[serde(flatten)]
    report: &'a VerificationReport,
    clean: bool,
    window: WindowBody,
}

/// Runs one command and writes its output; returns the process exit code.
pub fn run(
    command: Command,
    doc: &ConfigDoc,
    overrides: &Overrides,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let settings = Settings::resolve(doc, overrides)?;
    let series = level_zero(doc)?;
    match command {
        Command::Solve => {
            let chain = build_chain(&series, settings.margin)?;
            let spectrum = descend(&chain, settings.window()?)?;
            writeln!(out, "n,k_n,E_n,enclosure")?;
            for e in &spectrum.entries {
                writeln!(
                    out,
                    "{},{},{},{}",
                    e.index,
                    full(e.wavenumber),
                    full(e.energy),
                    full(e.half_width)
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Series => {
            let chain = build_chain(&series, settings.margin)?;
            let report = SeriesReport {
                series: SeriesBody {
                    s0: series.leading_action(),
                    phi0: series.leading_phase(),
                    terms: series
                        .terms()
                        .iter()
                        .map(|t| [t.action, t.amplitude, t.phase])
                        .collect(),
                },
                window: settings.window.map(|w| WindowBody {
                    kmin: w.lo,
                    kmax: w.hi,
                }),
                options: OptionsBody {
                    margin: settings.margin,
                },
                regularization_order: chain.order(),
                regularity_sum: series.regularity_sum(),
            };
            serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let window = settings.window()?;
            let report = verify_spectrum(&series, window, settings.margin, settings.oversampling)?;
            let body = VerifyReport {
                report: &report,
                clean: report.is_clean(),
                window: WindowBody {
                    kmin: window.lo,
                    kmax: window.hi,
                },
            };
            serde_json::to_writer_pretty(&mut *out, &body).map_err(io::Error::from)?;
            writeln!(out)?;
            Ok(if report.is_clean() {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            })
        }
        Command::Sample => {
            let window = settings.window()?;
            let chain = build_chain(&series, settings.margin)?;
            let step = PI / (series.leading_action() * settings.density as f64);
            let count = ((window.hi - window.lo) / step).floor() as usize;
            let header: Vec<String> = (0..chain.levels().len()).map(|m| format!("g{m}")).collect();
            writeln!(out, "k,{}", header.join(","))?;
            for i in 0..=count {
                let k = window.lo + i as f64 * step;
                let values: Vec<String> =
                    chain.levels().iter().map(|s| full(s.evaluate(k))).collect();
                writeln!(out, "{},{}", full(k), values.join(","))?;
            }
            Ok(EXIT_OK)
        }
    }
}
