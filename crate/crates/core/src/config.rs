//! JSON problem descriptions.
//!
//! A document describes either a graph or a raw cosine series, plus an
//! optional window and solver options:
//!
//! ```json
//! {
//!   "graph": {
//!     "vertices": [{"id": 0, "bc": "dirichlet"}, {"id": 1, "bc": "delta", "lambda": 0.5}],
//!     "bonds": [{"from": 0, "to": 1, "length": 1.0, "potential_lambda": 0.2}]
//!   },
//!   "window": {"kmin": 0, "kmax": 50},
//!   "options": {"margin": 1e-6, "oversampling": 50}
//! }
//! ```
//!
//! or `"series": {"s0": 1.0, "phi0": 0.0, "terms": [[action, amplitude, phase], ...]}`
//! in place of `"graph"`. Validation reports every problem it finds, each
//! anchored to the line of the offending item.

use std::fmt;

use serde::Deserialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::graph::{BondSpec, GraphError, Item, QuantumGraph, VertexCondition, VertexSpec};
use crate::series::{SpectralSeries, TrigTerm};
use crate::solver::Window;

/// What to solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Graph(QuantumGraph),
    Series(SpectralSeries),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDoc {
    pub problem: Problem,
    pub window: Option<Window>,
    pub margin: Option<f64>,
    pub oversampling: Option<usize>,
}

/// One validation failure; `line` is 1-based, 0 when no location applies.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            f.write_str(&self.message)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config:\n{}", list(.0))]
    Validation(Vec<Violation>),
}

fn list(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Deserialize)]
struct RawDoc<'a> {
    #[serde(borrow)]
    graph: Option<&'a RawValue>,
    #[serde(borrow)]
    series: Option<&'a RawValue>,
    #[serde(borrow)]
    window: Option<&'a RawValue>,
    #[serde(borrow)]
    options: Option<&'a RawValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph<'a> {
    #[serde(borrow)]
    vertices: Vec<&'a RawValue>,
    #[serde(borrow)]
    bonds: Vec<&'a RawValue>,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum BoundaryKind {
    Dirichlet,
    Kirchhoff,
    Delta,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: i64,
    bc: BoundaryKind,
    lambda: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BondDoc {
    from: i64,
    to: i64,
    length: f64,
    #[serde(default)]
    potential_lambda: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesDoc<'a> {
    s0: f64,
    #[serde(default)]
    phi0: f64,
    #[serde(borrow, default)]
    terms: Vec<&'a RawValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowDoc {
    kmin: f64,
    kmax: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsDoc {
    margin: Option<f64>,
    oversampling: Option<usize>,
}

/// Maps byte positions of borrowed sub-slices back to line numbers.
struct Source<'a> {
    text: &'a str,
    violations: Vec<Violation>,
}

impl<'a> Source<'a> {
    fn line_of(&self, raw: &RawValue) -> usize {
        let offset = (raw.get().as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize);
        let offset = offset.min(self.text.len());
        self.text[..offset].matches('\n').count() + 1
    }

    fn report(&mut self, line: usize, message: impl Into<String>) {
        self.violations.push(Violation {
            line,
            message: message.into(),
        });
    }

    fn parse<'r, T: Deserialize<'r>>(&mut self, raw: &'r RawValue, what: &str) -> Option<T> {
        match serde_json::from_str(raw.get()) {
            Ok(v) => Some(v),
            Err(e) => {
                let line = self.line_of(raw) + e.line().saturating_sub(1);
                self.report(line, format!("{what}: {e}"));
                None
            }
        }
    }
}

/// Parses and validates a JSON problem description.
pub fn load_config(text: &str) -> Result<ConfigDoc, ConfigError> {
    let raw: RawDoc = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut src = Source {
        text,
        violations: Vec::new(),
    };

    let problem = match (raw.graph, raw.series) {
        (Some(g), None) => load_graph(&mut src, g).map(Problem::Graph),
        (None, Some(s)) => load_series(&mut src, s).map(Problem::Series),
        (Some(g), Some(_)) => {
            let line = src.line_of(g);
            src.report(line, "exactly one of \"graph\" and \"series\" may be given");
            None
        }
        (None, None) => {
            src.report(0, "one of \"graph\" or \"series\" is required");
            None
        }
    };

    let window = raw.window.and_then(|w| {
        let line = src.line_of(w);
        let doc: WindowDoc = src.parse(w, "window")?;
        let window = Window::new(doc.kmin, doc.kmax);
        if !(doc.kmin.is_finite() && doc.kmin >= 0.0) {
            src.report(line, "window kmin must be >= 0");
        }
        if !(doc.kmax.is_finite() && doc.kmax > doc.kmin) {
            src.report(line, "window kmax must exceed kmin");
        }
        Some(window)
    });

    let (mut margin, mut oversampling) = (None, None);
    if let Some(o) = raw.options {
        let line = src.line_of(o);
        if let Some(doc) = src.parse::<OptionsDoc>(o, "options") {
            if let Some(m) = doc.margin {
                if !(m > 0.0 && m < 1.0) {
                    src.report(line, "margin must lie strictly between 0 and 1");
                }
            }
            if let Some(n) = doc.oversampling {
                if n < 8 {
                    src.report(line, "oversampling must be at least 8");
                }
            }
            margin = doc.margin;
            oversampling = doc.oversampling;
        }
    }

    match problem {
        Some(problem) if src.violations.is_empty() => Ok(ConfigDoc {
            problem,
            window,
            margin,
            oversampling,
        }),
        _ => Err(ConfigError::Validation(src.violations)),
    }
}

fn load_graph(src: &mut Source, raw: &RawValue) -> Option<QuantumGraph> {
    let graph: RawGraph = match serde_json::from_str(raw.get()) {
        Ok(g) => g,
        Err(e) => {
            let line = src.line_of(raw) + e.line().saturating_sub(1);
            src.report(line, format!("graph: {e}"));
            return None;
        }
    };
    let vertex_lines: Vec<usize> = graph.vertices.iter().map(|v| src.line_of(v)).collect();
    let bond_lines: Vec<usize> = graph.bonds.iter().map(|b| src.line_of(b)).collect();
    let graph_line = src.line_of(raw);

    let mut vertices = Vec::new();
    let mut complete = true;
    for (raw_v, &line) in graph.vertices.iter().zip(&vertex_lines) {
        let Some(doc) = src.parse::<VertexDoc>(raw_v, "vertex") else {
            complete = false;
            continue;
        };
        let condition = match (doc.bc, doc.lambda) {
            (BoundaryKind::Dirichlet, None) => VertexCondition::Dirichlet,
            (BoundaryKind::Kirchhoff, None) => VertexCondition::Kirchhoff,
            (BoundaryKind::Delta, Some(l)) => VertexCondition::ScalingDelta(l),
            (BoundaryKind::Delta, None) => {
                src.report(
                    line,
                    format!("vertex {}: delta vertex requires \"lambda\"", doc.id),
                );
                complete = false;
                continue;
            }
            (_, Some(_)) => {
                src.report(
                    line,
                    format!(
                        "vertex {}: \"lambda\" is only valid for delta vertices",
                        doc.id
                    ),
                );
                complete = false;
                continue;
            }
        };
        vertices.push(VertexSpec::new(doc.id, condition));
    }
    let mut bonds = Vec::new();
    for raw_b in &graph.bonds {
        match src.parse::<BondDoc>(raw_b, "bond") {
            Some(doc) => bonds.push(
                BondSpec::new(doc.from, doc.to, doc.length).with_potential(doc.potential_lambda),
            ),
            None => complete = false,
        }
    }
    if !complete {
        return None;
    }

    match QuantumGraph::new(vertices, bonds) {
        Ok(g) => Some(g),
        Err(GraphError::Invalid(vs)) => {
            for v in vs {
                let line = match v.item() {
                    Item::Vertex(i) => vertex_lines[i],
                    Item::Bond(i) => bond_lines[i],
                    Item::Graph => graph_line,
                };
                src.report(line, v.to_string());
            }
            None
        }
        Err(e) => {
            src.report(graph_line, e.to_string());
            None
        }
    }
}

fn load_series(src: &mut Source, raw: &RawValue) -> Option<SpectralSeries> {
    let line = src.line_of(raw);
    let doc: SeriesDoc = src.parse(raw, "series")?;
    if !(doc.s0.is_finite() && doc.s0 > 0.0) {
        src.report(line, "series s0 must be positive");
        return None;
    }
    let mut terms = Vec::with_capacity(doc.terms.len());
    let mut complete = true;
    for raw_t in &doc.terms {
        let term_line = src.line_of(raw_t);
        let Some([action, amplitude, phase]) = src.parse::<[f64; 3]>(raw_t, "term") else {
            complete = false;
            continue;
        };
        let term = TrigTerm::new(action, amplitude, phase);
        if let Err(e) = SpectralSeries::with_level(0, doc.s0, doc.phi0, &[term]) {
            src.report(term_line, e.to_string());
            complete = false;
        }
        terms.push(term);
    }
    if !complete {
        return None;
    }
    match SpectralSeries::with_level(0, doc.s0, doc.phi0, &terms) {
        Ok(s) => Some(s),
        Err(e) => {
            src.report(line, e.to_string());
            None
        }
    }
}
