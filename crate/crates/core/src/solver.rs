//! Bootstrap-and-descent root finding.
//!
//! The `m`-th normalized derivative of a cosine series loses amplitude in every
//! subleading term by a factor `(S_j/S0)^m`, so some level `M` is regular:
//! its term amplitudes sum below 1. At a regular level the leading cosine
//! dominates at its own extrema, which therefore separate consecutive roots.
//! The roots of level `m` are the extrema of level `m - 1`; between two
//! consecutive extrema a function is monotone and holds at most one root, found
//! by a sign test and bisection. Retracing `M -> 0` yields every root of the
//! original series, each inside a certified bracket.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{GraphError, QuantumGraph};
use crate::series::{
    derivative_series, regularity_sum, regularization_order, SeriesError, SpectralSeries,
};

/// Endpoint values at or below this magnitude indicate a (near) double root.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;
/// Relative bracket width at which bisection hands over to Newton polishing.
pub const BISECTION_WIDTH: f64 = 1e-13;
/// Phase `S0 k` below which a root counts as the origin.
///
/// Secular series of graphs often vanish to higher order at `k = 0`; rounding
/// then produces sign changes a few ulps-in-phase away from it.
pub const ORIGIN_PHASE: f64 = 1e-6;
/// Minimum magnitude of every level at the artificial domain edges.
const EDGE_GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("series is not regular (amplitude sum {0} >= 1)")]
    NotRegular(f64),
    #[error("cell [{lower}, {upper}] is empty or inverted")]
    InvalidCell { lower: f64, upper: f64 },
    #[error(
        "series nearly vanishes at cell endpoint k = {k} (value {value:.3e}): near-double root"
    )]
    DegenerateEndpoint { k: f64, value: f64 },
    #[error(
        "degenerate spectrum: level {level} has a near-double root at k = {k} (value {value:.3e})"
    )]
    DegenerateSpectrum { level: usize, k: f64, value: f64 },
    #[error("window [{lo}, {hi}] is empty or negative")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Errors of the full graph-to-spectrum pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Closed wavenumber interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.lo.is_finite() && self.hi.is_finite() && self.lo >= 0.0 && self.hi > self.lo {
            Ok(())
        } else {
            Err(SolverError::EmptyWindow {
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Levels `g^(0) .. g^(M)` of the derivative chain.
#[derive(Debug, Clone)]
pub struct DescentChain {
    levels: Vec<SpectralSeries>,
    margin: f64,
}

impl DescentChain {
    pub fn levels(&self) -> &[SpectralSeries] {
        &self.levels
    }

    /// The regularization order `M`.
    pub fn order(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn base(&self) -> &SpectralSeries {
        &self.levels[0]
    }

    pub fn regular(&self) -> &SpectralSeries {
        self.levels.last().expect("chain has at least one level")
    }
}

/// Root of a series inside a certified bracket `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnclosedRoot {
    pub k: f64,
    pub lower: f64,
    pub upper: f64,
}

impl EnclosedRoot {
    /// Half-width of the smallest interval centred on `k` containing the bracket.
    pub fn half_width(&self) -> f64 {
        (self.k - self.lower).max(self.upper - self.k)
    }
}

/// A separator cell and the root it holds, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCell {
    pub lower: f64,
    pub upper: f64,
    pub root: Option<EnclosedRoot>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEntry {
    /// Position in the window, starting at 1.
    pub index: usize,
    pub wavenumber: f64,
    pub energy: f64,
    pub half_width: f64,
}

/// Eigen-wavenumbers in a window, strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    pub entries: Vec<SpectralEntry>,
}

impl Spectrum {
    fn from_roots(mut roots: Vec<EnclosedRoot>) -> Self {
        roots.sort_by(|a, b| a.k.total_cmp(&b.k));
        let entries = roots
            .into_iter()
            .enumerate()
            .map(|(i, r)| SpectralEntry {
                index: i + 1,
                wavenumber: r.k,
                energy: r.k * r.k,
                half_width: r.half_width(),
            })
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.wavenumber).collect()
    }
}

/// Extremal points `(q pi - phi0)/S0` of the leading cosine inside `[lo, hi]`.
///
/// At a regular level the series has the sign `(-1)^q` of the leading cosine
/// there, so every gap between consecutive separators holds exactly one root.
pub fn base_separators(series: &SpectralSeries, lo: f64, hi: f64) -> Result<Vec<f64>, SolverError> {
    let sum = regularity_sum(series);
    if sum >= 1.0 {
        return Err(SolverError::NotRegular(sum));
    }
    let s0 = series.leading_action();
    let phi = series.leading_phase();
    let first = ((s0 * lo + phi) / PI).ceil() as i64;
    let last = ((s0 * hi + phi) / PI).floor() as i64;
    Ok((first..=last)
        .map(|q| (q as f64 * PI - phi) / s0)
        .filter(|&k| k >= lo && k <= hi)
        .collect())
}

/// Root finder for one level, reusing the derivative series for Newton steps.
struct CellSolver<'a> {
    series: &'a SpectralSeries,
    slope: &'a SpectralSeries,
}

impl CellSolver<'_> {
    fn value(&self, k: f64) -> f64 {
        self.series.evaluate(k)
    }

    fn derivative(&self, k: f64) -> f64 {
        self.series.leading_action() * self.slope.evaluate(k)
    }

    fn endpoint(&self, k: f64) -> Result<f64, SolverError> {
        let value = self.value(k);
        if value.abs() <= DEGENERACY_TOLERANCE {
            Err(SolverError::DegenerateEndpoint { k, value })
        } else {
            Ok(value)
        }
    }

    fn solve(&self, lower: f64, upper: f64) -> Result<Option<EnclosedRoot>, SolverError> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(SolverError::InvalidCell { lower, upper });
        }
        let g_lower = self.endpoint(lower)?;
        let g_upper = self.endpoint(upper)?;
        if g_lower.signum() == g_upper.signum() {
            return Ok(None);
        }
        let (mut a, mut b) = (lower, upper);
        let negative_left = g_lower < 0.0;

        loop {
            let mid = a + 0.5 * (b - a);
            if b - a <= BISECTION_WIDTH * mid.abs().max(1.0) || mid <= a || mid >= b {
                break;
            }
            let g = self.value(mid);
            if g == 0.0 {
                return Ok(Some(EnclosedRoot {
                    k: mid,
                    lower: mid,
                    upper: mid,
                }));
            }
            if (g < 0.0) == negative_left {
                a = mid;
            } else {
                b = mid;
            }
        }

        // Safeguarded Newton polish: iterates are clamped into the bracket and
        // every evaluated point shrinks it.
        let exact = |k: f64| EnclosedRoot {
            k,
            lower: k,
            upper: k,
        };
        let mut x = a + 0.5 * (b - a);
        for _ in 0..6 {
            let gx = self.value(x);
            if gx == 0.0 {
                return Ok(Some(exact(x)));
            }
            if (gx < 0.0) == negative_left {
                a = a.max(x);
            } else {
                b = b.min(x);
            }
            let next = x - gx / self.derivative(x);
            if !next.is_finite() {
                break;
            }
            let next = next.clamp(a, b);
            let settled = (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(1.0);
            x = next;
            if settled {
                break;
            }
        }

        // Probe outward from the estimate until the bracket is pinned around it.
        let mut delta = f64::EPSILON * x.abs().max(1.0);
        loop {
            let (lo, hi) = (x - delta, x + delta);
            let mut probed = false;
            for p in [lo, hi] {
                if p > a && p < b {
                    probed = true;
                    let gp = self.value(p);
                    if gp == 0.0 {
                        return Ok(Some(exact(p)));
                    }
                    if (gp < 0.0) == negative_left {
                        a = p;
                    } else {
                        b = p;
                    }
                }
            }
            if !probed {
                break;
            }
            delta *= 4.0;
        }
        Ok(Some(EnclosedRoot {
            k: x.clamp(a, b),
            lower: a,
            upper: b,
        }))
    }
}

/// The unique root of `series` in `(lower, upper)` if the endpoint signs differ.
///
/// The cell must be free of extrema of `series` (e.g. bounded by consecutive
/// roots of its derivative), so equal endpoint signs mean the cell is empty.
pub fn root_in_cell(
    series: &SpectralSeries,
    lower: f64,
    upper: f64,
) -> Result<Option<EnclosedRoot>, SolverError> {
    let slope = derivative_series(series);
    CellSolver {
        series,
        slope: &slope,
    }
    .solve(lower, upper)
}

/// Computes the regularization order and materializes levels `0..=M`.
pub fn build_chain(series: &SpectralSeries, margin: f64) -> Result<DescentChain, SolverError> {
    let order = regularization_order(series, margin)?;
    let mut levels = Vec::with_capacity(order + 1);
    levels.push(series.clone());
    for _ in 0..order {
        let next = derivative_series(levels.last().expect("non-empty"));
        levels.push(next);
    }
    Ok(DescentChain { levels, margin })
}

/// Moves an artificial domain edge until no level nearly vanishes there.
fn guarded_edge(levels: &[SpectralSeries], mut k: f64, step: f64) -> f64 {
    for _ in 0..64 {
        if levels.iter().all(|s| s.evaluate(k).abs() > EDGE_GUARD) {
            break;
        }
        k += step;
    }
    k
}

fn extract_level(
    series: &SpectralSeries,
    slope: &SpectralSeries,
    level: usize,
    separators: &[f64],
) -> Result<Vec<RootCell>, SolverError> {
    let solver = CellSolver { series, slope };
    separators
        .par_windows(2)
        .map(|w| {
            let root = solver.solve(w[0], w[1]).map_err(|e| match e {
                SolverError::DegenerateEndpoint { k, value } => {
                    SolverError::DegenerateSpectrum { level, k, value }
                }
                other => other,
            })?;
            Ok(RootCell {
                lower: w[0],
                upper: w[1],
                root,
            })
        })
        .collect()
}

fn with_edges(lo: f64, interior: impl IntoIterator<Item = f64>, hi: f64) -> Vec<f64> {
    let mut points = vec![lo];
    points.extend(interior.into_iter().filter(|&k| k > lo && k < hi));
    points.push(hi);
    points
}

/// Per-level separator cells produced by [`descend_cells`], level `M` first.
#[derive(Debug, Clone)]
pub struct DescentTrace {
    /// Padded search domain shared by every level.
    pub domain: (f64, f64),
    /// `cells[i]` belongs to level `M - i`.
    pub cells: Vec<Vec<RootCell>>,
}

impl DescentTrace {
    pub fn roots_at(&self, level: usize) -> Vec<f64> {
        let order = self.cells.len() - 1;
        self.cells[order - level]
            .iter()
            .filter_map(|c| c.root.map(|r| r.k))
            .collect()
    }
}

/// Lower clamp of the search domain for a series with leading action `s0`.
pub fn origin_floor(s0: f64) -> f64 {
    ORIGIN_PHASE / s0
}

/// Runs the descent and keeps every level's cells.
pub fn descend_cells(chain: &DescentChain, window: Window) -> Result<DescentTrace, SolverError> {
    window.validate()?;
    let levels = chain.levels();
    let order = chain.order();
    let s0 = chain.base().leading_action();
    let pad = (order + 1) as f64 * PI / s0;
    let nudge = 1e-3 * PI / s0;

    let floor = origin_floor(s0);
    let lo = (window.lo - pad).max(floor);
    let lo = if lo == floor {
        guarded_edge(levels, lo, nudge.min(1e-6))
    } else {
        guarded_edge(levels, lo, -nudge).max(floor)
    };
    let hi = guarded_edge(levels, window.hi + pad, nudge);

    let top_slope = derivative_series(chain.regular());
    let separators = with_edges(lo, base_separators(chain.regular(), lo, hi)?, hi);
    let mut cells = vec![extract_level(
        chain.regular(),
        &top_slope,
        order,
        &separators,
    )?];

    for level in (0..order).rev() {
        let above = cells.last().expect("non-empty");
        let separators = with_edges(lo, above.iter().filter_map(|c| c.root.map(|r| r.k)), hi);
        cells.push(extract_level(
            &levels[level],
            &levels[level + 1],
            level,
            &separators,
        )?);
    }
    Ok(DescentTrace {
        domain: (lo, hi),
        cells,
    })
}

/// Retraces the chain from the regular level to level 0 and returns the roots in `window`.
///
/// A root is reported when its enclosure meets the window.
pub fn descend(chain: &DescentChain, window: Window) -> Result<Spectrum, SolverError> {
    let trace = descend_cells(chain, window)?;
    let roots = trace
        .cells
        .last()
        .expect("non-empty")
        .iter()
        .filter_map(|c| c.root)
        .filter(|r| r.upper >= window.lo && r.lower <= window.hi)
        .collect();
    Ok(Spectrum::from_roots(roots))
}

/// Spectrum of a cosine series over `window`.
pub fn solve_series(
    series: &SpectralSeries,
    window: Window,
    margin: f64,
) -> Result<Spectrum, SolverError> {
    descend(&build_chain(series, margin)?, window)
}

/// Spectrum of a graph: secular series, derivative chain, descent.
pub fn solve_graph(graph: &QuantumGraph, window: Window, margin: f64) -> Result<Spectrum, Error> {
    let series = graph.secular_series()?;
    Ok(solve_series(&series, window, margin)?)
}
