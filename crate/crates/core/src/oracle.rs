//! Brute-force root finding used to cross-check the descent solver.
//!
//! The series is sampled on a grid much finer than the half-period `pi/S0` of
//! its fastest oscillation and every sign change is bisected. Nothing here
//! depends on separators or on the derivative chain.

use std::f64::consts::PI;

use serde::Serialize;

use crate::series::SpectralSeries;
use crate::solver::{origin_floor, solve_series, SolverError, Window};

pub const DEFAULT_OVERSAMPLING: usize = 50;
/// Bracket width at which oracle bisection stops.
pub const ORACLE_WIDTH: f64 = 1e-12;
/// Roots closer than this are paired by [`verify_spectrum`].
pub const PAIRING_TOLERANCE: f64 = 1e-7;

/// Roots of `series` in `window` found by dense sampling and bisection.
///
/// Roots at or below [`origin_floor`] count as the origin and are not reported.
pub fn scan_roots(series: &SpectralSeries, window: Window, oversampling: usize) -> Vec<f64> {
    let oversampling = oversampling.max(8);
    let step = PI / (series.leading_action() * oversampling as f64);
    let steps = ((window.hi - window.lo) / step).ceil().max(1.0) as usize;
    let grid = |i: usize| {
        if i == steps {
            window.hi
        } else {
            window.lo + i as f64 * step
        }
    };

    let mut roots = Vec::new();
    let mut a = grid(0);
    let mut ga = series.evaluate(a);
    if ga == 0.0 {
        roots.push(a);
    }
    for i in 1..=steps {
        let b = grid(i);
        let gb = series.evaluate(b);
        if gb == 0.0 {
            roots.push(b);
        } else if ga != 0.0 && (ga < 0.0) != (gb < 0.0) {
            roots.push(bisect(series, a, b, ga));
        }
        a = b;
        ga = gb;
    }
    let floor = origin_floor(series.leading_action());
    roots.retain(|&k| k > floor);
    roots
}

fn bisect(series: &SpectralSeries, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let negative_left = ga < 0.0;
    while b - a > ORACLE_WIDTH {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = series.evaluate(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == negative_left {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Outcome of pairing solver roots with oracle roots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub matched: usize,
    /// Found by the oracle only.
    pub missing: Vec<f64>,
    /// Found by the solver only.
    pub spurious: Vec<f64>,
    pub max_deviation: f64,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.spurious.is_empty()
    }
}

/// Greedily pairs two sorted root lists within `tolerance`.
pub fn compare_roots(solver: &[f64], oracle: &[f64], tolerance: f64) -> VerificationReport {
    let mut report = VerificationReport {
        matched: 0,
        missing: Vec::new(),
        spurious: Vec::new(),
        max_deviation: 0.0,
    };
    let (mut i, mut j) = (0, 0);
    while i < solver.len() && j < oracle.len() {
        let d = solver[i] - oracle[j];
        if d.abs() <= tolerance {
            report.matched += 1;
            report.max_deviation = report.max_deviation.max(d.abs());
            i += 1;
            j += 1;
        } else if d < 0.0 {
            report.spurious.push(solver[i]);
            i += 1;
        } else {
            report.missing.push(oracle[j]);
            j += 1;
        }
    }
    report.spurious.extend_from_slice(&solver[i..]);
    report.missing.extend_from_slice(&oracle[j..]);
    report
}

/// Solves `series` with the descent method and with [`scan_roots`], and compares.
pub fn verify_spectrum(
    series: &SpectralSeries,
    window: Window,
    margin: f64,
    oversampling: usize,
) -> Result<VerificationReport, SolverError> {
    let solved = solve_series(series, window, margin)?.wavenumbers();
    let scanned = scan_roots(series, window, oversampling);
    Ok(compare_roots(&solved, &scanned, PAIRING_TOLERANCE))
}
