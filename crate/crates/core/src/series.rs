//! Finite cosine series
//!
//! ```text
//! g(k) = cos(S0 k + phi0) - sum_j a_j cos(S_j k + phi_j),    S_j < S0
//! ```
//!
//! together with its normalized derivative chain. A series at level `m` is the
//! `m`-th derivative of the level-0 series divided by `S0^m`: every phase is
//! advanced by `m pi/2` and every term amplitude carries a factor
//! `(S_j/S0)^m`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use thiserror::Error;

use crate::sum::CompensatedSum;

/// Terms whose action and phase both agree within this tolerance are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;
/// Terms with amplitude below this are dropped.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;
/// Default headroom below 1 required of the regular level.
pub const DEFAULT_MARGIN: f64 = 1e-6;
/// Upper bound on the derivative order searched by [`regularization_order`].
pub const MAX_ORDER: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("leading action must be positive and finite, got {0}")]
    NonpositiveLeadingAction(f64),
    #[error("term action {action} is not below the leading action {leading}")]
    TermActionExceedsLeading { action: f64, leading: f64 },
    #[error("term action must be finite and non-negative, got {0}")]
    InvalidTermAction(f64),
    #[error("term amplitude and phase must be finite")]
    NonFiniteTerm,
    #[error("leading phase must be finite, got {0}")]
    NonFiniteLeadingPhase(f64),
    #[error("margin must lie strictly between 0 and 1, got {0}")]
    InvalidMargin(f64),
    #[error("no regular level found within {0} derivatives")]
    OrderCapExceeded(usize),
}

/// One cosine term `amplitude * cos(action * k + phase)`.
///
/// Inside a [`SpectralSeries`] the amplitude is strictly positive and the
/// phase lies in `[0, 2pi)`. As raw input to [`canonicalize`] the amplitude may
/// carry either sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub action: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl TrigTerm {
    pub fn new(action: f64, amplitude: f64, phase: f64) -> Self {
        Self {
            action,
            amplitude,
            phase,
        }
    }

    #[inline]
    pub fn value(&self, k: f64) -> f64 {
        self.amplitude * (self.action * k + self.phase).cos()
    }
}

/// The cosine series of one derivative level in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSeries {
    level: usize,
    leading_action: f64,
    leading_phase: f64,
    terms: Vec<TrigTerm>,
}

/// Reduces an angle into `[0, 2pi)`.
pub fn reduce_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(TAU - d)
}

/// Builds the canonical level-0 series from raw terms.
///
/// Negative amplitudes are folded into the phase, phases are reduced modulo
/// `2pi`, terms sharing action and phase are merged, negligible terms are
/// dropped and the rest are sorted by action.
pub fn canonicalize(
    leading_action: f64,
    leading_phase: f64,
    raw_terms: &[TrigTerm],
) -> Result<SpectralSeries, SeriesError> {
    SpectralSeries::with_level(0, leading_action, leading_phase, raw_terms)
}

impl SpectralSeries {
    /// Canonical series at an explicit derivative level.
    pub fn with_level(
        level: usize,
        leading_action: f64,
        leading_phase: f64,
        raw_terms: &[TrigTerm],
    ) -> Result<Self, SeriesError> {
        if !(leading_action.is_finite() && leading_action > 0.0) {
            return Err(SeriesError::NonpositiveLeadingAction(leading_action));
        }
        if !leading_phase.is_finite() {
            return Err(SeriesError::NonFiniteLeadingPhase(leading_phase));
        }
        for t in raw_terms {
            if !(t.action.is_finite() && t.action >= 0.0) {
                return Err(SeriesError::InvalidTermAction(t.action));
            }
            if t.action >= leading_action {
                return Err(SeriesError::TermActionExceedsLeading {
                    action: t.action,
                    leading: leading_action,
                });
            }
            if !(t.amplitude.is_finite() && t.phase.is_finite()) {
                return Err(SeriesError::NonFiniteTerm);
            }
        }
        Ok(Self {
            level,
            leading_action,
            leading_phase: reduce_phase(leading_phase),
            terms: canonical_terms(raw_terms),
        })
    }

    /// The series `cos(S0 k + phi0)` with no subleading terms.
    pub fn pure(leading_action: f64, leading_phase: f64) -> Result<Self, SeriesError> {
        canonicalize(leading_action, leading_phase, &[])
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn leading_action(&self) -> f64 {
        self.leading_action
    }

    pub fn leading_phase(&self) -> f64 {
        self.leading_phase
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn evaluate(&self, k: f64) -> f64 {
        evaluate(self, k)
    }

    pub fn derivative(&self) -> SpectralSeries {
        derivative_series(self)
    }

    pub fn regularity_sum(&self) -> f64 {
        regularity_sum(self)
    }

    pub fn is_regular(&self, margin: f64) -> bool {
        self.regularity_sum() <= 1.0 - margin
    }
}

fn canonical_terms(raw: &[TrigTerm]) -> Vec<TrigTerm> {
    let mut folded: Vec<TrigTerm> = raw
        .iter()
        .filter(|t| t.amplitude != 0.0)
        .map(|t| {
            let (amplitude, phase) = if t.amplitude < 0.0 {
                (-t.amplitude, t.phase + PI)
            } else {
                (t.amplitude, t.phase)
            };
            TrigTerm::new(t.action, amplitude, reduce_phase(phase))
        })
        .collect();
    folded.sort_by(|a, b| {
        a.action
            .total_cmp(&b.action)
            .then(a.phase.total_cmp(&b.phase))
    });

    let mut merged: Vec<TrigTerm> = Vec::with_capacity(folded.len());
    let mut group_start = 0;
    for t in folded {
        let anchor = merged.get(group_start).map(|g| g.action);
        match anchor {
            Some(a) if (t.action - a).abs() <= MERGE_TOLERANCE => {}
            _ => group_start = merged.len(),
        }
        match merged[group_start..]
            .iter_mut()
            .find(|m| phase_distance(m.phase, t.phase) <= MERGE_TOLERANCE)
        {
            Some(m) => m.amplitude += t.amplitude,
            None => merged.push(t),
        }
    }
    merged.retain(|t| t.amplitude >= AMPLITUDE_FLOOR);
    merged.sort_by(|a, b| {
        a.action
            .total_cmp(&b.action)
            .then(a.phase.total_cmp(&b.phase))
    });
    merged
}

/// `cos(S0 k + phi0) - sum_j a_j cos(S_j k + phi_j)` with compensated summation.
pub fn evaluate(series: &SpectralSeries, k: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.add((series.leading_action * k + series.leading_phase).cos());
    for t in &series.terms {
        acc.add(-t.value(k));
    }
    acc.value()
}

/// Next level of the chain: the derivative divided by `S0`.
pub fn derivative_series(series: &SpectralSeries) -> SpectralSeries {
    let s0 = series.leading_action;
    let raw: Vec<TrigTerm> = series
        .terms
        .iter()
        .map(|t| TrigTerm::new(t.action, t.amplitude * (t.action / s0), t.phase + FRAC_PI_2))
        .collect();
    SpectralSeries {
        level: series.level + 1,
        leading_action: s0,
        leading_phase: reduce_phase(series.leading_phase + FRAC_PI_2),
        terms: canonical_terms(&raw),
    }
}

/// Sum of the (positive) term amplitudes. The series is regular when this is below 1.
pub fn regularity_sum(series: &SpectralSeries) -> f64 {
    series
        .terms
        .iter()
        .map(|t| t.amplitude)
        .collect::<CompensatedSum>()
        .value()
}

/// Smallest derivative order `M` whose series has `regularity_sum <= 1 - margin`.
pub fn regularization_order(series: &SpectralSeries, margin: f64) -> Result<usize, SeriesError> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(SeriesError::InvalidMargin(margin));
    }
    let mut current = series.clone();
    for order in 0..=MAX_ORDER {
        if current.is_regular(margin) {
            return Ok(order);
        }
        current = derivative_series(&current);
    }
    Err(SeriesError::OrderCapExceeded(MAX_ORDER))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(action: f64, amplitude: f64, phase: f64) -> TrigTerm {
        TrigTerm::new(action, amplitude, phase)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14 * a.abs().max(1.0)
    }

    #[test]
    fn negative_amplitude_folds_into_phase() {
        let s = canonicalize(1.0, 0.0, &[t(0.5, -0.5, 0.0)]).unwrap();
        assert_eq!(s.terms().len(), 1);
        let term = s.terms()[0];
        assert_eq!(term.action, 0.5);
        assert_eq!(term.amplitude, 0.5);
        assert!(close(term.phase, PI));
    }

    #[test]
    fn equal_action_and_phase_merge() {
        let s = canonicalize(1.0, 0.0, &[t(0.5, 0.3, 0.0), t(0.5, 0.2, 0.0)]).unwrap();
        assert_eq!(s.terms(), &[t(0.5, 0.5, 0.0)]);
    }

    #[test]
    fn merge_across_phase_wraparound() {
        let s = canonicalize(1.0, 0.0, &[t(0.5, 0.3, 0.0), t(0.5, 0.2, TAU - 1e-13)]).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert!(close(s.terms()[0].amplitude, 0.5));
    }

    #[test]
    fn distinct_phases_do_not_merge() {
        let s = canonicalize(1.0, 0.0, &[t(0.5, 0.3, 0.0), t(0.5, 0.2, 1.0)]).unwrap();
        assert_eq!(s.terms().len(), 2);
    }

    #[test]
    fn tiny_terms_dropped_and_sorted() {
        let s = canonicalize(
            2.0,
            -1.0,
            &[t(1.5, 0.1, 0.0), t(0.3, 1e-15, 0.0), t(0.2, 0.4, 7.0)],
        )
        .unwrap();
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.terms()[0].action, 0.2);
        assert!(close(s.terms()[0].phase, 7.0 - TAU));
        assert!(close(s.leading_phase(), TAU - 1.0));
    }

    #[test]
    fn rejects_term_beyond_leading_action() {
        assert_eq!(
            canonicalize(1.0, 0.0, &[t(1.2, 0.1, 0.0)]),
            Err(SeriesError::TermActionExceedsLeading {
                action: 1.2,
                leading: 1.0
            })
        );
        assert!(matches!(
            canonicalize(1.0, 0.0, &[t(1.0, 0.1, 0.0)]),
            Err(SeriesError::TermActionExceedsLeading { .. })
        ));
        assert!(matches!(
            canonicalize(0.0, 0.0, &[]),
            Err(SeriesError::NonpositiveLeadingAction(_))
        ));
        assert!(matches!(
            canonicalize(1.0, 0.0, &[t(-0.1, 0.1, 0.0)]),
            Err(SeriesError::InvalidTermAction(_))
        ));
    }

    #[test]
    fn evaluate_examples() {
        let pure = SpectralSeries::pure(1.0, 0.0).unwrap();
        assert_eq!(evaluate(&pure, 0.0), 1.0);
        assert!(evaluate(&pure, FRAC_PI_2).abs() < 1e-16);
        let one = canonicalize(1.0, 0.0, &[t(0.5, 0.5, 0.0)]).unwrap();
        assert_eq!(evaluate(&one, 0.0), 0.5);
    }

    #[test]
    fn derivative_examples() {
        let s = canonicalize(1.0, 0.0, &[t(0.5, 0.8, 0.0)]).unwrap();
        let d1 = derivative_series(&s);
        assert_eq!(d1.level(), 1);
        assert!(close(d1.leading_phase(), FRAC_PI_2));
        assert_eq!(d1.terms().len(), 1);
        assert!(close(d1.terms()[0].amplitude, 0.4));
        assert!(close(d1.terms()[0].phase, FRAC_PI_2));

        let d2 = derivative_series(&d1);
        assert_eq!(d2.level(), 2);
        assert!(close(d2.leading_phase(), PI));
        assert!(close(d2.terms()[0].amplitude, 0.2));
        assert!(close(d2.terms()[0].phase, PI));

        let empty = SpectralSeries::pure(2.0, 0.3).unwrap();
        let de = derivative_series(&empty);
        assert_eq!(de.level(), 1);
        assert_eq!(de.leading_action(), 2.0);
        assert!(close(de.leading_phase(), 0.3 + FRAC_PI_2));
        assert!(de.terms().is_empty());
    }

    #[test]
    fn zero_action_terms_vanish_after_differentiation() {
        let s = canonicalize(1.0, 0.0, &[t(0.0, 1.0, PI)]).unwrap();
        assert!(derivative_series(&s).terms().is_empty());
    }

    #[test]
    fn regularity_sum_examples() {
        let a = canonicalize(1.0, 0.0, &[t(0.5, 0.8, 0.0)]).unwrap();
        let b = canonicalize(1.0, 0.0, &[t(0.5, 1.5, 0.0)]).unwrap();
        let c = SpectralSeries::pure(1.0, 0.0).unwrap();
        assert_eq!(regularity_sum(&a), 0.8);
        assert_eq!(regularity_sum(&b), 1.5);
        assert_eq!(regularity_sum(&c), 0.0);
    }

    #[test]
    fn regularization_order_examples() {
        let regular = canonicalize(1.0, 0.0, &[t(0.5, 0.8, 0.0)]).unwrap();
        assert_eq!(regularization_order(&regular, DEFAULT_MARGIN), Ok(0));
        let half = canonicalize(1.0, 0.0, &[t(0.5, 1.5, 0.0)]).unwrap();
        assert_eq!(regularization_order(&half, DEFAULT_MARGIN), Ok(1));
        let slow = canonicalize(1.0, 0.0, &[t(0.9, 2.4, 0.0)]).unwrap();
        assert_eq!(regularization_order(&slow, DEFAULT_MARGIN), Ok(9));
    }

    #[test]
    fn regularization_order_rejects_bad_margin() {
        let s = SpectralSeries::pure(1.0, 0.0).unwrap();
        assert_eq!(
            regularization_order(&s, 0.0),
            Err(SeriesError::InvalidMargin(0.0))
        );
        assert!(regularization_order(&s, 1.0).is_err());
    }
}
