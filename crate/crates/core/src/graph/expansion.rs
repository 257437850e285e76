//! Symbolic expansion of `det(I - D(k) Sigma)` and its conversion to a cosine series.
//!
//! Row `d` of `I - D(k) Sigma` carries the single symbol `x_d = exp(i S_d k)`, so
//! the determinant is multilinear in the `x_d`: each monomial is a subset of
//! directed bonds, stored as a bitmask.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GraphError, QuantumGraph, MAX_DIRECTED_BONDS};
use crate::series::{SpectralSeries, TrigTerm, AMPLITUDE_FLOOR, MERGE_TOLERANCE};

/// Coefficients below this magnitude are not stored.
pub const COEFFICIENT_FLOOR: f64 = 1e-14;
/// Largest allowed deviation from conjugate symmetry, relative to the leading coefficient.
pub const REALIFICATION_TOLERANCE: f64 = 1e-9;
/// Leading coefficient magnitude below which the series is considered degenerate.
pub const LEADING_FLOOR: f64 = 1e-12;

/// Exponential sum `sum_n c_n exp(i k sum_d n_d S_d)` with `n_d` in `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpoPolynomial {
    terms: BTreeMap<u32, Complex64>,
    actions: Vec<f64>,
}

impl ExpoPolynomial {
    /// Builds a polynomial from `(exponent bitmask, coefficient)` pairs; repeated
    /// exponents are summed and negligible coefficients dropped.
    pub fn from_terms(
        actions: Vec<f64>,
        terms: impl IntoIterator<Item = (u32, Complex64)>,
    ) -> Self {
        assert!(
            actions.len() <= MAX_DIRECTED_BONDS,
            "too many directed bonds"
        );
        let mut map: BTreeMap<u32, Complex64> = BTreeMap::new();
        for (mono, c) in terms {
            assert!(
                mono >> actions.len() == 0,
                "exponent bitmask {mono:#b} references a missing bond"
            );
            *map.entry(mono).or_default() += c;
        }
        map.retain(|_, c| c.norm() >= COEFFICIENT_FLOOR);
        Self {
            terms: map,
            actions,
        }
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(exponent bitmask, coefficient)` pairs in ascending bitmask order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, exponents: u32) -> Complex64 {
        self.terms.get(&exponents).copied().unwrap_or_default()
    }

    /// Total action `sum_d n_d S_d` of a monomial.
    pub fn total_action(&self, exponents: u32) -> f64 {
        self.actions
            .iter()
            .enumerate()
            .filter(|(d, _)| exponents & (1 << d) != 0)
            .map(|(_, s)| s)
            .sum()
    }

    pub fn evaluate(&self, k: f64) -> Complex64 {
        self.iter()
            .map(|(m, c)| c * Complex64::from_polar(1.0, self.total_action(m) * k))
            .sum()
    }
}

/// Expands `det(I - diag(x) sigma)` over the monomials in `x`.
///
/// Laplace expansion row by row, memoized on the set of columns already used:
/// `layer[mask]` holds the polynomial summed over all partial permutations of
/// the first `popcount(mask)` rows onto the columns in `mask`.
pub fn expand_determinant(
    sigma: &[Vec<Complex64>],
    actions: &[f64],
) -> Result<ExpoPolynomial, GraphError> {
    let n = sigma.len();
    if n > MAX_DIRECTED_BONDS {
        return Err(GraphError::SizeCapExceeded { directed: n });
    }
    let one = Complex64::new(1.0, 0.0);
    let mut layer: BTreeMap<u32, BTreeMap<u32, Complex64>> = BTreeMap::new();
    layer.insert(0, BTreeMap::from([(0, one)]));

    for (row, sigma_row) in sigma.iter().enumerate() {
        // Nonzero entries of this row: (column, constant part, symbolic part).
        let entries: Vec<(usize, Complex64, Complex64)> = (0..n)
            .filter_map(|col| {
                let constant = if col == row {
                    one
                } else {
                    Complex64::default()
                };
                let symbolic = -sigma_row[col];
                (constant != Complex64::default() || symbolic != Complex64::default())
                    .then_some((col, constant, symbolic))
            })
            .collect();
        let bit = 1u32 << row;
        let mut next: BTreeMap<u32, BTreeMap<u32, Complex64>> = BTreeMap::new();
        for (mask, poly) in &layer {
            for &(col, constant, symbolic) in &entries {
                let col_bit = 1u32 << col;
                if mask & col_bit != 0 {
                    continue;
                }
                // Inversions against previously placed rows.
                let above = (mask >> (col + 1)).count_ones();
                let sign = if above % 2 == 0 { 1.0 } else { -1.0 };
                let target = next.entry(mask | col_bit).or_default();
                for (&mono, &c) in poly {
                    if constant != Complex64::default() {
                        *target.entry(mono).or_default() += c * constant * sign;
                    }
                    if symbolic != Complex64::default() {
                        *target.entry(mono | bit).or_default() += c * symbolic * sign;
                    }
                }
            }
        }
        layer = next;
    }

    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut terms = layer.remove(&full).unwrap_or_default();
    terms.retain(|_, c| c.norm() >= COEFFICIENT_FLOOR);
    Ok(ExpoPolynomial {
        terms,
        actions: actions.to_vec(),
    })
}

/// Secular series together with the data needed to reconstruct it from the determinant.
#[derive(Debug, Clone)]
pub struct SecularExpansion {
    pub series: SpectralSeries,
    pub polynomial: ExpoPolynomial,
    /// Centre `Theta` of the total-action range.
    pub centre: f64,
    /// Constant `c` with `series(k) = Re[c exp(-i Theta k) det(I - U(k))]`.
    pub normalization: Complex64,
}

impl SecularExpansion {
    /// `c exp(-i Theta k) det(I - U(k))` from the stored polynomial.
    pub fn reconstruct(&self, determinant: Complex64, k: f64) -> Complex64 {
        self.normalization * Complex64::from_polar(1.0, -self.centre * k) * determinant
    }
}

/// Expands the secular determinant of `graph` and rewrites it as a cosine series.
///
/// After merging monomials of equal total action, the sum is centred at
/// `Theta = (K_max + K_min)/2` and rotated by the unimodular constant that makes
/// it real. Conjugate exponentials pair into cosines and the result is scaled
/// so the leading cosine has unit amplitude.
pub fn secular_expansion(graph: &QuantumGraph) -> Result<SecularExpansion, GraphError> {
    realify(expand_determinant(
        &graph.bond_scattering(),
        &graph.directed_actions(),
    )?)
}

/// Converts a self-conjugate exponential sum into a canonical cosine series.
pub fn realify(polynomial: ExpoPolynomial) -> Result<SecularExpansion, GraphError> {
    let mut by_action: Vec<(f64, Complex64)> = polynomial
        .iter()
        .map(|(m, c)| (polynomial.total_action(m), c))
        .collect();
    by_action.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, Complex64)> = Vec::new();
    for (action, c) in by_action {
        match groups.last_mut() {
            Some(g) if (action - g.0).abs() <= MERGE_TOLERANCE => g.1 += c,
            _ => groups.push((action, c)),
        }
    }
    groups.retain(|g| g.1.norm() >= COEFFICIENT_FLOOR);

    let (Some(&(k_min, c_low)), Some(&(k_max, c_high))) = (groups.first(), groups.last()) else {
        return Err(GraphError::DegenerateLeadingTerm { amplitude: 0.0 });
    };
    let lead = c_high.norm().min(c_low.norm());
    if groups.len() < 2 || lead < LEADING_FLOOR {
        return Err(GraphError::DegenerateLeadingTerm { amplitude: lead });
    }
    let centre = 0.5 * (k_max + k_min);
    let leading_action = centre - k_min;

    // u^2 = conj(c_low) / c_high makes u c_high = conj(u c_low).
    let mut angle = (c_low.conj() / c_high).arg();
    if angle <= -PI + 1e-12 {
        angle = PI;
    }
    let rotation = Complex64::from_polar(1.0, 0.5 * angle);

    let scale = lead;
    let mut positive: Vec<(f64, Complex64)> = Vec::new();
    let mut negative: Vec<(f64, Complex64)> = Vec::new();
    let mut constant = Complex64::default();
    for &(action, c) in &groups {
        let omega = action - centre;
        let rotated = rotation * c;
        if omega.abs() <= REALIFICATION_TOLERANCE {
            constant += rotated;
        } else if omega > 0.0 {
            positive.push((omega, rotated));
        } else {
            negative.push((-omega, rotated));
        }
    }
    negative.reverse();

    let mut deviation = constant.im.abs() / scale;
    let mut pairs: Vec<(f64, Complex64)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < positive.len() || j < negative.len() {
        let (omega, plus, minus) = match (positive.get(i), negative.get(j)) {
            (Some(&(wp, cp)), Some(&(wn, cn))) if (wp - wn).abs() <= REALIFICATION_TOLERANCE => {
                i += 1;
                j += 1;
                (0.5 * (wp + wn), cp, cn)
            }
            (Some(&(wp, cp)), Some(&(wn, _))) if wp < wn => {
                i += 1;
                (wp, cp, Complex64::default())
            }
            (Some(&(wp, cp)), None) => {
                i += 1;
                (wp, cp, Complex64::default())
            }
            (_, Some(&(wn, cn))) => {
                j += 1;
                (wn, Complex64::default(), cn)
            }
            (None, None) => unreachable!(),
        };
        deviation = deviation.max((minus - plus.conj()).norm() / scale);
        pairs.push((omega, 0.5 * (plus + minus.conj())));
    }
    if deviation > REALIFICATION_TOLERANCE {
        return Err(GraphError::RealificationFailure { deviation });
    }

    let (_, leading) = pairs.pop().expect("leading pair present");
    let amplitude = 2.0 * leading.norm();
    let raw: Vec<TrigTerm> = pairs
        .iter()
        .map(|&(omega, c)| TrigTerm::new(omega, -2.0 * c.norm() / amplitude, c.arg()))
        .chain(
            (constant.re.abs() / amplitude >= AMPLITUDE_FLOOR)
                .then(|| TrigTerm::new(0.0, -constant.re / amplitude, 0.0)),
        )
        .collect();
    let series = SpectralSeries::with_level(0, leading_action, leading.arg(), &raw)
        .map_err(|_| GraphError::DegenerateLeadingTerm { amplitude })?;

    Ok(SecularExpansion {
        series,
        polynomial,
        centre,
        normalization: rotation / amplitude,
    })
}
