use std::f64::consts::TAU;

use proptest::prelude::*;
use qgspec::series::{derivative_series, regularity_sum, SpectralSeries};
use qgspec::{canonicalize, TrigTerm};

fn arb_series() -> impl Strategy<Value = SpectralSeries> {
    (
        0.3f64..3.0,
        -10.0f64..10.0,
        prop::collection::vec((0.0f64..0.999, -2.0f64..2.0, -10.0f64..10.0), 0..8),
    )
        .prop_map(|(s0, phi0, raw)| {
            let terms: Vec<TrigTerm> = raw
                .into_iter()
                .map(|(r, a, p)| TrigTerm::new(r * s0, a, p))
                .collect();
            canonicalize(s0, phi0, &terms).unwrap()
        })
}

proptest! {
    #[test]
    fn central_difference_matches_next_level(series in arb_series(), k in 0.0f64..50.0) {
        let h = 1e-6;
        let s0 = series.leading_action();
        let fd = (series.evaluate(k + h) - series.evaluate(k - h)) / (2.0 * h * s0);
        let exact = derivative_series(&series).evaluate(k);
        // Relative to the function scale; pointwise relative error is
        // meaningless where the derivative vanishes.
        let scale = 1.0 + regularity_sum(&series);
        prop_assert!((fd - exact).abs() <= 1e-5 * scale, "fd {fd} exact {exact}");
    }

    #[test]
    fn canonical_form_is_idempotent(series in arb_series()) {
        let again = canonicalize(series.leading_action(), series.leading_phase(), series.terms()).unwrap();
        prop_assert_eq!(again, series);
    }

    #[test]
    fn canonical_terms_are_normalized(series in arb_series()) {
        for t in series.terms() {
            prop_assert!(t.amplitude > 0.0);
            prop_assert!((0.0..TAU).contains(&t.phase));
            prop_assert!(t.action < series.leading_action());
        }
        prop_assert!((0.0..TAU).contains(&series.leading_phase()));
        for w in series.terms().windows(2) {
            prop_assert!(w[0].action <= w[1].action);
        }
    }

    #[test]
    fn amplitudes_decay_under_differentiation(series in arb_series()) {
        prop_assume!(!series.terms().is_empty());
        prop_assert!(regularity_sum(&derivative_series(&series)) < regularity_sum(&series));
    }

    #[test]
    fn series_bounded_by_amplitude_sum(series in arb_series(), k in -100.0f64..100.0) {
        prop_assert!(series.evaluate(k).abs() <= 1.0 + regularity_sum(&series) + 1e-12);
    }

    #[test]
    fn evaluation_matches_raw_terms(
        s0 in 0.5f64..2.0,
        raw in prop::collection::vec((0.0f64..0.99, -2.0f64..2.0, 0.0f64..TAU), 0..6),
        k in 0.0f64..30.0,
    ) {
        let terms: Vec<TrigTerm> = raw.iter().map(|&(r, a, p)| TrigTerm::new(r * s0, a, p)).collect();
        let series = canonicalize(s0, 0.0, &terms).unwrap();
        let direct = (s0 * k).cos() - terms.iter().map(|t| t.value(k)).sum::<f64>();
        prop_assert!((series.evaluate(k) - direct).abs() <= 1e-12);
    }
}
