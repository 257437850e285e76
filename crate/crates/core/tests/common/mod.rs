#![allow(dead_code)]

use std::f64::consts::TAU;

use qgspec::{
    canonicalize, BondSpec, QuantumGraph, SpectralSeries, TrigTerm, VertexCondition, VertexSpec,
};
use rand::Rng;

/// Random level-0 series: up to `max_terms` terms, amplitude sum uniform in
/// `sum_range`, action ratios uniform in `[0.1, 0.95]`.
pub fn random_series<R: Rng>(
    rng: &mut R,
    max_terms: usize,
    sum_range: (f64, f64),
) -> SpectralSeries {
    let s0 = rng.gen_range(0.5..2.0);
    let n = rng.gen_range(1..=max_terms);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let target = rng.gen_range(sum_range.0..=sum_range.1);
    let terms: Vec<TrigTerm> = weights
        .iter()
        .map(|w| {
            TrigTerm::new(
                s0 * rng.gen_range(0.1..=0.95),
                target * w / total,
                rng.gen_range(0.0..TAU),
            )
        })
        .collect();
    canonicalize(s0, rng.gen_range(0.0..TAU), &terms).unwrap()
}

/// Smallest `m` with `sum_j a_j (S_j/S0)^m <= 1 - margin`, by direct powers.
pub fn brute_force_order(series: &SpectralSeries, margin: f64) -> usize {
    let s0 = series.leading_action();
    (0..)
        .find(|&m| {
            let sum: f64 = series
                .terms()
                .iter()
                .map(|t| t.amplitude * (t.action / s0).powi(m as i32))
                .sum();
            sum <= 1.0 - margin
        })
        .unwrap()
}

fn v(id: i64, c: VertexCondition) -> VertexSpec {
    VertexSpec::new(id, c)
}

pub fn dirichlet_bond() -> QuantumGraph {
    QuantumGraph::new(
        vec![
            v(0, VertexCondition::Dirichlet),
            v(1, VertexCondition::Dirichlet),
        ],
        vec![BondSpec::new(0, 1, 1.0)],
    )
    .unwrap()
}

pub fn mixed_bond() -> QuantumGraph {
    QuantumGraph::new(
        vec![
            v(0, VertexCondition::Dirichlet),
            v(1, VertexCondition::Kirchhoff),
        ],
        vec![BondSpec::new(0, 1, 1.0)],
    )
    .unwrap()
}

pub fn three_star() -> QuantumGraph {
    QuantumGraph::new(
        vec![
            v(0, VertexCondition::Kirchhoff),
            v(1, VertexCondition::Dirichlet),
            v(2, VertexCondition::Dirichlet),
            v(3, VertexCondition::Dirichlet),
        ],
        vec![
            BondSpec::new(0, 1, 1.0),
            BondSpec::new(0, 2, 0.71),
            BondSpec::new(0, 3, 0.43),
        ],
    )
    .unwrap()
}

/// Named graphs covering every vertex model, potentials, loops and multi-bonds.
pub fn corpus() -> Vec<(&'static str, QuantumGraph)> {
    vec![
        ("dirichlet bond", dirichlet_bond()),
        ("mixed bond", mixed_bond()),
        ("3-star", three_star()),
        (
            "delta triangle",
            QuantumGraph::new(
                vec![
                    v(0, VertexCondition::ScalingDelta(0.5)),
                    v(1, VertexCondition::ScalingDelta(-1.3)),
                    v(2, VertexCondition::Kirchhoff),
                ],
                vec![
                    BondSpec::new(0, 1, 1.0),
                    BondSpec::new(1, 2, 0.83),
                    BondSpec::new(2, 0, 0.61).with_potential(0.4),
                ],
            )
            .unwrap(),
        ),
        (
            "lasso",
            QuantumGraph::new(
                vec![
                    v(0, VertexCondition::Kirchhoff),
                    v(1, VertexCondition::Dirichlet),
                ],
                vec![BondSpec::new(0, 0, 1.37), BondSpec::new(0, 1, 0.52)],
            )
            .unwrap(),
        ),
        (
            "double bond with potential",
            QuantumGraph::new(
                vec![
                    v(0, VertexCondition::ScalingDelta(2.0)),
                    v(1, VertexCondition::Kirchhoff),
                ],
                vec![
                    BondSpec::new(0, 1, 1.0).with_potential(-0.5),
                    BondSpec::new(0, 1, 0.77).with_potential(0.3),
                ],
            )
            .unwrap(),
        ),
        (
            "commensurate star",
            QuantumGraph::new(
                vec![
                    v(0, VertexCondition::Kirchhoff),
                    v(1, VertexCondition::Dirichlet),
                    v(2, VertexCondition::Kirchhoff),
                    v(3, VertexCondition::Dirichlet),
                ],
                vec![
                    BondSpec::new(0, 1, 1.0),
                    BondSpec::new(0, 2, 1.0),
                    BondSpec::new(0, 3, 0.5),
                ],
            )
            .unwrap(),
        ),
        (
            "tetrahedron",
            QuantumGraph::new(
                vec![
                    v(0, VertexCondition::Kirchhoff),
                    v(1, VertexCondition::ScalingDelta(0.3)),
                    v(2, VertexCondition::Kirchhoff),
                    v(3, VertexCondition::Dirichlet),
                ],
                vec![
                    BondSpec::new(0, 1, 1.0),
                    BondSpec::new(0, 2, 0.91),
                    BondSpec::new(0, 3, 0.73),
                    BondSpec::new(1, 2, 0.59),
                    BondSpec::new(1, 3, 0.47),
                    BondSpec::new(2, 3, 0.31),
                ],
            )
            .unwrap(),
        ),
        (
            "eight-bond chain",
            QuantumGraph::new(
                (0..9)
                    .map(|i| {
                        let c = if i == 0 || i == 8 {
                            VertexCondition::Dirichlet
                        } else {
                            VertexCondition::ScalingDelta(0.2 * i as f64)
                        };
                        v(i, c)
                    })
                    .collect(),
                (0..8)
                    .map(|i| BondSpec::new(i, i + 1, 0.5 + 0.07 * i as f64))
                    .collect(),
            )
            .unwrap(),
        ),
    ]
}
