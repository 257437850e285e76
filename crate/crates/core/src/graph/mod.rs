//! Scaling quantum graphs and their secular series.
//!
//! Waves travel along directed bonds. A wave leaving along bond `d` picks up
//! the phase `exp(i S_d k)` and scatters at the vertex it reaches into every
//! directed bond leaving that vertex, with the amplitudes of the vertex
//! scattering matrix. Eigen-wavenumbers are the zeros of `det(I - U(k))`,
//! `U(k) = D(k) Sigma`, where `D(k) = diag(exp(i S_d k))`. Because all vertex
//! amplitudes are independent of `k`, the determinant is a finite exponential
//! sum and can be rewritten as a real cosine series (see [`expansion`]).

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::series::SpectralSeries;

pub mod expansion;

pub use expansion::{secular_expansion, ExpoPolynomial, SecularExpansion};

/// Largest supported number of directed bonds (twice the bond count).
pub const MAX_DIRECTED_BONDS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexCondition {
    /// The wavefunction vanishes: every bond end is reflected with amplitude -1.
    Dirichlet,
    /// Continuity plus vanishing sum of outgoing derivatives.
    Kirchhoff,
    /// Kirchhoff matching with a delta potential of strength `lambda * k`.
    ScalingDelta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexSpec {
    pub id: i64,
    pub condition: VertexCondition,
}

impl VertexSpec {
    pub fn new(id: i64, condition: VertexCondition) -> Self {
        Self { id, condition }
    }
}

/// A bond carrying the scaling potential `U = potential_fraction * E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondSpec {
    pub endpoints: (i64, i64),
    pub length: f64,
    pub potential_fraction: f64,
}

impl BondSpec {
    pub fn new(from: i64, to: i64, length: f64) -> Self {
        Self {
            endpoints: (from, to),
            length,
            potential_fraction: 0.0,
        }
    }

    pub fn with_potential(mut self, fraction: f64) -> Self {
        self.potential_fraction = fraction;
        self
    }

    /// Phase length `L sqrt(1 - lambda)`; the wave accumulates `action * k` along the bond.
    pub fn action(&self) -> f64 {
        self.length * (1.0 - self.potential_fraction).sqrt()
    }
}

/// Which part of the graph description a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Item {
    Vertex(usize),
    Bond(usize),
    Graph,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphViolation {
    DuplicateVertexId { vertex: usize, id: i64 },
    NonFiniteDelta { vertex: usize },
    UnknownEndpoint { bond: usize, id: i64 },
    NonpositiveLength { bond: usize, length: f64 },
    Tunneling { bond: usize, fraction: f64 },
    IsolatedVertex { vertex: usize, id: i64 },
    NoBonds,
    Disconnected,
    TooManyBonds { directed: usize },
}

impl GraphViolation {
    pub fn item(&self) -> Item {
        use GraphViolation::*;
        match *self {
            DuplicateVertexId { vertex, .. }
            | NonFiniteDelta { vertex }
            | IsolatedVertex { vertex, .. } => Item::Vertex(vertex),
            UnknownEndpoint { bond, .. }
            | NonpositiveLength { bond, .. }
            | Tunneling { bond, .. } => Item::Bond(bond),
            NoBonds | Disconnected | TooManyBonds { .. } => Item::Graph,
        }
    }
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GraphViolation::*;
        match self {
            DuplicateVertexId { id, .. } => write!(f, "vertex id {id} is not unique"),
            NonFiniteDelta { .. } => write!(f, "delta strength must be finite"),
            UnknownEndpoint { id, .. } => write!(f, "bond endpoint {id} is not a vertex"),
            NonpositiveLength { length, .. } => {
                write!(f, "bond length must be > 0 (got {length})")
            }
            Tunneling { fraction, .. } => {
                write!(f, "potential_fraction must be < 1 (got {fraction})")
            }
            IsolatedVertex { id, .. } => write!(f, "vertex {id} has no bonds"),
            NoBonds => write!(f, "graph has no bonds"),
            Disconnected => write!(f, "graph is not connected"),
            TooManyBonds { directed } => write!(
                f,
                "graph has {directed} directed bonds; at most {MAX_DIRECTED_BONDS} are supported"
            ),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid graph: {}", join_violations(.0))]
    Invalid(Vec<GraphViolation>),
    #[error("vertex degree must be at least 1, got {0}")]
    DegreeMismatch(usize),
    #[error("{directed} directed bonds exceed the expansion cap of {MAX_DIRECTED_BONDS}")]
    SizeCapExceeded { directed: usize },
    #[error("secular determinant is not self-conjugate (deviation {deviation:.3e})")]
    RealificationFailure { deviation: f64 },
    #[error("leading exponential cancelled (amplitude {amplitude:.3e})")]
    DegenerateLeadingTerm { amplitude: f64 },
}

fn join_violations(vs: &[GraphViolation]) -> String {
    vs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Scattering matrix of a vertex of degree `d`.
///
/// `sigma_ij = 2/(d + i lambda) - delta_ij`, with `lambda = 0` for Kirchhoff
/// vertices; Dirichlet vertices reflect every bond end with amplitude -1.
pub fn vertex_scattering(
    condition: VertexCondition,
    degree: usize,
) -> Result<Vec<Vec<Complex64>>, GraphError> {
    if degree == 0 {
        return Err(GraphError::DegreeMismatch(degree));
    }
    let one = Complex64::new(1.0, 0.0);
    let matrix = match condition {
        VertexCondition::Dirichlet => (0..degree)
            .map(|i| {
                (0..degree)
                    .map(|j| if i == j { -one } else { Complex64::default() })
                    .collect()
            })
            .collect(),
        VertexCondition::Kirchhoff | VertexCondition::ScalingDelta(_) => {
            let lambda = match condition {
                VertexCondition::ScalingDelta(l) => l,
                _ => 0.0,
            };
            let c = 2.0 / Complex64::new(degree as f64, lambda);
            (0..degree)
                .map(|i| {
                    (0..degree)
                        .map(|j| if i == j { c - one } else { c })
                        .collect()
                })
                .collect()
        }
    };
    Ok(matrix)
}

/// A validated, connected scaling quantum graph.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGraph {
    vertices: Vec<VertexSpec>,
    bonds: Vec<BondSpec>,
}

impl QuantumGraph {
    pub fn new(vertices: Vec<VertexSpec>, bonds: Vec<BondSpec>) -> Result<Self, GraphError> {
        let violations = validate(&vertices, &bonds);
        if violations.is_empty() {
            Ok(Self { vertices, bonds })
        } else {
            Err(GraphError::Invalid(violations))
        }
    }

    pub fn vertices(&self) -> &[VertexSpec] {
        &self.vertices
    }

    pub fn bonds(&self) -> &[BondSpec] {
        &self.bonds
    }

    pub fn directed_bond_count(&self) -> usize {
        2 * self.bonds.len()
    }

    /// Actions of the directed bonds; bond `b` yields entries `2b` (forward) and `2b + 1`.
    pub fn directed_actions(&self) -> Vec<f64> {
        self.bonds
            .iter()
            .flat_map(|b| [b.action(), b.action()])
            .collect()
    }

    /// The `k`-independent bond scattering matrix `Sigma`, row-major.
    ///
    /// `Sigma[out][in]` is the amplitude for a wave arriving along directed
    /// bond `in` to leave along directed bond `out`.
    pub fn bond_scattering(&self) -> Vec<Vec<Complex64>> {
        let index: HashMap<i64, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id, i))
            .collect();
        // slots[v] lists the bond ends (bond, end) attached to vertex v.
        let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.vertices.len()];
        let mut slot_of = vec![[0usize; 2]; self.bonds.len()];
        for (b, bond) in self.bonds.iter().enumerate() {
            for (end, id) in [bond.endpoints.0, bond.endpoints.1].into_iter().enumerate() {
                let v = index[&id];
                slot_of[b][end] = slots[v].len();
                slots[v].push((b, end));
            }
        }
        let sigmas: Vec<Vec<Vec<Complex64>>> = self
            .vertices
            .iter()
            .zip(&slots)
            .map(|(v, s)| vertex_scattering(v.condition, s.len()).expect("validated degree"))
            .collect();

        let n = self.directed_bond_count();
        let mut matrix = vec![vec![Complex64::default(); n]; n];
        for (v, ends) in slots.iter().enumerate() {
            for &(b_in, end_in) in ends {
                // The directed bond arriving at this end departs from the other end.
                let arriving = 2 * b_in + usize::from(end_in == 0);
                for &(b_out, end_out) in ends {
                    let departing = 2 * b_out + end_out;
                    matrix[departing][arriving] =
                        sigmas[v][slot_of[b_out][end_out]][slot_of[b_in][end_in]];
                }
            }
        }
        matrix
    }

    /// `det(I - D(k) Sigma)` evaluated numerically by Gaussian elimination.
    pub fn secular_determinant(&self, k: f64) -> Complex64 {
        let sigma = self.bond_scattering();
        let actions = self.directed_actions();
        let n = sigma.len();
        let mut a: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let phase = Complex64::from_polar(1.0, actions[i] * k);
                (0..n)
                    .map(|j| {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        Complex64::new(delta, 0.0) - phase * sigma[i][j]
                    })
                    .collect()
            })
            .collect();
        complex_determinant(&mut a)
    }

    /// Secular cosine series of the graph.
    pub fn secular_series(&self) -> Result<SpectralSeries, GraphError> {
        secular_series(self)
    }
}

/// Builds the canonical level-0 secular series of `graph`.
pub fn secular_series(graph: &QuantumGraph) -> Result<SpectralSeries, GraphError> {
    Ok(secular_expansion(graph)?.series)
}

fn validate(vertices: &[VertexSpec], bonds: &[BondSpec]) -> Vec<GraphViolation> {
    let mut out = Vec::new();
    let mut index: HashMap<i64, usize> = HashMap::new();
    for (i, v) in vertices.iter().enumerate() {
        if index.insert(v.id, i).is_some() {
            out.push(GraphViolation::DuplicateVertexId {
                vertex: i,
                id: v.id,
            });
        }
        if let VertexCondition::ScalingDelta(l) = v.condition {
            if !l.is_finite() {
                out.push(GraphViolation::NonFiniteDelta { vertex: i });
            }
        }
    }
    if bonds.is_empty() {
        out.push(GraphViolation::NoBonds);
    }

    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    let mut touched: HashSet<usize> = HashSet::new();
    for (b, bond) in bonds.iter().enumerate() {
        if !(bond.length.is_finite() && bond.length > 0.0) {
            out.push(GraphViolation::NonpositiveLength {
                bond: b,
                length: bond.length,
            });
        }
        if bond.potential_fraction.is_nan() || bond.potential_fraction >= 1.0 {
            out.push(GraphViolation::Tunneling {
                bond: b,
                fraction: bond.potential_fraction,
            });
        }
        let mut ends = Vec::with_capacity(2);
        for id in [bond.endpoints.0, bond.endpoints.1] {
            match index.get(&id) {
                Some(&v) => ends.push(v),
                None => out.push(GraphViolation::UnknownEndpoint { bond: b, id }),
            }
        }
        if let [u, v] = ends[..] {
            touched.insert(u);
            touched.insert(v);
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            parent[ru] = rv;
        }
    }
    for (i, v) in vertices.iter().enumerate() {
        if !touched.contains(&i) {
            out.push(GraphViolation::IsolatedVertex {
                vertex: i,
                id: v.id,
            });
        }
    }
    if !vertices.is_empty() {
        let root = find(&mut parent, 0);
        if (1..vertices.len()).any(|v| find(&mut parent, v) != root) {
            out.push(GraphViolation::Disconnected);
        }
    }
    if 2 * bonds.len() > MAX_DIRECTED_BONDS {
        out.push(GraphViolation::TooManyBonds {
            directed: 2 * bonds.len(),
        });
    }
    out
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn complex_determinant(a: &mut [Vec<Complex64>]) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("non-empty range");
        if a[pivot][col].norm() == 0.0 {
            return Complex64::default();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for r in lower.iter_mut() {
            let factor = r[col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for (x, v) in r[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= factor * v;
            }
        }
    }
    det
}
