//! Exact spectra of scaling quantum graphs.
//!
//! A scaling quantum graph has `k`-independent scattering amplitudes, so its
//! secular function is a finite cosine series
//!
//! ```text
//! g(k) = cos(S0 k + phi0) - sum_j a_j cos(S_j k + phi_j),    S_j < S0.
//! ```
//!
//! [`graph`] builds that series from a graph description, [`series`] holds its
//! algebra and derivative chain, and [`solver`] finds every positive root by
//! descending from the first regular derivative level back to the series
//! itself. [`oracle`] is an independent dense-scan root finder used for
//! verification; [`config`] and [`cli`] drive the `qgspec` binary.

pub mod cli;
pub mod config;
pub mod graph;
pub mod oracle;
pub mod series;
pub mod solver;
mod sum;

pub use graph::{BondSpec, QuantumGraph, VertexCondition, VertexSpec};
pub use oracle::{scan_roots, verify_spectrum, VerificationReport};
pub use series::{canonicalize, SpectralSeries, TrigTerm};
pub use solver::{build_chain, descend, solve_graph, DescentChain, Spectrum, Window};
