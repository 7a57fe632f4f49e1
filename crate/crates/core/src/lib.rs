//! Graph clustering by simulating the discretized wave equation.
//!
//! Every node runs `u_i(t) = 2u_i(t-1) - u_i(t-2) - c^2 (L u(t-1))_i` using
//! only its neighbours' previous values, then takes an FFT of its own history.
//! The lowest non-dc frequencies map to the smallest Laplacian eigenvalues,
//! and the sign of each node's coefficient at those frequencies is the sign
//! of its component in the matching eigenvector, which is all spectral
//! clustering needs.
//!
//! [`oracle`] holds the references the wave method is checked against: a
//! dense eigensolver, the heat iteration, a gossip-based orthogonal
//! iteration, companion-matrix analysis and closed-form time predictors.

// `!(x <= y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod edgelist;
pub mod error;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod partition;
pub mod spectral;
pub mod wave;

pub use error::{Error, ErrorKind, Result};
pub use graph::{build_graph, Graph, LaplacianRow};
pub use partition::Partition;
pub use spectral::{cluster, ClusterOutcome, Spectrum};
pub use wave::{init_run, WaveConfig, WaveRun};
