//! Ground truth and baselines for the wave method.

pub mod companion;
pub mod compare;
pub mod convergence;
pub mod dense;
pub mod eigen;
pub mod gossip;
pub mod heat;
pub mod predict;

pub use compare::{compare_partitions, Comparison};
pub use eigen::{dense_spectral, oracle_partition, DenseSpectral, OracleWarning, DEFAULT_DENSE_LIMIT};
