use serde::Serialize;

use super::dense::symmetric_eigen;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// Largest tolerated `||L v - lambda v||_inf`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvalues below this distance are treated as equal.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Full spectrum of `L = I - D^{-1} W`, ascending.
///
/// Eigenvectors are D-orthonormal (`v_p^T D v_q = delta_pq`) and signed so
/// their largest-magnitude component is positive.
#[derive(Debug, Clone)]
pub struct DenseSpectral {
    pub values: Vec<f64>,
    /// `vectors[j]` is the eigenvector for `values[j]`.
    pub vectors: Vec<Vec<f64>>,
}

impl DenseSpectral {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Second-smallest eigenvalue.
    pub fn lambda2(&self) -> f64 {
        self.values[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum OracleWarning {
    /// `lambda_{index}` and `lambda_{index+1}` (1-based) coincide, so the
    /// last eigenvector used for clustering is not unique.
    DegenerateEigengap { index: usize, lower: f64, upper: f64 },
}

impl std::fmt::Display for OracleWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleWarning::DegenerateEigengap { index, lower, upper } => write!(
                f,
                "degenerate eigengap: lambda_{index} = {lower:.12} and lambda_{} = {upper:.12}; no unique cut",
                index + 1
            ),
        }
    }
}

pub fn dense_spectral(g: &Graph) -> Result<DenseSpectral> {
    dense_spectral_with_limit(g, DEFAULT_DENSE_LIMIT)
}

pub fn dense_spectral_with_limit(g: &Graph, limit: usize) -> Result<DenseSpectral> {
    let n = g.node_count();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    let eig = symmetric_eigen(&g.dense_symmetric_laplacian(), n)?;
    let inv_sqrt: Vec<f64> = g.degrees().iter().map(|d| 1.0 / d.sqrt()).collect();
    let rows = g.laplacian_rows();
    let mut vectors = Vec::with_capacity(n);
    for (j, &lambda) in eig.values.iter().enumerate() {
        let mut v: Vec<f64> = (0..n).map(|r| eig.vectors[r * n + j] * inv_sqrt[r]).collect();
        let lead = v
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let residual = rows
            .iter()
            .map(|row| (row.apply(&v) - lambda * v[row.owner]).abs())
            .fold(0.0f64, f64::max);
        if !(residual <= RESIDUAL_TOL) {
            return Err(Error::NotConverged { index: j });
        }
        vectors.push(v);
    }
    Ok(DenseSpectral {
        values: eig.values,
        vectors,
    })
}

/// Sign-pattern clustering from `v_2 .. v_{k+1}`: node `i` gets
/// `sum_j [v_j(i) > 0] 2^(j-2)`, canonicalized.
pub fn oracle_partition(ds: &DenseSpectral, k: usize) -> Result<(Partition, Vec<OracleWarning>)> {
    if k == 0 || k + 1 > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} needs 1 <= k <= {}",
            ds.len().saturating_sub(1)
        )));
    }
    let mut warnings = Vec::new();
    if k + 2 <= ds.len() {
        let (lower, upper) = (ds.values[k], ds.values[k + 1]);
        if (upper - lower).abs() <= DEGENERACY_TOL {
            warnings.push(OracleWarning::DegenerateEigengap {
                index: k + 1,
                lower,
                upper,
            });
        }
    }
    let n = ds.vectors[0].len();
    let labels = (0..n).map(|i| {
        (0..k).fold(0usize, |acc, j| {
            acc | (usize::from(ds.vectors[j + 1][i] > 0.0) << j)
        })
    });
    Ok((Partition::from_labels(labels), warnings))
}
