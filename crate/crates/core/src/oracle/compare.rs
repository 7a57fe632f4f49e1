use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub exact_up_to_permutation: bool,
    /// Fraction of nodes on which the partitions agree under the best label
    /// bijection.
    pub agreement: f64,
    pub matched: usize,
}

pub fn compare_partitions(a: &Partition, b: &Partition) -> Result<Comparison> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(Comparison {
            exact_up_to_permutation: true,
            agreement: 1.0,
            matched: 0,
        });
    }
    let size = a.cluster_count().max(b.cluster_count());
    let mut counts = vec![0i64; size * size];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        counts[x * size + y] += 1;
    }
    let matrix = Matrix::from_vec(size, size, counts).expect("square contingency table");
    let (matched, _) = kuhn_munkres(&matrix);
    let matched = matched as usize;
    Ok(Comparison {
        exact_up_to_permutation: matched == a.len(),
        agreement: matched as f64 / a.len() as f64,
        matched,
    })
}
