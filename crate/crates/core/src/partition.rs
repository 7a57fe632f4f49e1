use std::collections::HashMap;

use serde::Serialize;

/// Cluster label per node, canonicalized so labels are `0..k` in order of
/// first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels<I: IntoIterator<Item = usize>>(raw: I) -> Self {
        let mut map = HashMap::new();
        let labels: Vec<usize> = raw
            .into_iter()
            .map(|l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            k: map.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cluster_count(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Nodes in each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (node, &l) in self.labels.iter().enumerate() {
            out[l].push(node);
        }
        out
    }
}
