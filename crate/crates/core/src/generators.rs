//! Deterministic graph generators: paths with one weak link, rings, planted
//! partitions, Erdős–Rényi graphs and the bundled karate-club network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::edgelist;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Resampling attempts before a random generator gives up on connectivity.
pub const MAX_ATTEMPTS: usize = 8;

const KARATE_TSV: &str = include_str!("../data/karate.tsv");

/// Path `0 - 1 - ... - (n-1)` with unit weights, except edge
/// `(weak_pos, weak_pos + 1)` which gets `weak_weight`.
pub fn line_graph(n: usize, weak_pos: usize, weak_weight: f64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("line graph needs n >= 2, got {n}")));
    }
    if weak_pos >= n - 1 {
        return Err(Error::InvalidArgument(format!(
            "weak edge position {weak_pos} outside 0..{}",
            n - 1
        )));
    }
    let edges: Vec<_> = (0..n - 1)
        .map(|i| (i, i + 1, if i == weak_pos { weak_weight } else { 1.0 }))
        .collect();
    Graph::from_edges(n, &edges)
}

/// Cycle `C_n` with unit weights.
pub fn ring_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("ring needs n >= 3, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    Graph::from_edges(n, &edges)
}

/// Two-block planted partition: nodes `0..n1` form the first block, the rest
/// the second. Pairs are sampled independently with `p_in` inside a block
/// and `p_out` across.
pub fn planted_partition(n1: usize, n2: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    planted_blocks(&[n1, n2], p_in, p_out, seed)
}

/// Planted partition with any number of blocks, laid out contiguously.
pub fn planted_blocks(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidArgument("block sizes must be positive".into()));
    }
    check_probability(p_in)?;
    check_probability(p_out)?;
    if p_in <= p_out {
        return Err(Error::InvalidArgument(format!(
            "p_in = {p_in} must exceed p_out = {p_out}"
        )));
    }
    let probs: Vec<Vec<f64>> = (0..sizes.len())
        .map(|a| (0..sizes.len()).map(|b| if a == b { p_in } else { p_out }).collect())
        .collect();
    block_model(sizes, &probs, seed)
}

/// Stochastic block model: a pair in blocks `a`, `b` is linked with
/// probability `probs[a][b]`. Blocks are laid out contiguously.
pub fn block_model(sizes: &[usize], probs: &[Vec<f64>], seed: u64) -> Result<Graph> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidArgument("block sizes must be positive".into()));
    }
    let b = sizes.len();
    if probs.len() != b || probs.iter().any(|row| row.len() != b) {
        return Err(Error::InvalidArgument(format!("need a {b} x {b} probability matrix")));
    }
    for x in 0..b {
        for y in 0..b {
            check_probability(probs[x][y])?;
            if probs[x][y] != probs[y][x] {
                return Err(Error::InvalidArgument("block probabilities must be symmetric".into()));
            }
        }
    }
    let block: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    sample_connected(block.len(), seed, |i, j| probs[block[i]][block[j]])
}

/// Inside-block probability that makes the expected edge count of a
/// two-block planted partition equal `target_edges`.
pub fn planted_p_in_for_edges(n1: usize, n2: usize, p_out: f64, target_edges: f64) -> f64 {
    let inside = (n1 * n1.saturating_sub(1) / 2 + n2 * n2.saturating_sub(1) / 2) as f64;
    let across = (n1 * n2) as f64;
    (target_edges - p_out * across) / inside
}

/// `G(n, p)` conditioned on being connected.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("random graph needs n >= 2, got {n}")));
    }
    check_probability(p)?;
    sample_connected(n, seed, |_, _| p)
}

/// Zachary's karate club: 34 members, 78 unit-weight friendships. Node `i`
/// is member `i + 1`.
pub fn karate_club() -> Graph {
    edgelist::parse(KARATE_TSV)
        .expect("bundled karate file is valid")
        .graph
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")))
    }
}

fn sample_connected(n: usize, seed: u64, prob: impl Fn(usize, usize) -> f64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components = n;
    for _ in 0..MAX_ATTEMPTS {
        let mut edges = Vec::new();
        let mut touched = vec![false; n];
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < prob(i, j) {
                    edges.push((i, j, 1.0));
                    touched[i] = true;
                    touched[j] = true;
                }
            }
        }
        if touched.iter().any(|t| !t) {
            components = n;
            continue;
        }
        let g = Graph::from_edges(n, &edges)?;
        components = g.component_count();
        if components == 1 {
            return Ok(g);
        }
    }
    Err(Error::Disconnected { components })
}
