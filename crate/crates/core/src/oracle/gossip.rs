//! Distributed orthogonal iteration with gossip-computed Gram matrices.
//!
//! Each round, node `i` holds a row `Q_i` of length `k` and computes
//! `V_i = sum_j J_ij Q_j` with the lazy walk `J = I - L/2`. The D-weighted
//! Gram matrix `K = sum_i d_i V_i^T V_i` is summed by push-sum gossip, each
//! node factors its estimate as `K = R^T R` and sets `Q_i = V_i R^{-1}`.
//! The columns of `Q` converge to the eigenvectors of the `k` smallest
//! eigenvalues of `L`.
//!
//! The lazy operator keeps the spectrum of `J` in `[0, 1]`; with `I - L` a
//! bipartite graph has eigenvalue `-1` and the iteration would not settle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::predict::mixing_time;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Fresh random starts tried before reporting `CholeskyFail`.
pub const MAX_RESTARTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GossipSteps {
    /// Every node receives the exact sum; no gossip messages are counted.
    Exact,
    Fixed(usize),
}

/// `ceil(tau ln^2 N)` gossip steps.
pub fn gossip_steps_for(lambda2: f64, n: usize) -> Result<usize> {
    let ln_n = (n as f64).ln();
    Ok((mixing_time(lambda2)? * ln_n * ln_n).ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrthoIterConfig {
    pub k: usize,
    pub rounds: usize,
    pub gossip: GossipSteps,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct OrthoIterResult {
    /// `q[i]` is node `i`'s row.
    pub q: Vec<Vec<f64>>,
    pub rounds: usize,
    pub gossip_steps: usize,
    /// Scalars each node broadcasts, summed over nodes and rounds.
    pub messages_scalar_equiv: u64,
    pub restarts: usize,
}

impl OrthoIterResult {
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.q.iter().map(|row| row[c]).collect()
    }
}

pub fn orthogonal_iteration_distributed(g: &Graph, cfg: OrthoIterConfig) -> Result<OrthoIterResult> {
    let n = g.node_count();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::InvalidArgument(format!("k = {} must be in 1..={n}", cfg.k)));
    }
    if cfg.rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be positive".into()));
    }
    g.ensure_connected()?;
    for attempt in 0..MAX_RESTARTS {
        if let Some(mut res) = attempt_iteration(g, cfg, cfg.seed.wrapping_add(attempt as u64)) {
            res.restarts = attempt;
            return Ok(res);
        }
        log::warn!("Gram matrix not positive definite, restarting (attempt {})", attempt + 1);
    }
    Err(Error::CholeskyFail {
        attempts: MAX_RESTARTS,
    })
}

fn attempt_iteration(g: &Graph, cfg: OrthoIterConfig, seed: u64) -> Option<OrthoIterResult> {
    let n = g.node_count();
    let k = cfg.k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..k).map(|_| rng.gen::<f64>() - 0.5).collect())
        .collect();
    let steps = match cfg.gossip {
        GossipSteps::Exact => 0,
        GossipSteps::Fixed(s) => s,
    };
    for _ in 0..cfg.rounds {
        let v: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let d = g.degree(i);
                let mut row: Vec<f64> = q[i].iter().map(|x| 0.5 * x).collect();
                for (j, w) in g.neighbors(i) {
                    for (r, x) in row.iter_mut().zip(&q[j]) {
                        *r += 0.5 * w / d * x;
                    }
                }
                row
            })
            .collect();
        let local: Vec<Vec<f64>> = (0..n).map(|i| scaled_outer(&v[i], g.degree(i))).collect();
        let estimates = match cfg.gossip {
            GossipSteps::Exact => {
                let total = local.iter().fold(vec![0.0; k * k], |acc, m| add(&acc, m));
                vec![total; n]
            }
            GossipSteps::Fixed(s) => push_sum(g, &local, s)?,
        };
        for i in 0..n {
            let r = cholesky(&estimates[i], k)?;
            q[i] = solve_right_upper(&v[i], &r, k);
        }
    }
    let per_round = k as u64 + steps as u64 * (k * k + 1) as u64;
    Some(OrthoIterResult {
        q,
        rounds: cfg.rounds,
        gossip_steps: steps,
        messages_scalar_equiv: cfg.rounds as u64 * n as u64 * per_round,
        restarts: 0,
    })
}

fn scaled_outer(v: &[f64], d: f64) -> Vec<f64> {
    let k = v.len();
    let mut m = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            m[a * k + b] = d * v[a] * v[b];
        }
    }
    m
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Push-sum with the lazy walk: every node keeps half of its mass and splits
/// the rest among neighbours in proportion to edge weight. The weight
/// `pi` starts as 1 at node 0 only, so `S_i / pi_i` tends to the global sum.
/// Returns `None` if some node never received any weight.
fn push_sum(g: &Graph, local: &[Vec<f64>], steps: usize) -> Option<Vec<Vec<f64>>> {
    let n = g.node_count();
    let mut s: Vec<Vec<f64>> = local.to_vec();
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for _ in 0..steps {
        let mut s_next: Vec<Vec<f64>> = s.iter().map(|m| m.iter().map(|x| 0.5 * x).collect()).collect();
        let mut pi_next: Vec<f64> = pi.iter().map(|x| 0.5 * x).collect();
        for j in 0..n {
            let d = g.degree(j);
            for (i, w) in g.neighbors(j) {
                let share = 0.5 * w / d;
                for (a, b) in s_next[i].iter_mut().zip(&s[j]) {
                    *a += share * b;
                }
                pi_next[i] += share * pi[j];
            }
        }
        s = s_next;
        pi = pi_next;
    }
    s.into_iter()
        .zip(pi)
        .map(|(m, p)| (p > 0.0).then(|| m.into_iter().map(|x| x / p).collect()))
        .collect()
}

/// Upper-triangular `R` with `K = R^T R`, or `None` if `K` is not positive
/// definite.
fn cholesky(kmat: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut r = vec![0.0; k * k];
    for j in 0..k {
        let mut diag = kmat[j * k + j];
        for p in 0..j {
            diag -= r[p * k + j] * r[p * k + j];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let rjj = diag.sqrt();
        r[j * k + j] = rjj;
        for c in j + 1..k {
            let mut x = kmat[j * k + c];
            for p in 0..j {
                x -= r[p * k + j] * r[p * k + c];
            }
            r[j * k + c] = x / rjj;
        }
    }
    Some(r)
}

/// Row vector `x` with `x R = v`.
fn solve_right_upper(v: &[f64], r: &[f64], k: usize) -> Vec<f64> {
    let mut x = vec![0.0; k];
    for c in 0..k {
        let mut acc = v[c];
        for p in 0..c {
            acc -= x[p] * r[p * k + c];
        }
        x[c] = acc / r[c * k + c];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::ring_graph;
    use crate::graph::build_graph;

    #[test]
    fn cholesky_round_trip() {
        let kmat = [4.0, 2.0, 2.0, 3.0];
        let r = cholesky(&kmat, 2).unwrap();
        assert_eq!(r[2], 0.0);
        let back = [
            r[0] * r[0],
            r[0] * r[1],
            r[1] * r[0],
            r[1] * r[1] + r[3] * r[3],
        ];
        for (a, b) in back.iter().zip(&kmat) {
            assert!((a - b).abs() < 1e-14);
        }
        let x = solve_right_upper(&[2.0, 1.0], &r, 2);
        let xr = [x[0] * r[0], x[0] * r[1] + x[1] * r[3]];
        assert!((xr[0] - 2.0).abs() < 1e-14 && (xr[1] - 1.0).abs() < 1e-14);
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn single_column_goes_constant() {
        let g = build_graph(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 2.0), (3, 0, 1.0), (0, 2, 1.0)]).unwrap();
        let cfg = OrthoIterConfig {
            k: 1,
            rounds: 200,
            gossip: GossipSteps::Exact,
            seed: 3,
        };
        let res = orthogonal_iteration_distributed(&g, cfg).unwrap();
        let col = res.column(0);
        assert!(col.iter().all(|x| (x - col[0]).abs() < 1e-9), "{col:?}");
        // D-normalized: sum_i d_i q_i^2 = 1
        let norm: f64 = col.iter().zip(g.degrees()).map(|(x, d)| d * x * x).sum();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn push_sum_recovers_totals() {
        let g = ring_graph(6).unwrap();
        let local: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let est = push_sum(&g, &local, 400).unwrap();
        for e in est {
            assert!((e[0] - 15.0).abs() < 1e-9);
        }
    }

    #[test]
    fn message_accounting() {
        let g = ring_graph(6).unwrap();
        let cfg = OrthoIterConfig {
            k: 2,
            rounds: 3,
            gossip: GossipSteps::Fixed(10),
            seed: 1,
        };
        let res = orthogonal_iteration_distributed(&g, cfg).unwrap();
        assert_eq!(res.messages_scalar_equiv, 3 * 6 * (2 + 10 * 5));
    }
}
