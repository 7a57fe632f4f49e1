//! Synchronous simulation of the discretized wave equation on a graph.
//!
//! Each round every node computes
//!
//! ```text
//! u_i(t) = 2 u_i(t-1) - u_i(t-2) - c^2 * sum_{j in N(i) + i} L_ij u_j(t-1)
//! ```
//!
//! from its own two previous values, its Laplacian row and the previous
//! values of its neighbours. Rounds are barrier-synchronized: all updates in
//! round `t` read round `t-1` values only.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, LaplacianRow};

pub const DEFAULT_C2: f64 = 1.99;
pub const DEFAULT_ETA: f64 = 7.0;

/// `|u_i|` beyond this multiple of the initial amplitude aborts the run.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

const PARALLEL_THRESHOLD: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveConfig {
    /// Squared wave speed; must lie in `(0, 2)`.
    pub c2: f64,
    /// Cycles of the lowest frequency needed before its peak is resolved.
    pub eta: f64,
    pub seed: u64,
    /// Fixed number of rounds. `None` lets the analysis pick a horizon.
    pub t_max: Option<usize>,
}

impl Default for WaveConfig {
    fn default() -> Self {
        WaveConfig {
            c2: DEFAULT_C2,
            eta: DEFAULT_ETA,
            seed: 0,
            t_max: None,
        }
    }
}

impl WaveConfig {
    pub fn new(c2: f64, eta: f64, seed: u64) -> Result<Self> {
        let cfg = WaveConfig {
            c2,
            eta,
            seed,
            t_max: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_t_max(mut self, t_max: usize) -> Self {
        self.t_max = Some(t_max);
        self
    }

    pub fn c(&self) -> f64 {
        self.c2.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        check_c2(self.c2)?;
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidArgument(format!("eta = {} must be positive", self.eta)));
        }
        if self.t_max == Some(0) {
            return Err(Error::InvalidArgument("t_max must be positive".into()));
        }
        Ok(())
    }
}

fn check_c2(c2: f64) -> Result<()> {
    if c2.is_finite() && c2 > 0.0 && c2 < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpeed { c: c2.abs().sqrt() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeWaveState {
    /// `u_i(t-1)`
    pub u_prev: f64,
    /// `u_i(t-2)`
    pub u_prev2: f64,
    /// `u_i(1..=t)`
    pub history: Vec<f64>,
}

impl NodeWaveState {
    fn new(u0: f64, u_minus1: f64) -> Self {
        NodeWaveState {
            u_prev: u0,
            u_prev2: u_minus1,
            history: Vec::new(),
        }
    }
}

/// One node's update. `read(j)` supplies `u_j(t-1)` and is only called for
/// the ids in `row`.
pub fn node_update(
    state: &NodeWaveState,
    row: &LaplacianRow,
    c2: f64,
    mut read: impl FnMut(usize) -> f64,
) -> f64 {
    let lu: f64 = row.entries.iter().map(|&(j, l)| l * read(j)).sum();
    2.0 * state.u_prev - state.u_prev2 - c2 * lu
}

#[derive(Debug, Clone)]
pub struct WaveRun {
    config: WaveConfig,
    rows: Vec<LaplacianRow>,
    nodes: Vec<NodeWaveState>,
    initial: Vec<f64>,
    t: usize,
    guard: f64,
    recording: bool,
}

/// Starts a run from `u_i(0) ~ U[0, 1)` drawn in node order from the seeded
/// generator, with `u(-1) = u(0)`.
pub fn init_run(g: &Graph, cfg: WaveConfig) -> Result<WaveRun> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let u0: Vec<f64> = (0..g.node_count()).map(|_| rng.gen::<f64>()).collect();
    WaveRun::with_initial(g, cfg, &u0)
}

impl WaveRun {
    /// Starts from a given `u(0)` with `u(-1) = u(0)`.
    pub fn with_initial(g: &Graph, cfg: WaveConfig, u0: &[f64]) -> Result<Self> {
        cfg.validate()?;
        g.ensure_connected()?;
        Self::build(g, cfg, u0, u0)
    }

    /// Starts from arbitrary `u(0)`, `u(-1)` and any positive `c2`, skipping
    /// the stability preconditions. Used to exhibit the unstable regimes.
    pub fn unchecked(g: &Graph, c2: f64, u0: &[f64], u_minus1: &[f64]) -> Result<Self> {
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(Error::InvalidSpeed { c: c2.abs().sqrt() });
        }
        let cfg = WaveConfig {
            c2,
            ..WaveConfig::default()
        };
        Self::build(g, cfg, u0, u_minus1)
    }

    fn build(g: &Graph, config: WaveConfig, u0: &[f64], u_minus1: &[f64]) -> Result<Self> {
        let n = g.node_count();
        if u0.len() != n || u_minus1.len() != n {
            return Err(Error::InvalidArgument(format!(
                "initial state has {} / {} values for {n} nodes",
                u0.len(),
                u_minus1.len()
            )));
        }
        if u0.iter().chain(u_minus1).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("initial state must be finite".into()));
        }
        let amplitude = u0.iter().chain(u_minus1).fold(0.0f64, |m, v| m.max(v.abs()));
        let guard = DIVERGENCE_FACTOR * if amplitude > 0.0 { amplitude } else { 1.0 };
        Ok(WaveRun {
            config,
            rows: g.laplacian_rows(),
            nodes: u0
                .iter()
                .zip(u_minus1)
                .map(|(&a, &b)| NodeWaveState::new(a, b))
                .collect(),
            initial: u0.to_vec(),
            t: 0,
            guard,
            recording: true,
        })
    }

    pub fn config(&self) -> &WaveConfig {
        &self.config
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Completed rounds.
    pub fn round(&self) -> usize {
        self.t
    }

    pub fn node(&self, i: usize) -> &NodeWaveState {
        &self.nodes[i]
    }

    /// `u_i(1..=t)`.
    pub fn history(&self, i: usize) -> &[f64] {
        &self.nodes[i].history
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Current `u(t)`.
    pub fn current(&self) -> Vec<f64> {
        self.nodes.iter().map(|s| s.u_prev).collect()
    }

    /// Turns history recording on or off. With recording off the per-node
    /// histories stop growing, which keeps long stability probes cheap.
    pub fn set_recording(&mut self, on: bool) {
        self.recording = on;
    }

    /// Advances one synchronous round.
    pub fn step(&mut self) -> Result<()> {
        let prev: Vec<f64> = self.nodes.iter().map(|s| s.u_prev).collect();
        let c2 = self.config.c2;
        let update = |(state, row): (&NodeWaveState, &LaplacianRow)| {
            node_update(state, row, c2, |j| prev[j])
        };
        let next: Vec<f64> = if self.nodes.len() >= PARALLEL_THRESHOLD {
            self.nodes.par_iter().zip(self.rows.par_iter()).map(update).collect()
        } else {
            self.nodes.iter().zip(self.rows.iter()).map(update).collect()
        };
        if let Some((node, &value)) = next
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.abs() <= self.guard))
        {
            return Err(Error::NumericalDivergence {
                round: self.t + 1,
                node,
                value,
                guard: self.guard,
            });
        }
        for (state, value) in self.nodes.iter_mut().zip(next) {
            state.u_prev2 = state.u_prev;
            state.u_prev = value;
            if self.recording {
                state.history.push(value);
            }
        }
        self.t += 1;
        Ok(())
    }

    /// Steps until `t_max` rounds have completed.
    pub fn run_to(&mut self, t_max: usize) -> Result<()> {
        while self.t < t_max {
            self.step()?;
        }
        Ok(())
    }

    /// `t,node,u` rows for every recorded round, starting at `t = 0`.
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("t,node,u\n");
        for (i, u) in self.initial.iter().enumerate() {
            out.push_str(&format!("0,{i},{u:e}\n"));
        }
        let recorded = self.nodes.first().map_or(0, |s| s.history.len());
        for t in 0..recorded {
            for (i, s) in self.nodes.iter().enumerate() {
                out.push_str(&format!("{},{i},{:e}\n", t + 1, s.history[t]));
            }
        }
        out
    }
}

/// Angular frequency per round of the mode with Laplacian eigenvalue
/// `lambda`: `cos(omega) = (2 - c^2 lambda) / 2`.
pub fn mode_frequency(lambda: f64, c2: f64) -> Result<f64> {
    let arg = (2.0 - c2 * lambda) / 2.0;
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::Domain {
            what: "arccos((2 - c^2 lambda) / 2)",
            value: arg,
        });
    }
    Ok(arg.acos())
}

/// Rounds needed to see `eta` full cycles of the mode with eigenvalue
/// `lambda2`, rounded up to a power of two.
pub fn suggest_t_max(lambda2: f64, c2: f64, eta: f64) -> Result<usize> {
    if !(lambda2 > 0.0 && lambda2 <= 2.0) {
        return Err(Error::Domain {
            what: "lambda2 in (0, 2]",
            value: lambda2,
        });
    }
    let omega = mode_frequency(lambda2, c2)?;
    if omega <= 0.0 {
        return Err(Error::Domain {
            what: "omega2 > 0",
            value: omega,
        });
    }
    let rounds = (eta * 2.0 * PI / omega).ceil();
    if !rounds.is_finite() || rounds > (1u64 << 52) as f64 {
        return Err(Error::Domain {
            what: "suggested horizon",
            value: rounds,
        });
    }
    Ok((rounds as usize).max(1).next_power_of_two())
}

/// Windowed maxima of `max_i |u_i(t)|` over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub initial: f64,
    pub window: usize,
    pub window_max: Vec<f64>,
}

impl AmplitudeTrace {
    pub fn overall_max(&self) -> f64 {
        self.window_max.iter().fold(self.initial, |m, &v| m.max(v))
    }

    /// Largest amplitude in the final window over the largest in the first.
    pub fn growth_ratio(&self) -> f64 {
        match (self.window_max.first(), self.window_max.last()) {
            (Some(&first), Some(&last)) if first > 0.0 => last / first,
            _ => 1.0,
        }
    }

    /// A bounded oscillation keeps the ratio near one; linear growth over
    /// `w` windows drives it toward `w`.
    pub fn is_growing(&self) -> bool {
        self.window_max.len() >= 4 && self.growth_ratio() > 2.0
    }
}

/// Advances `run` by `rounds` without recording history and reports the
/// amplitude in windows of `window` rounds.
pub fn probe_amplitude(run: &mut WaveRun, rounds: usize, window: usize) -> Result<AmplitudeTrace> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    let initial = run.current().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let recording = run.recording;
    run.set_recording(false);
    let mut window_max = Vec::new();
    let mut current = 0.0f64;
    let mut result = Ok(());
    for r in 0..rounds {
        if let Err(e) = run.step() {
            result = Err(e);
            break;
        }
        let amp = run.nodes.iter().fold(0.0f64, |m, s| m.max(s.u_prev.abs()));
        current = current.max(amp);
        if (r + 1) % window == 0 || r + 1 == rounds {
            window_max.push(current);
            current = 0.0;
        }
    }
    run.set_recording(recording);
    result.map(|_| AmplitudeTrace {
        initial,
        window,
        window_max,
    })
}
