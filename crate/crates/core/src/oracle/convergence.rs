//! Measured rounds to convergence for the wave method and heat diffusion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::heat::{lazy_heat_step, weighted_mean};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::{aggregate_magnitudes, find_peak_bins, frequency_to_eigenvalue, bin_omega, run_spectra};
use crate::wave::{init_run, suggest_t_max, WaveConfig};

pub const WAVE_START: usize = 16;
pub const ROUND_BUDGET: usize = 1 << 20;
pub const WAVE_BUDGET: usize = 1 << 16;
/// Heat has converged once `||u - mean||_inf <= HEAT_TOL ||u(0)||_inf`,
/// matching the relative floor used for spectral peaks.
pub const HEAT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Wave,
    Heat,
}

/// Rounds until `method` has converged on `g`.
///
/// Wave: the first power-of-two horizon whose lowest peak sits within one
/// bin of the previous horizon's and which covers `eta` cycles of it.
/// Heat: the lazy walk `I - L/2` until within [`HEAT_TOL`] of consensus; the
/// plain walk `I - L` oscillates forever on bipartite graphs such as even
/// rings.
pub fn measure_convergence(g: &Graph, method: Method, cfg: WaveConfig) -> Result<usize> {
    g.ensure_connected()?;
    match method {
        Method::Wave => wave_rounds(g, cfg),
        Method::Heat => heat_rounds(g, cfg.seed),
    }
}

fn wave_rounds(g: &Graph, cfg: WaveConfig) -> Result<usize> {
    let mut run = init_run(g, cfg)?;
    let mut previous: Option<usize> = None;
    let mut h = WAVE_START;
    while h <= WAVE_BUDGET {
        run.run_to(h)?;
        let spectra = run_spectra(&run)?;
        let bin = find_peak_bins(&aggregate_magnitudes(&spectra), 1).ok().map(|b| b[0]);
        if let (Some(bin), Some(prev)) = (bin, previous) {
            let lambda = frequency_to_eigenvalue(bin_omega(bin, h), cfg.c2)?.min(2.0);
            if bin.abs_diff(2 * prev) <= 2 && h >= suggest_t_max(lambda, cfg.c2, cfg.eta)? {
                return Ok(h);
            }
        }
        previous = bin;
        h *= 2;
    }
    Err(Error::BudgetExceeded { budget: WAVE_BUDGET })
}

fn heat_rounds(g: &Graph, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..g.node_count()).map(|_| rng.gen::<f64>()).collect();
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mean = weighted_mean(g, &u);
    for t in 0..=ROUND_BUDGET {
        let dev = u.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        if dev <= HEAT_TOL * scale {
            return Ok(t);
        }
        u = lazy_heat_step(g, &u);
    }
    Err(Error::BudgetExceeded { budget: ROUND_BUDGET })
}
