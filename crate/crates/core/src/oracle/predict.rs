//! Closed-form round counts for the wave method and the gossip baseline.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::wave::mode_frequency;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePredictor {
    pub lambda2: f64,
    pub c2: f64,
    pub eta: f64,
    pub n: usize,
    /// Mixing time `-1 / ln(1 - lambda2)` of the random walk `D^{-1} W`.
    pub tau: f64,
    pub omega2: f64,
    /// `eta / omega2 + N`: resolving the lowest mode plus an O(N) gather.
    pub t_wave: f64,
    /// `tau ln^2 N`.
    pub t_gossip: f64,
}

pub fn mixing_time(lambda2: f64) -> Result<f64> {
    if !(lambda2 > 0.0 && lambda2 < 1.0) {
        return Err(Error::MixingTimeUndefined { lambda2 });
    }
    Ok(-1.0 / (1.0 - lambda2).ln())
}

pub fn predict_times(lambda2: f64, c2: f64, eta: f64, n: usize) -> Result<ConvergencePredictor> {
    if !(c2 > 0.0 && c2 < 2.0) {
        return Err(Error::InvalidSpeed { c: c2.abs().sqrt() });
    }
    if !(eta > 0.0) || n < 2 {
        return Err(Error::InvalidArgument(format!("need eta > 0 and N >= 2, got {eta}, {n}")));
    }
    if !(lambda2 > 0.0 && lambda2 < 2.0) {
        return Err(Error::Domain {
            what: "lambda2 in (0, 2)",
            value: lambda2,
        });
    }
    let tau = mixing_time(lambda2)?;
    // arccos((2 + c^2 (e^{-1/tau} - 1)) / 2) is the same as mode_frequency
    // since e^{-1/tau} = 1 - lambda2.
    let omega2 = mode_frequency(1.0 - (-1.0 / tau).exp(), c2)?;
    let ln_n = (n as f64).ln();
    Ok(ConvergencePredictor {
        lambda2,
        c2,
        eta,
        n,
        tau,
        omega2,
        t_wave: eta / omega2 + n as f64,
        t_gossip: tau * ln_n * ln_n,
    })
}
