//! Per-node spectra of wave histories and clustering from them.
//!
//! A node's history is a sum of cosines, one per Laplacian eigenvalue, with
//! amplitude proportional to the node's eigenvector component. The FFT puts
//! each mode at `omega_j = arccos((2 - c^2 lambda_j) / 2)`; the sign of the
//! node's coefficient there, read against a run-wide phase reference, is the
//! sign of `v_j(i)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::compare::compare_partitions;
use crate::partition::Partition;
use crate::wave::{init_run, suggest_t_max, WaveConfig, WaveRun};

pub const MIN_HISTORY: usize = 8;
/// Absolute magnitude below which nothing counts as a peak.
pub const ABS_FLOOR: f64 = 1e-9;
/// Peaks must reach this fraction of the largest non-dc magnitude.
pub const REL_FLOOR: f64 = 1e-3;
/// A node's coefficient below this fraction of its own largest non-dc
/// magnitude is treated as zero.
pub const ZERO_TOL: f64 = 1e-6;

pub const AUTO_START: usize = 64;
pub const AUTO_BUDGET: usize = 1 << 16;

/// One-sided spectrum of a real signal: bins `0..=T/2`, bin `b` at
/// `omega = 2 pi b / T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub owner: usize,
    pub len: usize,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn bin_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn omega(&self, bin: usize) -> f64 {
        bin_omega(bin, self.len)
    }

    pub fn bin_freqs(&self) -> Vec<f64> {
        (0..self.bin_count()).map(|b| self.omega(b)).collect()
    }

    pub fn dc(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }

    /// Largest magnitude outside bin 0.
    pub fn max_non_dc(&self) -> f64 {
        self.coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub fn bin_omega(bin: usize, len: usize) -> f64 {
    2.0 * PI * bin as f64 / len as f64
}

fn check_history(history: &[f64]) -> Result<()> {
    if history.len() < MIN_HISTORY {
        return Err(Error::TooShort {
            len: history.len(),
            min: MIN_HISTORY,
        });
    }
    if let Some(v) = history.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("history contains {v}")));
    }
    Ok(())
}

fn transform(owner: usize, history: &[f64], fft: &dyn Fft<f64>) -> Spectrum {
    let len = history.len();
    let mut buf: Vec<Complex64> = history.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft.process(&mut buf);
    buf.truncate(len / 2 + 1);
    Spectrum {
        owner,
        len,
        coeffs: buf,
    }
}

pub fn local_spectrum(owner: usize, history: &[f64]) -> Result<Spectrum> {
    check_history(history)?;
    let fft = FftPlanner::new().plan_fft_forward(history.len());
    Ok(transform(owner, history, fft.as_ref()))
}

/// Spectra of every node's history, computed in parallel.
pub fn run_spectra(run: &WaveRun) -> Result<Vec<Spectrum>> {
    let n = run.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    check_history(run.history(0))?;
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(run.history(0).len());
    (0..n)
        .into_par_iter()
        .map(|i| {
            check_history(run.history(i))?;
            Ok(transform(i, run.history(i), fft.as_ref()))
        })
        .collect()
}

/// Bins of the `k` lowest local maxima above the noise floor. Bin 0 is
/// never a peak but still counts as the left neighbour of bin 1, which
/// keeps leakage next to a large dc term from posing as a mode.
pub fn find_peak_bins(magnitudes: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let top = magnitudes.iter().skip(1).copied().fold(0.0, f64::max);
    let floor = ABS_FLOOR.max(REL_FLOOR * top);
    if !(top > ABS_FLOOR) {
        return Err(Error::NoisyFloor { floor });
    }
    let last = magnitudes.len() - 1;
    let peaks: Vec<usize> = (1..=last)
        .filter(|&b| {
            let m = magnitudes[b];
            m >= floor
                && m > magnitudes[b - 1]
                && (b == last || m >= magnitudes[b + 1])
        })
        .take(k)
        .collect();
    if peaks.len() < k {
        return Err(Error::InsufficientPeaks {
            requested: k,
            found: peaks.len(),
        });
    }
    Ok(peaks)
}

/// Frequencies of the `k` lowest peaks of one node's spectrum.
pub fn find_peaks(spec: &Spectrum, k: usize) -> Result<Vec<f64>> {
    Ok(find_peak_bins(&spec.magnitudes(), k)?
        .into_iter()
        .map(|b| spec.omega(b))
        .collect())
}

/// `lambda = (2 - 2 cos omega) / c^2`.
pub fn frequency_to_eigenvalue(omega: f64, c2: f64) -> Result<f64> {
    if !(omega > 0.0 && omega <= PI) {
        return Err(Error::Domain {
            what: "omega in (0, pi]",
            value: omega,
        });
    }
    if !(c2 > 0.0 && c2 <= 2.0) {
        return Err(Error::InvalidSpeed { c: c2.abs().sqrt() });
    }
    Ok((2.0 - 2.0 * omega.cos()) / c2)
}

/// Sign of `Re(X[bin] * conj(reference))`, or `ZeroComponent` if the
/// coefficient is negligible against the node's own spectrum.
pub fn coefficient_sign(spec: &Spectrum, bin: usize, reference: Complex64) -> Result<i8> {
    let x = spec.coeffs[bin];
    if x.norm() < ZERO_TOL * spec.max_non_dc() {
        return Err(Error::ZeroComponent {
            node: spec.owner,
            peak: bin,
        });
    }
    Ok(if (x * reference.conj()).re >= 0.0 { 1 } else { -1 })
}

/// Cluster id `sum_j A_j 2^j` with `A_j = 1` for positive signs, canonicalized.
pub fn assign_clusters(signs: &[Vec<i8>]) -> Partition {
    Partition::from_labels(signs.iter().map(|s| {
        s.iter()
            .enumerate()
            .fold(0usize, |acc, (j, &v)| acc | (usize::from(v > 0) << j))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagReason {
    /// Coefficient negligible: the node sits on a nodal line.
    ZeroComponent,
    /// Rotated coefficient has more imaginary than real part, so its sign is
    /// dominated by leakage from other modes.
    PhaseIncoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    pub node: usize,
    /// Index into the detected peaks, 0 for the lowest.
    pub peak: usize,
    pub reason: FlagReason,
    pub local_sign: i8,
    pub resolved_sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakEstimate {
    pub bin: usize,
    pub omega: f64,
    pub lambda: f64,
    pub reference_node: usize,
    /// Real part of each node's phase-aligned coefficient; proportional to
    /// the eigenvector.
    pub coeff_real: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub t_max: usize,
    pub peaks: Vec<PeakEstimate>,
    /// `signs[i][j]` for node `i`, peak `j`.
    pub signs: Vec<Vec<i8>>,
    pub flags: Vec<Flag>,
    pub partition: Partition,
    pub spectra: Vec<Spectrum>,
}

/// Root-sum-square of all nodes' magnitudes per bin; the shape every node
/// would see after one O(N) gather of its spectrum.
pub fn aggregate_magnitudes(spectra: &[Spectrum]) -> Vec<f64> {
    let bins = spectra.first().map_or(0, Spectrum::bin_count);
    (0..bins)
        .map(|b| spectra.iter().map(|s| s.coeffs[b].norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// Detects `k` peaks in a completed run and recovers each node's sign
/// at each peak.
pub fn analyze_run(g: &Graph, run: &WaveRun, k: usize) -> Result<Analysis> {
    let spectra = run_spectra(run)?;
    let c2 = run.config().c2;
    let t_max = run.round();
    let bins = find_peak_bins(&aggregate_magnitudes(&spectra), k)?;
    let n = spectra.len();
    let mut signs = vec![Vec::with_capacity(k); n];
    let mut flags = Vec::new();
    let mut peaks = Vec::with_capacity(k);
    for (j, &bin) in bins.iter().enumerate() {
        let omega = bin_omega(bin, t_max);
        let lambda = frequency_to_eigenvalue(omega, c2)?;
        let reference_node = (0..n)
            .max_by(|&a, &b| spectra[a].coeffs[bin].norm().total_cmp(&spectra[b].coeffs[bin].norm()))
            .expect("non-empty graph");
        let phase = spectra[reference_node].coeffs[bin].unscale(spectra[reference_node].coeffs[bin].norm());
        let rotated: Vec<Complex64> = spectra.iter().map(|s| s.coeffs[bin] * phase.conj()).collect();
        let coeff_real: Vec<f64> = rotated.iter().map(|z| z.re).collect();

        let mut pending = Vec::new();
        for i in 0..n {
            let local = if coeff_real[i] >= 0.0 { 1 } else { -1 };
            signs[i].push(local);
            let reason = match coefficient_sign(&spectra[i], bin, phase) {
                Err(Error::ZeroComponent { .. }) => Some(FlagReason::ZeroComponent),
                Err(e) => return Err(e),
                Ok(_) if rotated[i].re.abs() < rotated[i].im.abs() => Some(FlagReason::PhaseIncoherent),
                Ok(_) => None,
            };
            if let Some(reason) = reason {
                pending.push((i, reason, local));
            }
        }
        for (i, reason, local) in pending {
            let resolved = resolve_sign(g, i, local, lambda, &coeff_real, &signs, j);
            log::info!(
                "node {i} peak {j}: {reason:?}, local sign {local:+}, resolved {resolved:+}"
            );
            signs[i][j] = resolved;
            flags.push(Flag {
                node: i,
                peak: j,
                reason,
                local_sign: local,
                resolved_sign: resolved,
            });
        }
        peaks.push(PeakEstimate {
            bin,
            omega,
            lambda,
            reference_node,
            coeff_real,
        });
    }
    let partition = assign_clusters(&signs);
    Ok(Analysis {
        t_max,
        peaks,
        signs,
        flags,
        partition,
        spectra,
    })
}

/// One extra local round for a flagged node: the eigen-relation
/// `v_i = sum_j (W_ij / d_i) v_j / (1 - lambda)` predicts the sign from the
/// neighbours' coefficients. Near `lambda = 1` it falls back to a majority
/// vote of neighbour signs, ties keeping the local sign.
fn resolve_sign(
    g: &Graph,
    i: usize,
    local: i8,
    lambda: f64,
    coeff_real: &[f64],
    signs: &[Vec<i8>],
    j: usize,
) -> i8 {
    let denom = 1.0 - lambda;
    if denom.abs() > 1e-6 {
        let s: f64 = g.neighbors(i).map(|(n, w)| w * coeff_real[n]).sum::<f64>() / denom;
        if s > 0.0 {
            return 1;
        }
        if s < 0.0 {
            return -1;
        }
        return local;
    }
    let vote: i32 = g.neighbors(i).map(|(n, _)| i32::from(signs[n][j])).sum();
    match vote.cmp(&0) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => local,
    }
}

/// Gathered eigenvector estimate for `v_j`, `j >= 2`. Costs one scalar per
/// node.
pub fn gather_eigenvector(analysis: &Analysis, j: usize) -> Result<Vec<f64>> {
    if j < 2 || j - 2 >= analysis.peaks.len() {
        return Err(Error::InvalidArgument(format!(
            "eigenvector {j} not among the {} detected peaks",
            analysis.peaks.len()
        )));
    }
    Ok(analysis.peaks[j - 2].coeff_real.clone())
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub analysis: Analysis,
    pub run: WaveRun,
    /// Horizons examined, ending with the accepted one.
    pub horizons: Vec<usize>,
}

impl ClusterOutcome {
    pub fn partition(&self) -> &Partition {
        &self.analysis.partition
    }

    pub fn t_max(&self) -> usize {
        self.analysis.t_max
    }

    /// One scalar per node per round, plus one per node for the gather.
    pub fn messages_scalar_equiv(&self) -> u64 {
        let n = self.run.node_count() as u64;
        n * self.t_max() as u64 + n
    }
}

/// Runs the wave method with the horizon from `cfg.t_max` (rounded up to a
/// power of two) or, if unset, chosen by doubling.
///
/// A doubled horizon is accepted once it covers `eta` cycles of the lowest
/// detected mode and of the smallest gap between the lowest `k + 1` peaks,
/// the peaks sit within one bin of where the previous horizon put them, and
/// the partition is unchanged.
pub fn cluster(g: &Graph, cfg: WaveConfig, k: usize) -> Result<ClusterOutcome> {
    let mut run = init_run(g, cfg)?;
    if let Some(t) = cfg.t_max {
        let t = t.max(MIN_HISTORY).next_power_of_two();
        run.run_to(t)?;
        let analysis = analyze_run(g, &run, k)?;
        return Ok(ClusterOutcome {
            analysis,
            run,
            horizons: vec![t],
        });
    }
    let mut horizons = Vec::new();
    let mut previous: Option<Analysis> = None;
    let mut last_err = None;
    let mut h = AUTO_START;
    while h <= AUTO_BUDGET {
        run.run_to(h)?;
        horizons.push(h);
        match analyze_run(g, &run, k) {
            Ok(analysis) => {
                let accepted = match &previous {
                    Some(prev) => accept_horizon(&analysis, prev, cfg, k)?,
                    None => false,
                };
                if accepted {
                    return Ok(ClusterOutcome {
                        analysis,
                        run,
                        horizons,
                    });
                }
                previous = Some(analysis);
                last_err = None;
            }
            Err(e @ (Error::InsufficientPeaks { .. } | Error::NoisyFloor { .. })) => {
                log::debug!("horizon {h}: {e}");
                previous = None;
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
        h *= 2;
    }
    Err(last_err.unwrap_or(Error::BudgetExceeded {
        budget: AUTO_BUDGET,
    }))
}

fn accept_horizon(cur: &Analysis, prev: &Analysis, cfg: WaveConfig, k: usize) -> Result<bool> {
    let h = cur.t_max;
    let lowest = cur.peaks[0].lambda.min(2.0);
    if h < suggest_t_max(lowest, cfg.c2, cfg.eta)? {
        return Ok(false);
    }
    let aggregate = aggregate_magnitudes(&cur.spectra);
    if let Ok(bins) = find_peak_bins(&aggregate, k + 1) {
        let min_gap = bins
            .windows(2)
            .map(|w| bin_omega(w[1] - w[0], h))
            .fold(f64::INFINITY, f64::min);
        let needed = (cfg.eta * 2.0 * PI / min_gap).ceil() as usize;
        if h < needed.next_power_of_two() {
            return Ok(false);
        }
    }
    let stable = cur
        .peaks
        .iter()
        .zip(&prev.peaks)
        .all(|(a, b)| a.bin.abs_diff(2 * b.bin) <= 2);
    if !stable {
        return Ok(false);
    }
    Ok(compare_partitions(&cur.partition, &prev.partition)?.exact_up_to_permutation)
}
