//! The wave recurrence in first-order form `z(t) = M z(t-1)` with
//! `z(t) = (u(t), u(t-1))` and `M = [[2I - c^2 L, -I], [I, 0]]`.
//!
//! Each Laplacian eigenpair `(lambda, v)` gives two eigenpairs of `M`:
//! `(alpha, (alpha v, v))` with `alpha^2 - (2 - c^2 lambda) alpha + 1 = 0`.

use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{dense_spectral_with_limit, DenseSpectral};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const MODULUS_TOL: f64 = 1e-9;

/// Row-major `2N x 2N` companion matrix.
pub fn companion_matrix(g: &Graph, c2: f64) -> Vec<f64> {
    let n = g.node_count();
    let m = 2 * n;
    let l = g.dense_laplacian();
    let mut out = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            out[r * m + c] = -c2 * l[r * n + c];
        }
        out[r * m + r] += 2.0;
        out[r * m + n + r] = -1.0;
        out[(n + r) * m + r] = 1.0;
    }
    out
}

/// `u(1..=t)` by repeated dense multiplication with `M`.
pub fn companion_propagate(
    g: &Graph,
    c2: f64,
    u0: &[f64],
    u_minus1: &[f64],
    t: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = g.node_count();
    if u0.len() != n || u_minus1.len() != n {
        return Err(Error::SizeMismatch {
            left: u0.len().max(u_minus1.len()),
            right: n,
        });
    }
    let m = companion_matrix(g, c2);
    let mut z: Vec<f64> = u0.iter().chain(u_minus1).copied().collect();
    let mut out = Vec::with_capacity(t);
    for _ in 0..t {
        z = (0..2 * n)
            .map(|r| (0..2 * n).map(|c| m[r * 2 * n + c] * z[c]).sum())
            .collect();
        out.push(z[..n].to_vec());
    }
    Ok(out)
}

/// The two roots of `alpha^2 - (2 - c^2 lambda) alpha + 1 = 0`, i.e.
/// `(2 - c^2 lambda)/2 +- (c/2) sqrt(c^2 lambda^2 - 4 lambda)`.
pub fn alpha_pair(lambda: f64, c2: f64) -> [Complex64; 2] {
    let theta = 2.0 - c2 * lambda;
    let disc = theta * theta - 4.0;
    let half = theta / 2.0;
    if disc < 0.0 {
        let im = (-disc).sqrt() / 2.0;
        [Complex64::new(half, im), Complex64::new(half, -im)]
    } else {
        let re = disc.sqrt() / 2.0;
        [Complex64::new(half + re, 0.0), Complex64::new(half - re, 0.0)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateCase {
    /// `lambda = 0`: `alpha = 1` twice with one eigenvector; the generalized
    /// eigenvector `(1, -1)` grows linearly unless `u(-1) = u(0)`.
    ConstantMode,
    /// `c^2 lambda = 4`: `alpha = -1` twice; amplitude grows linearly.
    AlternatingMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeCheck {
    pub lambda: f64,
    pub alpha: [(f64, f64); 2],
    pub modulus: [f64; 2],
    /// `max ||M m - alpha m||_inf` over both eigenvector candidates.
    pub residual: f64,
    pub case: Option<DegenerateCase>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompanionReport {
    pub c2: f64,
    pub modes: Vec<ModeCheck>,
    pub max_modulus_deviation: f64,
    pub max_residual: f64,
}

impl CompanionReport {
    pub fn all_unit_modulus(&self) -> bool {
        self.max_modulus_deviation <= MODULUS_TOL
    }

    pub fn has_case(&self, case: DegenerateCase) -> bool {
        self.modes.iter().any(|m| m.case == Some(case))
    }
}

pub fn companion_eigencheck(g: &Graph, c2: f64, dense_limit: usize) -> Result<CompanionReport> {
    let ds = dense_spectral_with_limit(g, dense_limit)?;
    Ok(companion_report(g, &ds, c2))
}

/// Checks every candidate eigenpair against the explicit matrix `M`.
///
/// `lambda = 0` and `c^2 lambda = 4` are double roots of the characteristic
/// polynomial, so rounding noise of size `e` in the dense eigenvalue moves
/// `alpha` by `sqrt(e)`. Eigenvalues within `MODULUS_TOL` of either case are
/// snapped to the exact value before forming `alpha`; `ModeCheck::lambda`
/// keeps the raw value.
pub fn companion_report(g: &Graph, ds: &DenseSpectral, c2: f64) -> CompanionReport {
    let n = g.node_count();
    let m = companion_matrix(g, c2);
    let nonzero: Vec<Vec<(usize, f64)>> = m
        .chunks(2 * n)
        .map(|row| row.iter().copied().enumerate().filter(|&(_, x)| x != 0.0).collect())
        .collect();
    let mut modes = Vec::with_capacity(n);
    for (lambda, v) in ds.values.iter().copied().zip(&ds.vectors) {
        let (case, exact) = if lambda.abs() < MODULUS_TOL {
            (Some(DegenerateCase::ConstantMode), 0.0)
        } else if (c2 * lambda - 4.0).abs() < MODULUS_TOL {
            (Some(DegenerateCase::AlternatingMode), 4.0 / c2)
        } else {
            (None, lambda)
        };
        let alphas = alpha_pair(exact, c2);
        let mut residual = 0.0f64;
        for alpha in alphas {
            let z: Vec<Complex64> = v.iter().map(|&x| alpha * x).chain(v.iter().map(|&x| Complex64::new(x, 0.0))).collect();
            for (r, row) in nonzero.iter().enumerate() {
                let mz: Complex64 = row.iter().map(|&(c, x)| z[c] * x).sum();
                residual = residual.max((mz - alpha * z[r]).norm());
            }
        }
        modes.push(ModeCheck {
            lambda,
            alpha: [(alphas[0].re, alphas[0].im), (alphas[1].re, alphas[1].im)],
            modulus: [alphas[0].norm(), alphas[1].norm()],
            residual,
            case,
        });
    }
    let max_modulus_deviation = modes
        .iter()
        .flat_map(|m| m.modulus)
        .map(|x| (x - 1.0).abs())
        .fold(0.0, f64::max);
    let max_residual = modes.iter().map(|m| m.residual).fold(0.0, f64::max);
    CompanionReport {
        c2,
        modes,
        max_modulus_deviation,
        max_residual,
    }
}
