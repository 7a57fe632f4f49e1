//! Heat (consensus) iteration `u(t+1) = (I - L) u(t)`.

use super::eigen::DenseSpectral;
use crate::error::{Error, Result};
use crate::graph::Graph;

fn check_len(g: &Graph, u0: &[f64]) -> Result<()> {
    if u0.len() == g.node_count() {
        Ok(())
    } else {
        Err(Error::SizeMismatch {
            left: u0.len(),
            right: g.node_count(),
        })
    }
}

/// One application of `I - L = D^{-1} W`.
pub fn heat_step(g: &Graph, u: &[f64]) -> Vec<f64> {
    (0..g.node_count())
        .map(|i| g.neighbors(i).map(|(j, w)| w * u[j]).sum::<f64>() / g.degree(i))
        .collect()
}

/// One application of the lazy operator `I - L/2`.
pub fn lazy_heat_step(g: &Graph, u: &[f64]) -> Vec<f64> {
    heat_step(g, u)
        .into_iter()
        .zip(u)
        .map(|(a, b)| 0.5 * (a + b))
        .collect()
}

pub fn heat_iteration(g: &Graph, u0: &[f64], t: usize) -> Result<Vec<f64>> {
    check_len(g, u0)?;
    let mut u = u0.to_vec();
    for _ in 0..t {
        u = heat_step(g, &u);
    }
    Ok(u)
}

/// `sum_j C_j (1 - lambda_j)^t v_j` with `C_j = v_j^T D u0`.
pub fn heat_closed_form(g: &Graph, ds: &DenseSpectral, u0: &[f64], t: usize) -> Result<Vec<f64>> {
    check_len(g, u0)?;
    let d = g.degrees();
    let mut u = vec![0.0; u0.len()];
    for (&lambda, v) in ds.values.iter().zip(&ds.vectors) {
        let c: f64 = v.iter().zip(u0).zip(d).map(|((a, b), w)| a * b * w).sum();
        let scale = c * (1.0 - lambda).powi(t as i32);
        for (ui, vi) in u.iter_mut().zip(v) {
            *ui += scale * vi;
        }
    }
    Ok(u)
}

/// Degree-weighted mean, the value consensus converges to.
pub fn weighted_mean(g: &Graph, u: &[f64]) -> f64 {
    let d = g.degrees();
    u.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / d.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::oracle::eigen::dense_spectral;

    #[test]
    fn constant_is_fixed() {
        let g = build_graph(&[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        assert_eq!(heat_iteration(&g, &[1.0; 3], 17).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn two_nodes_alternate() {
        let g = build_graph(&[(0, 1, 1.0)]).unwrap();
        let ds = dense_spectral(&g).unwrap();
        for t in 0..6 {
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            let want = [0.5 + 0.5 * sign, 0.5 - 0.5 * sign];
            let got = heat_iteration(&g, &[1.0, 0.0], t).unwrap();
            let closed = heat_closed_form(&g, &ds, &[1.0, 0.0], t).unwrap();
            for i in 0..2 {
                assert!((got[i] - want[i]).abs() < 1e-15);
                assert!((closed[i] - want[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lazy_step_keeps_weighted_mean() {
        let g = build_graph(&[(0, 1, 1.0), (1, 2, 3.0), (2, 3, 0.5), (3, 0, 1.0)]).unwrap();
        let u = vec![0.1, 0.7, 0.3, 0.9];
        let m = weighted_mean(&g, &u);
        let mut v = u.clone();
        for _ in 0..10 {
            v = lazy_heat_step(&g, &v);
            assert!((weighted_mean(&g, &v) - m).abs() < 1e-14);
        }
    }
}
