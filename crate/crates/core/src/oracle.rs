//! Brute-force reference computations for small chains.
//!
//! Everything here uses its own dense Gaussian elimination on row-major
//! `Vec<Vec<f64>>` and never calls the power iteration, nalgebra's LU or the
//! eigen solver, so agreement with the main code paths is meaningful.

use serde::Serialize;

use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};
use crate::network::FlowNetwork;
use crate::perturb::{PerturbationConfig, PerturbationEngine, SelfLoopScaling};

/// Largest network accepted by [`exhaustive_perturbation_check`].
pub const EXHAUSTIVE_MAX_NODES: usize = 6;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("nonempty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::NumericalFailure(format!("singular system at column {col}")));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Ok(x)
}

fn rows(t: &StochasticMatrix) -> Vec<Vec<f64>> {
    (0..t.len()).map(|i| (0..t.len()).map(|j| t.get(i, j)).collect()).collect()
}

/// Stationary vector from `(I - T) pi = 0` with the last equation replaced by
/// `sum(pi) = 1`.
pub fn stationary_direct(t: &StochasticMatrix) -> Result<Vec<f64>> {
    stationary_of_rows(&rows(t))
}

fn stationary_of_rows(t: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = t.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - t[i][j]).collect())
        .collect();
    let mut b = vec![0.0; n];
    a[n - 1] = vec![1.0; n];
    b[n - 1] = 1.0;
    solve(a, b)
}

/// `m[a][b]`: expected number of steps from `a` to first reach `b`; zero on the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MfptMatrix {
    pub m: Vec<Vec<f64>>,
}

/// Solves the first-step equations `m_a = 1 + sum_{c != b} P(a -> c) m_c`
/// once per target `b`.
pub fn mfpt_matrix(t: &StochasticMatrix) -> Result<MfptMatrix> {
    mfpt_of_rows(&rows(t))
}

fn mfpt_of_rows(t: &[Vec<f64>]) -> Result<MfptMatrix> {
    let n = t.len();
    let mut m = vec![vec![0.0; n]; n];
    for target in 0..n {
        let others: Vec<usize> = (0..n).filter(|&k| k != target).collect();
        if others.is_empty() {
            continue;
        }
        // P(a -> c) = t[c][a] in the column-stochastic convention.
        let a: Vec<Vec<f64>> = others
            .iter()
            .map(|&from| {
                others
                    .iter()
                    .map(|&to| if from == to { 1.0 } else { 0.0 } - t[to][from])
                    .collect()
            })
            .collect();
        let x = solve(a, vec![1.0; others.len()])?;
        for (k, &from) in others.iter().enumerate() {
            m[from][target] = x[k];
        }
    }
    Ok(MfptMatrix { m })
}

/// `1 + sum_{b != a} pi_b m[a][b]` for every start `a`; constant in `a` for
/// an irreducible chain, and equal to the Kemeny constant.
pub fn kemeny_from_mfpt(pi: &[f64], mfpt: &MfptMatrix) -> Vec<f64> {
    (0..pi.len())
        .map(|a| {
            1.0 + (0..pi.len())
                .filter(|&b| b != a)
                .map(|b| pi[b] * mfpt.m[a][b])
                .sum::<f64>()
        })
        .collect()
}

/// Kemeny constant via MFPTs, averaged over starting states.
pub fn kemeny_oracle(t: &StochasticMatrix) -> Result<f64> {
    kemeny_of_rows(&rows(t))
}

fn kemeny_of_rows(t: &[Vec<f64>]) -> Result<f64> {
    let pi = stationary_of_rows(t)?;
    let values = kemeny_from_mfpt(&pi, &mfpt_of_rows(t)?);
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeCheck {
    pub node: usize,
    /// Oracle perturbed steady state.
    pub pi_perturbed: Vec<f64>,
    pub max_delta_error: f64,
    pub zero_sum_error: f64,
    pub kemeny_pct_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveReport {
    pub nodes: Vec<NodeCheck>,
    pub max_delta_error: f64,
    pub max_zero_sum_error: f64,
    pub max_kemeny_pct_error: f64,
}

/// Perturbed transition rows built straight from the weights.
fn perturbed_rows(network: &FlowNetwork, node: usize, alpha: f64, scaling: SelfLoopScaling) -> Vec<Vec<f64>> {
    let n = network.len();
    let f = 1.0 + alpha / 100.0;
    let mut w: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| network.weights()[(i, j)]).collect())
        .collect();
    for k in 0..n {
        if k != node {
            w[node][k] *= f;
            w[k][node] *= f;
        }
    }
    w[node][node] *= match scaling {
        SelfLoopScaling::Once => f,
        SelfLoopScaling::Twice => f * f,
    };
    for j in 0..n {
        let s: f64 = (0..n).map(|i| w[i][j]).sum();
        for row in w.iter_mut() {
            row[j] /= s;
        }
    }
    w
}

/// Recomputes every single-node experiment of `network` with direct solves and
/// compares against [`PerturbationEngine::node_impact`]. Fails with the node
/// index when any steady-state delta differs by more than `tolerance`, when a
/// delta vector does not sum to zero within `tolerance`, or when the Kemeny
/// change differs by more than `tolerance` relative.
pub fn exhaustive_perturbation_check(
    network: &FlowNetwork,
    config: PerturbationConfig,
    tolerance: f64,
) -> Result<ExhaustiveReport> {
    let n = network.len();
    if n > EXHAUSTIVE_MAX_NODES {
        return Err(Error::DimensionError {
            expected: EXHAUSTIVE_MAX_NODES,
            actual: n,
        });
    }
    let engine = PerturbationEngine::new(network, config)?;
    let base_rows: Vec<Vec<f64>> = {
        let mut w: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| network.weights()[(i, j)]).collect())
            .collect();
        for j in 0..n {
            let s: f64 = (0..n).map(|i| w[i][j]).sum();
            for row in w.iter_mut() {
                row[j] /= s;
            }
        }
        w
    };
    let pi = stationary_of_rows(&base_rows)?;
    let kemeny = kemeny_of_rows(&base_rows)?;

    let mut nodes = Vec::with_capacity(n);
    for node in 0..n {
        let rows = perturbed_rows(network, node, config.alpha, config.self_loop_scaling);
        let pi_perturbed = stationary_of_rows(&rows)?;
        let result = engine.node_impact(&engine.spec(node)?)?;
        let max_delta_error = (0..n)
            .map(|j| ((pi_perturbed[j] - pi[j]) - result.delta_pi[j]).abs())
            .fold(0.0, f64::max);
        let zero_sum_error = result.delta_pi.iter().sum::<f64>().abs();
        let kemeny_pct_error = match result.kemeny_change_pct {
            Some(pct) => {
                let expected = 100.0 * (kemeny_of_rows(&rows)? - kemeny) / kemeny;
                Some((pct - expected).abs() / expected.abs().max(1.0))
            }
            None => None,
        };
        if max_delta_error > tolerance || zero_sum_error > tolerance || kemeny_pct_error.is_some_and(|e| e > tolerance)
        {
            return Err(Error::NumericalFailure(format!(
                "node {node}: delta error {max_delta_error:e}, zero-sum error {zero_sum_error:e}, \
                 kemeny error {kemeny_pct_error:?}; oracle pi' {pi_perturbed:?}, engine delta {:?}",
                result.delta_pi
            )));
        }
        nodes.push(NodeCheck {
            node,
            pi_perturbed,
            max_delta_error,
            zero_sum_error,
            kemeny_pct_error,
        });
    }
    Ok(ExhaustiveReport {
        max_delta_error: nodes.iter().map(|c| c.max_delta_error).fold(0.0, f64::max),
        max_zero_sum_error: nodes.iter().map(|c| c.zero_sum_error).fold(0.0, f64::max),
        max_kemeny_pct_error: nodes
            .iter()
            .filter_map(|c| c.kemeny_pct_error)
            .fold(0.0, f64::max),
        nodes,
    })
}
