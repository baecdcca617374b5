//! Column-stochastic transition matrices built from flow networks by column
//! normalization, plus the matrix-vector kernel and ergodicity checks.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Structure;
use crate::network::FlowNetwork;

/// Column-sum tolerance accepted by [`StochasticMatrix::from_matrix`].
pub const COLUMN_SUM_TOL: f64 = 1e-12;

/// How zero-outflow columns are turned into probability columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DanglingPolicy {
    #[default]
    Error,
    Uniform,
    SelfLoop,
}

/// Anything that maps a probability vector to the next one.
pub trait TransitionOperator: Sync {
    fn dim(&self) -> usize;
    /// Writes `T x` into `out`.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);
}

/// `t[(i, j)]` is the probability of moving from node `j` to node `i`; every
/// column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    year: i32,
    dangling_policy: DanglingPolicy,
    entries: DMatrix<f64>,
}

impl StochasticMatrix {
    /// Normalizes each column of the network's weights by its outflow.
    pub fn from_network(network: &FlowNetwork, policy: DanglingPolicy) -> Result<Self> {
        let mut entries = network.weights().clone();
        normalize_columns(&mut entries, policy, |j| network.node(j).to_string())?;
        Ok(StochasticMatrix {
            year: network.year(),
            dangling_policy: policy,
            entries,
        })
    }

    /// Wraps an explicit matrix, checking nonnegativity and column sums.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionError {
                expected: n,
                actual: entries.ncols(),
            });
        }
        for (j, col) in entries.column_iter().enumerate() {
            if col.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
                return Err(Error::NumericalFailure(format!(
                    "column {j} has a negative or non-finite entry"
                )));
            }
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::NumericalFailure(format!(
                    "column {j} sums to {s}, not 1"
                )));
            }
        }
        Ok(StochasticMatrix {
            year: 0,
            dangling_policy: DanglingPolicy::Error,
            entries,
        })
    }

    pub(crate) fn from_parts(year: i32, policy: DanglingPolicy, entries: DMatrix<f64>) -> Self {
        StochasticMatrix {
            year,
            dangling_policy: policy,
            entries,
        }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn dangling_policy(&self) -> DanglingPolicy {
        self.dangling_policy
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Returns `T x` for a probability vector `x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.len() {
            return Err(Error::DimensionError {
                expected: self.len(),
                actual: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub fn check_ergodicity(&self) -> Ergodicity {
        let s = Structure::of(&self.entries);
        let irreducible = s.strongly_connected();
        let aperiodic = (0..s.components.len())
            .filter(|&c| s.is_closed(c))
            .all(|c| s.period(c) == 1);
        Ergodicity {
            irreducible,
            aperiodic,
        }
    }

    /// Row-major CSV dump of all entries with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len())
                .map(|j| format!("{:.16e}", self.entries[(i, j)]))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl TransitionOperator for StochasticMatrix {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        matvec(&self.entries, x, out);
    }
}

/// `out = m x` for a column-major dense matrix, accumulated column by column.
pub(crate) fn matvec(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (col, &xj) in m.column_iter().zip(x) {
        if xj == 0.0 {
            continue;
        }
        for (o, &t) in out.iter_mut().zip(col.iter()) {
            *o += t * xj;
        }
    }
}

pub(crate) fn normalize_columns(
    m: &mut DMatrix<f64>,
    policy: DanglingPolicy,
    label: impl Fn(usize) -> String,
) -> Result<()> {
    let n = m.nrows();
    for j in 0..n {
        let mut col = m.column_mut(j);
        let s: f64 = col.iter().sum();
        if s > 0.0 {
            col.iter_mut().for_each(|t| *t /= s);
            continue;
        }
        match policy {
            DanglingPolicy::Error => {
                return Err(Error::DanglingNode {
                    index: j,
                    label: label(j),
                })
            }
            DanglingPolicy::Uniform => col.fill(1.0 / n as f64),
            DanglingPolicy::SelfLoop => {
                col.fill(0.0);
                col[j] = 1.0;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ergodicity {
    pub irreducible: bool,
    pub aperiodic: bool,
}

impl Ergodicity {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic
    }
}
