//! Flow-network data model: node identity, the weight matrix, validation
//! diagnostics and group-by aggregation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Structure;

/// Sector code reserved for the merged government/household node of an economy.
pub const GOVERNMENT_SECTOR: &str = "GOV";

/// Floor for the denominator of the balance residual.
pub const BALANCE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Industry,
    Government,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Industry => "industry",
            NodeKind::Government => "government",
        }
    }
}

/// Identity of a node: an industrial sector of an economy, or the economy's
/// government/household node. The kind is derived from the sector code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRef {
    economy: String,
    sector: String,
    kind: NodeKind,
}

impl NodeRef {
    pub fn new(economy: impl Into<String>, sector: impl Into<String>) -> Self {
        let sector = sector.into();
        let kind = if sector == GOVERNMENT_SECTOR {
            NodeKind::Government
        } else {
            NodeKind::Industry
        };
        NodeRef {
            economy: economy.into(),
            sector,
            kind,
        }
    }

    pub fn government(economy: impl Into<String>) -> Self {
        Self::new(economy, GOVERNMENT_SECTOR)
    }

    pub fn economy(&self) -> &str {
        &self.economy
    }

    pub fn sector(&self) -> &str {
        &self.sector
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn is_government(&self) -> bool {
        self.kind == NodeKind::Government
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.economy, self.sector)
    }
}

/// Annual money flows between nodes. `weight(i, j)` is the flow from node `j`
/// to node `i`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    year: i32,
    nodes: Vec<NodeRef>,
    index: HashMap<(String, String), usize>,
    weights: DMatrix<f64>,
}

impl FlowNetwork {
    /// Builds a network from explicit node order and `(source, target, flow)`
    /// records. Duplicate records for the same pair are summed.
    pub fn build<I>(year: i32, nodes: Vec<NodeRef>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeRef, NodeRef, f64)>,
    {
        let index = index_nodes(&nodes)?;
        let n = nodes.len();
        if n < 2 {
            return Err(Error::TooSmall(n));
        }
        let mut weights = DMatrix::zeros(n, n);
        let lookup = |node: &NodeRef| {
            index
                .get(&(node.economy.clone(), node.sector.clone()))
                .copied()
                .ok_or_else(|| Error::UnknownNode(node.to_string()))
        };
        for (source, target, flow) in edges {
            if !(flow.is_finite() && flow >= 0.0) {
                return Err(Error::InvalidFlow {
                    source_node: source.to_string(),
                    target: target.to_string(),
                    flow,
                });
            }
            let s = lookup(&source)?;
            let t = lookup(&target)?;
            weights[(t, s)] += flow;
        }
        Ok(FlowNetwork {
            year,
            nodes,
            index,
            weights,
        })
    }

    /// Wraps a dense weight matrix (`weights[(i, j)]` = flow `j -> i`).
    pub fn from_weights(year: i32, nodes: Vec<NodeRef>, weights: DMatrix<f64>) -> Result<Self> {
        let index = index_nodes(&nodes)?;
        let n = nodes.len();
        if n < 2 {
            return Err(Error::TooSmall(n));
        }
        if weights.nrows() != n || weights.ncols() != n {
            return Err(Error::DimensionError {
                expected: n,
                actual: weights.nrows().max(weights.ncols()),
            });
        }
        for j in 0..n {
            for i in 0..n {
                let flow = weights[(i, j)];
                if !(flow.is_finite() && flow >= 0.0) {
                    return Err(Error::InvalidFlow {
                        source_node: nodes[j].to_string(),
                        target: nodes[i].to_string(),
                        flow,
                    });
                }
            }
        }
        Ok(FlowNetwork {
            year,
            nodes,
            index,
            weights,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &NodeRef {
        &self.nodes[index]
    }

    pub fn index_of(&self, economy: &str, sector: &str) -> Option<usize> {
        self.index
            .get(&(economy.to_owned(), sector.to_owned()))
            .copied()
    }

    /// Flow from `source` to `target`.
    pub fn flow(&self, source: usize, target: usize) -> f64 {
        self.weights[(target, source)]
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Total outflow of each node (column sums).
    pub fn outflows(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.weights.column_iter().map(|c| c.iter().sum::<f64>()),
        )
    }

    /// Total inflow of each node (row sums).
    pub fn inflows(&self) -> DVector<f64> {
        let n = self.len();
        let mut rows = DVector::zeros(n);
        for j in 0..n {
            for i in 0..n {
                rows[i] += self.weights[(i, j)];
            }
        }
        rows
    }

    /// Same nodes, weights remapped so that `order[k]` becomes index `k`.
    pub(crate) fn reordered(&self, order: &[usize]) -> Self {
        let n = self.len();
        let nodes: Vec<NodeRef> = order.iter().map(|&k| self.nodes[k].clone()).collect();
        let weights = DMatrix::from_fn(n, n, |i, j| self.weights[(order[i], order[j])]);
        let index = index_nodes(&nodes).expect("permutation keeps nodes unique");
        FlowNetwork {
            year: self.year,
            nodes,
            index,
            weights,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let colsums = self.outflows();
        let rowsums = self.inflows();
        let dangling_nodes = (0..self.len()).filter(|&j| colsums[j] == 0.0).collect();
        let source_only_nodes = (0..self.len()).filter(|&i| rowsums[i] == 0.0).collect();
        let balance_residual = (0..self.len())
            .map(|k| (rowsums[k] - colsums[k]).abs() / colsums[k].max(BALANCE_EPS))
            .fold(0.0, f64::max);
        ValidationReport {
            year: self.year,
            nodes: self.len(),
            dangling_nodes,
            source_only_nodes,
            strongly_connected: Structure::of(&self.weights).strongly_connected(),
            balance_residual,
            totals: colsums.sum(),
        }
    }

    /// Sums `values` (one per node) into groups.
    pub fn group_sums(&self, values: &[f64], grouping: Grouping) -> Result<BTreeMap<String, f64>> {
        if values.len() != self.len() {
            return Err(Error::DimensionError {
                expected: self.len(),
                actual: values.len(),
            });
        }
        let mut groups = BTreeMap::new();
        for (node, &v) in self.nodes.iter().zip(values) {
            let key = match grouping {
                Grouping::ByEconomy => node.economy.as_str(),
                Grouping::BySector => node.sector.as_str(),
                Grouping::ByKind => node.kind.as_str(),
            };
            *groups.entry(key.to_owned()).or_insert(0.0) += v;
        }
        Ok(groups)
    }

    /// Distinct economy codes in node order.
    pub fn economies(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.nodes
            .iter()
            .map(|n| n.economy.as_str())
            .filter(|e| seen.insert(*e))
            .collect()
    }
}

fn index_nodes(nodes: &[NodeRef]) -> Result<HashMap<(String, String), usize>> {
    let mut index = HashMap::with_capacity(nodes.len());
    for (k, node) in nodes.iter().enumerate() {
        if index
            .insert((node.economy.clone(), node.sector.clone()), k)
            .is_some()
        {
            return Err(Error::DuplicateKey(node.to_string()));
        }
    }
    Ok(index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    ByEconomy,
    BySector,
    ByKind,
}

/// Closed-system sanity checks for one flow table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub year: i32,
    pub nodes: usize,
    /// Nodes with zero outflow (zero column sum).
    pub dangling_nodes: Vec<usize>,
    /// Nodes with zero inflow (zero row sum).
    pub source_only_nodes: Vec<usize>,
    pub strongly_connected: bool,
    /// max_k |inflow_k - outflow_k| / max(outflow_k, 1e-12)
    pub balance_residual: f64,
    pub totals: f64,
}
