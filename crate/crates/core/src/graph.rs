//! Connectivity of the positive-entry digraph of a square matrix.
//!
//! Entry `m[(i, j)] > 0` is read as an arc `j -> i` (flow from column node to
//! row node), matching both the flow table and the transition matrix.

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

pub(crate) struct Structure {
    /// Strongly connected components, each sorted ascending.
    pub components: Vec<Vec<usize>>,
    /// Component id per node.
    pub component_of: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl Structure {
    pub fn of(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if m[(i, j)] > 0.0 {
                    adjacency[j].push(i);
                    edges.push((j as u32, i as u32));
                }
            }
        }
        let mut g = DiGraph::<(), ()>::from_edges(edges);
        // Isolated trailing nodes never show up in the edge list.
        while g.node_count() < n {
            g.add_node(());
        }
        let mut components: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
                c.sort_unstable();
                c
            })
            .collect();
        components.sort_unstable_by_key(|c| c[0]);
        let mut component_of = vec![0; n];
        for (id, c) in components.iter().enumerate() {
            for &v in c {
                component_of[v] = id;
            }
        }
        Structure {
            components,
            component_of,
            adjacency,
        }
    }

    pub fn strongly_connected(&self) -> bool {
        self.components.len() == 1
    }

    /// A component is closed (recurrent) when no arc leaves it.
    pub fn is_closed(&self, id: usize) -> bool {
        self.components[id]
            .iter()
            .all(|&v| self.adjacency[v].iter().all(|&w| self.component_of[w] == id))
    }

    /// Period of a strongly connected component: gcd over internal arcs
    /// `u -> v` of `level(u) + 1 - level(v)` for BFS levels from any root.
    /// A single node without a self-loop has no cycles; it reports 0.
    pub fn period(&self, id: usize) -> usize {
        let comp = &self.components[id];
        let mut level = vec![usize::MAX; self.adjacency.len()];
        let root = comp[0];
        level[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut g = 0usize;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if self.component_of[v] != id {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    let d = (level[u] + 1).abs_diff(level[v]);
                    g = gcd(g, d);
                }
            }
        }
        g
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
