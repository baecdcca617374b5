//! Node-slowdown perturbations and the systemic measures built on them.
//!
//! Slowing node `k` by `alpha` percent multiplies every weight with `k` as
//! source or target by `f = 1 + alpha / 100`, then re-normalizes the columns.
//! The self-loop `w[k][k]` is scaled once by default ([`SelfLoopScaling`]).
//!
//! Steady states of perturbed chains are computed through [`PerturbedOperator`],
//! which applies `T'` without materializing it: only the column sums change,
//! plus a rank-two correction on row and column `k`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{matvec, normalize_columns, DanglingPolicy, StochasticMatrix, TransitionOperator};
use crate::error::{Error, Result};
use crate::network::FlowNetwork;
use crate::spectral::{
    eigenvalues, kemeny_fundamental, kemeny_from_eigenvalues, steady_state, steady_state_from,
    PowerConfig, SteadyState,
};

pub const DEFAULT_ALPHA: f64 = -99.0;
pub const DEFAULT_INFLUENCE_THRESHOLD: f64 = 0.005;
pub const DEFAULT_DISPLAY_THRESHOLD: f64 = 0.01;
pub const DEFAULT_EIGEN_CROSSCHECK_FRACTION: f64 = 0.01;

/// How many times the perturbed node's self-loop is multiplied by `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfLoopScaling {
    #[default]
    Once,
    Twice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationSpec {
    pub node: usize,
    /// Percent change of activity; must exceed -100.
    pub alpha: f64,
    /// Relative change of a node's own steady-state value above which it counts as affected.
    pub influence_threshold: f64,
    /// Relative change above which a node is worth showing.
    pub display_threshold: f64,
}

impl PerturbationSpec {
    pub fn new(node: usize, alpha: f64) -> Result<Self> {
        Self::with_thresholds(node, alpha, DEFAULT_INFLUENCE_THRESHOLD, DEFAULT_DISPLAY_THRESHOLD)
    }

    pub fn with_thresholds(
        node: usize,
        alpha: f64,
        influence_threshold: f64,
        display_threshold: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        for t in [influence_threshold, display_threshold] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidThreshold(t));
            }
        }
        Ok(PerturbationSpec {
            node,
            alpha,
            influence_threshold,
            display_threshold,
        })
    }

    pub fn factor(&self) -> f64 {
        1.0 + self.alpha / 100.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > -100.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn check_node(network: &FlowNetwork, node: usize) -> Result<()> {
    if node < network.len() {
        Ok(())
    } else {
        Err(Error::DimensionError {
            expected: network.len(),
            actual: node,
        })
    }
}

fn self_loop_factor(f: f64, scaling: SelfLoopScaling) -> f64 {
    match scaling {
        SelfLoopScaling::Once => f,
        SelfLoopScaling::Twice => f * f,
    }
}

/// Materializes the transition matrix after slowing `node` by `alpha` percent.
pub fn perturb_node(
    network: &FlowNetwork,
    node: usize,
    alpha: f64,
    scaling: SelfLoopScaling,
    policy: DanglingPolicy,
) -> Result<StochasticMatrix> {
    check_alpha(alpha)?;
    check_node(network, node)?;
    let f = 1.0 + alpha / 100.0;
    let mut w: DMatrix<f64> = network.weights().clone();
    let diagonal = w[(node, node)];
    w.row_mut(node).scale_mut(f);
    w.column_mut(node).scale_mut(f);
    w[(node, node)] = diagonal * self_loop_factor(f, scaling);
    normalize_columns(&mut w, policy, |j| network.node(j).to_string()).map_err(|e| match e {
        Error::DanglingNode { index, .. } => Error::DanglingAfterPerturbation { node, column: index },
        other => other,
    })?;
    Ok(StochasticMatrix::from_parts(network.year(), policy, w))
}

/// `T'` for one perturbation, applied directly from the shared weights.
pub struct PerturbedOperator<'a> {
    weights: &'a DMatrix<f64>,
    node: usize,
    f: f64,
    self_loop: f64,
    colsums: Vec<f64>,
    policy: DanglingPolicy,
}

impl<'a> PerturbedOperator<'a> {
    /// `base_colsums` are the unperturbed outflows of `weights`.
    pub fn new(
        weights: &'a DMatrix<f64>,
        base_colsums: &[f64],
        node: usize,
        alpha: f64,
        scaling: SelfLoopScaling,
        policy: DanglingPolicy,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let n = weights.nrows();
        let f = 1.0 + alpha / 100.0;
        let self_loop = self_loop_factor(f, scaling);
        let colsums: Vec<f64> = (0..n)
            .map(|j| {
                if j == node {
                    let d = weights[(node, node)];
                    f * (base_colsums[j] - d) + self_loop * d
                } else {
                    base_colsums[j] + (f - 1.0) * weights[(node, j)]
                }
            })
            .collect();
        if policy == DanglingPolicy::Error {
            if let Some(column) = colsums.iter().position(|&c| c <= 0.0) {
                return Err(Error::DanglingAfterPerturbation { node, column });
            }
        }
        Ok(PerturbedOperator {
            weights,
            node,
            f,
            self_loop,
            colsums,
            policy,
        })
    }
}

impl TransitionOperator for PerturbedOperator<'_> {
    fn dim(&self) -> usize {
        self.weights.nrows()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let k = self.node;
        let mut dangling_mass = 0.0;
        let y: Vec<f64> = x
            .iter()
            .zip(&self.colsums)
            .map(|(&xj, &c)| {
                if c > 0.0 {
                    xj / c
                } else {
                    if self.policy == DanglingPolicy::Uniform {
                        dangling_mass += xj;
                    }
                    0.0
                }
            })
            .collect();
        matvec(self.weights, &y, out);
        let wkk = self.weights[(k, k)];
        let row_k_without_loop = out[k] - wkk * y[k];
        let col_k = self.weights.column(k);
        let yk = y[k];
        if yk != 0.0 {
            let shift = (self.f - 1.0) * yk;
            for (o, &w) in out.iter_mut().zip(col_k.iter()) {
                *o += shift * w;
            }
        }
        out[k] = self.f * row_k_without_loop + self.self_loop * wkk * yk;
        if dangling_mass > 0.0 {
            let share = dangling_mass / n as f64;
            out.iter_mut().for_each(|o| *o += share);
        }
        if self.policy == DanglingPolicy::SelfLoop {
            for (j, &c) in self.colsums.iter().enumerate() {
                if c <= 0.0 {
                    out[j] += x[j];
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub alpha: f64,
    pub influence_threshold: f64,
    pub display_threshold: f64,
    pub self_loop_scaling: SelfLoopScaling,
    pub dangling_policy: DanglingPolicy,
    pub power: PowerConfig,
    pub seed: u64,
    /// Compute Kemeny constants (one dense inversion per experiment).
    pub with_kemeny: bool,
    /// Share of experiments whose Kemeny value is re-derived from the full spectrum.
    pub eigen_crosscheck_fraction: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            alpha: DEFAULT_ALPHA,
            influence_threshold: DEFAULT_INFLUENCE_THRESHOLD,
            display_threshold: DEFAULT_DISPLAY_THRESHOLD,
            self_loop_scaling: SelfLoopScaling::Once,
            dangling_policy: DanglingPolicy::Error,
            power: PowerConfig::default(),
            seed: 0,
            with_kemeny: true,
            eigen_crosscheck_fraction: DEFAULT_EIGEN_CROSSCHECK_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationResult {
    pub spec: PerturbationSpec,
    /// `pi'_j - pi_j`
    pub delta_pi: Vec<f64>,
    /// `(pi'_j - pi_j) / pi_j`
    pub relative_delta: Vec<f64>,
    /// Nodes other than the perturbed one whose relative change exceeds the threshold.
    pub affected: Vec<usize>,
    pub systemic_influence: f64,
    /// Relative change at the perturbed node itself.
    pub self_response: f64,
    /// `|self_response - alpha / 100|`, reported only.
    pub self_response_gap: f64,
    pub kemeny_change_pct: Option<f64>,
    pub iterations: usize,
}

impl PerturbationResult {
    /// Nodes whose relative change reaches the display threshold.
    pub fn displayed(&self) -> Vec<usize> {
        (0..self.relative_delta.len())
            .filter(|&j| self.relative_delta[j].abs() >= self.spec.display_threshold)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub node: usize,
    pub structural_power: f64,
    pub systemic_influence: Option<f64>,
    pub systemic_fragility: f64,
    pub kemeny_change_pct: Option<f64>,
    pub self_response: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCrosscheck {
    pub node: usize,
    pub fundamental: f64,
    pub eigen: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub year: i32,
    pub alpha: f64,
    pub influence_threshold: f64,
    pub display_threshold: f64,
    pub baseline_kemeny: Option<f64>,
    pub records: Vec<SweepRecord>,
    pub eigen_crosschecks: Vec<EigenCrosscheck>,
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| r.error.is_some())
    }

    /// Largest relative gap between fundamental and eigen Kemeny values.
    pub fn max_crosscheck_gap(&self) -> Option<f64> {
        self.eigen_crosschecks
            .iter()
            .filter_map(|c| c.eigen.map(|e| ((e - c.fundamental) / e).abs()))
            .reduce(f64::max)
    }
}

/// Unperturbed chain quantities shared by every experiment.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub chain: StochasticMatrix,
    pub steady: SteadyState,
}

/// Runs perturbation experiments against one network.
pub struct PerturbationEngine<'a> {
    network: &'a FlowNetwork,
    colsums: Vec<f64>,
    config: PerturbationConfig,
    baseline: Baseline,
    kemeny: OnceLock<std::result::Result<f64, String>>,
}

impl<'a> PerturbationEngine<'a> {
    pub fn new(network: &'a FlowNetwork, config: PerturbationConfig) -> Result<Self> {
        check_alpha(config.alpha)?;
        let chain = StochasticMatrix::from_network(network, config.dangling_policy)?;
        let steady = steady_state(&chain, config.power.tolerance, config.seed)?;
        let engine = PerturbationEngine {
            network,
            colsums: network.outflows().iter().copied().collect(),
            config,
            baseline: Baseline { chain, steady },
            kemeny: OnceLock::new(),
        };
        if config.with_kemeny {
            engine.baseline_kemeny()?;
        }
        Ok(engine)
    }

    /// Kemeny constant of the unperturbed chain (fundamental-matrix method),
    /// computed once.
    pub fn baseline_kemeny(&self) -> Result<f64> {
        self.kemeny
            .get_or_init(|| {
                kemeny_fundamental(&self.baseline.chain, &self.baseline.steady.pi)
                    .map(|k| k.value)
                    .map_err(|e| e.to_string())
            })
            .clone()
            .map_err(Error::NumericalFailure)
    }

    pub fn network(&self) -> &FlowNetwork {
        self.network
    }

    pub fn config(&self) -> &PerturbationConfig {
        &self.config
    }

    pub fn baseline(&self) -> &Baseline {
        &self.baseline
    }

    pub fn operator(&self, node: usize, alpha: f64) -> Result<PerturbedOperator<'a>> {
        check_node(self.network, node)?;
        PerturbedOperator::new(
            self.network.weights(),
            &self.colsums,
            node,
            alpha,
            self.config.self_loop_scaling,
            self.config.dangling_policy,
        )
    }

    pub fn spec(&self, node: usize) -> Result<PerturbationSpec> {
        PerturbationSpec::with_thresholds(
            node,
            self.config.alpha,
            self.config.influence_threshold,
            self.config.display_threshold,
        )
    }

    /// Steady state of the perturbed chain, warm-started from the baseline.
    pub fn perturbed_steady_state(&self, node: usize, alpha: f64) -> Result<SteadyState> {
        let op = self.operator(node, alpha)?;
        steady_state_from(&op, self.baseline.steady.pi.clone(), self.config.power)
    }

    fn kemeny_of(&self, node: usize, alpha: f64, pi: &[f64]) -> Result<f64> {
        let t = perturb_node(
            self.network,
            node,
            alpha,
            self.config.self_loop_scaling,
            self.config.dangling_policy,
        )?;
        Ok(kemeny_fundamental(&t, pi)?.value)
    }

    fn kemeny_change(&self, node: usize, alpha: f64, pi: &[f64]) -> Result<f64> {
        let k = self.baseline_kemeny()?;
        let perturbed = self.kemeny_of(node, alpha, pi)?;
        Ok(100.0 * (perturbed - k) / k)
    }

    /// One experiment. The Kemeny change is included when the engine was
    /// configured `with_kemeny`.
    pub fn node_impact(&self, spec: &PerturbationSpec) -> Result<PerturbationResult> {
        check_node(self.network, spec.node)?;
        let pi = &self.baseline.steady.pi;
        let perturbed = self.perturbed_steady_state(spec.node, spec.alpha)?;
        let delta_pi: Vec<f64> = perturbed.pi.iter().zip(pi).map(|(p, q)| p - q).collect();
        let relative_delta: Vec<f64> = delta_pi.iter().zip(pi).map(|(d, q)| d / q).collect();
        let affected: Vec<usize> = (0..pi.len())
            .filter(|&j| j != spec.node && relative_delta[j].abs() > spec.influence_threshold)
            .collect();
        let self_response = relative_delta[spec.node];
        let kemeny_change_pct = if self.config.with_kemeny {
            Some(self.kemeny_change(spec.node, spec.alpha, &perturbed.pi)?)
        } else {
            None
        };
        Ok(PerturbationResult {
            spec: *spec,
            systemic_influence: affected.len() as f64 / pi.len() as f64,
            affected,
            self_response,
            self_response_gap: (self_response - spec.alpha / 100.0).abs(),
            kemeny_change_pct,
            iterations: perturbed.iterations,
            delta_pi,
            relative_delta,
        })
    }

    /// Perturbs every node in turn. `progress` receives the number of finished
    /// experiments. Per-node failures are recorded, not fatal.
    pub fn sweep<P: Fn(usize) + Sync>(&self, progress: P) -> SweepResult {
        let n = self.network.len();
        let done = AtomicUsize::new(0);
        let outcomes: Vec<Result<PerturbationResult>> = (0..n)
            .into_par_iter()
            .map(|node| {
                let r = self.spec(node).and_then(|s| self.node_impact(&s));
                progress(done.fetch_add(1, Ordering::Relaxed) + 1);
                r
            })
            .collect();

        let mut hits = vec![0usize; n];
        for r in outcomes.iter().flatten() {
            for &j in &r.affected {
                hits[j] += 1;
            }
        }
        let pi = &self.baseline.steady.pi;
        let records: Vec<SweepRecord> = outcomes
            .iter()
            .enumerate()
            .map(|(node, r)| SweepRecord {
                node,
                structural_power: pi[node],
                systemic_influence: r.as_ref().ok().map(|r| r.systemic_influence),
                systemic_fragility: hits[node] as f64 / n as f64,
                kemeny_change_pct: r.as_ref().ok().and_then(|r| r.kemeny_change_pct),
                self_response: r.as_ref().ok().map(|r| r.self_response),
                error: r.as_ref().err().map(ToString::to_string),
            })
            .collect();

        SweepResult {
            year: self.network.year(),
            alpha: self.config.alpha,
            influence_threshold: self.config.influence_threshold,
            display_threshold: self.config.display_threshold,
            baseline_kemeny: if self.config.with_kemeny {
                self.baseline_kemeny().ok()
            } else {
                None
            },
            eigen_crosschecks: self.eigen_crosschecks(
                &records.iter().map(|r| r.kemeny_change_pct).collect::<Vec<_>>(),
            ),
            records,
        }
    }

    /// Re-derives the Kemeny constant from the full spectrum for a seeded
    /// sample (`eigen_crosscheck_fraction`) of the experiments that have a
    /// fundamental-matrix result in `kemeny_pct`.
    pub fn eigen_crosschecks(&self, kemeny_pct: &[Option<f64>]) -> Vec<EigenCrosscheck> {
        if self.config.eigen_crosscheck_fraction <= 0.0 {
            return Vec::new();
        }
        let Ok(k) = self.baseline_kemeny() else {
            return Vec::new();
        };
        let n = kemeny_pct.len();
        let count = ((self.config.eigen_crosscheck_fraction * n as f64).ceil() as usize).min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut nodes = sample(&mut rng, n, count).into_vec();
        nodes.sort_unstable();
        nodes
            .into_par_iter()
            .filter_map(|node| {
                let pct = kemeny_pct[node]?;
                let fundamental = k * (1.0 + pct / 100.0);
                let eigen = perturb_node(
                    self.network,
                    node,
                    self.config.alpha,
                    self.config.self_loop_scaling,
                    self.config.dangling_policy,
                )
                .and_then(|t| kemeny_from_eigenvalues(&eigenvalues(t.entries())?))
                .map(|v| v.value)
                .ok();
                Some(EigenCrosscheck {
                    node,
                    fundamental,
                    eigen,
                })
            })
            .collect()
    }

    /// Percent change of the Kemeny constant when slowing `node`.
    pub fn kemeny_sensitivity(&self, node: usize) -> Result<f64> {
        let perturbed = self.perturbed_steady_state(node, self.config.alpha)?;
        self.kemeny_change(node, self.config.alpha, &perturbed.pi)
    }

    /// Kemeny sensitivity of every node not in `skip`, in parallel. `on_result`
    /// is called as each node finishes (in completion order) so callers can
    /// checkpoint; the returned vector is in node order with `None` for
    /// skipped nodes.
    pub fn kemeny_sensitivity_sweep<F>(&self, skip: &[usize], on_result: F) -> Vec<Option<Result<f64>>>
    where
        F: Fn(usize, &Result<f64>) + Sync,
    {
        let n = self.network.len();
        let mut skipped = vec![false; n];
        for &s in skip {
            if s < n {
                skipped[s] = true;
            }
        }
        (0..n)
            .into_par_iter()
            .map(|node| {
                if skipped[node] {
                    return None;
                }
                let r = self.kemeny_sensitivity(node);
                on_result(node, &r);
                Some(r)
            })
            .collect()
    }
}
