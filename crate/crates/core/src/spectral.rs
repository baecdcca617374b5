//! Steady states, operational mixing times and Kemeny constants.
//!
//! The mixing time here is the number of power-iteration steps needed for
//! successive iterates to come within `tolerance` of each other in L1 norm.
//! It depends on the tolerance, so values are only comparable between chains
//! measured with the same configuration.

use nalgebra::{Complex, DMatrix, Schur};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{StochasticMatrix, TransitionOperator};
use crate::error::{Error, Result};

pub const DEFAULT_STEADY_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MIXING_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MIXING_RUNS: usize = 20;
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

/// Eigenvalues this close to 1 count as a unit eigenvalue.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-10;
/// Largest tolerated imaginary part of the eigenvalue sum.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    pub pi: Vec<f64>,
    pub iterations: usize,
    /// `||T pi - pi||_1` of the returned (renormalized) vector.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            tolerance: DEFAULT_STEADY_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingConfig {
    pub tolerance: f64,
    pub runs: usize,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig {
            tolerance: DEFAULT_MIXING_TOLERANCE,
            runs: DEFAULT_MIXING_RUNS,
            seed: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingTimeEstimate {
    pub mean_iterations: f64,
    /// Sample standard deviation (zero for a single run).
    pub std_iterations: f64,
    pub runs: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Iteration count of each run, in run order.
    pub per_run: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KemenyMethod {
    Eigen,
    Fundamental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KemenyValue {
    pub value: f64,
    pub method: KemenyMethod,
    /// Magnitude of the imaginary part of the eigenvalue sum (eigen method).
    pub imag_residual: f64,
}

/// Strictly positive start vector, uniform on the simplex, for run `run` of
/// master seed `seed`. Each run has its own ChaCha stream.
pub fn random_start(n: usize, seed: u64, run: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(&mut rng);
            e.max(f64::MIN_POSITIVE)
        })
        .collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Iterates `x <- T x` from `start` until successive iterates are within
/// `tolerance` in L1. Returns the final iterate (renormalized) and the step count.
pub fn power_iterate<O: TransitionOperator + ?Sized>(
    op: &O,
    start: Vec<f64>,
    config: PowerConfig,
) -> Result<(Vec<f64>, usize)> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::DimensionError {
            expected: n,
            actual: start.len(),
        });
    }
    let mut x = start;
    let mut next = vec![0.0; n];
    for k in 1..=config.max_iterations {
        op.apply_into(&x, &mut next);
        let diff = l1_distance(&x, &next);
        std::mem::swap(&mut x, &mut next);
        if diff < config.tolerance {
            let s: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= s);
            return Ok((x, k));
        }
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        run: None,
    })
}

/// Steady state from a caller-chosen start (e.g. a warm start).
///
/// Stops once successive iterates are within `tolerance` in L1 and the
/// geometric tail estimate `d r / (1 - r)` of the remaining distance to the
/// fixed point is too, `r` being the last contraction ratio of the steps.
/// Steps that stop shrinking below `tolerance` are rounding noise and also end
/// the iteration. A start that already meets the step criterion is returned
/// as is.
pub fn steady_state_from<O: TransitionOperator + ?Sized>(
    op: &O,
    start: Vec<f64>,
    config: PowerConfig,
) -> Result<SteadyState> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::DimensionError {
            expected: n,
            actual: start.len(),
        });
    }
    let tol = config.tolerance;
    let mut x = start;
    let mut next = vec![0.0; n];
    let mut prev_diff = f64::INFINITY;
    let mut done = None;
    for k in 1..=config.max_iterations {
        op.apply_into(&x, &mut next);
        let diff = l1_distance(&x, &next);
        if k == 1 && diff < tol {
            done = Some(0);
            break;
        }
        std::mem::swap(&mut x, &mut next);
        if diff < tol {
            let r = diff / prev_diff;
            if r >= 1.0 || diff * r / (1.0 - r) < tol {
                done = Some(k);
                break;
            }
        }
        prev_diff = diff;
    }
    let Some(iterations) = done else {
        return Err(Error::NoConvergence {
            iterations: config.max_iterations,
            run: None,
        });
    };
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    let mut image = vec![0.0; n];
    op.apply_into(&x, &mut image);
    let residual = l1_distance(&x, &image);
    Ok(SteadyState {
        pi: x,
        iterations,
        residual,
    })
}

/// Steady state by power iteration from a seeded random start. The chain
/// should be irreducible and aperiodic; check with
/// [`StochasticMatrix::check_ergodicity`] first.
pub fn steady_state(t: &StochasticMatrix, tolerance: f64, seed: u64) -> Result<SteadyState> {
    steady_state_from(
        t,
        random_start(t.len(), seed, 0),
        PowerConfig {
            tolerance,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        },
    )
}

pub fn mixing_time<O: TransitionOperator + ?Sized>(
    op: &O,
    config: MixingConfig,
) -> Result<MixingTimeEstimate> {
    if config.runs == 0 {
        return Err(Error::NumericalFailure("mixing time needs at least one run".into()));
    }
    let power = PowerConfig {
        tolerance: config.tolerance,
        max_iterations: config.max_iterations,
    };
    let per_run = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            power_iterate(op, random_start(op.dim(), config.seed, run), power)
                .map(|(_, k)| k)
                .map_err(|e| match e {
                    Error::NoConvergence { iterations, .. } => Error::NoConvergence {
                        iterations,
                        run: Some(run),
                    },
                    other => other,
                })
        })
        .collect::<Result<Vec<usize>>>()?;
    let runs = per_run.len() as f64;
    let mean = per_run.iter().map(|&k| k as f64).sum::<f64>() / runs;
    let std = if per_run.len() > 1 {
        let ss: f64 = per_run.iter().map(|&k| (k as f64 - mean).powi(2)).sum();
        (ss / (runs - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(MixingTimeEstimate {
        mean_iterations: mean,
        std_iterations: std,
        runs: per_run.len(),
        tolerance: config.tolerance,
        seed: config.seed,
        per_run,
    })
}

/// All eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::NumericalFailure("Schur decomposition did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// `K = 1 + sum over eigenvalues other than 1 of 1 / (1 - lambda)`, summed in
/// the complex plane.
pub fn kemeny_eigen(t: &StochasticMatrix) -> Result<KemenyValue> {
    kemeny_from_eigenvalues(&eigenvalues(t.entries())?)
}

pub(crate) fn kemeny_from_eigenvalues(eigs: &[Complex<f64>]) -> Result<KemenyValue> {
    let one = Complex::new(1.0, 0.0);
    let unit = eigs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - one).norm().total_cmp(&(b.1 - one).norm()))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::NumericalFailure("empty spectrum".into()))?;
    let multiplicity = eigs
        .iter()
        .filter(|l| (*l - one).norm() < UNIT_EIGENVALUE_TOL)
        .count();
    if multiplicity > 1 {
        return Err(Error::NotIrreducible(multiplicity));
    }
    let sum: Complex<f64> = eigs
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != unit)
        .map(|(_, l)| one / (one - l))
        .sum();
    let value = 1.0 + sum.re;
    let imag_residual = sum.im.abs();
    if !value.is_finite() || imag_residual >= IMAG_RESIDUAL_TOL {
        return Err(Error::NumericalFailure(format!(
            "eigen Kemeny sum {value} has imaginary part {imag_residual:e}"
        )));
    }
    Ok(KemenyValue {
        value,
        method: KemenyMethod::Eigen,
        imag_residual,
    })
}

/// Kemeny constant as the trace of the fundamental matrix
/// `Z = (I - T + pi 1^T)^{-1}` (column-stochastic convention).
///
/// `trace(Z)` is the same for any `pi` summing to one, but passing the steady
/// state keeps `Z` equal to the usual fundamental matrix.
pub fn kemeny_fundamental(t: &StochasticMatrix, pi: &[f64]) -> Result<KemenyValue> {
    let n = t.len();
    if pi.len() != n {
        return Err(Error::DimensionError {
            expected: n,
            actual: pi.len(),
        });
    }
    let a = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - t.get(i, j) + pi[i]
    });
    let z = a
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("fundamental matrix is singular".into()))?;
    let value = z.trace();
    if !value.is_finite() {
        return Err(Error::NumericalFailure("fundamental matrix trace is not finite".into()));
    }
    Ok(KemenyValue {
        value,
        method: KemenyMethod::Fundamental,
        imag_residual: 0.0,
    })
}
