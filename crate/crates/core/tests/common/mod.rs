#![allow(dead_code)]

use iomarkov_core::{FlowNetwork, NodeRef};
use nalgebra::DMatrix;
use proptest::test_runner::{Config, RngSeed};

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x10_4d),
        failure_persistence: None,
        ..Config::default()
    }
}

/// `perm[i]` is the new position of old node `i`.
pub fn permute(net: &FlowNetwork, perm: &[usize]) -> FlowNetwork {
    let n = net.len();
    let mut nodes = vec![NodeRef::new("", ""); n];
    for (i, &p) in perm.iter().enumerate() {
        nodes[p] = net.node(i).clone();
    }
    let w = net.weights();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = w[(i, j)];
        }
    }
    FlowNetwork::from_weights(net.year(), nodes, out).unwrap()
}

pub fn permute_vec(x: &[f64], perm: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = x[i];
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
