//! Seeded synthetic chains and flow networks for tests and benchmarks.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};
use crate::ingest::{write_flow_csv, Manifest, ManifestYear, GDP_HEADER};
use crate::network::{FlowNetwork, NodeRef, GOVERNMENT_SECTOR};

fn nodes(n: usize) -> Vec<NodeRef> {
    (0..n).map(|k| NodeRef::new(format!("E{k:04}"), "I1")).collect()
}

/// Nonnegative random weights: each off-diagonal entry is present with
/// probability `density`, plus a Hamiltonian cycle and a self-loop on node 0
/// so the resulting chain is irreducible and aperiodic.
pub fn random_weights(n: usize, density: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::from_fn(n, n, |_, _| {
        if rng.random::<f64>() < density {
            let e: f64 = Exp1.sample(&mut rng);
            e
        } else {
            0.0
        }
    });
    for j in 0..n {
        w[((j + 1) % n, j)] += 0.1 + rng.random::<f64>();
    }
    w[(0, 0)] += 0.5;
    w
}

pub fn random_network(n: usize, density: f64, seed: u64) -> FlowNetwork {
    FlowNetwork::from_weights(2000, nodes(n), random_weights(n, density, seed)).expect("valid synthetic weights")
}

/// Random irreducible aperiodic chain.
pub fn random_chain(n: usize, density: f64, seed: u64) -> StochasticMatrix {
    let mut w = random_weights(n, density, seed);
    for mut col in w.column_iter_mut() {
        let s: f64 = col.iter().sum();
        col.iter_mut().for_each(|t| *t /= s);
    }
    StochasticMatrix::from_parts(0, Default::default(), w)
}

/// Network whose every node has equal inflow and outflow: a positive
/// combination of random permutation matrices, a Hamiltonian cycle and
/// self-loops.
pub fn balanced_network(n: usize, seed: u64) -> FlowNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..4 {
        // Fisher-Yates
        for k in (1..n).rev() {
            let r = rng.random_range(0..=k);
            perm.swap(k, r);
        }
        let c: f64 = 0.5 + rng.random::<f64>();
        for (j, &i) in perm.iter().enumerate() {
            w[(i, j)] += c;
        }
    }
    let c: f64 = 0.5 + rng.random::<f64>();
    for j in 0..n {
        w[((j + 1) % n, j)] += c;
        w[(j, j)] += rng.random::<f64>();
    }
    FlowNetwork::from_weights(2000, nodes(n), w).expect("valid synthetic weights")
}

/// Dense WIOD-shaped network: `economies` economies, each with `sectors`
/// industries plus one government node. Domestic flows dominate; every
/// cross-border pair carries a smaller positive flow.
pub fn wiot_like(economies: usize, sectors: usize, year: i32, seed: u64) -> FlowNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = sectors + 1;
    let n = economies * per;
    let mut refs = Vec::with_capacity(n);
    for e in 0..economies {
        let code = format!("C{e:02}");
        for s in 0..sectors {
            refs.push(NodeRef::new(code.clone(), format!("c{}", s + 1)));
        }
        refs.push(NodeRef::new(code, GOVERNMENT_SECTOR));
    }
    let size: Vec<f64> = (0..economies).map(|_| 0.2 + 2.0 * rng.random::<f64>()).collect();
    let w = DMatrix::from_fn(n, n, |i, j| {
        let (ei, ej) = (i / per, j / per);
        let e: f64 = Exp1.sample(&mut rng);
        let base = if ei == ej { 10.0 } else { 0.3 };
        base * e * size[ei] * size[ej]
    });
    FlowNetwork::from_weights(year, refs, w).expect("valid synthetic weights")
}

/// Consecutive years of [`wiot_like`] networks starting at `first_year`, with
/// absolute GDP values per economy that drift from year to year.
pub fn wiot_panel(
    years: usize,
    economies: usize,
    sectors: usize,
    first_year: i32,
    seed: u64,
) -> (Vec<FlowNetwork>, Vec<(i32, String, f64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut gdp: Vec<f64> = (0..economies).map(|_| 1.0 + rng.random::<f64>()).collect();
    let mut nets = Vec::with_capacity(years);
    let mut rows = Vec::with_capacity(years * economies);
    for y in 0..years {
        let year = first_year + y as i32;
        nets.push(wiot_like(economies, sectors, year, seed.wrapping_add(y as u64)));
        for (e, g) in gdp.iter_mut().enumerate() {
            rows.push((year, format!("C{e:02}"), *g));
            *g *= 1.0 + 0.1 * rng.random::<f64>();
        }
    }
    (nets, rows)
}

/// Writes one flow CSV per network, a GDP CSV if given, and a manifest
/// pointing at them. Returns the manifest path.
pub fn write_panel(
    dir: &Path,
    networks: &[FlowNetwork],
    gdp: Option<&[(i32, String, f64)]>,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut years = Vec::with_capacity(networks.len());
    for net in networks {
        let name = format!("flows_{}.csv", net.year());
        let path = dir.join(&name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_flow_csv(net, BufWriter::new(file))?;
        years.push(ManifestYear {
            year: net.year(),
            flows: PathBuf::from(name),
        });
    }
    let gdp = match gdp {
        Some(rows) => {
            let path = dir.join("gdp.csv");
            let mut text = GDP_HEADER.join(",");
            text.push('\n');
            for (year, eco, v) in rows {
                text.push_str(&format!("{year},{eco},{v}\n"));
            }
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Some(PathBuf::from("gdp.csv"))
        }
        None => None,
    };
    let manifest = Manifest { years, gdp };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("serializable");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
