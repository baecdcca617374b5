//! Canonical flow CSV, GDP CSV and panel manifest readers.
//!
//! Flow CSV header: `year,source_economy,source_sector,target_economy,target_sector,flow`.
//! GDP CSV header: `year,economy,gdp`. The manifest is JSON:
//! `{"years": [{"year": 1995, "flows": "wiot_1995.csv"}, ...], "gdp": "gdp.csv"}`
//! with paths resolved relative to the manifest's directory.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{FlowNetwork, NodeRef};

pub const FLOW_HEADER: [&str; 6] = [
    "year",
    "source_economy",
    "source_sector",
    "target_economy",
    "target_sector",
    "flow",
];
pub const GDP_HEADER: [&str; 3] = ["year", "economy", "gdp"];

/// GDP shares per year, normalized within each year.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GdpSeries {
    shares: BTreeMap<i32, BTreeMap<String, f64>>,
}

impl GdpSeries {
    /// Normalizes absolute GDP values `(year, economy, gdp)` into shares.
    pub fn from_absolute<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, String, f64)>,
    {
        let mut raw: BTreeMap<i32, BTreeMap<String, f64>> = BTreeMap::new();
        for (year, economy, gdp) in rows {
            if raw.entry(year).or_default().insert(economy.clone(), gdp).is_some() {
                return Err(Error::DuplicateKey(format!("({year}, {economy})")));
            }
        }
        for (&year, by_economy) in raw.iter_mut() {
            let total: f64 = by_economy.values().sum();
            if total <= 0.0 {
                return Err(Error::DegenerateYear(year));
            }
            by_economy.values_mut().for_each(|g| *g /= total);
        }
        Ok(GdpSeries { shares: raw })
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.shares.keys().copied()
    }

    pub fn shares(&self, year: i32) -> Option<&BTreeMap<String, f64>> {
        self.shares.get(&year)
    }

    pub fn share(&self, year: i32, economy: &str) -> Option<f64> {
        self.shares.get(&year)?.get(economy).copied()
    }
}

/// Yearly networks over one shared node ordering.
#[derive(Debug, Clone)]
pub struct Panel {
    networks: Vec<FlowNetwork>,
    gdp: Option<GdpSeries>,
}

impl Panel {
    /// Sorts networks by year and aligns every year to the first year's node
    /// order. Years must be distinct and node sets identical.
    pub fn new(mut networks: Vec<FlowNetwork>, gdp: Option<GdpSeries>) -> Result<Self> {
        if networks.is_empty() {
            return Err(Error::PanelInconsistent("panel has no years".into()));
        }
        networks.sort_by_key(FlowNetwork::year);
        for pair in networks.windows(2) {
            if pair[0].year() == pair[1].year() {
                return Err(Error::PanelInconsistent(format!(
                    "year {} appears twice",
                    pair[0].year()
                )));
            }
        }
        let reference: Vec<NodeRef> = networks[0].nodes().to_vec();
        let first_year = networks[0].year();
        for net in networks.iter_mut().skip(1) {
            if net.nodes() == reference.as_slice() {
                continue;
            }
            let order = alignment(&reference, net).ok_or_else(|| {
                Error::PanelInconsistent(format!(
                    "year {} has a different node set than year {first_year}",
                    net.year()
                ))
            })?;
            *net = net.reordered(&order);
        }
        Ok(Panel { networks, gdp })
    }

    pub fn networks(&self) -> &[FlowNetwork] {
        &self.networks
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    pub fn years(&self) -> Vec<i32> {
        self.networks.iter().map(FlowNetwork::year).collect()
    }

    pub fn year(&self, year: i32) -> Option<&FlowNetwork> {
        self.networks.iter().find(|n| n.year() == year)
    }

    pub fn gdp(&self) -> Option<&GdpSeries> {
        self.gdp.as_ref()
    }
}

/// Positions in `net` of each reference node, if the node sets coincide.
fn alignment(reference: &[NodeRef], net: &FlowNetwork) -> Option<Vec<usize>> {
    if reference.len() != net.len() {
        return None;
    }
    reference
        .iter()
        .map(|n| net.index_of(n.economy(), n.sector()))
        .collect()
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(Error::ParseError {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::ParseError {
        line,
        message: e.to_string(),
    }
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, k: usize, line: u64, name: &str) -> Result<T> {
    let raw = record.get(k).unwrap_or("");
    raw.trim().parse().map_err(|_| Error::ParseError {
        line,
        message: format!("invalid {name} `{raw}`"),
    })
}

/// Parses one year's flow table. Nodes are indexed in order of first appearance.
pub fn parse_flow_csv<R: Read>(reader: R) -> Result<FlowNetwork> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(rdr.headers().map_err(csv_error)?, &FLOW_HEADER)?;

    let mut year: Option<i32> = None;
    let mut nodes: Vec<NodeRef> = Vec::new();
    let mut seen: HashMap<NodeRef, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |node: NodeRef, nodes: &mut Vec<NodeRef>| {
        if !seen.contains_key(&node) {
            seen.insert(node.clone(), nodes.len());
            nodes.push(node.clone());
        }
        node
    };

    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != FLOW_HEADER.len() {
            return Err(Error::ParseError {
                line,
                message: format!("expected 6 fields, found {}", record.len()),
            });
        }
        let row_year: i32 = field(&record, 0, line, "year")?;
        match year {
            None => year = Some(row_year),
            Some(first) if first != row_year => {
                return Err(Error::MixedYears {
                    first,
                    other: row_year,
                    line,
                })
            }
            _ => {}
        }
        let flow: f64 = field(&record, 5, line, "flow")?;
        let source = intern(NodeRef::new(&record[1], &record[2]), &mut nodes);
        let target = intern(NodeRef::new(&record[3], &record[4]), &mut nodes);
        if !(flow.is_finite() && flow >= 0.0) {
            return Err(Error::InvalidFlow {
                source_node: source.to_string(),
                target: target.to_string(),
                flow,
            });
        }
        edges.push((source, target, flow));
    }
    FlowNetwork::build(year.unwrap_or(0), nodes, edges)
}

pub fn read_flow_csv(path: impl AsRef<Path>) -> Result<FlowNetwork> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_flow_csv(std::io::BufReader::new(file))
}

/// Writes the canonical flow CSV. Diagonal rows come first for every node
/// (zero flows included) so that re-parsing restores the node order; then
/// every positive off-diagonal flow. Values use the shortest round-trip
/// decimal form.
pub fn write_flow_csv<W: Write>(network: &FlowNetwork, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::ParseError {
        line: 0,
        message: e.to_string(),
    };
    wtr.write_record(FLOW_HEADER).map_err(io)?;
    let year = network.year().to_string();
    let mut row = |s: usize, t: usize, flow: f64| {
        let (src, tgt) = (network.node(s), network.node(t));
        wtr.write_record([
            year.as_str(),
            src.economy(),
            src.sector(),
            tgt.economy(),
            tgt.sector(),
            &flow.to_string(),
        ])
    };
    for k in 0..network.len() {
        row(k, k, network.flow(k, k)).map_err(io)?;
    }
    for s in 0..network.len() {
        for t in 0..network.len() {
            let flow = network.flow(s, t);
            if s != t && flow > 0.0 {
                row(s, t, flow).map_err(io)?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::io("<flow csv>", e))?;
    Ok(())
}

pub fn parse_gdp_csv<R: Read>(reader: R) -> Result<GdpSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(rdr.headers().map_err(csv_error)?, &GDP_HEADER)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != GDP_HEADER.len() {
            return Err(Error::ParseError {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let year: i32 = field(&record, 0, line, "year")?;
        let gdp: f64 = field(&record, 2, line, "gdp")?;
        if !(gdp.is_finite() && gdp >= 0.0) {
            return Err(Error::ParseError {
                line,
                message: format!("gdp must be a nonnegative number, got {gdp}"),
            });
        }
        rows.push((year, record[1].to_owned(), gdp));
    }
    GdpSeries::from_absolute(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub years: Vec<ManifestYear>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gdp: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestYear {
    pub year: i32,
    pub flows: PathBuf,
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::ParseError {
            line: e.line() as u64,
            message: format!("manifest {}: {e}", path.display()),
        })
    }
}

/// Loads every year listed in the manifest (in parallel) plus optional GDP data.
pub fn load_panel(manifest_path: impl AsRef<Path>) -> Result<Panel> {
    let manifest_path = manifest_path.as_ref();
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let networks = manifest
        .years
        .par_iter()
        .map(|entry| {
            let net = read_flow_csv(base.join(&entry.flows))?;
            if net.year() != entry.year {
                return Err(Error::PanelInconsistent(format!(
                    "{} holds year {}, manifest says {}",
                    entry.flows.display(),
                    net.year(),
                    entry.year
                )));
            }
            Ok(net)
        })
        .collect::<Result<Vec<_>>>()?;
    let gdp = match &manifest.gdp {
        Some(p) => {
            let path = base.join(p);
            let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
            Some(parse_gdp_csv(std::io::BufReader::new(file))?)
        }
        None => None,
    };
    Panel::new(networks, gdp)
}
