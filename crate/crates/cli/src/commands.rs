use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use iomarkov_core::panel::{steady_states, SteadyConfig, DEFAULT_LAGS};
use iomarkov_core::spectral::PowerConfig;
use iomarkov_core::{
    economy_tracks, forecast, globalization_indices, load_panel, Error, ForecastTarget, MixingConfig, Panel,
    PerturbationConfig, PerturbationEngine, StochasticMatrix,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{field, header, num, out_path, write, Metadata, VERSION};

/// Outcome of a command that ran to completion but found problems.
pub enum Outcome {
    Ok,
    ValidationFailed,
    NumericalFailures,
}

fn steady_config(config: &RunConfig) -> SteadyConfig {
    SteadyConfig {
        tolerance: config.tolerance,
        seed: config.seed,
        dangling_policy: config.dangling_policy,
    }
}

#[derive(Serialize)]
struct YearValidation {
    year: i32,
    passed: bool,
    problems: Vec<String>,
    report: iomarkov_core::ValidationReport,
    ergodicity: Option<iomarkov_core::Ergodicity>,
}

#[derive(Serialize)]
struct ValidationFile<'a> {
    metadata: Metadata<'a>,
    years: Vec<YearValidation>,
}

pub fn validate(config: &RunConfig) -> Result<Outcome, Error> {
    let panel = load_panel(&config.manifest)?;
    let mut years = Vec::new();
    for net in panel.networks() {
        let report = net.validate();
        let mut problems = Vec::new();
        let ergodicity = match StochasticMatrix::from_network(net, config.dangling_policy) {
            Ok(t) => {
                let e = t.check_ergodicity();
                if !e.irreducible {
                    problems.push("chain is not irreducible".to_owned());
                }
                if !e.aperiodic {
                    problems.push("chain is periodic".to_owned());
                }
                Some(e)
            }
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        };
        if config.dangling_policy == iomarkov_core::DanglingPolicy::Error {
            for &k in report.dangling_nodes.iter().skip(1) {
                problems.push(format!("node {k} ({}) has no outgoing flow", net.node(k)));
            }
        }
        years.push(YearValidation {
            year: net.year(),
            passed: problems.is_empty(),
            problems,
            report,
            ergodicity,
        });
    }
    let all_passed = years.iter().all(|y| y.passed);
    for y in years.iter().filter(|y| !y.passed) {
        for p in &y.problems {
            eprintln!("{}: {p}", y.year);
        }
    }
    let file = ValidationFile {
        metadata: Metadata { version: VERSION, config },
        years,
    };
    let json = serde_json::to_string_pretty(&file).expect("serializable") + "\n";
    write(&out_path(config, "validation.json")?, &json)?;
    print!("{json}");
    Ok(if all_passed {
        Outcome::Ok
    } else {
        Outcome::ValidationFailed
    })
}

pub fn analyze(config: &RunConfig) -> Result<Outcome, Error> {
    let panel = load_panel(&config.manifest)?;
    let mixing = MixingConfig {
        tolerance: config.mixing_tolerance,
        runs: config.runs,
        seed: config.seed,
        ..MixingConfig::default()
    };
    let report = globalization_indices(&panel, mixing, config.dangling_policy);
    let mut failed = false;
    for (year, msg) in report.failures() {
        eprintln!("{year}: {msg}");
        failed = true;
    }

    let mut g = header(config, &[]);
    g.push_str("year,mixing_mean,mixing_std,kemeny\n");
    for y in &report.years {
        let m = y.mixing.as_ref().ok();
        writeln!(
            g,
            "{},{},{},{}",
            y.year,
            num(m.map(|m| m.mean_iterations)),
            num(m.map(|m| m.std_iterations)),
            num(y.kemeny.as_ref().ok().map(|k| k.value))
        )
        .unwrap();
    }
    write(&out_path(config, "globalization.csv")?, &g)?;

    let mut s = header(config, &[]);
    s.push_str("year,economy,sector,kind,pi,iterations,residual\n");
    for ((year, steady), net) in steady_states(&panel, steady_config(config)).into_iter().zip(panel.networks()) {
        let steady = match steady {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{year}: steady state: {e}");
                failed = true;
                continue;
            }
        };
        for (node, pi) in net.nodes().iter().zip(&steady.pi) {
            if config.keeps(node) {
                writeln!(
                    s,
                    "{year},{},{},{},{pi},{},{:e}",
                    field(node.economy()),
                    field(node.sector()),
                    node.kind().as_str(),
                    steady.iterations,
                    steady.residual
                )
                .unwrap();
            }
        }
    }
    write(&out_path(config, "steady_state.csv")?, &s)?;
    Ok(if failed {
        Outcome::NumericalFailures
    } else {
        Outcome::Ok
    })
}

pub struct SweepOptions {
    pub year: Option<i32>,
    pub skip_kemeny: bool,
    pub checkpoint: Option<PathBuf>,
    pub eigen_check_fraction: f64,
}

fn progress(label: &'static str, n: usize) -> impl Fn(usize) + Sync {
    let step = (n / 20).max(1);
    move |done| {
        if done % step == 0 || done == n {
            eprintln!("{label}: {done}/{n}");
        }
    }
}

#[derive(Serialize, PartialEq)]
struct CheckpointKey {
    year: i32,
    alpha: f64,
    self_loop_scaling: iomarkov_core::SelfLoopScaling,
    dangling_policy: iomarkov_core::DanglingPolicy,
    tolerance: f64,
    seed: u64,
}

/// Reads completed Kemeny results; the key line must match the current run.
fn read_checkpoint(path: &Path, key: &str) -> Result<BTreeMap<usize, f64>, Error> {
    let io = |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut done = BTreeMap::new();
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(io(e)),
    };
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        let line_no = k as u64 + 1;
        if let Some(found) = line.strip_prefix("# key: ") {
            if found != key {
                return Err(Error::ParseError {
                    line: line_no,
                    message: format!("checkpoint {} belongs to a different run ({found})", path.display()),
                });
            }
            continue;
        }
        if line.starts_with('#') || line == "node,kemeny_change_pct" || line.is_empty() {
            continue;
        }
        let parsed = line
            .split_once(',')
            .and_then(|(n, v)| Some((n.parse::<usize>().ok()?, v.parse::<f64>().ok()?)));
        match parsed {
            Some((node, value)) => {
                done.insert(node, value);
            }
            None => {
                return Err(Error::ParseError {
                    line: line_no,
                    message: format!("bad checkpoint line `{line}`"),
                })
            }
        }
    }
    Ok(done)
}

pub fn sweep(config: &RunConfig, options: &SweepOptions) -> Result<Outcome, Error> {
    let panel = load_panel(&config.manifest)?;
    let net = match options.year {
        Some(y) => panel
            .year(y)
            .ok_or_else(|| Error::PanelInconsistent(format!("year {y} is not in the manifest")))?,
        None => panel.networks().last().expect("panel is nonempty"),
    };
    let year = net.year();
    let n = net.len();
    let key = serde_json::to_string(&CheckpointKey {
        year,
        alpha: config.alpha,
        self_loop_scaling: config.self_loop_scaling,
        dangling_policy: config.dangling_policy,
        tolerance: config.tolerance,
        seed: config.seed,
    })
    .expect("serializable");
    let done = match (&options.checkpoint, options.skip_kemeny) {
        (Some(p), false) => read_checkpoint(p, &key)?,
        _ => BTreeMap::new(),
    };
    let engine = PerturbationEngine::new(
        net,
        PerturbationConfig {
            alpha: config.alpha,
            influence_threshold: config.influence_threshold,
            display_threshold: config.display_threshold,
            self_loop_scaling: config.self_loop_scaling,
            dangling_policy: config.dangling_policy,
            power: PowerConfig {
                tolerance: config.tolerance,
                ..PowerConfig::default()
            },
            seed: config.seed,
            with_kemeny: false,
            eigen_crosscheck_fraction: options.eigen_check_fraction,
        },
    )?;
    let mut result = engine.sweep(progress("sweep", n));
    let mut failed = false;
    for r in result.failures() {
        eprintln!("node {} ({}): {}", r.node, net.node(r.node), r.error.as_deref().unwrap_or(""));
        failed = true;
    }

    let mut notes = Vec::new();
    if !options.skip_kemeny {
        let baseline = engine.baseline_kemeny()?;
        notes.push(format!("baseline_kemeny: {baseline}"));
        let sink = match &options.checkpoint {
            Some(p) => {
                let fresh = !p.exists();
                let mut f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map_err(|e| Error::Io {
                        path: p.display().to_string(),
                        source: e,
                    })?;
                if fresh {
                    let _ = write!(f, "# iomarkov kemeny checkpoint\n# key: {key}\nnode,kemeny_change_pct\n");
                }
                Some(Mutex::new(f))
            }
            None => None,
        };
        let skip: Vec<usize> = done.keys().copied().collect();
        let remaining = n - skip.len();
        if !skip.is_empty() {
            eprintln!("kemeny: resuming, {} of {n} already done", skip.len());
        }
        let counter = std::sync::atomic::AtomicUsize::new(0);
        let report = progress("kemeny", remaining);
        let started = std::time::Instant::now();
        let fresh = engine.kemeny_sensitivity_sweep(&skip, |node, r| {
            if let (Some(sink), Ok(v)) = (&sink, r) {
                let mut f = sink.lock().expect("checkpoint lock");
                let _ = writeln!(f, "{node},{v}");
                let _ = f.flush();
            }
            report(counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1);
        });
        if remaining > 0 {
            let secs = started.elapsed().as_secs_f64();
            eprintln!(
                "kemeny: {remaining} experiments in {secs:.1} s ({:.3} experiments/s)",
                remaining as f64 / secs
            );
        }
        for (node, r) in fresh.into_iter().enumerate() {
            let record = &mut result.records[node];
            record.kemeny_change_pct = match r {
                None => done.get(&node).copied(),
                Some(Ok(v)) => Some(v),
                Some(Err(e)) => {
                    eprintln!("node {node} ({}): kemeny: {e}", net.node(node));
                    failed = true;
                    None
                }
            };
        }
        let pct: Vec<Option<f64>> = result.records.iter().map(|r| r.kemeny_change_pct).collect();
        result.eigen_crosschecks = engine.eigen_crosschecks(&pct);
        if let Some(gap) = result.max_crosscheck_gap() {
            notes.push(format!(
                "eigen_crosscheck: {} experiments, max relative gap {gap:e}",
                result.eigen_crosschecks.len()
            ));
        }
    }

    let mut out = header(config, &notes);
    out.push_str("node_economy,node_sector,structural_power,systemic_influence,systemic_fragility,kemeny_change_pct\n");
    for r in &result.records {
        let node = net.node(r.node);
        if !config.keeps(node) {
            continue;
        }
        writeln!(
            out,
            "{},{},{},{},{},{}",
            field(node.economy()),
            field(node.sector()),
            r.structural_power,
            num(r.systemic_influence),
            r.systemic_fragility,
            num(r.kemeny_change_pct)
        )
        .unwrap();
    }
    write(&out_path(config, &format!("sweep_{year}.csv"))?, &out)?;
    Ok(if failed {
        Outcome::NumericalFailures
    } else {
        Outcome::Ok
    })
}

fn tracks_csv(config: &RunConfig, tracks: &[iomarkov_core::EconomyTrack]) -> String {
    let mut rows: Vec<(i32, &str, &iomarkov_core::panel::TrackPoint)> = tracks
        .iter()
        .filter(|t| config.keeps_economy(&t.economy))
        .flat_map(|t| t.points.iter().map(move |(y, p)| (*y, t.economy.as_str(), p)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(b.1)));
    let mut out = header(config, &[]);
    out.push_str("year,economy,pi_share,gdp_share,gap\n");
    for (year, economy, p) in rows {
        writeln!(out, "{year},{},{},{},{}", field(economy), p.pi_share, p.gdp_share, p.gap).unwrap();
    }
    out
}

fn load_tracks(config: &RunConfig) -> Result<(Panel, Vec<iomarkov_core::EconomyTrack>), Error> {
    let panel = load_panel(&config.manifest)?;
    let tracks = economy_tracks(&panel, steady_config(config))?;
    Ok((panel, tracks))
}

pub fn tracks(config: &RunConfig) -> Result<Outcome, Error> {
    let (_, tracks) = load_tracks(config)?;
    write(&out_path(config, "tracks.csv")?, &tracks_csv(config, &tracks))?;
    Ok(Outcome::Ok)
}

pub fn forecast_cmd(config: &RunConfig, target: ForecastTarget, horizon: usize) -> Result<Outcome, Error> {
    let (_, tracks) = load_tracks(config)?;
    let mut out = header(config, &[]);
    out.push_str("economy,year,lag,value\n");
    for track in tracks.iter().filter(|t| config.keeps_economy(&t.economy)) {
        let f = forecast(&track.economy, &track.series(target), &DEFAULT_LAGS, horizon)?;
        let economy = field(&f.economy);
        for p in &f.projections {
            for (year, v) in f.years().zip(&p.values) {
                writeln!(out, "{economy},{year},{},{v}", p.lag).unwrap();
            }
        }
        for (year, v) in f.years().zip(&f.median) {
            writeln!(out, "{economy},{year},median,{v}").unwrap();
        }
    }
    write(&out_path(config, "forecast.csv")?, &out)?;
    Ok(Outcome::Ok)
}
