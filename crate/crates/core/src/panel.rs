//! Cross-year analytics: globalization index series, economy-level
//! structural power against GDP share, and trailing-difference forecasts.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{DanglingPolicy, Ergodicity, StochasticMatrix};
use crate::error::{Error, Result};
use crate::ingest::Panel;
use crate::network::{FlowNetwork, Grouping};
use crate::spectral::{
    kemeny_eigen, mixing_time, steady_state, KemenyValue, MixingConfig, MixingTimeEstimate, SteadyState,
    DEFAULT_STEADY_TOLERANCE,
};

pub const DEFAULT_LAGS: [usize; 4] = [3, 4, 5, 6];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearSeries {
    pub metric: String,
    pub values: BTreeMap<i32, f64>,
    pub std: Option<BTreeMap<i32, f64>>,
}

/// One year's globalization measurements, or the reason they are missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearIndices {
    pub year: i32,
    pub ergodicity: Option<Ergodicity>,
    pub mixing: std::result::Result<MixingTimeEstimate, String>,
    pub kemeny: std::result::Result<KemenyValue, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalizationReport {
    /// The single configuration used for every year.
    pub mixing_config: MixingConfig,
    pub dangling_policy: DanglingPolicy,
    pub years: Vec<YearIndices>,
}

impl GlobalizationReport {
    pub fn mixing_series(&self) -> YearSeries {
        let ok: Vec<_> = self
            .years
            .iter()
            .filter_map(|y| y.mixing.as_ref().ok().map(|m| (y.year, m)))
            .collect();
        YearSeries {
            metric: "mixing_time".into(),
            values: ok.iter().map(|(y, m)| (*y, m.mean_iterations)).collect(),
            std: Some(ok.iter().map(|(y, m)| (*y, m.std_iterations)).collect()),
        }
    }

    pub fn kemeny_series(&self) -> YearSeries {
        YearSeries {
            metric: "kemeny".into(),
            values: self
                .years
                .iter()
                .filter_map(|y| y.kemeny.as_ref().ok().map(|k| (y.year, k.value)))
                .collect(),
            std: None,
        }
    }

    pub fn failures(&self) -> Vec<(i32, String)> {
        let mut out = Vec::new();
        for y in &self.years {
            if let Err(e) = &y.mixing {
                out.push((y.year, format!("mixing time: {e}")));
            }
            if let Err(e) = &y.kemeny {
                out.push((y.year, format!("kemeny: {e}")));
            }
        }
        out
    }
}

fn year_indices(net: &FlowNetwork, mixing: MixingConfig, policy: DanglingPolicy) -> YearIndices {
    let year = net.year();
    let t = match StochasticMatrix::from_network(net, policy) {
        Ok(t) => t,
        Err(e) => {
            return YearIndices {
                year,
                ergodicity: None,
                mixing: Err(e.to_string()),
                kemeny: Err(e.to_string()),
            }
        }
    };
    let ergodicity = t.check_ergodicity();
    if !ergodicity.is_ergodic() {
        let msg = format!(
            "chain is not ergodic (irreducible: {}, aperiodic: {})",
            ergodicity.irreducible, ergodicity.aperiodic
        );
        return YearIndices {
            year,
            ergodicity: Some(ergodicity),
            mixing: Err(msg.clone()),
            kemeny: Err(msg),
        };
    }
    YearIndices {
        year,
        ergodicity: Some(ergodicity),
        mixing: mixing_time(&t, mixing).map_err(|e| e.to_string()),
        kemeny: kemeny_eigen(&t).map_err(|e| e.to_string()),
    }
}

/// Mixing time and Kemeny constant for every year under one configuration.
pub fn globalization_indices(panel: &Panel, mixing: MixingConfig, policy: DanglingPolicy) -> GlobalizationReport {
    let years = panel
        .networks()
        .par_iter()
        .map(|net| year_indices(net, mixing, policy))
        .collect();
    GlobalizationReport {
        mixing_config: mixing,
        dangling_policy: policy,
        years,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyConfig {
    pub tolerance: f64,
    pub seed: u64,
    pub dangling_policy: DanglingPolicy,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        SteadyConfig {
            tolerance: DEFAULT_STEADY_TOLERANCE,
            seed: 0,
            dangling_policy: DanglingPolicy::Error,
        }
    }
}

/// Steady state of one year's chain.
pub fn year_steady_state(net: &FlowNetwork, config: SteadyConfig) -> Result<SteadyState> {
    let t = StochasticMatrix::from_network(net, config.dangling_policy)?;
    steady_state(&t, config.tolerance, config.seed)
}

/// Steady states for all years, in year order.
pub fn steady_states(panel: &Panel, config: SteadyConfig) -> Vec<(i32, Result<SteadyState>)> {
    panel
        .networks()
        .par_iter()
        .map(|net| (net.year(), year_steady_state(net, config)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackPoint {
    pub pi_share: f64,
    pub gdp_share: f64,
    /// `pi_share - gdp_share`; positive is untapped structural potential.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EconomyTrack {
    pub economy: String,
    pub points: BTreeMap<i32, TrackPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastTarget {
    #[default]
    Gap,
    PiShare,
    GdpShare,
}

impl EconomyTrack {
    pub fn series(&self, target: ForecastTarget) -> Vec<(i32, f64)> {
        self.points
            .iter()
            .map(|(&y, p)| {
                let v = match target {
                    ForecastTarget::Gap => p.gap,
                    ForecastTarget::PiShare => p.pi_share,
                    ForecastTarget::GdpShare => p.gdp_share,
                };
                (y, v)
            })
            .collect()
    }
}

/// Aggregated steady-state share against GDP share, per economy and year.
pub fn economy_tracks(panel: &Panel, config: SteadyConfig) -> Result<Vec<EconomyTrack>> {
    let gdp = panel
        .gdp()
        .ok_or_else(|| Error::KeyMismatch("panel has no GDP series".into()))?;
    let network_economies: BTreeSet<String> = panel.networks()[0]
        .economies()
        .into_iter()
        .map(str::to_owned)
        .collect();
    for year in panel.years() {
        let shares = gdp
            .shares(year)
            .ok_or_else(|| Error::KeyMismatch(format!("no GDP data for year {year}")))?;
        let gdp_economies: BTreeSet<String> = shares.keys().cloned().collect();
        if gdp_economies != network_economies {
            let only_net: Vec<_> = network_economies.difference(&gdp_economies).cloned().collect();
            let only_gdp: Vec<_> = gdp_economies.difference(&network_economies).cloned().collect();
            return Err(Error::KeyMismatch(format!(
                "year {year}: missing from GDP [{}], missing from network [{}]",
                only_net.join(", "),
                only_gdp.join(", ")
            )));
        }
    }

    let per_year = steady_states(panel, config);
    let mut tracks: BTreeMap<String, BTreeMap<i32, TrackPoint>> = BTreeMap::new();
    for ((year, steady), net) in per_year.into_iter().zip(panel.networks()) {
        let steady = steady?;
        let pi_shares = net.group_sums(&steady.pi, Grouping::ByEconomy)?;
        for (economy, pi_share) in pi_shares {
            let gdp_share = gdp.share(year, &economy).expect("economy sets checked above");
            tracks.entry(economy).or_default().insert(
                year,
                TrackPoint {
                    pi_share,
                    gdp_share,
                    gap: pi_share - gdp_share,
                },
            );
        }
    }
    Ok(tracks
        .into_iter()
        .map(|(economy, points)| EconomyTrack { economy, points })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagProjection {
    pub lag: usize,
    /// Mean of the last `lag` first differences.
    pub slope: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forecast {
    pub economy: String,
    pub base_year: i32,
    pub horizon: usize,
    pub projections: Vec<LagProjection>,
    /// Pointwise median of the lag projections.
    pub median: Vec<f64>,
}

impl Forecast {
    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (1..=self.horizon as i32).map(move |h| self.base_year + h)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len().is_multiple_of(2) {
        0.5 * (values[m - 1] + values[m])
    } else {
        values[m]
    }
}

/// Extends the last observation linearly, once per lag, with the trailing mean
/// of first differences as slope. `series` must be in year order.
pub fn forecast(economy: &str, series: &[(i32, f64)], lags: &[usize], horizon: usize) -> Result<Forecast> {
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if lags.is_empty() || lags.contains(&0) || series.len() < max_lag + 1 {
        return Err(Error::InsufficientHistory {
            len: series.len(),
            needed: max_lag + 1,
        });
    }
    let diffs: Vec<f64> = series.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let (base_year, last) = *series.last().expect("nonempty");
    let projections: Vec<LagProjection> = lags
        .iter()
        .map(|&lag| {
            let tail = &diffs[diffs.len() - lag..];
            let slope = tail.iter().sum::<f64>() / lag as f64;
            LagProjection {
                lag,
                slope,
                values: (1..=horizon).map(|h| last + slope * h as f64).collect(),
            }
        })
        .collect();
    let median = (0..horizon)
        .map(|h| {
            let mut at: Vec<f64> = projections.iter().map(|p| p.values[h]).collect();
            median(&mut at)
        })
        .collect();
    Ok(Forecast {
        economy: economy.to_owned(),
        base_year,
        horizon,
        projections,
        median,
    })
}
