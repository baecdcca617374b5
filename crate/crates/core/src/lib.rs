//! Markov-chain analytics for world input-output tables.
//!
//! A yearly flow table becomes a column-stochastic transition matrix by
//! normalizing each node's outflows. On that chain the crate computes steady
//! states (structural power), operational mixing times and Kemeny constants
//! (globalization indices), and node-slowdown perturbation measures
//! (systemic influence, systemic fragility, Kemeny sensitivity).

pub mod chain;
pub mod error;
mod graph;
pub mod ingest;
pub mod network;
pub mod oracle;
pub mod panel;
pub mod perturb;
pub mod spectral;
pub mod synth;

pub use chain::{DanglingPolicy, Ergodicity, StochasticMatrix, TransitionOperator};
pub use error::{Error, Result};
pub use ingest::{load_panel, parse_flow_csv, parse_gdp_csv, write_flow_csv, GdpSeries, Manifest, Panel};
pub use network::{FlowNetwork, Grouping, NodeKind, NodeRef, ValidationReport};
pub use panel::{economy_tracks, forecast, globalization_indices, EconomyTrack, Forecast, ForecastTarget, YearSeries};
pub use perturb::{
    perturb_node, PerturbationConfig, PerturbationEngine, PerturbationResult, PerturbationSpec, SelfLoopScaling,
    SweepResult,
};
pub use spectral::{
    kemeny_eigen, kemeny_fundamental, mixing_time, steady_state, KemenyValue, MixingConfig, MixingTimeEstimate,
    PowerConfig, SteadyState,
};
