//! Desk-scale simulation and analysis of two-qubit CHSH correlations
//! inside a three-photon polarization GHZ state.
//!
//! The crate covers the full chain: exact state preparation through the
//! two-pair/beam-splitter pipeline, outcome probabilities in arbitrary
//! polarization bases, the five-configuration decomposition of the
//! conditioned pair probabilities with its bound mapping, the Mermin
//! combination, exhaustive local-hidden-variable enumeration and a
//! numerical search for the quantum CHSH maximum, and a reproducible
//! counting-statistics layer with Poissonian error propagation.

pub mod error;
pub mod inequalities;
pub mod lhv;
pub mod montecarlo;
pub mod preparation;
pub mod quantum;
pub mod report;

pub use error::{Error, Result};
pub use inequalities::{
    bounds_map, bounds_unmap, chsh_value, correlation, decompose, mermin_value, pair_roles,
    violation_sigmas, BoundSet, ChshSigns, DecompositionResult, OutcomeEstimator, PairRoles,
};
pub use lhv::{
    chsh_lhv_report, conditioned_lhv_report, enumerate_strategies, max_chsh_lhv,
    max_conditioned_lhv, max_mermin_lhv, mermin_lhv_report, strategy_tables, tsirelson_multistart,
    tsirelson_search, LhvStrategy, SettingsVector, TsirelsonResult,
};
pub use montecarlo::{
    estimate_probability, fit_noise, propagate, run_experiment, sample_counts,
    sample_counts_poisson_total, sample_from_table, CountsTable, EstimateWithError, ExperimentRun,
    NoiseModel, RunConfig, StreamKey,
};
pub use preparation::{
    delay_scan, epr_pair, pbs_postselect, prepare_ghz3, prepare_ghz3_with_trigger, visibility_at,
    DelayModel, DelayScanPoint,
};
pub use quantum::{
    ghz_state, outcome_probability, probability_table, project, BasisSetting, BasisVector,
    MeasurementConfig, MixedState, Outcome, ProbabilityTable, PureState, Sign,
};
pub use report::{InequalityReport, ReportMetadata};
