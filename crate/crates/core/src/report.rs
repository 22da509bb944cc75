//! The analysis report produced from a set of counts (or exact tables):
//! decomposition, Mermin value, and distances above the classical and
//! quantum bounds.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inequalities::{
    decompose, mermin_value, violation_sigmas, BoundSet, DecompositionResult, OutcomeEstimator,
};
use crate::montecarlo::{EstimateWithError, NoiseModel};

/// Provenance recorded alongside a report. Absent fields mean the report
/// was derived from externally supplied tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub noise: Option<NoiseModel>,
}

impl ReportMetadata {
    pub fn current() -> Self {
        ReportMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            shots: None,
            noise: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = Some(shots);
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = Some(noise);
        self
    }
}

impl Default for ReportMetadata {
    fn default() -> Self {
        ReportMetadata::current()
    }
}

/// Full analysis output. `decomposition` and the CHSH sigma distances are
/// absent in Mermin-only mode; sigma distances are also absent when the
/// inputs are exact tables (zero sigma).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub decomposition: Option<DecompositionResult>,
    pub mermin: EstimateWithError,
    pub sigmas_vs_lhv: Option<f64>,
    pub sigmas_vs_cirelson: Option<f64>,
    pub sigmas_vs_mermin_bound: Option<f64>,
    pub bounds: BoundSet,
    pub metadata: ReportMetadata,
}

fn sigmas_above(estimate: EstimateWithError, bound: f64) -> Option<f64> {
    if estimate.sigma > 0.0 {
        Some(violation_sigmas(estimate, bound).expect("sigma checked positive"))
    } else {
        None
    }
}

impl InequalityReport {
    /// Builds the full report from tables for the five standard
    /// configurations.
    pub fn from_tables<T: OutcomeEstimator>(tables: &[T], metadata: ReportMetadata) -> Result<Self> {
        let decomposition = decompose(tables)?;
        let mermin = mermin_value(tables)?;
        Ok(InequalityReport::from_results(Some(decomposition), mermin, metadata))
    }

    /// Mermin-only report from the four configurations it needs.
    pub fn mermin_only<T: OutcomeEstimator>(tables: &[T], metadata: ReportMetadata) -> Result<Self> {
        let mermin = mermin_value(tables)?;
        Ok(InequalityReport::from_results(None, mermin, metadata))
    }

    /// Builds the report from already-estimated decomposition components,
    /// bypassing counts entirely.
    pub fn from_components(
        p_xx: EstimateWithError,
        p_xy_upper: EstimateWithError,
        p_yy: EstimateWithError,
        mermin: EstimateWithError,
        metadata: ReportMetadata,
    ) -> Self {
        let decomposition = DecompositionResult::from_components(p_xx, p_xy_upper, p_yy);
        InequalityReport::from_results(Some(decomposition), mermin, metadata)
    }

    fn from_results(
        decomposition: Option<DecompositionResult>,
        mermin: EstimateWithError,
        metadata: ReportMetadata,
    ) -> Self {
        let bounds = BoundSet::standard();
        let (sigmas_vs_lhv, sigmas_vs_cirelson) = match &decomposition {
            Some(d) => (
                sigmas_above(d.s_chsh_lower, bounds.lhv_bound),
                sigmas_above(d.s_chsh_lower, bounds.cirelson_bound),
            ),
            None => (None, None),
        };
        let sigmas_vs_mermin_bound = sigmas_above(mermin, bounds.lhv_bound);
        InequalityReport {
            decomposition,
            mermin,
            sigmas_vs_lhv,
            sigmas_vs_cirelson,
            sigmas_vs_mermin_bound,
            bounds,
            metadata,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fixture_report() -> InequalityReport {
        InequalityReport::from_components(
            EstimateWithError::new(0.738, 0.012),
            EstimateWithError::new(0.072, 0.007),
            EstimateWithError::new(0.254, 0.011),
            EstimateWithError::new(3.57, 0.04),
            ReportMetadata::current(),
        )
    }

    #[test]
    fn fixture_report_reproduces_published_sigma_distances() {
        let r = fixture_report();
        let d = r.decomposition.unwrap();
        assert_abs_diff_eq!(d.s_chsh_lower.value, 3.36, epsilon = 1e-12);
        let vs_cirelson = r.sigmas_vs_cirelson.unwrap();
        assert!((6.4..=7.0).contains(&vs_cirelson), "vs cirelson: {vs_cirelson}");
        let vs_mermin = r.sigmas_vs_mermin_bound.unwrap();
        assert_abs_diff_eq!(vs_mermin, 39.25, epsilon = 1e-9);
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = fixture_report();
        let json = serde_json::to_string(&r).unwrap();
        let back: InequalityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn exact_tables_yield_no_sigma_distances() {
        use crate::quantum::{ghz_state, probability_table, MeasurementConfig, MixedState};
        let tables: Vec<_> = ["XXX", "XYY", "YXY", "YYX", "YYY"]
            .iter()
            .map(|l| {
                probability_table(
                    &MixedState::pure(ghz_state(3).unwrap()),
                    &MeasurementConfig::from_label(l).unwrap(),
                )
                .unwrap()
            })
            .collect();
        let r = InequalityReport::from_tables(&tables, ReportMetadata::current()).unwrap();
        assert!(r.sigmas_vs_lhv.is_none());
        assert_abs_diff_eq!(r.mermin.value, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.decomposition.unwrap().s_chsh_lower.value, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn mermin_only_report_skips_the_decomposition() {
        use crate::quantum::{ghz_state, probability_table, MeasurementConfig, MixedState};
        let tables: Vec<_> = ["XXX", "XYY", "YXY", "YYX"]
            .iter()
            .map(|l| {
                probability_table(
                    &MixedState::pure(ghz_state(3).unwrap()),
                    &MeasurementConfig::from_label(l).unwrap(),
                )
                .unwrap()
            })
            .collect();
        let r = InequalityReport::mermin_only(&tables, ReportMetadata::current()).unwrap();
        assert!(r.decomposition.is_none());
        assert_abs_diff_eq!(r.mermin.value, 4.0, epsilon = 1e-12);
    }
}
