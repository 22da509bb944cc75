//! Correlation and inequality arithmetic: pair correlations, the CHSH
//! combination and its bounds, the probability-form expression with its
//! bound mapping, the five-configuration decomposition of the conditioned
//! pair probabilities, and the three-party Mermin combination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{propagate, EstimateWithError};
use crate::quantum::{MeasurementConfig, Outcome, ProbabilityTable, Sign};

/// The free signs `m` and `n` of the CHSH combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChshSigns {
    pub m: Sign,
    pub n: Sign,
}

impl ChshSigns {
    pub fn new(m: Sign, n: Sign) -> Self {
        ChshSigns { m, n }
    }

    pub fn all() -> [ChshSigns; 4] {
        use Sign::{Minus, Plus};
        [
            ChshSigns::new(Plus, Plus),
            ChshSigns::new(Plus, Minus),
            ChshSigns::new(Minus, Plus),
            ChshSigns::new(Minus, Minus),
        ]
    }
}

/// The classical, quantum, and algebraic bounds of the CHSH combination
/// together with their images under [`bounds_map`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub lhv_bound: f64,
    pub cirelson_bound: f64,
    pub algebraic_max: f64,
    pub prob_lhv_bound: f64,
    pub prob_cirelson_bound: f64,
    pub prob_algebraic_max: f64,
}

impl BoundSet {
    pub fn standard() -> Self {
        let lhv_bound = 2.0;
        let cirelson_bound = 2.0 * std::f64::consts::SQRT_2;
        let algebraic_max = 4.0;
        BoundSet {
            lhv_bound,
            cirelson_bound,
            algebraic_max,
            prob_lhv_bound: bounds_map(lhv_bound),
            prob_cirelson_bound: bounds_map(cirelson_bound),
            prob_algebraic_max: bounds_map(algebraic_max),
        }
    }
}

impl Default for BoundSet {
    fn default() -> Self {
        BoundSet::standard()
    }
}

/// Estimated pieces of the five-configuration decomposition.
///
/// `p_xx` is the joint probability that both role-pair photons give `-1`
/// under X measurements; `p_xy_upper` is the six-term sum bounding each of
/// the two cross probabilities from above; `p_yy` is the probability that
/// both role-pair photons reproduce the third photon's Y result.
/// `s_prob_lower` is `p_xx - 2*p_xy_upper - p_yy`, a lower bound on the
/// probability-form expression, and `s_chsh_lower = 4*s_prob_lower + 2` is
/// the corresponding lower bound on the conditioned CHSH combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub p_xx: EstimateWithError,
    pub p_xy_upper: EstimateWithError,
    pub p_yy: EstimateWithError,
    pub s_prob_lower: EstimateWithError,
    pub s_chsh_lower: EstimateWithError,
}

impl DecompositionResult {
    /// Combines already-estimated components; the cross-term bound enters
    /// twice, once per cross correlation, with independent errors.
    pub fn from_components(
        p_xx: EstimateWithError,
        p_xy_upper: EstimateWithError,
        p_yy: EstimateWithError,
    ) -> Self {
        let s_prob_lower = propagate(&[
            (1.0, p_xx),
            (-1.0, p_xy_upper),
            (-1.0, p_xy_upper),
            (-1.0, p_yy),
        ]);
        let s_chsh_lower = EstimateWithError::new(
            bounds_unmap(s_prob_lower.value),
            4.0 * s_prob_lower.sigma,
        );
        DecompositionResult { p_xx, p_xy_upper, p_yy, s_prob_lower, s_chsh_lower }
    }
}

/// Anything that yields per-outcome probability estimates for a fixed
/// configuration: exact tables give zero sigma, count tables carry
/// Poissonian sigma.
pub trait OutcomeEstimator {
    fn config(&self) -> &MeasurementConfig;

    fn estimate(&self, outcome: &Outcome) -> Result<EstimateWithError>;

    fn n_qubits(&self) -> usize {
        self.config().len()
    }
}

impl OutcomeEstimator for ProbabilityTable {
    fn config(&self) -> &MeasurementConfig {
        ProbabilityTable::config(self)
    }

    fn estimate(&self, outcome: &Outcome) -> Result<EstimateWithError> {
        Ok(EstimateWithError::exact(self.prob(outcome)?))
    }
}

/// Expectation of the product of results over `locations` (1-based),
/// marginalizing every other location.
pub fn correlation(table: &ProbabilityTable, locations: &[usize]) -> Result<f64> {
    validate_subset(locations, table.n_qubits())?;
    let mut value = 0.0;
    for (outcome, p) in table.iter() {
        value += p * subset_product(&outcome, locations);
    }
    Ok(value)
}

fn validate_subset(locations: &[usize], n_qubits: usize) -> Result<()> {
    if locations.is_empty() {
        return Err(Error::invalid("correlation needs a non-empty location subset"));
    }
    for (i, loc) in locations.iter().enumerate() {
        if *loc == 0 || *loc > n_qubits {
            return Err(Error::invalid(format!("location {loc} out of range 1..={n_qubits}")));
        }
        if locations[..i].contains(loc) {
            return Err(Error::invalid(format!("location {loc} listed twice")));
        }
    }
    Ok(())
}

fn subset_product(outcome: &Outcome, locations: &[usize]) -> f64 {
    locations.iter().map(|loc| outcome.results()[loc - 1].value()).product()
}

/// Full-product correlation with propagated sigma from an estimator.
fn correlation_estimate<T: OutcomeEstimator>(table: &T) -> Result<EstimateWithError> {
    let n = table.n_qubits();
    let mut terms = Vec::with_capacity(1 << n);
    for index in 0..(1usize << n) {
        let outcome = Outcome::from_index(index, n)?;
        let coefficient = outcome.parity().value();
        terms.push((coefficient, table.estimate(&outcome)?));
    }
    Ok(propagate(&terms))
}

/// The signed CHSH combination
/// `c00 - m*c01 - n*c10 - m*n*c11`,
/// where the first index is particle i's setting (0 = `A`, 1 = `a`) and the
/// second is particle j's (0 = `B`, 1 = `b`). Callers compare `|value|`
/// against the bounds.
pub fn chsh_value(c00: f64, c01: f64, c10: f64, c11: f64, signs: ChshSigns) -> f64 {
    let m = signs.m.value();
    let n = signs.n.value();
    c00 - m * c01 - n * c10 - m * n * c11
}

/// Maps a CHSH-form bound `l` onto its probability-form image `(l - 2)/4`.
pub fn bounds_map(l: f64) -> f64 {
    (l - 2.0) / 4.0
}

/// Inverse of [`bounds_map`].
pub fn bounds_unmap(p: f64) -> f64 {
    4.0 * p + 2.0
}

/// Outcomes of `XXX` in which the two role-pair photons both give `-1`.
const XX_PAIR_OUTCOMES: [&str; 4] = ["+--", "-+-", "--+", "---"];

/// Per-configuration outcomes whose total upper-bounds each cross
/// probability (both `X` on the pair photon and `Y` on the other flipped
/// relative to the third photon's result).
const CROSS_TERM_OUTCOMES: [(&str, [&str; 2]); 3] =
    [("XYY", ["-+-", "--+"]), ("YXY", ["+--", "--+"]), ("YYX", ["+--", "-+-"])];

/// Outcomes of `YYY` in which all three results agree.
const YY_PAIR_OUTCOMES: [&str; 2] = ["+++", "---"];

/// The four configurations entering the Mermin combination, with signs.
const MERMIN_TERMS: [(&str, f64); 4] = [("XYY", 1.0), ("YXY", 1.0), ("YYX", 1.0), ("XXX", -1.0)];

fn require_config<'a, T: OutcomeEstimator>(tables: &'a [T], label: &str) -> Result<&'a T> {
    let found = tables
        .iter()
        .find(|t| t.config().label().map(|l| l == label).unwrap_or(false))
        .ok_or_else(|| Error::MissingConfiguration(label.to_string()))?;
    if found.n_qubits() != 3 {
        return Err(Error::invalid(format!(
            "configuration {label} covers {} qubits, expected 3",
            found.n_qubits()
        )));
    }
    Ok(found)
}

fn sum_outcomes<T: OutcomeEstimator>(table: &T, keys: &[&str]) -> Result<EstimateWithError> {
    let mut terms = Vec::with_capacity(keys.len());
    for key in keys {
        terms.push((1.0, table.estimate(&Outcome::from_key(key)?)?));
    }
    Ok(propagate(&terms))
}

/// Evaluates the five-configuration decomposition from tables for
/// `XXX`, `XYY`, `YXY`, `YYX`, and `YYY` (extra tables are ignored).
pub fn decompose<T: OutcomeEstimator>(tables: &[T]) -> Result<DecompositionResult> {
    let xxx = require_config(tables, "XXX")?;
    let p_xx = sum_outcomes(xxx, &XX_PAIR_OUTCOMES)?;

    let mut cross_terms = Vec::with_capacity(6);
    for (label, keys) in CROSS_TERM_OUTCOMES {
        let table = require_config(tables, label)?;
        for key in keys {
            cross_terms.push((1.0, table.estimate(&Outcome::from_key(key)?)?));
        }
    }
    let p_xy_upper = propagate(&cross_terms);

    let yyy = require_config(tables, "YYY")?;
    let p_yy = sum_outcomes(yyy, &YY_PAIR_OUTCOMES)?;

    Ok(DecompositionResult::from_components(p_xx, p_xy_upper, p_yy))
}

/// Absolute value of the Mermin combination
/// `C(XYY) + C(YXY) + C(YYX) - C(XXX)`
/// over full three-party correlations, with propagated sigma.
pub fn mermin_value<T: OutcomeEstimator>(tables: &[T]) -> Result<EstimateWithError> {
    let mut terms = Vec::with_capacity(4);
    for (label, coefficient) in MERMIN_TERMS {
        let table = require_config(tables, label)?;
        terms.push((coefficient, correlation_estimate(table)?));
    }
    let signed = propagate(&terms);
    Ok(EstimateWithError::new(signed.value.abs(), signed.sigma))
}

/// Standardized distance of an estimate above a bound, unrounded.
pub fn violation_sigmas(estimate: EstimateWithError, bound: f64) -> Result<f64> {
    if estimate.sigma <= 0.0 {
        return Err(Error::invalid(format!(
            "violation in sigmas needs a positive sigma, got {}",
            estimate.sigma
        )));
    }
    Ok((estimate.value - bound) / estimate.sigma)
}

/// Role assignment read off an all-X outcome: `i` and `j` are the photons
/// giving `-1` and `k` the remaining one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairRoles {
    Assigned { i: usize, j: usize, k: usize },
    /// One or three `-1` results: impossible for the ideal state, possible
    /// under noise, so it is flagged rather than guessed.
    Undefined,
}

/// Assigns pair roles from a three-photon X-measurement outcome. An
/// all-`+1` outcome uses the convention `(1, 2, 3)`.
pub fn pair_roles(xxx_outcome: &Outcome) -> Result<PairRoles> {
    if xxx_outcome.len() != 3 {
        return Err(Error::invalid(format!(
            "pair roles need a three-photon outcome, got {} entries",
            xxx_outcome.len()
        )));
    }
    let minus: Vec<usize> = xxx_outcome
        .results()
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Sign::Minus)
        .map(|(slot, _)| slot + 1)
        .collect();
    match minus.len() {
        0 => Ok(PairRoles::Assigned { i: 1, j: 2, k: 3 }),
        2 => {
            let k = (1..=3).find(|loc| !minus.contains(loc)).expect("one location left");
            Ok(PairRoles::Assigned { i: minus[0], j: minus[1], k })
        }
        _ => Ok(PairRoles::Undefined),
    }
}
