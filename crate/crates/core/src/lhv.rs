//! Independent classical oracles: exhaustive enumeration of deterministic
//! local strategies (the vertices of the local polytope, which suffice
//! because mixtures are convex combinations of them), and a derivative-free
//! optimizer over measurement settings that recovers the quantum maximum of
//! the CHSH combination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::{chsh_value, correlation, decompose, ChshSigns};
use crate::quantum::{
    probability_table, BasisSetting, MeasurementConfig, MixedState, ProbabilityTable, PureState,
    Sign,
};

/// Deterministic preassignment of the X and Y results of every party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LhvStrategy {
    pub x: Vec<Sign>,
    pub y: Vec<Sign>,
}

impl LhvStrategy {
    pub fn n_parties(&self) -> usize {
        self.x.len()
    }

    fn dictated_outcome(&self, config: &MeasurementConfig) -> Result<Vec<Sign>> {
        config
            .settings()
            .iter()
            .enumerate()
            .map(|(slot, setting)| match setting {
                BasisSetting::X => Ok(self.x[slot]),
                BasisSetting::Y => Ok(self.y[slot]),
                other => Err(Error::invalid(format!(
                    "strategies only preassign X and Y results, got {other:?}"
                ))),
            })
            .collect()
    }
}

/// All `4^n` deterministic strategies for `n` parties, without duplicates.
pub fn enumerate_strategies(n_parties: usize) -> Result<Vec<LhvStrategy>> {
    if !(1..=10).contains(&n_parties) {
        return Err(Error::invalid(format!(
            "party count {n_parties} outside the supported range 1..=10"
        )));
    }
    let total = 1usize << (2 * n_parties);
    let mut strategies = Vec::with_capacity(total);
    for code in 0..total {
        let mut x = Vec::with_capacity(n_parties);
        let mut y = Vec::with_capacity(n_parties);
        for party in 0..n_parties {
            let bits = (code >> (2 * party)) & 0b11;
            x.push(if bits & 1 == 0 { Sign::Plus } else { Sign::Minus });
            y.push(if bits & 2 == 0 { Sign::Plus } else { Sign::Minus });
        }
        strategies.push(LhvStrategy { x, y });
    }
    Ok(strategies)
}

/// Indicator tables: each configuration gets probability 1 on the outcome
/// the strategy dictates. Only X and Y settings are allowed.
pub fn strategy_tables(
    strategy: &LhvStrategy,
    configs: &[MeasurementConfig],
) -> Result<Vec<ProbabilityTable>> {
    configs
        .iter()
        .map(|config| {
            if config.len() != strategy.n_parties() {
                return Err(Error::invalid(format!(
                    "configuration covers {} locations, strategy has {}",
                    config.len(),
                    strategy.n_parties()
                )));
            }
            let outcome = strategy.dictated_outcome(config)?;
            let index = outcome.iter().fold(0usize, |acc, s| {
                (acc << 1) | usize::from(*s == Sign::Minus)
            });
            let mut probs = vec![0.0; 1 << config.len()];
            probs[index] = 1.0;
            ProbabilityTable::new(config.clone(), probs)
        })
        .collect()
}

/// An extremal value together with one strategy attaining it and the
/// number of strategies that do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvExtremum {
    pub value: f64,
    pub witness: LhvStrategy,
    pub attaining: usize,
}

/// CHSH scan result for one `(m, n)` sign pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPairScan {
    pub signs: ChshSigns,
    pub extremum: LhvExtremum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshLhvReport {
    pub max_abs: f64,
    pub per_signs: Vec<SignPairScan>,
}

fn two_party_correlations(strategy: &LhvStrategy) -> Result<[f64; 4]> {
    let configs: Vec<MeasurementConfig> = ["XX", "XY", "YX", "YY"]
        .iter()
        .map(|l| MeasurementConfig::from_label(l))
        .collect::<Result<_>>()?;
    let tables = strategy_tables(strategy, &configs)?;
    let mut out = [0.0; 4];
    for (slot, table) in tables.iter().enumerate() {
        out[slot] = correlation(table, &[1, 2])?;
    }
    Ok(out)
}

/// Exhaustive scan of the 16 two-party strategies over all four sign
/// pairs.
pub fn chsh_lhv_report() -> ChshLhvReport {
    let strategies = enumerate_strategies(2).expect("2 parties in range");
    let mut per_signs = Vec::with_capacity(4);
    let mut max_abs = f64::NEG_INFINITY;
    for signs in ChshSigns::all() {
        let mut best: Option<LhvExtremum> = None;
        let mut values = Vec::with_capacity(strategies.len());
        for strategy in &strategies {
            let [c00, c01, c10, c11] = two_party_correlations(strategy).expect("X/Y configs");
            values.push((chsh_value(c00, c01, c10, c11, signs).abs(), strategy));
        }
        let top = values.iter().map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
        for (v, strategy) in &values {
            if *v >= top - 1e-9 {
                match &mut best {
                    Some(e) => e.attaining += 1,
                    None => {
                        best = Some(LhvExtremum {
                            value: top,
                            witness: (*strategy).clone(),
                            attaining: 1,
                        })
                    }
                }
            }
        }
        max_abs = max_abs.max(top);
        per_signs.push(SignPairScan { signs, extremum: best.expect("16 strategies scanned") });
    }
    ChshLhvReport { max_abs, per_signs }
}

/// Largest `|CHSH|` any deterministic two-party strategy reaches (2).
pub fn max_chsh_lhv() -> f64 {
    chsh_lhv_report().max_abs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MerminLhvReport {
    pub max_abs: f64,
    pub witness: LhvStrategy,
    pub attaining: usize,
    pub min_signed: f64,
    pub max_signed: f64,
}

fn mermin_signed(strategy: &LhvStrategy) -> Result<f64> {
    let configs: Vec<MeasurementConfig> = ["XYY", "YXY", "YYX", "XXX"]
        .iter()
        .map(|l| MeasurementConfig::from_label(l))
        .collect::<Result<_>>()?;
    let tables = strategy_tables(strategy, &configs)?;
    let c = |i: usize| correlation(&tables[i], &[1, 2, 3]);
    Ok(c(0)? + c(1)? + c(2)? - c(3)?)
}

/// Exhaustive scan of the 64 three-party strategies against the Mermin
/// combination.
pub fn mermin_lhv_report() -> MerminLhvReport {
    let strategies = enumerate_strategies(3).expect("3 parties in range");
    let values: Vec<f64> = strategies
        .iter()
        .map(|s| mermin_signed(s).expect("X/Y configs"))
        .collect();
    let max_abs = values.iter().map(|v| v.abs()).fold(f64::NEG_INFINITY, f64::max);
    let min_signed = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max_signed = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut witness = None;
    let mut attaining = 0;
    for (strategy, value) in strategies.iter().zip(&values) {
        if value.abs() >= max_abs - 1e-9 {
            attaining += 1;
            if witness.is_none() {
                witness = Some(strategy.clone());
            }
        }
    }
    MerminLhvReport {
        max_abs,
        witness: witness.expect("64 strategies scanned"),
        attaining,
        min_signed,
        max_signed,
    }
}

/// Largest `|Mermin|` any deterministic three-party strategy reaches (2).
pub fn max_mermin_lhv() -> f64 {
    mermin_lhv_report().max_abs
}

/// Per-strategy values of the decomposition estimator under every
/// deterministic strategy, with its extrema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionedLhvReport {
    pub max_s_prob_lower: f64,
    pub min_s_prob_lower: f64,
    pub witness: LhvStrategy,
    pub attaining: usize,
    pub values: Vec<f64>,
}

/// Runs the five-configuration decomposition on the indicator tables of
/// all 64 strategies. The estimator never needs pair roles, so strategies
/// with odd X parity are evaluated like any other.
pub fn conditioned_lhv_report() -> ConditionedLhvReport {
    let strategies = enumerate_strategies(3).expect("3 parties in range");
    let configs: Vec<MeasurementConfig> = ["XXX", "XYY", "YXY", "YYX", "YYY"]
        .iter()
        .map(|l| MeasurementConfig::from_label(l).expect("valid label"))
        .collect();
    let values: Vec<f64> = strategies
        .iter()
        .map(|strategy| {
            let tables = strategy_tables(strategy, &configs).expect("X/Y configs");
            decompose(&tables).expect("all five configurations present").s_prob_lower.value
        })
        .collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut witness = None;
    let mut attaining = 0;
    for (strategy, value) in strategies.iter().zip(&values) {
        if *value >= max - 1e-9 {
            attaining += 1;
            if witness.is_none() {
                witness = Some(strategy.clone());
            }
        }
    }
    ConditionedLhvReport {
        max_s_prob_lower: max,
        min_s_prob_lower: min,
        witness: witness.expect("64 strategies scanned"),
        attaining,
        values,
    }
}

/// Largest decomposition estimate any deterministic strategy reaches
/// (0, consistent with the classical bound).
pub fn max_conditioned_lhv() -> f64 {
    conditioned_lhv_report().max_s_prob_lower
}

/// Analyzer orientation `(theta, phi)` of one measurement choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementAngles {
    pub theta: f64,
    pub phi: f64,
}

/// Two measurement choices per party for the CHSH scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingsVector {
    pub party1: [MeasurementAngles; 2],
    pub party2: [MeasurementAngles; 2],
}

impl SettingsVector {
    /// A reasonable starting point: Z/X analyzers on one side, diagonal
    /// analyzers on the other.
    pub fn canonical() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        SettingsVector {
            party1: [
                MeasurementAngles { theta: 0.0, phi: 0.0 },
                MeasurementAngles { theta: FRAC_PI_2, phi: 0.0 },
            ],
            party2: [
                MeasurementAngles { theta: FRAC_PI_4, phi: 0.0 },
                MeasurementAngles { theta: -FRAC_PI_4, phi: 0.0 },
            ],
        }
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let mut angle = || MeasurementAngles {
            theta: rng.gen_range(0.0..std::f64::consts::TAU),
            phi: rng.gen_range(0.0..std::f64::consts::TAU),
        };
        SettingsVector { party1: [angle(), angle()], party2: [angle(), angle()] }
    }

    fn flat(&self) -> [f64; 8] {
        [
            self.party1[0].theta,
            self.party1[0].phi,
            self.party1[1].theta,
            self.party1[1].phi,
            self.party2[0].theta,
            self.party2[0].phi,
            self.party2[1].theta,
            self.party2[1].phi,
        ]
    }

    fn from_flat(a: &[f64; 8]) -> Self {
        SettingsVector {
            party1: [
                MeasurementAngles { theta: a[0], phi: a[1] },
                MeasurementAngles { theta: a[2], phi: a[3] },
            ],
            party2: [
                MeasurementAngles { theta: a[4], phi: a[5] },
                MeasurementAngles { theta: a[6], phi: a[7] },
            ],
        }
    }
}

/// Outcome of one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsirelsonResult {
    pub max_abs: f64,
    pub settings: SettingsVector,
    pub evaluations: usize,
    /// Accepted objective values in order; non-decreasing by construction.
    pub improvements: Vec<f64>,
}

fn chsh_objective(state: &MixedState, flat: &[f64; 8], evaluations: &mut usize) -> f64 {
    *evaluations += 1;
    let setting = |theta: f64, phi: f64| BasisSetting::Custom { theta, phi };
    let pairs = [(0usize, 4usize), (0, 6), (2, 4), (2, 6)];
    let mut c = [0.0; 4];
    for (slot, (i, j)) in pairs.iter().enumerate() {
        let config = MeasurementConfig::new(vec![
            setting(flat[*i], flat[*i + 1]),
            setting(flat[*j], flat[*j + 1]),
        ])
        .expect("two settings");
        let table = probability_table(state, &config).expect("dimensions agree");
        c[slot] = correlation(&table, &[1, 2]).expect("valid subset");
    }
    chsh_value(c[0], c[1], c[2], c[3], ChshSigns::new(Sign::Plus, Sign::Plus)).abs()
}

fn golden_max(f: &mut impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - (hi - lo) * INV_PHI;
    let mut d = lo + (hi - lo) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - (hi - lo) * INV_PHI;
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + (hi - lo) * INV_PHI;
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Coordinate ascent over the eight analyzer angles, maximizing `|CHSH|`
/// of the given two-qubit state. Each coordinate is scanned on a coarse
/// grid over its period and refined with a golden-section search; steps
/// are only accepted when they improve the objective.
pub fn tsirelson_search(
    initial: &SettingsVector,
    state: &PureState,
    tolerance: f64,
) -> Result<TsirelsonResult> {
    if state.n_qubits() != 2 {
        return Err(Error::invalid(format!(
            "CHSH optimization needs a two-qubit state, got {} qubits",
            state.n_qubits()
        )));
    }
    if tolerance <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    let mixed = MixedState::pure(state.clone());
    let mut evaluations = 0usize;
    let mut angles = initial.flat();
    let mut best = chsh_objective(&mixed, &angles, &mut evaluations);
    let mut improvements = vec![best];

    const GRID: usize = 24;
    let period = std::f64::consts::TAU;
    let cell = period / GRID as f64;
    for _sweep in 0..100 {
        let sweep_start = best;
        for coordinate in 0..8 {
            let mut scratch = angles;
            let mut eval_at = |t: f64| {
                scratch[coordinate] = t;
                chsh_objective(&mixed, &scratch, &mut evaluations)
            };
            let mut grid_best = (angles[coordinate], best);
            for k in 0..GRID {
                let t = k as f64 * cell;
                let v = eval_at(t);
                if v > grid_best.1 {
                    grid_best = (t, v);
                }
            }
            let (t, v) = golden_max(&mut eval_at, grid_best.0 - cell, grid_best.0 + cell, 48);
            let (t, v) = if v > grid_best.1 { (t, v) } else { grid_best };
            if v > best {
                angles[coordinate] = t;
                best = v;
                improvements.push(best);
            }
        }
        if best - sweep_start < tolerance * 1e-2 {
            break;
        }
    }

    Ok(TsirelsonResult {
        max_abs: best,
        settings: SettingsVector::from_flat(&angles),
        evaluations,
        improvements,
    })
}

/// Multi-start wrapper: the canonical start plus `restarts - 1` random
/// starts drawn from per-restart streams of `seed`; returns the best run.
pub fn tsirelson_multistart(
    state: &PureState,
    tolerance: f64,
    restarts: usize,
    seed: u64,
) -> Result<TsirelsonResult> {
    if restarts == 0 {
        return Err(Error::invalid("at least one restart is required"));
    }
    let initials: Vec<SettingsVector> = (0..restarts)
        .map(|restart| {
            if restart == 0 {
                SettingsVector::canonical()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(restart as u64);
                SettingsVector::random(&mut rng)
            }
        })
        .collect();
    let runs: Vec<TsirelsonResult> = initials
        .par_iter()
        .map(|initial| tsirelson_search(initial, state, tolerance))
        .collect::<Result<_>>()?;
    let mut best = None;
    let mut total_evaluations = 0;
    for run in runs {
        total_evaluations += run.evaluations;
        match &best {
            Some(TsirelsonResult { max_abs, .. }) if *max_abs >= run.max_abs => {}
            _ => best = Some(run),
        }
    }
    let mut best = best.expect("at least one restart ran");
    best.evaluations = total_evaluations;
    Ok(best)
}
