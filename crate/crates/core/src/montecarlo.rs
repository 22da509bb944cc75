//! Counting statistics: the two-parameter noise model fitted to summary
//! statistics, reproducible multinomial shot sampling, and first-order
//! Poissonian error propagation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::OutcomeEstimator;
use crate::quantum::{
    ghz_minus_state, ghz_state, probability_table, MeasurementConfig, MixedState, Outcome,
    ProbabilityTable, PureState,
};
use crate::report::{InequalityReport, ReportMetadata};

/// Shots drawn per RNG stream; sampling is reduced over batches so the
/// result is independent of how batches are scheduled.
const BATCH_SIZE: u64 = 1 << 14;

/// Batch index reserved for drawing a Poisson-distributed total.
const TOTALS_BATCH: u64 = (1 << 24) - 1;

/// A value with a one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub sigma: f64,
}

impl EstimateWithError {
    pub fn new(value: f64, sigma: f64) -> Self {
        assert!(sigma >= 0.0, "sigma must be nonnegative, got {sigma}");
        EstimateWithError { value, sigma }
    }

    /// An exactly known value (zero sigma).
    pub fn exact(value: f64) -> Self {
        EstimateWithError { value, sigma: 0.0 }
    }
}

/// First-order combination of independent estimates:
/// value `sum(c_i v_i)`, sigma `sqrt(sum(c_i^2 sigma_i^2))`.
pub fn propagate(terms: &[(f64, EstimateWithError)]) -> EstimateWithError {
    let value = terms.iter().map(|(c, e)| c * e.value).sum();
    let variance: f64 = terms.iter().map(|(c, e)| (c * e.sigma).powi(2)).sum();
    EstimateWithError::new(value, variance.sqrt())
}

/// Convex mixture of the two GHZ-like coherent components and the six
/// unwanted computational basis populations (`eps` on each).
///
/// The coherence `w_plus - w_minus` controls the X-basis suppression; the
/// populations `w_plus + w_minus` and `eps` control the `HHH`:`HHV`
/// population ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    w_plus: f64,
    w_minus: f64,
    eps: f64,
}

impl NoiseModel {
    pub fn new(w_plus: f64, w_minus: f64, eps: f64) -> Result<Self> {
        for (name, v) in [("w_plus", w_plus), ("w_minus", w_minus), ("eps", eps)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        let total = w_plus + w_minus + 6.0 * eps;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
        }
        if w_minus > w_plus {
            return Err(Error::invalid(format!(
                "coherence w_plus - w_minus = {} must lie in [0, 1]",
                w_plus - w_minus
            )));
        }
        Ok(NoiseModel { w_plus, w_minus, eps })
    }

    /// The noiseless model: all weight on the coherent `+` component.
    pub fn perfect() -> Self {
        NoiseModel { w_plus: 1.0, w_minus: 0.0, eps: 0.0 }
    }

    pub fn w_plus(&self) -> f64 {
        self.w_plus
    }

    pub fn w_minus(&self) -> f64 {
        self.w_minus
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn coherence(&self) -> f64 {
        self.w_plus - self.w_minus
    }

    /// Same populations with the coherence replaced by `c`.
    pub fn with_coherence(&self, c: f64) -> Result<Self> {
        let populations = self.w_plus + self.w_minus;
        if c < 0.0 || c > populations + 1e-12 {
            return Err(Error::InfeasibleModel(format!(
                "coherence {c} outside [0, {populations}]"
            )));
        }
        let c = c.min(populations);
        NoiseModel::new((populations + c) / 2.0, (populations - c) / 2.0, self.eps)
    }

    /// The mixture as explicit weighted pure states (three qubits).
    pub fn to_mixed_state(&self) -> MixedState {
        let mut components = vec![
            (self.w_plus, ghz_state(3).expect("valid")),
            (self.w_minus, ghz_minus_state(3).expect("valid")),
        ];
        for index in 1..=6 {
            components.push((self.eps, PureState::basis_state(3, index).expect("valid")));
        }
        MixedState::new(components).expect("weights were validated")
    }

    /// `HHH` population divided by the population of one unwanted basis
    /// state, read from the computational-basis table.
    pub fn population_ratio(&self) -> Result<f64> {
        let table = probability_table(&self.to_mixed_state(), &MeasurementConfig::from_label("ZZZ")?)?;
        let desired = table.prob(&Outcome::from_key("+++")?)?;
        let unwanted = table.prob(&Outcome::from_key("++-")?)?;
        if unwanted <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(desired / unwanted)
    }

    /// Dip contrast of the suppressed `H'H'V'` component: its rate with the
    /// coherence removed versus its rate under this model,
    /// `(r_incoherent - r_coherent) / (r_incoherent + r_coherent)`.
    pub fn suppression_visibility(&self) -> Result<f64> {
        let config = MeasurementConfig::from_label("XXX")?;
        let suppressed = Outcome::from_key("++-")?;
        let coherent =
            probability_table(&self.to_mixed_state(), &config)?.prob(&suppressed)?;
        let incoherent = probability_table(&self.with_coherence(0.0)?.to_mixed_state(), &config)?
            .prob(&suppressed)?;
        if incoherent + coherent <= 0.0 {
            return Ok(0.0);
        }
        Ok((incoherent - coherent) / (incoherent + coherent))
    }

    /// Contrast between the `H'H'H'` and `H'H'V'` rates of this model.
    pub fn component_contrast(&self) -> Result<f64> {
        let table =
            probability_table(&self.to_mixed_state(), &MeasurementConfig::from_label("XXX")?)?;
        let bright = table.prob(&Outcome::from_key("+++")?)?;
        let dim = table.prob(&Outcome::from_key("++-")?)?;
        Ok((bright - dim) / (bright + dim))
    }
}

/// Solves the noise weights so that the `HHH`-to-unwanted population ratio
/// and the suppression (dip) visibility of the `H'H'V'` component match the
/// given summary statistics.
///
/// With populations `s = w_plus + w_minus` the constraints are
/// `s / (2 eps) = ratio` and suppression visibility `c / (2 - c)`, giving
/// the closed form `s = ratio / (ratio + 3)` and `c = 2 v / (1 + v)`.
pub fn fit_noise(ratio: f64, visibility: f64) -> Result<NoiseModel> {
    if ratio.is_nan() || ratio <= 0.0 {
        return Err(Error::invalid(format!("ratio must be positive, got {ratio}")));
    }
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::invalid(format!("visibility {visibility} outside [0, 1]")));
    }
    let populations = if ratio.is_infinite() { 1.0 } else { ratio / (ratio + 3.0) };
    let eps = (1.0 - populations) / 6.0;
    let coherence = 2.0 * visibility / (1.0 + visibility);
    if coherence > populations + 1e-12 {
        let max_visibility = populations / (2.0 - populations);
        return Err(Error::InfeasibleModel(format!(
            "visibility {visibility} needs coherence {coherence:.6}, but the population ratio \
             {ratio} caps the GHZ weight at {populations:.6} (max visibility {max_visibility:.6})"
        )));
    }
    let coherence = coherence.min(populations);
    NoiseModel::new((populations + coherence) / 2.0, (populations - coherence) / 2.0, eps)
}

/// Sampled integer counts for one configuration; all `2^n` outcomes are
/// present (zeros explicit) and sum to `shots`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    config: MeasurementConfig,
    counts: Vec<u64>,
    shots: u64,
}

impl CountsTable {
    pub fn new(config: MeasurementConfig, counts: Vec<u64>, shots: u64) -> Result<Self> {
        if counts.len() != (1 << config.len()) {
            return Err(Error::invalid(format!(
                "counts: {} entries, expected {}",
                counts.len(),
                1usize << config.len()
            )));
        }
        let total: u64 = counts.iter().sum();
        if total != shots {
            return Err(Error::invalid(format!("shots: counts sum to {total}, header says {shots}")));
        }
        Ok(CountsTable { config, counts, shots })
    }

    pub fn config(&self) -> &MeasurementConfig {
        &self.config
    }

    pub fn n_qubits(&self) -> usize {
        self.config.len()
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn count(&self, outcome: &Outcome) -> Result<u64> {
        if outcome.len() != self.config.len() {
            return Err(Error::invalid(format!(
                "outcome has {} entries, table expects {}",
                outcome.len(),
                self.config.len()
            )));
        }
        Ok(self.counts[outcome.to_index()])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, u64)> + '_ {
        let n = self.n_qubits();
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, c)| (Outcome::from_index(i, n).expect("index in range"), *c))
    }

    /// Observed relative frequency of one outcome, with Poisson sigma.
    pub fn estimate(&self, outcome: &Outcome) -> Result<EstimateWithError> {
        estimate_probability(self, outcome)
    }
}

impl OutcomeEstimator for CountsTable {
    fn config(&self) -> &MeasurementConfig {
        &self.config
    }

    fn estimate(&self, outcome: &Outcome) -> Result<EstimateWithError> {
        estimate_probability(self, outcome)
    }
}

#[derive(Serialize, Deserialize)]
struct CountsTableWire {
    config: String,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl Serialize for CountsTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let config = self
            .config
            .label()
            .map_err(|e| serde::ser::Error::custom(format!("config: {e}")))?;
        let counts: BTreeMap<String, u64> =
            self.iter().map(|(o, c)| (o.key(), c)).collect();
        CountsTableWire { config, shots: self.shots, counts }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CountsTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = CountsTableWire::deserialize(deserializer)?;
        CountsTable::try_from(wire).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<CountsTableWire> for CountsTable {
    type Error = Error;

    fn try_from(wire: CountsTableWire) -> Result<Self> {
        let config = MeasurementConfig::from_label(&wire.config)
            .map_err(|e| Error::invalid(format!("config: {e}")))?;
        let n = config.len();
        let dim = 1usize << n;
        if wire.counts.len() != dim {
            return Err(Error::invalid(format!(
                "counts: {} outcome keys, expected {dim} (zeros must be explicit)",
                wire.counts.len()
            )));
        }
        let mut counts = vec![0u64; dim];
        for (key, value) in &wire.counts {
            let outcome = Outcome::from_key(key).map_err(|e| Error::invalid(format!("counts: {e}")))?;
            if outcome.len() != n {
                return Err(Error::invalid(format!(
                    "counts: outcome key \"{key}\" has {} entries, config \"{}\" has {n}",
                    outcome.len(),
                    wire.config
                )));
            }
            counts[outcome.to_index()] = *value;
        }
        CountsTable::new(config, counts, wire.shots)
    }
}

/// Identifies an independent, reproducible RNG stream. The `lane`
/// distinguishes configurations (or scan points) under one seed; batches
/// within a lane get their own substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub lane: u64,
}

impl StreamKey {
    pub fn new(seed: u64, lane: u64) -> Self {
        StreamKey { seed, lane }
    }

    fn batch_rng(&self, batch: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.lane << 24) ^ batch);
        rng
    }
}

fn sample_batch(cumulative: &[f64], rng: &mut ChaCha8Rng, draws: u64) -> Vec<u64> {
    let mut counts = vec![0u64; cumulative.len()];
    for _ in 0..draws {
        let u: f64 = rng.gen();
        let index = cumulative
            .iter()
            .position(|edge| u < *edge)
            .unwrap_or(cumulative.len() - 1);
        counts[index] += 1;
    }
    counts
}

/// Draws `shots` outcomes i.i.d. from `table`. Batches are merged by
/// addition, so parallel and serial execution produce identical counts.
pub fn sample_from_table(table: &ProbabilityTable, shots: u64, key: StreamKey) -> Result<CountsTable> {
    if shots > BATCH_SIZE * TOTALS_BATCH {
        return Err(Error::invalid(format!("shot count {shots} exceeds the supported maximum")));
    }
    let mut cumulative = Vec::with_capacity(table.probs().len());
    let mut acc = 0.0;
    for p in table.probs() {
        acc += p;
        cumulative.push(acc);
    }
    let n_batches = shots.div_ceil(BATCH_SIZE);
    let counts = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let draws = BATCH_SIZE.min(shots - batch * BATCH_SIZE);
            let mut rng = key.batch_rng(batch);
            sample_batch(&cumulative, &mut rng, draws)
        })
        .reduce(
            || vec![0u64; cumulative.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    CountsTable::new(table.config().clone(), counts, shots)
}

/// Samples `shots` outcomes of measuring the noise-model mixture in
/// `config`.
pub fn sample_counts(
    noise: &NoiseModel,
    config: &MeasurementConfig,
    shots: u64,
    key: StreamKey,
) -> Result<CountsTable> {
    let table = probability_table(&noise.to_mixed_state(), config)?;
    sample_from_table(&table, shots, key)
}

/// Like [`sample_counts`], but the total itself is Poisson distributed
/// with mean `mean_shots`, as in a counting experiment of fixed duration.
pub fn sample_counts_poisson_total(
    noise: &NoiseModel,
    config: &MeasurementConfig,
    mean_shots: u64,
    key: StreamKey,
) -> Result<CountsTable> {
    let total = if mean_shots == 0 {
        0
    } else {
        let poisson = rand_distr::Poisson::new(mean_shots as f64)
            .map_err(|e| Error::invalid(format!("poisson mean: {e}")))?;
        poisson.sample(&mut key.batch_rng(TOTALS_BATCH)) as u64
    };
    let table = probability_table(&noise.to_mixed_state(), config)?;
    sample_from_table(&table, total, key)
}

/// Estimated outcome probability `n / N` with Poisson sigma `sqrt(n) / N`;
/// zero counts use `sqrt(zero_floor) / N` so empty bins keep a finite bar.
pub fn estimate_probability_with_floor(
    counts: &CountsTable,
    outcome: &Outcome,
    zero_floor: f64,
) -> Result<EstimateWithError> {
    if counts.shots() == 0 {
        return Err(Error::invalid("cannot estimate probabilities from zero shots"));
    }
    let n = counts.count(outcome)? as f64;
    let total = counts.shots() as f64;
    let effective = if n > 0.0 { n } else { zero_floor };
    Ok(EstimateWithError::new(n / total, effective.sqrt() / total))
}

/// [`estimate_probability_with_floor`] with the default floor of one count.
pub fn estimate_probability(counts: &CountsTable, outcome: &Outcome) -> Result<EstimateWithError> {
    estimate_probability_with_floor(counts, outcome, 1.0)
}

/// Everything needed to simulate one full five-configuration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub shots: u64,
    pub seed: u64,
    pub configurations: Vec<MeasurementConfig>,
    pub noise: NoiseModel,
    /// Draw each configuration's total from a Poisson distribution instead
    /// of using exactly `shots`.
    pub poisson_totals: bool,
}

impl RunConfig {
    /// The five standard configurations.
    pub fn standard(noise: NoiseModel, shots: u64, seed: u64) -> Self {
        let configurations = ["XXX", "XYY", "YXY", "YYX", "YYY"]
            .iter()
            .map(|l| MeasurementConfig::from_label(l).expect("valid label"))
            .collect();
        RunConfig { shots, seed, configurations, noise, poisson_totals: false }
    }
}

/// Sampled counts plus the analysis derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub counts: Vec<CountsTable>,
    pub report: InequalityReport,
}

/// Samples every configuration of `run` and analyzes the counts,
/// reporting the decomposition, the Mermin value, and the distances above
/// the classical and quantum bounds.
pub fn run_experiment(run: &RunConfig) -> Result<ExperimentRun> {
    if run.shots == 0 {
        return Err(Error::invalid("run needs a positive shot count"));
    }
    let counts = run
        .configurations
        .par_iter()
        .enumerate()
        .map(|(lane, config)| {
            let key = StreamKey::new(run.seed, lane as u64);
            if run.poisson_totals {
                sample_counts_poisson_total(&run.noise, config, run.shots, key)
            } else {
                sample_counts(&run.noise, config, run.shots, key)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let metadata = ReportMetadata::current()
        .with_seed(run.seed)
        .with_shots(run.shots)
        .with_noise(run.noise);
    let report = InequalityReport::from_tables(&counts, metadata)?;
    Ok(ExperimentRun { counts, report })
}
