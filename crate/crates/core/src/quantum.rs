//! Pure states and mixtures of polarization qubits, measurement bases, and
//! exact outcome probabilities.
//!
//! Conventions used throughout the crate:
//!
//! * Amplitude vectors are indexed by bitstrings with bit value 0 = `H` and
//!   1 = `V`. Location 1 occupies the most significant bit, so for three
//!   qubits index 0 is `HHH`, index 1 is `HHV`, and index 7 is `VVV`.
//! * Measurement outcomes are `+1` (transmitted: `H'` or `R`) or `-1`
//!   (`V'` or `L`). Probability and count tables index outcomes the same
//!   way as states, with `+1` playing the role of bit 0.
//! * Locations in public APIs are numbered from 1, matching the subscripts
//!   used in configuration strings such as `"XYY"` (location 1 first).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Normalization slack tolerated by state and basis constructors.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Slack tolerated on the total mass of a probability table.
pub const TABLE_SUM_TOLERANCE: f64 = 1e-9;

/// A single measurement result, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::invalid(format!("sign must be +1 or -1, got {other}"))),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Bit used when indexing tables: `+1` maps to 0, `-1` to 1.
    fn bit(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+"),
            Sign::Minus => write!(f, "-"),
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = i8::deserialize(deserializer)?;
        Sign::from_i8(v).map_err(serde::de::Error::custom)
    }
}

/// An ordered list of per-location results, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome(Vec<Sign>);

impl Outcome {
    pub fn new(results: Vec<Sign>) -> Self {
        Outcome(results)
    }

    /// Builds the outcome encoded by `index` for `n_qubits` locations
    /// (location 1 in the most significant bit, `+1` as bit 0).
    pub fn from_index(index: usize, n_qubits: usize) -> Result<Self> {
        if index >= (1 << n_qubits) {
            return Err(Error::invalid(format!(
                "outcome index {index} out of range for {n_qubits} qubits"
            )));
        }
        let results = (0..n_qubits)
            .map(|loc| Sign::from_bit((index >> (n_qubits - 1 - loc)) & 1))
            .collect();
        Ok(Outcome(results))
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, s| (acc << 1) | s.bit())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn results(&self) -> &[Sign] {
        &self.0
    }

    /// Product of all results, `+1` or `-1`.
    pub fn parity(&self) -> Sign {
        let minus = self.0.iter().filter(|s| **s == Sign::Minus).count();
        if minus % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Key used in JSON tables, e.g. `"+-+"` (location 1 first).
    pub fn key(&self) -> String {
        self.0.iter().map(|s| if *s == Sign::Plus { '+' } else { '-' }).collect()
    }

    pub fn from_key(key: &str) -> Result<Self> {
        let results = key
            .chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' => Ok(Sign::Minus),
                other => Err(Error::invalid(format!("invalid outcome character '{other}' in \"{key}\""))),
            })
            .collect::<Result<Vec<_>>>()?;
        if results.is_empty() {
            return Err(Error::invalid("empty outcome key"));
        }
        Ok(Outcome(results))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// A normalized single-qubit vector in the `H`/`V` amplitude basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisVector([Complex64; 2]);

impl BasisVector {
    pub fn new(components: [Complex64; 2]) -> Result<Self> {
        let norm_sq = components[0].norm_sqr() + components[1].norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "basis vector must be normalized, |v|^2 = {norm_sq}"
            )));
        }
        Ok(BasisVector(components))
    }

    pub fn components(&self) -> &[Complex64; 2] {
        &self.0
    }

    /// The same ray multiplied by `exp(i*phase)`; probabilities are unaffected.
    pub fn phased(&self, phase: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phase);
        BasisVector([self.0[0] * factor, self.0[1] * factor])
    }

    fn amplitude_for_h(&self) -> Complex64 {
        self.0[0]
    }

    fn amplitude_for_v(&self) -> Complex64 {
        self.0[1]
    }
}

/// One of the analyzer settings applied at a single location.
///
/// `Z` is the `H`/`V` basis itself, `X` the linear basis rotated by 45
/// degrees (`H'`/`V'`), and `Y` the circular basis (`R`/`L`). `Custom`
/// parametrizes an arbitrary polarization analyzer as
/// `cos(theta/2)|H> + e^{i phi} sin(theta/2)|V>` for the `+1` port, with the
/// `-1` port its orthogonal complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BasisSetting {
    Z,
    X,
    Y,
    Custom { theta: f64, phi: f64 },
}

impl BasisSetting {
    /// The `(+1, -1)` port vectors of this analyzer.
    pub fn vectors(&self) -> (BasisVector, BasisVector) {
        let re = |x: f64| Complex64::new(x, 0.0);
        match *self {
            BasisSetting::Z => (
                BasisVector([re(1.0), re(0.0)]),
                BasisVector([re(0.0), re(1.0)]),
            ),
            BasisSetting::X => (
                BasisVector([re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)]),
                BasisVector([re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2)]),
            ),
            BasisSetting::Y => (
                BasisVector([re(FRAC_1_SQRT_2), Complex64::new(0.0, FRAC_1_SQRT_2)]),
                BasisVector([re(FRAC_1_SQRT_2), Complex64::new(0.0, -FRAC_1_SQRT_2)]),
            ),
            BasisSetting::Custom { theta, phi } => {
                let (half_sin, half_cos) = (theta / 2.0).sin_cos();
                let phase = Complex64::from_polar(1.0, phi);
                (
                    BasisVector([re(half_cos), phase * half_sin]),
                    BasisVector([re(half_sin), -phase * half_cos]),
                )
            }
        }
    }

    pub fn vector(&self, sign: Sign) -> BasisVector {
        let (plus, minus) = self.vectors();
        match sign {
            Sign::Plus => plus,
            Sign::Minus => minus,
        }
    }

    pub fn label(&self) -> Option<char> {
        match self {
            BasisSetting::Z => Some('Z'),
            BasisSetting::X => Some('X'),
            BasisSetting::Y => Some('Y'),
            BasisSetting::Custom { .. } => None,
        }
    }

    pub fn from_label(c: char) -> Result<Self> {
        match c {
            'Z' => Ok(BasisSetting::Z),
            'X' => Ok(BasisSetting::X),
            'Y' => Ok(BasisSetting::Y),
            other => Err(Error::invalid(format!("unknown basis '{other}' (expected X, Y, or Z)"))),
        }
    }
}

/// Per-location basis choices for a joint measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConfig(Vec<BasisSetting>);

impl MeasurementConfig {
    pub fn new(settings: Vec<BasisSetting>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::invalid("measurement configuration must not be empty"));
        }
        Ok(MeasurementConfig(settings))
    }

    /// Parses labels such as `"XYY"` into per-location settings.
    pub fn from_label(label: &str) -> Result<Self> {
        let settings = label.chars().map(BasisSetting::from_label).collect::<Result<Vec<_>>>()?;
        MeasurementConfig::new(settings)
    }

    /// Label string when every setting is a named basis, e.g. `"XYY"`.
    pub fn label(&self) -> Result<String> {
        self.0
            .iter()
            .map(|s| s.label().ok_or_else(|| Error::invalid("custom bases have no short label")))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn settings(&self) -> &[BasisSetting] {
        &self.0
    }
}

impl fmt::Display for MeasurementConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label() {
            Ok(label) => write!(f, "{label}"),
            Err(_) => {
                for s in &self.0 {
                    match s {
                        BasisSetting::Custom { theta, phi } => write!(f, "[{theta:.4},{phi:.4}]")?,
                        named => write!(f, "{}", named.label().unwrap())?,
                    }
                }
                Ok(())
            }
        }
    }
}

/// A normalized complex amplitude vector over `n` polarization qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Normalizes and stores the amplitude vector. The length must be
    /// exactly `2^n_qubits` and the norm must not vanish.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("a state needs at least one qubit"));
        }
        if amplitudes.len() != (1 << n_qubits) {
            return Err(Error::invalid(format!(
                "amplitude vector has length {}, expected {}",
                amplitudes.len(),
                1usize << n_qubits
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq < 1e-15 {
            return Err(Error::invalid("cannot normalize a zero amplitude vector"));
        }
        let scale = norm_sq.sqrt().recip();
        let amplitudes = amplitudes.into_iter().map(|a| a * scale).collect();
        Ok(PureState { n_qubits, amplitudes })
    }

    /// The computational basis state with the given index (bit 0 = `H`).
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || index >= (1 << n_qubits) {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        PureState::new(n_qubits, amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tensor product with `other`; `other`'s qubits are appended after
    /// this state's locations.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let n = self.n_qubits + other.n_qubits;
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState { n_qubits: n, amplitudes }
    }

    /// `|<self|other>|^2`; equals 1 exactly when the states agree up to a
    /// global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::invalid(format!(
                "fidelity between {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }
}

/// A convex mixture of pure states over the same qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    components: Vec<(f64, PureState)>,
}

impl MixedState {
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        let n = components[0].1.n_qubits();
        let mut total = 0.0;
        for (w, state) in &components {
            if *w < 0.0 {
                return Err(Error::invalid(format!("mixture weight {w} is negative")));
            }
            if state.n_qubits() != n {
                return Err(Error::invalid("mixture components must share the qubit count"));
            }
            total += *w;
        }
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(MixedState { components })
    }

    pub fn pure(state: PureState) -> Self {
        MixedState { components: vec![(1.0, state)] }
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    pub fn n_qubits(&self) -> usize {
        self.components[0].1.n_qubits()
    }
}

impl From<PureState> for MixedState {
    fn from(state: PureState) -> Self {
        MixedState::pure(state)
    }
}

/// Exact outcome probabilities for one configuration; all `2^n` outcomes
/// are present and sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    config: MeasurementConfig,
    probs: Vec<f64>,
}

impl ProbabilityTable {
    /// Validates entries (in `[0, 1]`, summing to 1) without repairing them.
    pub fn new(config: MeasurementConfig, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != (1 << config.len()) {
            return Err(Error::invalid(format!(
                "table has {} entries, expected {}",
                probs.len(),
                1usize << config.len()
            )));
        }
        let mut sum = 0.0;
        for (i, p) in probs.iter().enumerate() {
            if !(-TABLE_SUM_TOLERANCE..=1.0 + TABLE_SUM_TOLERANCE).contains(p) {
                return Err(Error::invalid(format!("probability {p} at index {i} outside [0, 1]")));
            }
            sum += *p;
        }
        if (sum - 1.0).abs() > TABLE_SUM_TOLERANCE {
            return Err(Error::invalid(format!("table sums to {sum}, expected 1")));
        }
        Ok(ProbabilityTable { config, probs })
    }

    pub fn config(&self) -> &MeasurementConfig {
        &self.config
    }

    pub fn n_qubits(&self) -> usize {
        self.config.len()
    }

    pub fn prob(&self, outcome: &Outcome) -> Result<f64> {
        if outcome.len() != self.config.len() {
            return Err(Error::invalid(format!(
                "outcome has {} entries, table expects {}",
                outcome.len(),
                self.config.len()
            )));
        }
        Ok(self.probs[outcome.to_index()])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        let n = self.n_qubits();
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (Outcome::from_index(i, n).expect("index in range"), *p))
    }
}

#[derive(Serialize, Deserialize)]
struct ProbabilityTableWire {
    config: String,
    probs: std::collections::BTreeMap<String, f64>,
}

impl Serialize for ProbabilityTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let config = self
            .config
            .label()
            .map_err(|e| serde::ser::Error::custom(format!("config: {e}")))?;
        let probs = self.iter().map(|(o, p)| (o.key(), p)).collect();
        ProbabilityTableWire { config, probs }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProbabilityTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = ProbabilityTableWire::deserialize(deserializer)?;
        let config = MeasurementConfig::from_label(&wire.config)
            .map_err(|e| serde::de::Error::custom(format!("config: {e}")))?;
        let dim = 1usize << config.len();
        if wire.probs.len() != dim {
            return Err(serde::de::Error::custom(format!(
                "probs: {} outcome keys, expected {dim} (zeros must be explicit)",
                wire.probs.len()
            )));
        }
        let mut probs = vec![0.0; dim];
        for (key, value) in &wire.probs {
            let outcome = Outcome::from_key(key)
                .map_err(|e| serde::de::Error::custom(format!("probs: {e}")))?;
            if outcome.len() != config.len() {
                return Err(serde::de::Error::custom(format!(
                    "probs: outcome key \"{key}\" does not match config \"{}\"",
                    wire.config
                )));
            }
            probs[outcome.to_index()] = *value;
        }
        ProbabilityTable::new(config, probs).map_err(serde::de::Error::custom)
    }
}

/// The n-qubit `(|H...H> + |V...V>)/sqrt(2)` state.
pub fn ghz_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::invalid(format!("GHZ state needs at least 2 qubits, got {n}")));
    }
    let dim = 1usize << n;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[dim - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    PureState::new(n, amplitudes)
}

/// The `(|H...H> - |V...V>)/sqrt(2)` companion of [`ghz_state`].
pub fn ghz_minus_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::invalid(format!("GHZ state needs at least 2 qubits, got {n}")));
    }
    let dim = 1usize << n;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[dim - 1] = Complex64::new(-FRAC_1_SQRT_2, 0.0);
    PureState::new(n, amplitudes)
}

fn check_dimensions(n_qubits: usize, config: &MeasurementConfig) -> Result<()> {
    if config.len() != n_qubits {
        return Err(Error::invalid(format!(
            "configuration has {} settings but the state has {} qubits",
            config.len(),
            n_qubits
        )));
    }
    Ok(())
}

/// Projection amplitude `<v_1 x ... x v_n | state>` for one product vector.
fn product_amplitude(state: &PureState, vectors: &[BasisVector]) -> Complex64 {
    let n = state.n_qubits();
    let mut amp = Complex64::new(0.0, 0.0);
    for (index, a) in state.amplitudes().iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let mut coeff = Complex64::new(1.0, 0.0);
        for (loc, v) in vectors.iter().enumerate() {
            let bit = (index >> (n - 1 - loc)) & 1;
            let component = if bit == 0 { v.amplitude_for_h() } else { v.amplitude_for_v() };
            coeff *= component.conj();
        }
        amp += coeff * a;
    }
    amp
}

/// Joint probability of `outcome` when measuring `state` in `config`.
///
/// For a mixture this is the weight-weighted sum of
/// `|<product vector|component>|^2` over components.
pub fn outcome_probability(
    state: &MixedState,
    config: &MeasurementConfig,
    outcome: &Outcome,
) -> Result<f64> {
    check_dimensions(state.n_qubits(), config)?;
    if outcome.len() != config.len() {
        return Err(Error::invalid(format!(
            "outcome has {} entries but the configuration has {}",
            outcome.len(),
            config.len()
        )));
    }
    let vectors: Vec<BasisVector> = config
        .settings()
        .iter()
        .zip(outcome.results())
        .map(|(setting, sign)| setting.vector(*sign))
        .collect();
    let mut prob = 0.0;
    for (w, component) in state.components() {
        if *w == 0.0 {
            continue;
        }
        prob += w * product_amplitude(component, &vectors).norm_sqr();
    }
    Ok(prob)
}

/// Rotates one pure component into the measurement eigenbasis and squares.
fn pure_state_table(state: &PureState, config: &MeasurementConfig) -> Vec<f64> {
    let n = state.n_qubits();
    let dim = 1usize << n;
    let mut amps = state.amplitudes().to_vec();
    for (loc, setting) in config.settings().iter().enumerate() {
        let (plus, minus) = setting.vectors();
        let stride = 1usize << (n - 1 - loc);
        let mut base = 0;
        while base < dim {
            for offset in 0..stride {
                let i0 = base + offset;
                let i1 = i0 + stride;
                let (a0, a1) = (amps[i0], amps[i1]);
                amps[i0] = plus.amplitude_for_h().conj() * a0 + plus.amplitude_for_v().conj() * a1;
                amps[i1] = minus.amplitude_for_h().conj() * a0 + minus.amplitude_for_v().conj() * a1;
            }
            base += 2 * stride;
        }
    }
    amps.iter().map(|a| a.norm_sqr()).collect()
}

/// Full table of all `2^n` outcome probabilities for `state` under `config`.
pub fn probability_table(state: &MixedState, config: &MeasurementConfig) -> Result<ProbabilityTable> {
    check_dimensions(state.n_qubits(), config)?;
    let dim = 1usize << config.len();
    let mut probs = vec![0.0; dim];
    for (w, component) in state.components() {
        if *w == 0.0 {
            continue;
        }
        for (slot, p) in probs.iter_mut().zip(pure_state_table(component, config)) {
            *slot += w * p;
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > TABLE_SUM_TOLERANCE {
        return Err(Error::Internal(format!("computed table sums to {sum}")));
    }
    ProbabilityTable::new(config.clone(), probs)
}

/// Projects the qubit at `location` (1-based) onto `direction`, returning
/// the renormalized state of the remaining qubits and the probability of
/// that projection result.
pub fn project(
    state: &PureState,
    location: usize,
    direction: &BasisVector,
) -> Result<(PureState, f64)> {
    let n = state.n_qubits();
    if location == 0 || location > n {
        return Err(Error::invalid(format!("location {location} out of range 1..={n}")));
    }
    if n < 2 {
        return Err(Error::invalid("projecting the last remaining qubit is not supported"));
    }
    let slot = location - 1;
    let low_bits = n - 1 - slot;
    let dim_rest = 1usize << (n - 1);
    let mut amps = Vec::with_capacity(dim_rest);
    for rest in 0..dim_rest {
        let high = rest >> low_bits;
        let low = rest & ((1 << low_bits) - 1);
        let base = (high << (low_bits + 1)) | low;
        let with_h = state.amplitudes()[base];
        let with_v = state.amplitudes()[base | (1 << low_bits)];
        amps.push(direction.amplitude_for_h().conj() * with_h + direction.amplitude_for_v().conj() * with_v);
    }
    let success: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if success < 1e-15 {
        return Err(Error::ImpossibleProjection);
    }
    let state = PureState::new(n - 1, amps)?;
    Ok((state, success))
}

#[cfg(test)]
pub(crate) mod test_oracle {
    //! Brute-force projector arithmetic kept independent of the
    //! implementation paths above: it builds the full product vector and
    //! takes the inner product in the 2^n-dimensional space.

    use super::*;

    pub fn product_vector(vectors: &[[Complex64; 2]]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for v in vectors {
            let mut next = Vec::with_capacity(out.len() * 2);
            for a in &out {
                next.push(a * v[0]);
                next.push(a * v[1]);
            }
            out = next;
        }
        out
    }

    pub fn projector_probability(amplitudes: &[Complex64], vectors: &[[Complex64; 2]]) -> f64 {
        let product = product_vector(vectors);
        let overlap: Complex64 = product
            .iter()
            .zip(amplitudes)
            .map(|(v, a)| v.conj() * a)
            .sum();
        overlap.norm_sqr()
    }

    pub fn mixture_probability(state: &MixedState, vectors: &[[Complex64; 2]]) -> f64 {
        state
            .components()
            .iter()
            .map(|(w, s)| w * projector_probability(s.amplitudes(), vectors))
            .sum()
    }

    pub fn setting_vectors(config: &MeasurementConfig, outcome: &Outcome) -> Vec<[Complex64; 2]> {
        config
            .settings()
            .iter()
            .zip(outcome.results())
            .map(|(setting, sign)| *setting.vector(*sign).components())
            .collect()
    }
}
