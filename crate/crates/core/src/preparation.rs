//! Source pipeline: two entangled pairs merged on a polarizing beam
//! splitter, post-selected into the four-photon GHZ state, then reduced to
//! the three-photon GHZ state by a trigger projection. Also the
//! delay-dependent coherence model for interference scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{sample_counts, NoiseModel, StreamKey};
use crate::quantum::{
    ghz_state, probability_table, project, BasisSetting, BasisVector, MeasurementConfig, Outcome,
    PureState, Sign,
};

/// Gaussian coherence envelope over the pump delay.
///
/// `visibility_at(0)` equals `peak_visibility` and the envelope decays
/// monotonically in `|delay|` with scale `coherence_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub peak_visibility: f64,
    pub coherence_width: f64,
}

impl DelayModel {
    pub fn new(peak_visibility: f64, coherence_width: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&peak_visibility) {
            return Err(Error::invalid(format!(
                "peak visibility {peak_visibility} outside [0, 1]"
            )));
        }
        if coherence_width <= 0.0 {
            return Err(Error::invalid(format!(
                "coherence width must be positive, got {coherence_width}"
            )));
        }
        Ok(DelayModel { peak_visibility, coherence_width })
    }
}

/// Analytic or sampled coincidence rates of the two leading X-basis
/// components at one delay position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayScanPoint {
    pub delay: f64,
    pub rate_hhh_prime: f64,
    pub rate_hhv_prime: f64,
}

/// One down-conversion pair, `(|HH> + |VV>)/sqrt(2)`.
pub fn epr_pair() -> PureState {
    ghz_state(2).expect("two-qubit GHZ state is valid")
}

/// Keeps only amplitude components in which the qubits at `loc_a` and
/// `loc_b` carry equal polarization (one photon per beam-splitter output),
/// renormalizes, and returns the kept probability mass.
pub fn pbs_postselect(state: &PureState, loc_a: usize, loc_b: usize) -> Result<(PureState, f64)> {
    let n = state.n_qubits();
    if loc_a == 0 || loc_a > n || loc_b == 0 || loc_b > n {
        return Err(Error::invalid(format!(
            "locations ({loc_a}, {loc_b}) out of range 1..={n}"
        )));
    }
    if loc_a == loc_b {
        return Err(Error::invalid("beam-splitter locations must differ"));
    }
    let bit_a = n - loc_a;
    let bit_b = n - loc_b;
    let mut kept = 0.0;
    let amps: Vec<_> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(index, a)| {
            if (index >> bit_a) & 1 == (index >> bit_b) & 1 {
                kept += a.norm_sqr();
                *a
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    if kept < 1e-15 {
        return Err(Error::ImpossibleProjection);
    }
    Ok((PureState::new(n, amps)?, kept))
}

/// Full three-photon preparation with an explicit trigger projection.
///
/// Two pairs occupy locations (1, 2) and (3, 4); the beam splitter merges
/// locations 2 and 3, and the trigger analyzer projects `trigger_location`
/// onto `trigger`.
pub fn prepare_ghz3_with_trigger(
    trigger_location: usize,
    trigger: &BasisVector,
) -> Result<(PureState, f64)> {
    let four = epr_pair().tensor(&epr_pair());
    let (merged, p_pbs) = pbs_postselect(&four, 2, 3)?;
    let (triggered, p_trigger) = project(&merged, trigger_location, trigger)?;
    Ok((triggered, p_pbs * p_trigger))
}

/// Default preparation: trigger on `H'` at location 4. Returns the
/// three-photon GHZ state and the overall success probability (1/4).
pub fn prepare_ghz3() -> (PureState, f64) {
    prepare_ghz3_with_trigger(4, &BasisSetting::X.vector(Sign::Plus))
        .expect("default trigger projection always succeeds")
}

/// Coherence at `delay`: `peak_visibility * exp(-delay^2 / (2 width^2))`.
pub fn visibility_at(delay: f64, model: &DelayModel) -> f64 {
    let w = model.coherence_width;
    model.peak_visibility * (-(delay * delay) / (2.0 * w * w)).exp()
}

/// Rates of the `H'H'H'` and `H'H'V'` components across a delay scan.
///
/// At each position the noise model keeps its populations and has its
/// coherence replaced by `visibility_at(delay)`. With `shots_per_point = 0`
/// the exact probabilities are returned; otherwise each point is sampled
/// with its own stream lane so points may be evaluated in parallel.
pub fn delay_scan(
    model: &DelayModel,
    noise: &NoiseModel,
    positions: &[f64],
    shots_per_point: u64,
    seed: u64,
) -> Result<Vec<DelayScanPoint>> {
    if positions.is_empty() {
        return Err(Error::invalid("delay scan needs at least one position"));
    }
    let populations = noise.w_plus() + noise.w_minus();
    if model.peak_visibility > populations + 1e-12 {
        return Err(Error::InfeasibleModel(format!(
            "peak visibility {} exceeds the GHZ population mass {}",
            model.peak_visibility, populations
        )));
    }
    let config = MeasurementConfig::from_label("XXX")?;
    let hhh = Outcome::from_key("+++")?;
    let hhv = Outcome::from_key("++-")?;
    positions
        .par_iter()
        .enumerate()
        .map(|(lane, &delay)| {
            let scanned = noise.with_coherence(visibility_at(delay, model))?;
            let (rate_hhh_prime, rate_hhv_prime) = if shots_per_point == 0 {
                let table = probability_table(&scanned.to_mixed_state(), &config)?;
                (table.prob(&hhh)?, table.prob(&hhv)?)
            } else {
                let key = StreamKey::new(seed, lane as u64);
                let counts = sample_counts(&scanned, &config, shots_per_point, key)?;
                let total = shots_per_point as f64;
                (
                    counts.count(&hhh)? as f64 / total,
                    counts.count(&hhv)? as f64 / total,
                )
            };
            Ok(DelayScanPoint { delay, rate_hhh_prime, rate_hhv_prime })
        })
        .collect()
}
