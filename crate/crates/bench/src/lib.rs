//! Shared fixtures for the benchmark targets.

use bellsim_core::{fit_noise, MeasurementConfig, NoiseModel};

/// The noise model used throughout the benchmarks.
pub fn fitted_noise() -> NoiseModel {
    fit_noise(65.0, 0.83).expect("feasible fit")
}

/// An all-X configuration over `n` locations.
pub fn x_config(n: usize) -> MeasurementConfig {
    MeasurementConfig::from_label(&"X".repeat(n)).expect("valid label")
}
