//! Physical constants (SI).

use std::f64::consts::PI;

/// Vacuum permeability μ0 (T·m/A).
pub const MU0: f64 = 4.0e-7 * PI;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Vacuum permittivity ε0 (F/m).
pub const EPSILON0: f64 = 8.854_187_812_8e-12;

/// Gyromagnetic factor in field units, γ = 1.76×10¹¹ rad·s⁻¹·T⁻¹ × μ0,
/// expressed in m·A⁻¹·s⁻¹.
pub const GYROMAGNETIC: f64 = 2.211e5;

/// Julian year (s).
pub const YEAR: f64 = 365.25 * 86_400.0;

/// Thermal energy k_B·T (J).
pub fn thermal_energy(temperature: f64) -> f64 {
    BOLTZMANN * temperature
}
