//! Energy landscape of a strained elliptical nanomagnet.
//!
//! Axis convention: the major axis is `y`, the minor axis is `x`, `z` is out of
//! plane. `θ` is the in-plane angle measured from the major axis, so
//! `m_y = cos θ`. Positive stress is tensile along the major axis.
//!
//! The in-plane energy is
//!
//! ```text
//! E(θ) = (μ0/2)·Ms²·Ω·[N1 cos²θ + N2 sin²θ] − (3/2)·λs·Y·ε·Ω·cos²θ
//! ```
//!
//! which is `const + K(σ)·cos²θ`. All extrema sit at `θ ∈ {0, π/2}` and the
//! barrier is `|K(σ)|`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::{thermal_energy, MU0};
use crate::{fmt_f64, Error, Result};

/// Geometry and material of one elliptical nanomagnet.
///
/// Axes are full lengths (diameters), not semi-axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetSpec {
    /// a (m)
    pub major_axis: f64,
    /// b (m)
    pub minor_axis: f64,
    /// t (m)
    pub thickness: f64,
    /// Ms (A/m)
    pub saturation_magnetization: f64,
    /// λs, dimensionless
    pub magnetostriction: f64,
    /// Y (Pa)
    pub youngs_modulus: f64,
    /// α, dimensionless
    pub gilbert_damping: f64,
    /// T (K)
    pub temperature: f64,
}

impl MagnetSpec {
    /// Cobalt ellipse with 100 nm × 99 nm × 5 nm axes at 300 K.
    pub fn cobalt_ellipse() -> Self {
        MagnetSpec {
            major_axis: 100e-9,
            minor_axis: 99e-9,
            thickness: 5e-9,
            saturation_magnetization: 1e6,
            magnetostriction: -35e-6,
            youngs_modulus: 209e9,
            gilbert_damping: 0.01,
            temperature: 300.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("major_axis", self.major_axis),
            ("minor_axis", self.minor_axis),
            ("thickness", self.thickness),
            ("saturation_magnetization", self.saturation_magnetization),
            ("youngs_modulus", self.youngs_modulus),
            ("gilbert_damping", self.gilbert_damping),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {value}")));
            }
        }
        if !self.magnetostriction.is_finite() {
            return Err(Error::invalid("magnetostriction", "must be finite"));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::invalid("temperature", format!("must be >= 0, got {}", self.temperature)));
        }
        if self.major_axis < self.minor_axis {
            return Err(Error::MisorientedEllipse {
                major: self.major_axis,
                minor: self.minor_axis,
            });
        }
        if self.thickness >= self.minor_axis {
            return Err(Error::invalid("thickness", "must be smaller than the minor axis (thin in-plane ellipse)"));
        }
        Ok(())
    }

    /// Ω = π·(a/2)·(b/2)·t (m³).
    pub fn volume(&self) -> f64 {
        PI * (self.major_axis / 2.0) * (self.minor_axis / 2.0) * self.thickness
    }

    /// k_B·T at the spec's temperature (J).
    pub fn thermal_energy(&self) -> f64 {
        thermal_energy(self.temperature)
    }

    /// Shape-anisotropy energy density scale (μ0/2)·Ms² (J/m³).
    fn shape_energy_density(&self) -> f64 {
        0.5 * MU0 * self.saturation_magnetization * self.saturation_magnetization
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemagFactors {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
}

/// Uniaxial stress along the major axis together with the strain it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressState {
    stress: f64,
    strain: f64,
}

impl StressState {
    /// `stress` in Pa, positive = tensile; strain is `stress / Y`.
    pub fn uniaxial(stress: f64, spec: &MagnetSpec) -> Self {
        StressState {
            stress,
            strain: stress / spec.youngs_modulus,
        }
    }

    pub fn zero() -> Self {
        StressState {
            stress: 0.0,
            strain: 0.0,
        }
    }

    pub fn stress(&self) -> f64 {
        self.stress
    }

    pub fn strain(&self) -> f64 {
        self.strain
    }
}

/// Truncated series for the in-plane demagnetization factors of a thin
/// ellipse, without orientation checks.
pub(crate) fn demag_series(spec: &MagnetSpec) -> DemagFactors {
    let a = spec.major_axis;
    let ecc = (a - spec.minor_axis) / a;
    let prefactor = 0.25 * PI * spec.thickness / a;
    let n1 = prefactor * (1.0 - 0.25 * ecc - (3.0 / 16.0) * ecc * ecc);
    let n2 = prefactor * (1.0 + 1.25 * ecc + (21.0 / 16.0) * ecc * ecc);
    DemagFactors {
        n1,
        n2,
        n3: 1.0 - n1 - n2,
    }
}

/// Demagnetization factors: N1 along the major axis, N2 along the minor
/// axis, N3 = 1 − N1 − N2 out of plane.
pub fn demag_factors(spec: &MagnetSpec) -> Result<DemagFactors> {
    if spec.major_axis < spec.minor_axis {
        return Err(Error::MisorientedEllipse {
            major: spec.major_axis,
            minor: spec.minor_axis,
        });
    }
    Ok(demag_series(spec))
}

/// Coefficient K of cos²θ in the in-plane energy (J).
///
/// Negative K: the major axis is easy. Positive K: stress has flipped the easy
/// axis onto the minor axis.
pub fn cos2_coefficient(spec: &MagnetSpec, stress: StressState) -> f64 {
    let n = demag_series(spec);
    let shape = spec.shape_energy_density() * (n.n1 - n.n2);
    let magnetoelastic = -1.5 * spec.magnetostriction * spec.youngs_modulus * stress.strain;
    spec.volume() * (shape + magnetoelastic)
}

/// In-plane energy E(θ) (J).
pub fn energy(spec: &MagnetSpec, stress: StressState, theta: f64) -> f64 {
    let n = demag_series(spec);
    let omega = spec.volume();
    let (s, c) = theta.sin_cos();
    let (c2, s2) = (c * c, s * s);
    spec.shape_energy_density() * omega * (n.n1 * c2 + n.n2 * s2)
        - 1.5 * spec.magnetostriction * spec.youngs_modulus * stress.strain * omega * c2
}

/// Minimum of E(θ) over θ (J), attained at 0 or π/2.
pub fn minimum_energy(spec: &MagnetSpec, stress: StressState) -> f64 {
    energy(spec, stress, 0.0).min(energy(spec, stress, FRAC_PI_2))
}

/// Barrier height max_θ E − min_θ E (J).
///
/// Past the critical stress the minor axis becomes easy and the landscape
/// regains a double well of height `K(σ)`; this returns that height too.
/// [`easy_axis`] tells the two cases apart.
pub fn barrier_height(spec: &MagnetSpec, stress: StressState) -> f64 {
    cos2_coefficient(spec, stress).abs()
}

/// Which in-plane axis holds the energy minima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EasyAxis {
    Major,
    Minor,
    /// Flat in-plane landscape (exactly at critical stress, or a circle).
    None,
}

pub fn easy_axis(spec: &MagnetSpec, stress: StressState) -> EasyAxis {
    let k = cos2_coefficient(spec, stress);
    if k < 0.0 {
        EasyAxis::Major
    } else if k > 0.0 {
        EasyAxis::Minor
    } else {
        EasyAxis::None
    }
}

/// Smallest stress magnitude, with the barrier-lowering sign, at which the
/// in-plane double well vanishes (Pa). Tensile for λs < 0, compressive for
/// λs > 0.
pub fn critical_stress(spec: &MagnetSpec) -> Result<f64> {
    if spec.magnetostriction == 0.0 {
        return Err(Error::NotMagnetostrictive);
    }
    let n = demag_series(spec);
    Ok(spec.shape_energy_density() * (n.n1 - n.n2) / (1.5 * spec.magnetostriction))
}

/// Which way a stress may push the barrier when it is inverted from a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressPolicy {
    /// Permit stresses with λs·σ > 0, which raise the barrier above its
    /// zero-stress value.
    pub allow_barrier_raising: bool,
    /// Upper bound on |σ| (Pa), if any.
    pub max_abs_stress: Option<f64>,
}

impl Default for StressPolicy {
    fn default() -> Self {
        StressPolicy {
            allow_barrier_raising: true,
            max_abs_stress: None,
        }
    }
}

/// Stress that sets the major-axis barrier to `target` (J).
///
/// Stays on the major-axis-easy side of the critical stress, so the result
/// lies between the critical stress (target 0) and arbitrarily large
/// barrier-raising stress.
pub fn stress_for_barrier(spec: &MagnetSpec, target: f64, policy: StressPolicy) -> Result<f64> {
    if !(target >= 0.0) {
        return Err(Error::NegativeBarrier(target));
    }
    let omega = spec.volume();
    let n = demag_series(spec);
    let natural = omega * spec.shape_energy_density() * (n.n2 - n.n1);
    if spec.magnetostriction == 0.0 {
        return if target == natural {
            Ok(0.0)
        } else {
            Err(Error::NotMagnetostrictive)
        };
    }
    if target > natural && !policy.allow_barrier_raising {
        return Err(Error::NeedsBarrierRaising { target, natural });
    }
    // target = Ω·[(μ0/2)Ms²(N2 − N1) + (3/2)λs·σ]
    let stress = (target / omega - spec.shape_energy_density() * (n.n2 - n.n1))
        / (1.5 * spec.magnetostriction);
    if let Some(limit) = policy.max_abs_stress {
        if stress.abs() > limit {
            return Err(Error::StressOutOfRange { stress, limit });
        }
    }
    Ok(stress)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub stress: f64,
    pub theta: f64,
    pub energy_minus_min: f64,
}

/// E(θ) − E_min over a grid of stresses and angles, one row per pair.
pub fn landscape_table(spec: &MagnetSpec, stresses: &[f64], thetas: &[f64]) -> Result<Vec<LandscapeRow>> {
    if thetas.is_empty() {
        return Err(Error::invalid("theta_grid", "must be nonempty"));
    }
    let mut rows = Vec::with_capacity(stresses.len() * thetas.len());
    for &sigma in stresses {
        let stress = StressState::uniaxial(sigma, spec);
        let e_min = minimum_energy(spec, stress);
        rows.extend(thetas.iter().map(|&theta| LandscapeRow {
            stress: sigma,
            theta,
            energy_minus_min: energy(spec, stress, theta) - e_min,
        }));
    }
    Ok(rows)
}

/// Uniform grid of `points` angles covering [0, 2π).
pub fn theta_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| 2.0 * PI * k as f64 / points as f64).collect()
}

pub const LANDSCAPE_CSV_HEADER: &str = "stress_Pa,theta_rad,energy_minus_min_J";

pub fn write_landscape_csv<W: Write>(mut out: W, rows: &[LandscapeRow]) -> std::io::Result<()> {
    writeln!(out, "{LANDSCAPE_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(row.stress),
            fmt_f64(row.theta),
            fmt_f64(row.energy_minus_min)
        )?;
    }
    Ok(())
}
