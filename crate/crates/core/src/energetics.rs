//! Reconfiguration energetics and retention planning.
//!
//! Lumped-element model of the gate that strains the magnet:
//!
//! - gate voltage `V_g = σ·d / (Y·d33)`
//! - pad capacitance `C = pads·ε0·εr·A / d`
//! - reconfiguration energy `½·C·V_g²`
//! - thermal noise voltage `sqrt(kT/C)`
//!
//! Retention follows the Arrhenius law `τ = τ0·exp(Δ/kT)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::{thermal_energy, EPSILON0};
use crate::magnet::{barrier_height, stress_for_barrier, MagnetSpec, StressPolicy, StressState};
use crate::{fmt_f64, Error, Result};

/// Piezoelectric layer plus gate pads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiezoStack {
    /// d33 (C/N)
    pub d33: f64,
    pub relative_permittivity: f64,
    /// d (m)
    pub layer_thickness: f64,
    /// Area of one pad (m²).
    pub pad_area: f64,
    pub pad_count: u32,
}

impl PiezoStack {
    /// PMN-PT, 300 nm thick, two 100 nm × 100 nm pads.
    pub fn pmn_pt() -> Self {
        PiezoStack {
            d33: 2500e-12,
            relative_permittivity: 4000.0,
            layer_thickness: 300e-9,
            pad_area: 1e-14, // 100 nm x 100 nm
            pad_count: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("d33", self.d33),
            ("relative_permittivity", self.relative_permittivity),
            ("layer_thickness", self.layer_thickness),
            ("pad_area", self.pad_area),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        if self.pad_count == 0 {
            return Err(Error::invalid("pad_count", "must be positive"));
        }
        Ok(())
    }
}

/// Gate voltage producing `stress` (V). Signed like the stress.
pub fn gate_voltage(stack: &PiezoStack, spec: &MagnetSpec, stress: f64) -> f64 {
    stress * stack.layer_thickness / (spec.youngs_modulus * stack.d33)
}

/// Capacitance of all gate pads (F).
pub fn pad_capacitance(stack: &PiezoStack) -> f64 {
    stack.pad_count as f64 * EPSILON0 * stack.relative_permittivity * stack.pad_area / stack.layer_thickness
}

/// ½·C·V_g² (J).
pub fn reconfig_energy(stack: &PiezoStack, spec: &MagnetSpec, stress: f64) -> f64 {
    let v = gate_voltage(stack, spec, stress);
    0.5 * pad_capacitance(stack) * v * v
}

/// sqrt(kT/C) (V).
pub fn noise_voltage(stack: &PiezoStack, temperature: f64) -> f64 {
    (thermal_energy(temperature) / pad_capacitance(stack)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconfigReport {
    #[serde(rename = "V_g")]
    pub gate_voltage: f64,
    #[serde(rename = "C")]
    pub capacitance: f64,
    #[serde(rename = "E_reconfig")]
    pub reconfig_energy: f64,
    #[serde(rename = "V_noise")]
    pub noise_voltage: f64,
    pub margin_ratio: f64,
}

/// Cost of applying `stress` through `stack` at the magnet's temperature.
pub fn reconfig_report(stack: &PiezoStack, spec: &MagnetSpec, stress: f64) -> Result<ReconfigReport> {
    stack.validate()?;
    let v_g = gate_voltage(stack, spec, stress);
    let v_n = noise_voltage(stack, spec.temperature);
    Ok(ReconfigReport {
        gate_voltage: v_g,
        capacitance: pad_capacitance(stack),
        reconfig_energy: reconfig_energy(stack, spec, stress),
        noise_voltage: v_n,
        margin_ratio: v_g.abs() / v_n,
    })
}

/// τ0·exp(Δ/kT) (s).
pub fn retention_time(barrier: f64, temperature: f64, attempt_time: f64) -> Result<f64> {
    if barrier < 0.0 {
        return Err(Error::NegativeBarrier(barrier));
    }
    check_arrhenius_inputs(temperature, attempt_time)?;
    Ok(attempt_time * (barrier / thermal_energy(temperature)).exp())
}

/// Barrier giving retention `target` (J): kT·ln(τ/τ0).
pub fn barrier_for_retention(target: f64, temperature: f64, attempt_time: f64) -> Result<f64> {
    check_arrhenius_inputs(temperature, attempt_time)?;
    if !(target >= attempt_time) {
        return Err(Error::RetentionBelowAttempt {
            target,
            attempt: attempt_time,
        });
    }
    Ok(thermal_energy(temperature) * (target / attempt_time).ln())
}

fn check_arrhenius_inputs(temperature: f64, attempt_time: f64) -> Result<()> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid("temperature", "must be positive"));
    }
    if !(attempt_time > 0.0 && attempt_time.is_finite()) {
        return Err(Error::invalid("attempt_time", "must be positive"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyTier {
    pub section: String,
    pub target_retention: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyRow {
    pub section: String,
    pub target_retention: f64,
    pub barrier: f64,
    pub barrier_kt: f64,
    pub stress: f64,
}

/// Barrier and stress for each retention tier of one magnet design.
pub fn plan_hierarchy(
    spec: &MagnetSpec,
    tiers: &[HierarchyTier],
    attempt_time: f64,
    policy: StressPolicy,
) -> Result<Vec<HierarchyRow>> {
    let kt = spec.thermal_energy();
    tiers
        .iter()
        .map(|tier| {
            let barrier = barrier_for_retention(tier.target_retention, spec.temperature, attempt_time)?;
            let stress = stress_for_barrier(spec, barrier, policy)?;
            Ok(HierarchyRow {
                section: tier.section.clone(),
                target_retention: tier.target_retention,
                barrier,
                barrier_kt: barrier / kt,
                stress,
            })
        })
        .collect()
}

pub const HIERARCHY_CSV_HEADER: &str = "section,target_retention_s,barrier_J,barrier_kT,stress_Pa";

pub fn write_hierarchy_csv<W: Write>(mut out: W, rows: &[HierarchyRow]) -> std::io::Result<()> {
    writeln!(out, "{HIERARCHY_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.section,
            fmt_f64(r.target_retention),
            fmt_f64(r.barrier),
            fmt_f64(r.barrier_kt),
            fmt_f64(r.stress)
        )?;
    }
    Ok(())
}

/// Per-device stress that brings every barrier to `target` (J).
///
/// Fails with [`Error::UnreachableDevices`] listing every device index the
/// policy cannot bring to the target.
pub fn equalize_barriers(specs: &[MagnetSpec], target: f64, policy: StressPolicy) -> Result<Vec<f64>> {
    let mut stresses = Vec::with_capacity(specs.len());
    let mut unreachable = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let natural = barrier_height(spec, StressState::zero());
        if (natural - target).abs() <= 1e-12 * target.max(natural) {
            stresses.push(0.0);
            continue;
        }
        match stress_for_barrier(spec, target, policy) {
            Ok(s) => stresses.push(s),
            Err(Error::NegativeBarrier(b)) => return Err(Error::NegativeBarrier(b)),
            Err(_) => unreachable.push(i),
        }
    }
    if unreachable.is_empty() {
        Ok(stresses)
    } else {
        Err(Error::UnreachableDevices(unreachable))
    }
}

/// (max − min) / mean of a set of barriers.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::YEAR;
    use crate::magnet::critical_stress;

    fn co() -> MagnetSpec {
        MagnetSpec::cobalt_ellipse()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gate_voltage_at_6p5_mpa() {
        let v = gate_voltage(&PiezoStack::pmn_pt(), &co(), 6.5e6);
        // 6.5e6 · 300e-9 / (209e9 · 2500e-12)
        assert!(rel(v, 3.732_057_416_267_942e-3) < 1e-12);
        assert!(rel(v, 3.6e-3) < 0.10);
        assert_eq!(gate_voltage(&PiezoStack::pmn_pt(), &co(), 0.0), 0.0);
        let ratio = gate_voltage(&PiezoStack::pmn_pt(), &co(), 13e6) / v;
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn capacitance() {
        let stack = PiezoStack::pmn_pt();
        let c = pad_capacitance(&stack);
        assert!(rel(c, 2.36e-15) < 0.01);
        assert!(rel(c, 2.4e-15) < 0.05);
        let thin = PiezoStack { layer_thickness: 150e-9, ..stack };
        assert!((pad_capacitance(&thin) / c - 2.0).abs() < 1e-12);
        let single = PiezoStack { pad_count: 1, ..stack };
        assert!((pad_capacitance(&single) / c - 0.5).abs() < 1e-12);
    }

    #[test]
    fn energy_and_noise() {
        let stack = PiezoStack::pmn_pt();
        let e = reconfig_energy(&stack, &co(), 6.5e6);
        assert!(rel(e, 1.6e-20) < 0.05, "{e}");
        assert!(e < 1e-19);
        assert_eq!(reconfig_energy(&stack, &co(), 0.0), 0.0);
        assert!((reconfig_energy(&stack, &co(), 13e6) / e - 4.0).abs() < 1e-12);
        let vn = noise_voltage(&stack, 300.0);
        assert!(rel(vn, 1.3e-3) < 0.05);
        assert_eq!(noise_voltage(&stack, 0.0), 0.0);
        let report = reconfig_report(&stack, &co(), 6.5e6).unwrap();
        assert!((report.margin_ratio - 2.8).abs() < 0.05, "{}", report.margin_ratio);
    }

    #[test]
    fn report_json_keys() {
        let report = reconfig_report(&PiezoStack::pmn_pt(), &co(), 6.5e6).unwrap();
        let v = serde_json::to_value(report).unwrap();
        for key in ["V_g", "C", "E_reconfig", "V_noise", "margin_ratio"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn retention_closed_form() {
        let kt = thermal_energy(300.0);
        assert_eq!(retention_time(0.0, 300.0, 1e-9).unwrap(), 1e-9);
        let t = retention_time(40.0 * kt, 300.0, 1e-9).unwrap();
        assert!(rel(t, 2.353_852_668_370_2e8) < 1e-9, "{t}");
        assert!((t / YEAR - 7.46).abs() < 0.01);
        assert!(retention_time(10.0 * kt, 300.0, 1e-9).unwrap() < retention_time(11.0 * kt, 300.0, 1e-9).unwrap());
        assert!(matches!(retention_time(-1.0, 300.0, 1e-9), Err(Error::NegativeBarrier(_))));
    }

    #[test]
    fn retention_round_trip() {
        for target in [1e-9, 1e-6, 1.0, 3e4, 10.0 * YEAR] {
            let b = barrier_for_retention(target, 300.0, 1e-9).unwrap();
            let back = retention_time(b, 300.0, 1e-9).unwrap();
            assert!(rel(back, target) < 1e-9);
        }
        assert!(matches!(
            barrier_for_retention(1e-10, 300.0, 1e-9),
            Err(Error::RetentionBelowAttempt { .. })
        ));
    }

    #[test]
    fn attempt_time_target_maps_to_critical_stress() {
        let spec = co();
        let tiers = [HierarchyTier {
            section: "edge".into(),
            target_retention: 1e-9,
        }];
        let rows = plan_hierarchy(&spec, &tiers, 1e-9, StressPolicy::default()).unwrap();
        assert_eq!(rows[0].barrier, 0.0);
        assert!(rel(rows[0].stress, critical_stress(&spec).unwrap()) < 1e-12);
    }

    #[test]
    fn hierarchy_needs_raising_strain_for_long_retention() {
        let spec = co();
        let tiers = [HierarchyTier {
            section: "archive".into(),
            target_retention: 10.0 * YEAR,
        }];
        let lowering_only = StressPolicy {
            allow_barrier_raising: false,
            max_abs_stress: None,
        };
        assert!(matches!(
            plan_hierarchy(&spec, &tiers, 1e-9, lowering_only),
            Err(Error::NeedsBarrierRaising { .. })
        ));
        let rows = plan_hierarchy(&spec, &tiers, 1e-9, StressPolicy::default()).unwrap();
        // Compressive for cobalt.
        assert!(rows[0].stress < 0.0);
        let mut buf = Vec::new();
        write_hierarchy_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with(HIERARCHY_CSV_HEADER));
    }

    #[test]
    fn equalize_identical_devices() {
        let spec = co();
        let target = 2.0 * spec.thermal_energy();
        let s = equalize_barriers(&[spec; 4], target, StressPolicy::default()).unwrap();
        assert!(s.iter().all(|&x| x == s[0]));
        let natural = barrier_height(&spec, StressState::zero());
        let zero = equalize_barriers(&[spec], natural, StressPolicy::default()).unwrap();
        assert_eq!(zero, vec![0.0]);
    }

    #[test]
    fn equalize_reports_unreachable_devices() {
        let spec = co();
        let mut round = spec;
        round.minor_axis = round.major_axis;
        let policy = StressPolicy {
            allow_barrier_raising: false,
            max_abs_stress: None,
        };
        match equalize_barriers(&[spec, round, spec], 2.0 * spec.thermal_energy(), policy) {
            Err(Error::UnreachableDevices(ids)) => assert_eq!(ids, vec![1]),
            other => panic!("{other:?}"),
        }
    }
}
