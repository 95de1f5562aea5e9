//! Stochastic Landau-Lifshitz-Gilbert integration of a single macrospin.
//!
//! The equation of motion is
//!
//! ```text
//! dm/dt = −γ (m × H) − αγ m × (m × H)
//! ```
//!
//! written out component-wise with the damping bracket kept in its
//! non-normalized form, e.g. for x: `Hy·mx·my − Hx·my² − Hx·mz² + Hz·mx·mz`.
//! The effective field combines shape anisotropy, the magnetoelastic term on
//! the major (y) axis and a thermal field redrawn every step:
//!
//! ```text
//! Hx = −Ms·N2·mx + hx
//! Hy = −Ms·N1·my + hy + (3/(μ0·Ms))·λs·ε·Y·my
//! Hz = −Ms·N3·mz + hz
//! h_i = sqrt(2αkT / (γ(1+α²)μ0·Ms·Ω·Δt)) · G_i
//! ```
//!
//! Each step is an explicit finite difference followed by renormalization to
//! unit length. A Heun predictor-corrector that reuses the step's noise is
//! available for convergence cross-checks.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{thermal_energy, GYROMAGNETIC, MU0};
use crate::magnet::{demag_series, MagnetSpec, StressState};
use crate::rng::{derive_seed, seeded};
use crate::{fmt_f64, Error, Result, VERSION};

/// Largest tolerated |m| − 1 before renormalization.
pub const MAX_NORM_DRIFT: f64 = 1e-3;

/// Default time step (s).
pub const DEFAULT_TIME_STEP: f64 = 1e-13;

/// Default decimation: one stored sample per 0.1 ns at the default step.
pub const DEFAULT_DECIMATION: u64 = 1000;

pub type Vec3 = [f64; 3];

/// Unit magnetization (normalized to Ms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationState {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl MagnetizationState {
    pub fn new(mx: f64, my: f64, mz: f64) -> Self {
        MagnetizationState { mx, my, mz }
    }

    /// One degree off the major axis, in plane.
    pub fn near_easy_axis() -> Self {
        let tilt = 1f64.to_radians();
        MagnetizationState::new(tilt.sin(), tilt.cos(), 0.0)
    }

    /// In-plane state at angle `theta` from the major axis.
    pub fn in_plane(theta: f64) -> Self {
        MagnetizationState::new(theta.sin(), theta.cos(), 0.0)
    }

    pub fn norm(&self) -> f64 {
        (self.mx * self.mx + self.my * self.my + self.mz * self.mz).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        MagnetizationState::new(self.mx / n, self.my / n, self.mz / n)
    }

    /// In-plane angle from the major axis, in (−π, π].
    pub fn in_plane_angle(&self) -> f64 {
        self.mx.atan2(self.my)
    }

    fn as_array(&self) -> Vec3 {
        [self.mx, self.my, self.mz]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// m = (sin 1°, cos 1°, 0)
    #[default]
    NearEasyAxis,
    Explicit(MagnetizationState),
}

impl InitialState {
    pub fn resolve(&self) -> MagnetizationState {
        match self {
            InitialState::NearEasyAxis => MagnetizationState::near_easy_axis(),
            InitialState::Explicit(m) => m.normalized(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Explicit Euler finite difference.
    #[default]
    Euler,
    /// Heun predictor-corrector with the step's noise held fixed.
    Heun,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Δt (s)
    pub time_step: f64,
    /// Total simulated time (s).
    pub duration: f64,
    pub seed: u64,
    /// Store every k-th step.
    pub decimation: u64,
    /// Uniaxial stress along the major axis (Pa).
    pub stress: f64,
    pub initial_state: InitialState,
    pub integrator: Integrator,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            time_step: DEFAULT_TIME_STEP,
            duration: 1e-6,
            seed: 0,
            decimation: DEFAULT_DECIMATION,
            stress: 0.0,
            initial_state: InitialState::NearEasyAxis,
            integrator: Integrator::Euler,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_step.is_finite() && self.time_step > 0.0) {
            return Err(Error::invalid("time_step", "must be positive"));
        }
        if !(self.duration.is_finite() && self.duration >= self.time_step) {
            return Err(Error::invalid("duration", "must be at least one time step"));
        }
        if self.decimation == 0 {
            return Err(Error::invalid("decimation", "must be >= 1"));
        }
        if !self.stress.is_finite() {
            return Err(Error::invalid("stress", "must be finite"));
        }
        if let InitialState::Explicit(m) = self.initial_state {
            let n = m.norm();
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::invalid("initial_state", "must be a nonzero finite vector"));
            }
        }
        Ok(())
    }

    pub fn step_count(&self) -> u64 {
        ((self.duration / self.time_step).round() as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub state: MagnetizationState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub config: SimulationConfig,
    pub spec: MagnetSpec,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time between stored samples (s).
    pub fn sample_interval(&self) -> f64 {
        self.config.time_step * self.config.decimation as f64
    }

    /// Major-axis component series.
    pub fn my(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.my).collect()
    }

    pub fn in_plane_angles(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.in_plane_angle()).collect()
    }
}

/// Per-component standard deviation of the thermal field (A/m).
pub fn thermal_field_amplitude(spec: &MagnetSpec, time_step: f64) -> f64 {
    let alpha = spec.gilbert_damping;
    let numerator = 2.0 * alpha * thermal_energy(spec.temperature);
    let denominator = GYROMAGNETIC
        * (1.0 + alpha * alpha)
        * MU0
        * spec.saturation_magnetization
        * spec.volume()
        * time_step;
    (numerator / denominator).sqrt()
}

/// Thermal field from three standard Gaussian draws (A/m).
pub fn thermal_field(spec: &MagnetSpec, time_step: f64, draws: Vec3) -> Vec3 {
    let amp = thermal_field_amplitude(spec, time_step);
    [amp * draws[0], amp * draws[1], amp * draws[2]]
}

/// Effective field (A/m) for a given state and noise field.
pub fn effective_field(spec: &MagnetSpec, stress: StressState, state: MagnetizationState, noise: Vec3) -> Vec3 {
    FieldModel::new(spec, stress).field(state.as_array(), noise)
}

/// One explicit step with fresh noise drawn from `rng`.
pub fn llg_step<R: Rng + ?Sized>(
    spec: &MagnetSpec,
    stress: StressState,
    state: MagnetizationState,
    time_step: f64,
    rng: &mut R,
) -> Result<MagnetizationState> {
    let system = Macrospin::new(spec, stress, time_step, Integrator::Euler);
    let next = system.step(state.as_array(), rng).map_err(|drift| Error::Diverged { step: 0, drift })?;
    Ok(MagnetizationState::new(next[0], next[1], next[2]))
}

/// Energy of a 3D magnetization including the out-of-plane term (J).
pub fn macrospin_energy(spec: &MagnetSpec, stress: StressState, state: MagnetizationState) -> f64 {
    let n = demag_series(spec);
    let m = state;
    let shape = 0.5 * MU0 * spec.saturation_magnetization.powi(2)
        * (n.n2 * m.mx * m.mx + n.n1 * m.my * m.my + n.n3 * m.mz * m.mz);
    let elastic = -1.5 * spec.magnetostriction * spec.youngs_modulus * stress.strain() * m.my * m.my;
    spec.volume() * (shape + elastic)
}

/// Deterministic part of the effective field, precomputed per spec.
#[derive(Debug, Clone, Copy)]
struct FieldModel {
    kx: f64,
    ky: f64,
    kz: f64,
}

impl FieldModel {
    fn new(spec: &MagnetSpec, stress: StressState) -> Self {
        let n = demag_series(spec);
        let ms = spec.saturation_magnetization;
        let strain_term = 3.0 / (MU0 * ms) * spec.magnetostriction * stress.strain() * spec.youngs_modulus;
        FieldModel {
            kx: -ms * n.n2,
            ky: -ms * n.n1 + strain_term,
            kz: -ms * n.n3,
        }
    }

    #[inline]
    fn field(&self, m: Vec3, noise: Vec3) -> Vec3 {
        [
            self.kx * m[0] + noise[0],
            self.ky * m[1] + noise[1],
            self.kz * m[2] + noise[2],
        ]
    }
}

/// Right-hand side dm/dt.
#[inline]
fn llg_rhs(m: Vec3, h: Vec3, gamma: f64, alpha: f64) -> Vec3 {
    let [mx, my, mz] = m;
    let [hx, hy, hz] = h;
    let ag = alpha * gamma;
    [
        -gamma * (hz * my - hy * mz) - ag * (hy * mx * my - hx * my * my - hx * mz * mz + hz * mx * mz),
        -gamma * (hx * mz - hz * mx) - ag * (hz * my * mz - hy * mz * mz - hy * mx * mx + hx * mx * my),
        -gamma * (hy * mx - hx * my) - ag * (hx * mz * mx - hz * mx * mx - hz * my * my + hy * my * mz),
    ]
}

/// Integrator state for one (spec, stress, Δt) combination.
#[derive(Debug, Clone, Copy)]
struct Macrospin {
    field: FieldModel,
    gamma: f64,
    alpha: f64,
    noise_amplitude: f64,
    dt: f64,
    integrator: Integrator,
}

impl Macrospin {
    fn new(spec: &MagnetSpec, stress: StressState, dt: f64, integrator: Integrator) -> Self {
        Macrospin {
            field: FieldModel::new(spec, stress),
            gamma: GYROMAGNETIC,
            alpha: spec.gilbert_damping,
            noise_amplitude: thermal_field_amplitude(spec, dt),
            dt,
            integrator,
        }
    }

    /// Advances one step; `Err` carries the norm drift when the guard trips.
    #[inline]
    fn step<R: Rng + ?Sized>(&self, m: Vec3, rng: &mut R) -> std::result::Result<Vec3, f64> {
        let noise = if self.noise_amplitude > 0.0 {
            let amp = self.noise_amplitude;
            [
                amp * rng.sample::<f64, _>(StandardNormal),
                amp * rng.sample::<f64, _>(StandardNormal),
                amp * rng.sample::<f64, _>(StandardNormal),
            ]
        } else {
            [0.0; 3]
        };
        let dt = self.dt;
        let d0 = llg_rhs(m, self.field.field(m, noise), self.gamma, self.alpha);
        let next = match self.integrator {
            Integrator::Euler => [m[0] + d0[0] * dt, m[1] + d0[1] * dt, m[2] + d0[2] * dt],
            Integrator::Heun => {
                let p = [m[0] + d0[0] * dt, m[1] + d0[1] * dt, m[2] + d0[2] * dt];
                let d1 = llg_rhs(p, self.field.field(p, noise), self.gamma, self.alpha);
                [
                    m[0] + 0.5 * (d0[0] + d1[0]) * dt,
                    m[1] + 0.5 * (d0[1] + d1[1]) * dt,
                    m[2] + 0.5 * (d0[2] + d1[2]) * dt,
                ]
            }
        };
        let norm = (next[0] * next[0] + next[1] * next[1] + next[2] * next[2]).sqrt();
        let drift = (norm - 1.0).abs();
        if !(drift <= MAX_NORM_DRIFT) {
            return Err(drift);
        }
        Ok([next[0] / norm, next[1] / norm, next[2] / norm])
    }
}

/// Integrates one trajectory. Bit-identical for identical inputs.
pub fn simulate(spec: &MagnetSpec, config: &SimulationConfig) -> Result<Trajectory> {
    spec.validate()?;
    config.validate()?;
    let stress = StressState::uniaxial(config.stress, spec);
    let system = Macrospin::new(spec, stress, config.time_step, config.integrator);
    let mut rng = seeded(config.seed);
    let steps = config.step_count();
    let mut samples = Vec::with_capacity((steps / config.decimation) as usize);
    let mut m = config.initial_state.resolve().as_array();
    for step in 1..=steps {
        m = system.step(m, &mut rng).map_err(|drift| Error::Diverged { step, drift })?;
        if step % config.decimation == 0 {
            samples.push(Sample {
                time: step as f64 * config.time_step,
                state: MagnetizationState::new(m[0], m[1], m[2]),
            });
        }
    }
    Ok(Trajectory {
        samples,
        config: *config,
        spec: *spec,
    })
}

/// `n_runs` independent trajectories; run `i` uses seed
/// [`derive_seed`]`(seed_base, i)`. Output order follows run index and does
/// not depend on the rayon pool size.
pub fn ensemble(spec: &MagnetSpec, config: &SimulationConfig, n_runs: usize, seed_base: u64) -> Result<Vec<Trajectory>> {
    if n_runs == 0 {
        return Err(Error::invalid("n_runs", "must be >= 1"));
    }
    (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let mut run = *config;
            run.seed = derive_seed(seed_base, i as u64);
            simulate(spec, &run)
        })
        .collect()
}

pub const TRAJECTORY_CSV_HEADER: &str = "time_s,mx,my,mz";

/// Writes `# key: json` comment lines for the spec and config, then the
/// samples.
pub fn write_trajectory_csv<W: Write>(mut out: W, traj: &Trajectory) -> Result<()> {
    writeln!(out, "# rsn trajectory")?;
    writeln!(out, "# version: {VERSION}")?;
    writeln!(out, "# seed: {}", traj.config.seed)?;
    writeln!(out, "# spec: {}", serde_json::to_string(&traj.spec)?)?;
    writeln!(out, "# config: {}", serde_json::to_string(&traj.config)?)?;
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for s in &traj.samples {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(s.time),
            fmt_f64(s.state.mx),
            fmt_f64(s.state.my),
            fmt_f64(s.state.mz)
        )?;
    }
    Ok(())
}

pub fn read_trajectory_csv<R: BufRead>(input: R) -> Result<Trajectory> {
    let mut spec = None;
    let mut config = None;
    let mut samples = Vec::new();
    let mut seen_header = false;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let parse_err = |message: String| Error::Parse { line: lineno, message };
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(json) = comment.strip_prefix("spec:") {
                spec = Some(serde_json::from_str::<MagnetSpec>(json.trim()).map_err(|e| parse_err(e.to_string()))?);
            } else if let Some(json) = comment.strip_prefix("config:") {
                config = Some(serde_json::from_str::<SimulationConfig>(json.trim()).map_err(|e| parse_err(e.to_string()))?);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line.trim() != TRAJECTORY_CSV_HEADER {
                return Err(parse_err(format!("expected header `{TRAJECTORY_CSV_HEADER}`")));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(e.to_string()))?;
        if fields.len() != 4 {
            return Err(parse_err(format!("expected 4 columns, got {}", fields.len())));
        }
        samples.push(Sample {
            time: fields[0],
            state: MagnetizationState::new(fields[1], fields[2], fields[3]),
        });
    }
    let spec = spec.ok_or_else(|| Error::Parse { line: 0, message: "missing `# spec:` header".into() })?;
    let config = config.ok_or_else(|| Error::Parse { line: 0, message: "missing `# config:` header".into() })?;
    Ok(Trajectory { samples, config, spec })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnet::critical_stress;
    use crate::rng::seeded;

    // Independent plug-in evaluation of the thermal-field amplitude for the Co
    // ellipse at 300 K and Δt = 0.1 ps (γ = 2.211e5, kB = 1.380649e-23).
    const NOISE_AMPLITUDE_CO: f64 = 8_756.866_108_453_174;

    fn co() -> MagnetSpec {
        MagnetSpec::cobalt_ellipse()
    }

    #[test]
    fn thermal_field_regression() {
        let amp = thermal_field_amplitude(&co(), 1e-13);
        assert!(((amp - NOISE_AMPLITUDE_CO) / NOISE_AMPLITUDE_CO).abs() < 1e-10, "{amp}");
    }

    #[test]
    fn thermal_field_vanishes_at_zero_temperature() {
        let mut spec = co();
        spec.temperature = 0.0;
        assert_eq!(thermal_field(&spec, 1e-13, [1.0, -2.0, 0.5]), [0.0; 3]);
    }

    #[test]
    fn thermal_field_scales_inverse_sqrt_dt() {
        let spec = co();
        let ratio = thermal_field_amplitude(&spec, 0.5e-13) / thermal_field_amplitude(&spec, 1e-13);
        assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn effective_field_on_easy_axis() {
        let mut spec = co();
        spec.temperature = 0.0;
        let n = demag_series(&spec);
        let h = effective_field(&spec, StressState::zero(), MagnetizationState::new(0.0, 1.0, 0.0), [0.0; 3]);
        assert_eq!(h[0], 0.0);
        assert_eq!(h[2], 0.0);
        assert!((h[1] + spec.saturation_magnetization * n.n1).abs() < 1e-9);
    }

    #[test]
    fn tensile_strain_softens_cobalt_easy_axis() {
        let spec = co();
        let anisotropy = |sigma: f64| {
            let stress = StressState::uniaxial(sigma, &spec);
            let hy = effective_field(&spec, stress, MagnetizationState::new(0.0, 1.0, 0.0), [0.0; 3])[1];
            let hx = effective_field(&spec, stress, MagnetizationState::new(1.0, 0.0, 0.0), [0.0; 3])[0];
            hy - hx
        };
        assert!(anisotropy(0.0) > 0.0);
        assert!(anisotropy(3e6) > 0.0 && anisotropy(3e6) < anisotropy(0.0));
    }

    #[test]
    fn critical_stress_balances_in_plane_stiffness() {
        let spec = co();
        let sc = critical_stress(&spec).unwrap();
        let hx = effective_field(&spec, StressState::uniaxial(sc, &spec), MagnetizationState::new(1.0, 0.0, 0.0), [0.0; 3]);
        let hy = effective_field(&spec, StressState::uniaxial(sc, &spec), MagnetizationState::new(0.0, 1.0, 0.0), [0.0; 3]);
        assert!((hx[0] - hy[1]).abs() < 1e-9 * hx[0].abs(), "{} vs {}", hx[0], hy[1]);
    }

    #[test]
    fn easy_axis_is_a_fixed_point_at_zero_temperature() {
        let mut spec = co();
        spec.temperature = 0.0;
        let mut rng = seeded(1);
        let m = MagnetizationState::new(0.0, 1.0, 0.0);
        let next = llg_step(&spec, StressState::zero(), m, 1e-13, &mut rng).unwrap();
        assert_eq!(next, m);
    }

    #[test]
    fn relaxes_to_easy_axis_with_non_increasing_energy() {
        let mut spec = co();
        spec.temperature = 0.0;
        let stress = StressState::zero();
        let mut rng = seeded(2);
        let mut m = MagnetizationState::in_plane(20f64.to_radians());
        let mut previous = macrospin_energy(&spec, stress, m);
        let start = previous;
        for _ in 0..300_000 {
            m = llg_step(&spec, stress, m, 1e-13, &mut rng).unwrap();
            let e = macrospin_energy(&spec, stress, m);
            assert!(e <= previous + 1e-15 * start.abs(), "{e} > {previous}");
            previous = e;
        }
        assert!(m.my.abs() > 0.999, "{m:?}");
    }

    #[test]
    fn norm_is_preserved() {
        let spec = co();
        let stress = StressState::uniaxial(4e6, &spec);
        let mut rng = seeded(3);
        let mut m = MagnetizationState::new(0.3, -0.8, 0.1).normalized();
        for _ in 0..100_000 {
            m = llg_step(&spec, stress, m, 1e-13, &mut rng).unwrap();
            assert!((m.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn oversized_step_diverges() {
        let spec = co();
        let config = SimulationConfig {
            time_step: 1e-10,
            duration: 1e-8,
            ..SimulationConfig::default()
        };
        assert!(matches!(simulate(&spec, &config), Err(Error::Diverged { .. })));
    }

    #[test]
    fn simulate_is_deterministic_and_decimated() {
        let spec = co();
        let config = SimulationConfig {
            duration: 2e-9,
            decimation: 100,
            seed: 11,
            ..SimulationConfig::default()
        };
        let a = simulate(&spec, &config).unwrap();
        let b = simulate(&spec, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        let dt = a.sample_interval();
        for w in a.samples.windows(2) {
            assert!(w[1].time > w[0].time);
            assert!((w[1].time - w[0].time - dt).abs() < 1e-9 * dt);
        }
        let other = simulate(&spec, &SimulationConfig { seed: 12, ..config }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn heun_agrees_with_euler_at_zero_temperature() {
        let mut spec = co();
        spec.temperature = 0.0;
        let base = SimulationConfig {
            duration: 1e-9,
            decimation: 10_000,
            initial_state: InitialState::Explicit(MagnetizationState::in_plane(0.3)),
            ..SimulationConfig::default()
        };
        let euler = simulate(&spec, &base).unwrap();
        let heun = simulate(&spec, &SimulationConfig { integrator: Integrator::Heun, ..base }).unwrap();
        let (a, b) = (euler.samples.last().unwrap().state, heun.samples.last().unwrap().state);
        assert!((a.mx - b.mx).abs() < 1e-3 && (a.my - b.my).abs() < 1e-3);
    }

    #[test]
    fn ensemble_single_run_matches_simulate() {
        let spec = co();
        let config = SimulationConfig {
            duration: 5e-10,
            decimation: 50,
            ..SimulationConfig::default()
        };
        let runs = ensemble(&spec, &config, 1, 99).unwrap();
        let direct = simulate(&spec, &SimulationConfig { seed: derive_seed(99, 0), ..config }).unwrap();
        assert_eq!(runs[0], direct);
        assert!(ensemble(&spec, &config, 0, 99).is_err());
    }

    #[test]
    fn ensemble_is_independent_of_pool_size() {
        let spec = co();
        let config = SimulationConfig {
            duration: 3e-10,
            decimation: 30,
            ..SimulationConfig::default()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| ensemble(&spec, &config, 6, 5).unwrap());
        let b = four.install(|| ensemble(&spec, &config, 6, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let spec = co();
        let config = SimulationConfig {
            duration: 1e-10,
            decimation: 100,
            seed: 4,
            ..SimulationConfig::default()
        };
        let traj = simulate(&spec, &config).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().any(|l| l == TRAJECTORY_CSV_HEADER));
        let back = read_trajectory_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn csv_without_header_is_rejected() {
        let text = "# spec: {}\n1,2,3,4\n";
        assert!(read_trajectory_csv(std::io::Cursor::new(text)).is_err());
    }
}
