//! Behavioral stochastic neuron models.
//!
//! The analog neuron output is a sigmoid plus an input-dependent noise band,
//!
//! ```text
//! V_out = tanh(β·V_in) + α(V_in)·V⁰_noise
//! α(V_in) = κ·exp(−ν·V_in² / σ_Vn²)      (symmetric profile, default)
//! α(V_in) = κ·exp(−ν·V_in  / σ_Vn²)      (as-printed profile)
//! ```
//!
//! where `V⁰_noise` is a normalized draw in [−½, ½] scaled by V_DD. Noise is
//! applied per sample; [`asn_output_series`] accepts an optional kernel that
//! filters the noise sequence first.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileShape {
    /// Exponent in V_in²: even in the input, peaked at mid-curve.
    #[default]
    Symmetric,
    /// Exponent linear in V_in.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDistribution {
    /// Uniform on [−½, ½].
    #[default]
    Uniform,
    /// Normal with σ = 1/6, truncated to [−½, ½].
    TruncatedGaussian,
}

impl NoiseDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseDistribution::Uniform => rng.random::<f64>() - 0.5,
            NoiseDistribution::TruncatedGaussian => loop {
                let x = rng.sample::<f64, _>(StandardNormal) / 6.0;
                if x.abs() <= 0.5 {
                    break x;
                }
            },
        }
    }

    /// Standard deviation of a normalized draw.
    pub fn std_dev(&self) -> f64 {
        match self {
            NoiseDistribution::Uniform => (1.0f64 / 12.0).sqrt(),
            NoiseDistribution::TruncatedGaussian => {
                // Var = σ²·[1 − 2aφ(a)/(2Φ(a) − 1)] with a = 3.
                let a = 3.0f64;
                let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
                let mass = erf(a / std::f64::consts::SQRT_2);
                (1.0 / 6.0) * (1.0 - 2.0 * a * phi / mass).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsnParams {
    /// β, dimensionless
    pub gain: f64,
    /// κ, dimensionless
    pub noise_scale: f64,
    /// ν (1/V)
    pub noise_shape: f64,
    /// σ_Vn (V)
    pub noise_std: f64,
    /// V_DD (V)
    pub supply: f64,
    #[serde(default)]
    pub profile: ProfileShape,
}

impl AsnParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::invalid("gain", "must be positive"));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(Error::invalid("noise_std", "must be positive"));
        }
        if !(self.supply > 0.0 && self.supply.is_finite()) {
            return Err(Error::invalid("supply", "must be positive"));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::invalid("noise_scale", "must be >= 0"));
        }
        if !self.noise_shape.is_finite() {
            return Err(Error::invalid("noise_shape", "must be finite"));
        }
        Ok(())
    }

    fn exponent_argument(&self, v_in: f64) -> f64 {
        match self.profile {
            ProfileShape::Symmetric => v_in * v_in,
            ProfileShape::AsPrinted => v_in,
        }
    }
}

/// α(V_in).
pub fn noise_profile(params: &AsnParams, v_in: f64) -> f64 {
    params.noise_scale * (-params.noise_shape * params.exponent_argument(v_in) / (params.noise_std * params.noise_std)).exp()
}

/// Output for one input and one normalized noise draw in [−½, ½].
pub fn asn_output(params: &AsnParams, v_in: f64, noise_draw: f64) -> f64 {
    let noise = noise_profile(params, v_in) * noise_draw * params.supply;
    if params.noise_scale == 0.0 {
        (params.gain * v_in).tanh()
    } else {
        (params.gain * v_in).tanh() + noise
    }
}

/// Output for an input sequence. With a kernel, the noise sequence is first
/// convolved causally with it (`kernel[0]` weights the current draw).
pub fn asn_output_series(params: &AsnParams, v_in: &[f64], noise: &[f64], kernel: Option<&[f64]>) -> Result<Vec<f64>> {
    if v_in.len() != noise.len() {
        return Err(Error::invalid("noise", "must match the input length"));
    }
    let filtered: Vec<f64> = match kernel {
        None => noise.to_vec(),
        Some(k) => (0..noise.len())
            .map(|t| k.iter().enumerate().take(t + 1).map(|(j, w)| w * noise[t - j]).sum())
            .collect(),
    };
    Ok(v_in.iter().zip(&filtered).map(|(&v, &n)| asn_output(params, v, n)).collect())
}

/// Binary neuron: +1 with probability (1 + tanh(bias))/2.
pub fn bsn_sample<R: Rng + ?Sized>(bias: f64, rng: &mut R) -> i8 {
    let p_up = 0.5 * (1.0 + bias.tanh());
    if rng.random::<f64>() < p_up {
        1
    } else {
        -1
    }
}

/// Settings for [`fit_noise_profile`]. `noise_std` and `supply` fix the
/// voltage scales; only κ and ν are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub bins: usize,
    pub noise_std: f64,
    pub supply: f64,
    pub profile: ProfileShape,
    pub distribution: NoiseDistribution,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            bins: 20,
            noise_std: 1.0,
            supply: 1.0,
            profile: ProfileShape::Symmetric,
            distribution: NoiseDistribution::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFit {
    pub params: AsnParams,
    /// Root-sum-square of per-bin standard-deviation residuals (V).
    pub residual_norm: f64,
    pub sample_count: usize,
}

impl NoiseFit {
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out {
            kappa: f64,
            nu: f64,
            sigma_vn: f64,
            residual_norm: f64,
            sample_count: usize,
        }
        Ok(serde_json::to_string_pretty(&Out {
            kappa: self.params.noise_scale,
            nu: self.params.noise_shape,
            sigma_vn: self.params.noise_std,
            residual_norm: self.residual_norm,
            sample_count: self.sample_count,
        })?)
    }
}

pub const MIN_FIT_SAMPLES: usize = 100;

/// Fits κ and ν to `(v_in, v_out)` samples with known gain.
///
/// Residuals `v_out − tanh(β·v_in)` are binned by input. Each bin's variance
/// is modeled as `(c·V_DD)²·mean_i α(v_i)²`, where `c` is the normalized
/// draw's standard deviation, which removes within-bin smearing bias. A
/// log-linear fit seeds Gauss-Newton on the per-bin standard deviations.
pub fn fit_noise_profile(samples: &[(f64, f64)], gain: f64, config: &FitConfig) -> Result<NoiseFit> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_FIT_SAMPLES,
            got: samples.len(),
        });
    }
    if config.bins < 2 {
        return Err(Error::invalid("bins", "must be >= 2"));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::MAX, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::MIN, f64::max);
    if !(hi > lo) {
        return Err(Error::invalid("samples", "inputs must span a nonzero range"));
    }
    let width = (hi - lo) / config.bins as f64;
    let mut members: Vec<Vec<(f64, f64)>> = vec![Vec::new(); config.bins];
    for &(v, out) in samples {
        let bin = (((v - lo) / width) as usize).min(config.bins - 1);
        members[bin].push((v, out - (gain * v).tanh()));
    }
    let empty: Vec<usize> = members.iter().enumerate().filter(|(_, m)| m.len() < 2).map(|(i, _)| i).collect();
    if !empty.is_empty() {
        return Err(Error::EmptyBins(empty));
    }

    let scale = config.distribution.std_dev() * config.supply;
    let sigma2 = config.noise_std * config.noise_std;
    let shape_arg = |v: f64| match config.profile {
        ProfileShape::Symmetric => v * v,
        ProfileShape::AsPrinted => v,
    };
    // Per-bin observed std and the inputs' exponent arguments.
    let bins: Vec<(f64, Vec<f64>)> = members
        .iter()
        .map(|m| {
            let n = m.len() as f64;
            let mean = m.iter().map(|r| r.1).sum::<f64>() / n;
            let var = m.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var.sqrt(), m.iter().map(|r| shape_arg(r.0)).collect())
        })
        .collect();

    // Model std for bin b: κ·scale·sqrt(mean_i exp(−2r·g_i)), r = ν/σ².
    let model = |kappa: f64, rate: f64, g: &[f64]| -> (f64, f64, f64) {
        let n = g.len() as f64;
        let (mut s, mut ds) = (0.0, 0.0);
        for &gi in g {
            let e = (-2.0 * rate * gi).exp();
            s += e;
            ds += -2.0 * gi * e;
        }
        let root = (s / n).sqrt();
        let value = kappa * scale * root;
        // ∂/∂κ and ∂/∂r
        let d_kappa = scale * root;
        let d_rate = if root > 0.0 { kappa * scale * (ds / n) / (2.0 * root) } else { 0.0 };
        (value, d_kappa, d_rate)
    };

    let max_std = bins.iter().map(|b| b.0).fold(0.0, f64::max);
    let (mut kappa, mut rate) = if max_std <= 0.0 {
        (0.0, 0.0)
    } else {
        log_linear_seed(&bins, scale)
    };

    if max_std > 0.0 {
        for _ in 0..100 {
            let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (obs, g) in &bins {
                let (value, jk, jr) = model(kappa, rate, g);
                let r = obs - value;
                a11 += jk * jk;
                a12 += jk * jr;
                a22 += jr * jr;
                b1 += jk * r;
                b2 += jr * r;
            }
            let det = a11 * a22 - a12 * a12;
            if det.abs() < 1e-300 {
                break;
            }
            let dk = (a22 * b1 - a12 * b2) / det;
            let dr = (a11 * b2 - a12 * b1) / det;
            kappa += dk;
            rate += dr;
            if dk.abs() <= 1e-12 * kappa.abs().max(1e-300) && dr.abs() <= 1e-12 * rate.abs().max(1e-12) {
                break;
            }
        }
        kappa = kappa.max(0.0);
    }

    let residual_norm = bins
        .iter()
        .map(|(obs, g)| (obs - model(kappa, rate, g).0).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(NoiseFit {
        params: AsnParams {
            gain,
            noise_scale: kappa,
            noise_shape: rate * sigma2,
            noise_std: config.noise_std,
            supply: config.supply,
            profile: config.profile,
        },
        residual_norm,
        sample_count: samples.len(),
    })
}

/// Linear regression of ln(std) on the mean exponent argument.
fn log_linear_seed(bins: &[(f64, Vec<f64>)], scale: f64) -> (f64, f64) {
    let points: Vec<(f64, f64)> = bins
        .iter()
        .filter(|b| b.0 > 0.0)
        .map(|(s, g)| (g.iter().sum::<f64>() / g.len() as f64, (s / scale).ln()))
        .collect();
    if points.len() < 2 {
        let s = points.first().map(|p| p.1.exp()).unwrap_or(0.0);
        return (s, 0.0);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    ((my - slope * mx).exp(), -slope)
}

/// Draws `(v_in, v_out)` pairs with inputs uniform on [lo, hi].
pub fn generate_samples<R: Rng + ?Sized>(
    params: &AsnParams,
    distribution: NoiseDistribution,
    n: usize,
    input_range: (f64, f64),
    rng: &mut R,
) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let v = input_range.0 + (input_range.1 - input_range.0) * rng.random::<f64>();
            (v, asn_output(params, v, distribution.sample(rng)))
        })
        .collect()
}
