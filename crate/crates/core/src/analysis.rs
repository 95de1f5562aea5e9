//! Binary/analog regime analysis of major-axis magnetization series.
//!
//! Works on the `m_y` series of a [`Trajectory`] or on any raw series with a
//! known sample interval.

use std::io::Write;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::sllg::Trajectory;
use crate::{fmt_f64, Error, Result};

/// Thresholds for [`classify_regime`].
///
/// The bimodality cut-offs are the Sarle coefficients of the equilibrium
/// `m_y = cos θ` distribution of an in-plane macrospin, `p(θ) ∝ exp(Δ/kT·cos²θ)`,
/// at Δ = 2.5 kT (binary) and Δ = 1 kT (analog). A flat landscape gives the
/// arcsine law with coefficient 2/3, so a uniform-`m_y` benchmark of 5/9 does
/// not apply to this observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub binary_min_bimodality: f64,
    pub analog_max_bimodality: f64,
    pub binary_min_mode_separation: f64,
    pub histogram_bins: usize,
    /// Coverage below this many autocorrelation times raises a warning.
    pub min_autocorrelation_times: f64,
}

pub const BINARY_MIN_BIMODALITY: f64 = 0.887;
pub const ANALOG_MAX_BIMODALITY: f64 = 0.772;
pub const BINARY_MIN_MODE_SEPARATION: f64 = 1.0;
pub const MODE_HISTOGRAM_BINS: usize = 64;
pub const MIN_AUTOCORRELATION_SAMPLES: usize = 1000;

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            binary_min_bimodality: BINARY_MIN_BIMODALITY,
            analog_max_bimodality: ANALOG_MAX_BIMODALITY,
            binary_min_mode_separation: BINARY_MIN_MODE_SEPARATION,
            histogram_bins: MODE_HISTOGRAM_BINS,
            min_autocorrelation_times: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Binary,
    Analog,
    Intermediate,
}

/// Normalized density over [−1, 1] with equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_centers: Vec<f64>,
    pub density: Vec<f64>,
    #[serde(skip)]
    bin_means: Vec<f64>,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        2.0 / self.density.len() as f64
    }

    /// ∫ density ≈ 1.
    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }

    /// Probability mass per bin.
    pub fn masses(&self) -> Vec<f64> {
        let w = self.bin_width();
        self.density.iter().map(|d| d * w).collect()
    }
}

pub fn histogram_of(values: &[f64], n_bins: usize) -> Result<Histogram> {
    if n_bins < 2 {
        return Err(Error::invalid("n_bins", "must be >= 2"));
    }
    if values.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let width = 2.0 / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    let mut sums = vec![0.0; n_bins];
    for &v in values {
        let bin = (((v + 1.0) / width).floor() as isize).clamp(0, n_bins as isize - 1) as usize;
        counts[bin] += 1;
        sums[bin] += v;
    }
    let total = values.len() as f64;
    Ok(Histogram {
        bin_centers: (0..n_bins).map(|i| -1.0 + (i as f64 + 0.5) * width).collect(),
        density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        bin_means: counts
            .iter()
            .zip(&sums)
            .map(|(&c, &s)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect(),
    })
}

/// Histogram of `m_y` over [−1, 1].
pub fn histogram(traj: &Trajectory, n_bins: usize) -> Result<Histogram> {
    histogram_of(&traj.my(), n_bins)
}

pub fn write_histogram_csv<W: Write>(mut out: W, hist: &Histogram) -> std::io::Result<()> {
    writeln!(out, "bin_center,density")?;
    for (c, d) in hist.bin_centers.iter().zip(&hist.density) {
        writeln!(out, "{},{}", fmt_f64(*c), fmt_f64(*d))?;
    }
    Ok(())
}

/// Sarle's bimodality coefficient (skewness² + 1) / kurtosis.
pub fn bimodality_coefficient(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    Ok((skew * skew + 1.0) / kurt)
}

/// Distance between the two highest local maxima of the histogram, each
/// located at the mean of the samples in its bins. Zero for a single mode.
pub fn mode_separation(hist: &Histogram) -> f64 {
    let d = &hist.density;
    let n = d.len();
    // (height, location) for every plateau that is higher than both sides.
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && d[end + 1] == d[start] {
            end += 1;
        }
        let rises = start == 0 || d[start - 1] < d[start];
        let falls = end == n - 1 || d[end + 1] < d[end];
        if d[start] > 0.0 && rises && falls {
            let (mut weight, mut sum) = (0.0, 0.0);
            for i in start..=end {
                weight += d[i];
                sum += d[i] * hist.bin_means[i];
            }
            peaks.push((d[start], sum / weight));
        }
        start = end + 1;
    }
    if peaks.len() < 2 {
        return 0.0;
    }
    let top = peaks.iter().map(|p| p.0).fold(f64::MIN, f64::max);
    let tops: Vec<f64> = peaks.iter().filter(|p| p.0 == top).map(|p| p.1).collect();
    let separation = if tops.len() >= 2 {
        let lo = tops.iter().cloned().fold(f64::MAX, f64::min);
        let hi = tops.iter().cloned().fold(f64::MIN, f64::max);
        hi - lo
    } else {
        let anchor = tops[0];
        let second = peaks.iter().filter(|p| p.0 < top).map(|p| p.0).fold(f64::MIN, f64::max);
        peaks
            .iter()
            .filter(|p| p.0 == second)
            .map(|p| (p.1 - anchor).abs())
            .fold(0.0, f64::max)
    };
    separation.clamp(0.0, 2.0)
}

/// Complete dwells plus the leading dwell that was already under way when
/// observation began.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dwells {
    /// Switch-to-switch intervals (s).
    pub complete: Vec<f64>,
    /// Interval from the first well entry to the first switch (s).
    pub truncated_first: Option<f64>,
}

impl Dwells {
    pub fn mean(&self) -> Option<f64> {
        if self.complete.is_empty() {
            None
        } else {
            Some(self.complete.iter().sum::<f64>() / self.complete.len() as f64)
        }
    }
}

/// Dwell intervals with two-threshold hysteresis: a switch is registered
/// only when the series moves from beyond one threshold to beyond the other.
/// Sample `k` sits at time `k·interval`.
pub fn dwell_times_of(values: &[f64], interval: f64, upper: f64, lower: f64) -> Result<Dwells> {
    if !(-1.0 < lower && lower < upper && upper < 1.0) {
        return Err(Error::invalid("thresholds", format!("need -1 < lower < upper < 1, got lower={lower}, upper={upper}")));
    }
    let mut well: Option<bool> = None;
    let mut entered = 0usize;
    let mut switches = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        let side = if v > upper {
            Some(true)
        } else if v < lower {
            Some(false)
        } else {
            None
        };
        match (well, side) {
            (None, Some(s)) => {
                well = Some(s);
                entered = k;
            }
            (Some(w), Some(s)) if w != s => {
                switches.push(k);
                well = Some(s);
            }
            _ => {}
        }
    }
    let mut dwells = Dwells::default();
    if let Some(&first) = switches.first() {
        dwells.truncated_first = Some((first - entered) as f64 * interval);
        dwells.complete = switches.windows(2).map(|w| (w[1] - w[0]) as f64 * interval).collect();
    }
    Ok(dwells)
}

pub fn dwell_times(traj: &Trajectory, upper: f64, lower: f64) -> Result<Dwells> {
    dwell_times_of(&traj.my(), traj.sample_interval(), upper, lower)
}

/// Biased normalized autocorrelation ρ(k) for k in 0..n, via FFT.
pub fn autocorrelation(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    if !(c0 > 1e-300 * n as f64) {
        return Err(Error::ZeroVariance);
    }
    Ok(buf[..n].iter().map(|c| c.re / c0).collect())
}

/// Integrated autocorrelation time: Σ ρ(k) from k = 0 up to the first
/// non-positive lag, times the sample interval.
pub fn autocorrelation_time_of(values: &[f64], interval: f64) -> Result<f64> {
    if values.len() < MIN_AUTOCORRELATION_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_AUTOCORRELATION_SAMPLES,
            got: values.len(),
        });
    }
    let rho = autocorrelation(values)?;
    let sum: f64 = rho.iter().take_while(|&&r| r > 0.0).sum();
    Ok(sum * interval)
}

pub fn autocorrelation_time(traj: &Trajectory) -> Result<f64> {
    autocorrelation_time_of(&traj.my(), traj.sample_interval())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub histogram: Histogram,
    pub bimodality_coefficient: f64,
    pub mode_separation: f64,
    /// Mean of complete dwells (s); `None` when no complete dwell occurred.
    pub mean_dwell_time: Option<f64>,
    /// `None` when the series is too short to estimate it.
    pub autocorrelation_time: Option<f64>,
    pub regime: Regime,
    pub sample_count: usize,
    pub warnings: Vec<String>,
}

impl RegimeReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn classify_series(values: &[f64], interval: f64, thresholds: &RegimeThresholds) -> Result<RegimeReport> {
    let hist = histogram_of(values, thresholds.histogram_bins)?;
    let bc = bimodality_coefficient(values)?;
    let separation = mode_separation(&hist);
    let regime = if bc > thresholds.binary_min_bimodality && separation > thresholds.binary_min_mode_separation {
        Regime::Binary
    } else if bc < thresholds.analog_max_bimodality {
        Regime::Analog
    } else {
        Regime::Intermediate
    };
    let mut warnings = Vec::new();
    let tau = match autocorrelation_time_of(values, interval) {
        Ok(tau) => {
            let coverage = values.len() as f64 * interval / tau;
            if coverage < thresholds.min_autocorrelation_times {
                warnings.push(format!(
                    "trajectory covers {coverage:.1} autocorrelation times (< {})",
                    thresholds.min_autocorrelation_times
                ));
            }
            Some(tau)
        }
        Err(Error::TooFewSamples { required, got }) => {
            warnings.push(format!("too short for autocorrelation estimate: {got} < {required} samples"));
            None
        }
        Err(e) => return Err(e),
    };
    let dwells = dwell_times_of(values, interval, 0.5, -0.5)?;
    Ok(RegimeReport {
        histogram: hist,
        bimodality_coefficient: bc,
        mode_separation: separation,
        mean_dwell_time: dwells.mean(),
        autocorrelation_time: tau,
        regime,
        sample_count: values.len(),
        warnings,
    })
}

pub fn classify_regime(traj: &Trajectory) -> Result<RegimeReport> {
    classify_series(&traj.my(), traj.sample_interval(), &RegimeThresholds::default())
}
