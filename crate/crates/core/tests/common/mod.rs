//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use rsn_core::anneal::{IsingProblem, Spin};
use rsn_core::constants::{BOLTZMANN, MU0};
use rsn_core::magnet::MagnetSpec;

/// Plug-in in-plane energy written from the physical formula, not the crate.
pub fn plugin_energy(spec: &MagnetSpec, stress: f64, theta: f64) -> f64 {
    let a = spec.major_axis;
    let b = spec.minor_axis;
    let t = spec.thickness;
    let e = (a - b) / a;
    let n1 = PI / 4.0 * (t / a) * (1.0 - e / 4.0 - 3.0 * e * e / 16.0);
    let n2 = PI / 4.0 * (t / a) * (1.0 + 5.0 * e / 4.0 + 21.0 * e * e / 16.0);
    let omega = PI * (a / 2.0) * (b / 2.0) * t;
    let ms = spec.saturation_magnetization;
    let (s, c) = theta.sin_cos();
    MU0 / 2.0 * ms * ms * omega * (n1 * c * c + n2 * s * s) - 1.5 * spec.magnetostriction * stress * omega * c * c
}

/// Barrier from a dense grid scan of the plug-in energy.
pub fn plugin_barrier(spec: &MagnetSpec, stress: f64) -> f64 {
    let n = 20_000;
    let values: Vec<f64> = (0..=n).map(|k| plugin_energy(spec, stress, PI * k as f64 / n as f64)).collect();
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max - min
}

/// Boltzmann probability mass of each of `bins` equal θ-bins on [−π, π),
/// by midpoint quadrature with `sub` points per bin.
pub fn boltzmann_theta_masses(spec: &MagnetSpec, stress: f64, bins: usize, sub: usize) -> Vec<f64> {
    let kt = BOLTZMANN * spec.temperature;
    let width = 2.0 * PI / bins as f64;
    let e0 = plugin_energy(spec, stress, 0.0);
    let mut masses: Vec<f64> = (0..bins)
        .map(|k| {
            (0..sub)
                .map(|j| {
                    let theta = -PI + width * (k as f64 + (j as f64 + 0.5) / sub as f64);
                    (-(plugin_energy(spec, stress, theta) - e0) / kt).exp()
                })
                .sum()
        })
        .collect();
    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= total);
    masses
}

/// Normalized counts of angles in `bins` equal bins on [−π, π).
pub fn theta_masses(angles: &[f64], bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    for &a in angles {
        let wrapped = (a + PI).rem_euclid(2.0 * PI);
        let k = ((wrapped / (2.0 * PI) * bins as f64) as usize).min(bins - 1);
        counts[k] += 1.0;
    }
    let n = angles.len() as f64;
    counts.iter_mut().for_each(|c| *c /= n);
    counts
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// State `code` with spin 0 as the most significant bit; 1 means +1.
pub fn decode(code: usize, n: usize) -> Vec<Spin> {
    (0..n).map(|i| if code >> (n - 1 - i) & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn encode(state: &[Spin]) -> usize {
    state.iter().fold(0, |acc, &s| (acc << 1) | (s == 1) as usize)
}

/// Plain double-sum Ising energy, −½ΣJ_ij s_i s_j − Σh_i s_i.
pub fn ising_energy(problem: &IsingProblem, state: &[Spin]) -> f64 {
    let n = problem.len();
    let mut e = 0.0;
    for i in 0..n {
        for j in 0..n {
            e -= 0.5 * problem.coupling(i, j) * state[i] as f64 * state[j] as f64;
        }
        e -= problem.bias(i) * state[i] as f64;
    }
    e
}

/// Exact Boltzmann distribution over all 2^n states at inverse temperature β.
pub fn exact_boltzmann(problem: &IsingProblem, beta: f64) -> Vec<f64> {
    let n = problem.len();
    let energies: Vec<f64> = (0..1usize << n).map(|c| ising_energy(problem, &decode(c, n))).collect();
    let e_min = energies.iter().cloned().fold(f64::MAX, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.iter().map(|w| w / z).collect()
}

/// Minimum energy by naive enumeration.
pub fn exhaustive_minimum(problem: &IsingProblem) -> f64 {
    let n = problem.len();
    (0..1usize << n).map(|c| ising_energy(problem, &decode(c, n))).fold(f64::MAX, f64::min)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn maxcut8() -> IsingProblem {
    let file = std::fs::File::open(fixture("maxcut8.txt")).expect("fixture");
    IsingProblem::parse(std::io::BufReader::new(file)).expect("valid fixture")
}

pub fn random_problem(n: usize, seed: u64) -> IsingProblem {
    use rand::Rng;
    let mut rng = rsn_core::rng::seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < 0.5 {
                edges.push((i, j, rng.random::<f64>() * 2.0 - 1.0));
            }
        }
    }
    let h = (0..n).map(|_| 0.5 * (rng.random::<f64>() - 0.5)).collect();
    IsingProblem::from_edges(n, &edges, h).expect("valid random problem")
}
