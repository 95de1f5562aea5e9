//! p-bit Ising annealing with per-neuron inverse-temperature schedules.
//!
//! Energy convention: `E(s) = −½·sᵀJs − hᵀs` with `s_i ∈ {−1, +1}`. Each
//! sweep visits spins in ascending index order and resamples spin `i` as a
//! binary stochastic neuron with bias `β_i(t)·I_i`, where
//! `I_i = Σ_j J_ij·s_j + h_i`.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::magnet::{barrier_height, critical_stress, MagnetSpec, StressState};
use crate::neuron::bsn_sample;
use crate::rng::{seeded, SimRng};
use crate::{fmt_f64, Error, Result};

pub type Spin = i8;

/// Largest instance [`brute_force`] will enumerate.
pub const MAX_ORACLE_SPINS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingProblem {
    n: usize,
    /// Row-major n×n, symmetric, zero diagonal.
    couplings: Vec<f64>,
    biases: Vec<f64>,
}

impl IsingProblem {
    pub fn new(couplings: Vec<Vec<f64>>, biases: Vec<f64>) -> Result<Self> {
        let n = biases.len();
        if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidProblem(format!("coupling matrix must be {n}x{n}")));
        }
        let flat: Vec<f64> = couplings.into_iter().flatten().collect();
        let problem = IsingProblem {
            n,
            couplings: flat,
            biases,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Builds from an undirected edge list; repeated edges accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], biases: Vec<f64>) -> Result<Self> {
        if biases.len() != n {
            return Err(Error::InvalidProblem(format!("expected {n} biases, got {}", biases.len())));
        }
        let mut couplings = vec![0.0; n * n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidProblem(format!("edge ({i}, {j}) out of range for {n} spins")));
            }
            if i == j {
                return Err(Error::InvalidProblem(format!("self-coupling on spin {i}")));
            }
            couplings[i * n + j] += w;
            couplings[j * n + i] += w;
        }
        let problem = IsingProblem { n, couplings, biases };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.couplings[i * n + i] != 0.0 {
                return Err(Error::InvalidProblem(format!("J[{i}][{i}] must be zero")));
            }
            for j in 0..i {
                if self.couplings[i * n + j] != self.couplings[j * n + i] {
                    return Err(Error::InvalidProblem(format!("J is not symmetric at ({i}, {j})")));
                }
            }
        }
        if self.couplings.iter().chain(&self.biases).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite coefficient".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.biases[i]
    }

    pub fn energy(&self, state: &[Spin]) -> f64 {
        let n = self.n;
        let mut e = 0.0;
        for i in 0..n {
            let si = state[i] as f64;
            let row = &self.couplings[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * state[j] as f64;
            }
            e -= 0.5 * si * acc + self.biases[i] * si;
        }
        e
    }

    /// Parses `i j J_ij` edge lines and `# h i value` bias lines. An optional
    /// `# n N` line fixes the spin count; otherwise it is one past the largest
    /// index seen. Other `#` lines are comments.
    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let mut edges = Vec::new();
        let mut fields_h = Vec::new();
        let mut declared_n = None;
        let mut max_index = None::<usize>;
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let err = |message: String| Error::Parse { line: lineno, message };
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                let parts: Vec<&str> = comment.split_whitespace().collect();
                match parts.as_slice() {
                    ["h", i, v] => {
                        let i: usize = i.parse().map_err(|_| err(format!("bad spin index `{i}`")))?;
                        let v: f64 = v.parse().map_err(|_| err(format!("bad bias `{v}`")))?;
                        max_index = Some(max_index.map_or(i, |m| m.max(i)));
                        fields_h.push((i, v));
                    }
                    ["n", n] => {
                        declared_n = Some(n.parse::<usize>().map_err(|_| err(format!("bad spin count `{n}`")))?);
                    }
                    _ => {}
                }
                continue;
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(err(format!("expected `i j J_ij`, got `{trimmed}`")));
            }
            let i: usize = parts[0].parse().map_err(|_| err(format!("bad spin index `{}`", parts[0])))?;
            let j: usize = parts[1].parse().map_err(|_| err(format!("bad spin index `{}`", parts[1])))?;
            let w: f64 = parts[2].parse().map_err(|_| err(format!("bad coupling `{}`", parts[2])))?;
            max_index = Some(max_index.map_or(i.max(j), |m| m.max(i).max(j)));
            edges.push((i, j, w));
        }
        let n = match (declared_n, max_index) {
            (Some(n), Some(m)) if m >= n => {
                return Err(Error::InvalidProblem(format!("spin index {m} exceeds declared count {n}")))
            }
            (Some(n), _) => n,
            (None, Some(m)) => m + 1,
            (None, None) => 0,
        };
        let mut biases = vec![0.0; n];
        for (i, v) in fields_h {
            biases[i] += v;
        }
        Self::from_edges(n, &edges, biases)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# n {}", self.n)?;
        for i in 0..self.n {
            if self.biases[i] != 0.0 {
                writeln!(out, "# h {i} {}", self.biases[i])?;
            }
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                let w = self.coupling(i, j);
                if w != 0.0 {
                    writeln!(out, "{i} {j} {w}")?;
                }
            }
        }
        Ok(())
    }
}

/// Σ_j J_ij·s_j + h_i.
pub fn local_field(problem: &IsingProblem, state: &[Spin], i: usize) -> f64 {
    let n = problem.n;
    let row = &problem.couplings[i * n..(i + 1) * n];
    row.iter().zip(state).map(|(j, &s)| j * s as f64).sum::<f64>() + problem.biases[i]
}

/// Inverse temperature per neuron and sweep index. Indices past the end of a
/// profile hold its last value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnealSchedule {
    /// One profile shared by every neuron.
    Global(Vec<f64>),
    /// `rows[i][t]` is β for neuron `i` at sweep `t`.
    PerNeuron(Vec<Vec<f64>>),
}

impl AnnealSchedule {
    /// β(t) = start + (end − start)·t/sweeps for t = 0..=sweeps.
    pub fn global_linear(start: f64, end: f64, sweeps: usize) -> Result<Self> {
        let sweeps = sweeps.max(1);
        let profile = (0..=sweeps)
            .map(|t| start + (end - start) * t as f64 / sweeps as f64)
            .collect();
        let schedule = AnnealSchedule::Global(profile);
        schedule.validate(None)?;
        Ok(schedule)
    }

    pub fn per_neuron_table(rows: Vec<Vec<f64>>) -> Result<Self> {
        let schedule = AnnealSchedule::PerNeuron(rows);
        schedule.validate(None)?;
        Ok(schedule)
    }

    /// β_i(t) = Δ_i(σ_i(t)) / kT from per-neuron stress curves.
    ///
    /// `specs` holds one spec per neuron, or a single spec shared by all.
    /// Stresses past a magnet's critical stress (where the minor axis becomes
    /// easy) are rejected.
    pub fn from_stress_profile(specs: &[MagnetSpec], stresses: &[Vec<f64>]) -> Result<Self> {
        if specs.is_empty() || (specs.len() != 1 && specs.len() != stresses.len()) {
            return Err(Error::InvalidSchedule(format!(
                "need 1 or {} magnet specs, got {}",
                stresses.len(),
                specs.len()
            )));
        }
        let rows = stresses
            .iter()
            .enumerate()
            .map(|(i, curve)| {
                let spec = if specs.len() == 1 { &specs[0] } else { &specs[i] };
                spec.validate()?;
                let critical = critical_stress(spec).ok();
                let kt = spec.thermal_energy();
                if !(kt > 0.0) {
                    return Err(Error::InvalidSchedule("temperature must be positive".into()));
                }
                curve
                    .iter()
                    .map(|&sigma| {
                        if let Some(sc) = critical {
                            if sigma * sc.signum() > sc.abs() * (1.0 + 1e-12) {
                                return Err(Error::InvalidSchedule(format!(
                                    "neuron {i}: stress {sigma} Pa is past the critical stress {sc} Pa"
                                )));
                            }
                        }
                        Ok(barrier_height(spec, StressState::uniaxial(sigma, spec)) / kt)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::per_neuron_table(rows)
    }

    fn validate(&self, n: Option<usize>) -> Result<()> {
        let rows: Vec<&Vec<f64>> = match self {
            AnnealSchedule::Global(p) => vec![p],
            AnnealSchedule::PerNeuron(rows) => {
                if let Some(n) = n {
                    if rows.len() != n {
                        return Err(Error::InvalidSchedule(format!("{} rows for {n} neurons", rows.len())));
                    }
                }
                rows.iter().collect()
            }
        };
        for (i, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidSchedule(format!("profile {i} is empty")));
            }
            if let Some(b) = row.iter().find(|b| !(**b >= 0.0)) {
                return Err(Error::InvalidSchedule(format!("profile {i} has invalid beta {b}")));
            }
        }
        Ok(())
    }

    pub fn beta(&self, neuron: usize, t: usize) -> f64 {
        let profile = match self {
            AnnealSchedule::Global(p) => p,
            AnnealSchedule::PerNeuron(rows) => &rows[neuron],
        };
        profile[t.min(profile.len() - 1)]
    }
}

/// One sequential heat-bath sweep at schedule index `t`.
pub fn sweep<R: Rng + ?Sized>(problem: &IsingProblem, state: &mut [Spin], schedule: &AnnealSchedule, t: usize, rng: &mut R) {
    for i in 0..problem.n {
        let field = local_field(problem, state, i);
        // β = ∞ with zero field is a fair coin, not NaN.
        let bias = if field == 0.0 { 0.0 } else { schedule.beta(i, t) * field };
        state[i] = bsn_sample(bias, rng);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub best_state: Vec<Spin>,
    pub best_energy: f64,
    /// Energy after each sweep.
    #[serde(skip)]
    pub energy_trace: Vec<f64>,
    pub sweeps: usize,
    pub seed: u64,
}

fn random_state(n: usize, rng: &mut SimRng) -> Vec<Spin> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// Anneals from a seeded random start.
pub fn anneal(problem: &IsingProblem, schedule: &AnnealSchedule, sweeps: usize, seed: u64) -> Result<AnnealResult> {
    let mut rng = seeded(seed);
    let initial = random_state(problem.n, &mut rng);
    anneal_with_rng(problem, schedule, sweeps, seed, initial, &mut rng)
}

/// Anneals from a given starting state.
pub fn anneal_from(
    problem: &IsingProblem,
    schedule: &AnnealSchedule,
    sweeps: usize,
    seed: u64,
    initial: Vec<Spin>,
) -> Result<AnnealResult> {
    let mut rng = seeded(seed);
    anneal_with_rng(problem, schedule, sweeps, seed, initial, &mut rng)
}

fn anneal_with_rng(
    problem: &IsingProblem,
    schedule: &AnnealSchedule,
    sweeps: usize,
    seed: u64,
    mut state: Vec<Spin>,
    rng: &mut SimRng,
) -> Result<AnnealResult> {
    if sweeps == 0 {
        return Err(Error::invalid("sweeps", "must be >= 1"));
    }
    if state.len() != problem.n || state.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidProblem("initial state must be a ±1 vector of length n".into()));
    }
    schedule.validate(Some(problem.n))?;
    let mut best_energy = problem.energy(&state);
    let mut best_state = state.clone();
    let mut trace = Vec::with_capacity(sweeps);
    for t in 1..=sweeps {
        sweep(problem, &mut state, schedule, t, rng);
        let e = problem.energy(&state);
        trace.push(e);
        if e < best_energy {
            best_energy = e;
            best_state.copy_from_slice(&state);
        }
    }
    Ok(AnnealResult {
        best_state,
        best_energy,
        energy_trace: trace,
        sweeps,
        seed,
    })
}

/// Independent restarts in parallel; the lowest energy wins, ties go to the
/// lowest seed.
pub fn anneal_restarts(problem: &IsingProblem, schedule: &AnnealSchedule, sweeps: usize, seeds: &[u64]) -> Result<AnnealResult> {
    if seeds.is_empty() {
        return Err(Error::invalid("seeds", "need at least one restart"));
    }
    let results: Vec<AnnealResult> = seeds
        .par_iter()
        .map(|&seed| anneal(problem, schedule, sweeps, seed))
        .collect::<Result<_>>()?;
    Ok(results
        .into_iter()
        .min_by(|a, b| a.best_energy.total_cmp(&b.best_energy).then(a.seed.cmp(&b.seed)))
        .expect("nonempty"))
}

/// Exhaustive ground state. Ties resolve to the lexicographically smallest
/// state with −1 < +1.
pub fn brute_force(problem: &IsingProblem) -> Result<(Vec<Spin>, f64)> {
    let n = problem.n;
    if n > MAX_ORACLE_SPINS {
        return Err(Error::InstanceTooLarge {
            n,
            max: MAX_ORACLE_SPINS,
        });
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let scale = 1.0 + problem.couplings.iter().map(|v| v.abs()).sum::<f64>() + problem.biases.iter().map(|v| v.abs()).sum::<f64>();
    let tie = 1e-9 * scale;

    // Gray-code walk with incremental local fields. Spin 0 is the most
    // significant bit, so integer order is lexicographic order.
    let to_state = |code: u64| -> Vec<Spin> { (0..n).map(|i| if code >> (n - 1 - i) & 1 == 1 { 1 } else { -1 }).collect() };
    let mut state = vec![-1 as Spin; n];
    let mut fields: Vec<f64> = (0..n).map(|i| local_field(problem, &state, i)).collect();
    let mut energy = problem.energy(&state);
    let mut candidates: Vec<u64> = vec![0];
    let mut best = energy;
    for k in 1u64..(1u64 << n) {
        let bit = k.trailing_zeros() as usize;
        let spin = n - 1 - bit;
        let old = state[spin] as f64;
        // Flipping s_i changes E by 2·s_i·I_i.
        energy += 2.0 * old * fields[spin];
        state[spin] = -state[spin];
        let delta = -2.0 * old;
        for j in 0..n {
            fields[j] += problem.coupling(j, spin) * delta;
        }
        if energy < best - tie {
            best = energy;
            candidates.clear();
            candidates.push(k ^ (k >> 1));
        } else if energy <= best + tie {
            candidates.push(k ^ (k >> 1));
        }
    }
    // Recompute exactly and keep the lowest, then the smallest code.
    let (code, exact) = candidates
        .into_iter()
        .map(|c| (c, problem.energy(&to_state(c))))
        .min_by(|a, b| {
            if (a.1 - b.1).abs() <= tie {
                a.0.cmp(&b.0)
            } else {
                a.1.total_cmp(&b.1)
            }
        })
        .expect("nonempty");
    Ok((to_state(code), exact))
}

pub fn write_trace_csv<W: Write>(mut out: W, trace: &[f64]) -> std::io::Result<()> {
    writeln!(out, "sweep,energy")?;
    for (t, e) in trace.iter().enumerate() {
        writeln!(out, "{},{}", t + 1, fmt_f64(*e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn ferro2() -> IsingProblem {
        IsingProblem::from_edges(2, &[(0, 1, 1.0)], vec![0.0, 0.0]).unwrap()
    }

    fn random_problem(n: usize, seed: u64) -> IsingProblem {
        let mut rng = seeded(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, rng.random::<f64>() * 2.0 - 1.0));
            }
        }
        let h = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        IsingProblem::from_edges(n, &edges, h).unwrap()
    }

    #[test]
    fn local_field_cases() {
        let empty = IsingProblem::from_edges(3, &[], vec![0.0; 3]).unwrap();
        assert_eq!(local_field(&empty, &[1, -1, 1], 1), 0.0);
        assert_eq!(local_field(&ferro2(), &[1, 1], 0), 1.0);
    }

    #[test]
    fn local_field_matches_matrix_vector_product() {
        let p = random_problem(5, 1);
        let s: Vec<Spin> = vec![1, -1, -1, 1, 1];
        for i in 0..5 {
            let mut direct = p.bias(i);
            for j in 0..5 {
                direct += p.coupling(i, j) * s[j] as f64;
            }
            assert!((local_field(&p, &s, i) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_malformed_problems() {
        assert!(IsingProblem::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]], vec![0.0; 2]).is_err());
        assert!(IsingProblem::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0; 2]).is_err());
        assert!(IsingProblem::from_edges(2, &[(0, 0, 1.0)], vec![0.0; 2]).is_err());
    }

    #[test]
    fn brute_force_small_cases() {
        let single = IsingProblem::from_edges(1, &[], vec![1.0]).unwrap();
        assert_eq!(brute_force(&single).unwrap(), (vec![1], -1.0));
        let (state, e) = brute_force(&ferro2()).unwrap();
        assert_eq!(state, vec![-1, -1]);
        assert_eq!(e, -1.0);
        let big = IsingProblem::from_edges(25, &[], vec![0.0; 25]).unwrap();
        assert!(matches!(brute_force(&big), Err(Error::InstanceTooLarge { .. })));
    }

    #[test]
    fn brute_force_matches_naive_enumeration() {
        for seed in 0..5 {
            let p = random_problem(8, seed);
            let mut best = f64::MAX;
            for code in 0u32..256 {
                let s: Vec<Spin> = (0..8).map(|i| if code >> (7 - i) & 1 == 1 { 1 } else { -1 }).collect();
                best = best.min(p.energy(&s));
            }
            let (state, e) = brute_force(&p).unwrap();
            assert!((e - best).abs() < 1e-12);
            assert!((p.energy(&state) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_beta_sweep_is_uniform() {
        let p = random_problem(4, 2);
        let schedule = AnnealSchedule::Global(vec![0.0]);
        let mut rng = seeded(3);
        let mut state = vec![1; 4];
        let mut ups = [0usize; 4];
        let n = 50_000;
        for _ in 0..n {
            sweep(&p, &mut state, &schedule, 0, &mut rng);
            for i in 0..4 {
                ups[i] += (state[i] == 1) as usize;
            }
        }
        for u in ups {
            assert!((u as f64 / n as f64 - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn infinite_beta_is_greedy_and_freezes_local_minima() {
        let p = random_problem(6, 4);
        let (ground, _) = brute_force(&p).unwrap();
        let frozen = AnnealSchedule::Global(vec![f64::INFINITY]);
        let result = anneal_from(&p, &frozen, 50, 1, ground.clone()).unwrap();
        assert_eq!(result.best_state, ground);
        assert!(result.energy_trace.iter().all(|&e| e == result.energy_trace[0]));
    }

    #[test]
    fn schedule_builders() {
        match AnnealSchedule::global_linear(0.0, 0.0, 10).unwrap() {
            AnnealSchedule::Global(p) => assert!(p.iter().all(|&b| b == 0.0)),
            _ => unreachable!(),
        }
        assert!(AnnealSchedule::per_neuron_table(vec![vec![1.0, -1.0]]).is_err());
        assert!(AnnealSchedule::per_neuron_table(vec![vec![f64::NAN]]).is_err());
        let s = AnnealSchedule::global_linear(0.0, 3.0, 3).unwrap();
        assert_eq!(s.beta(0, 0), 0.0);
        assert_eq!(s.beta(5, 3), 3.0);
        assert_eq!(s.beta(5, 100), 3.0);
    }

    #[test]
    fn stress_profile_schedules() {
        let spec = MagnetSpec::cobalt_ellipse();
        let sc = critical_stress(&spec).unwrap();
        let flat = AnnealSchedule::from_stress_profile(&[spec], &[vec![sc; 5], vec![sc; 5]]).unwrap();
        for i in 0..2 {
            for t in 0..5 {
                assert!(flat.beta(i, t) < 1e-9);
            }
        }
        let ramp: Vec<f64> = (0..=10).map(|k| sc * (1.0 - k as f64 / 10.0)).collect();
        let s = AnnealSchedule::from_stress_profile(&[spec], &[ramp]).unwrap();
        for t in 0..10 {
            assert!(s.beta(0, t + 1) > s.beta(0, t));
        }
        assert!((s.beta(0, 10) - 3.5087).abs() < 1e-3);
        assert!(AnnealSchedule::from_stress_profile(&[spec], &[vec![1.2 * sc]]).is_err());
    }

    #[test]
    fn parse_and_write_round_trip() {
        let text = "# example\n# n 4\n# h 2 0.5\n0 1 1.5\n1 2 -2\n2 3 0.25\n";
        let p = IsingProblem::parse(std::io::Cursor::new(text)).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.coupling(1, 0), 1.5);
        assert_eq!(p.bias(2), 0.5);
        let mut buf = Vec::new();
        p.write(&mut buf).unwrap();
        let back = IsingProblem::parse(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, p);
        match IsingProblem::parse(std::io::Cursor::new("0 1\n")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn restarts_pick_lowest_energy_then_seed() {
        let p = ferro2();
        let s = AnnealSchedule::global_linear(0.0, 3.0, 100).unwrap();
        let r = anneal_restarts(&p, &s, 100, &[9, 3, 5]).unwrap();
        assert_eq!(r.best_energy, -1.0);
        assert_eq!(r.seed, 3);
    }
}
