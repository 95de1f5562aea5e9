//! Subcommand bodies. Each writes its outputs into the run directory.

use std::io::{BufReader, Write};
use std::path::PathBuf;

use rsn_core::analysis::{classify_series, dwell_times_of, histogram_of, write_histogram_csv};
use rsn_core::anneal::{anneal_restarts, write_trace_csv, AnnealSchedule, IsingProblem};
use rsn_core::energetics::{equalize_barriers, plan_hierarchy, reconfig_report, write_hierarchy_csv};
use rsn_core::magnet::{barrier_height, landscape_table, theta_grid, write_landscape_csv, MagnetSpec, StressState};
use rsn_core::rng::derive_seed;
use rsn_core::sllg::{ensemble, read_trajectory_csv, simulate, write_trajectory_csv};
use rsn_core::{fmt_f64, Error};

use crate::config::{ConfigError, RunConfig, ScheduleSection};
use crate::output::{CliError, OutputDir};

fn magnet(config: &RunConfig) -> Result<MagnetSpec, CliError> {
    config
        .magnet
        .as_ref()
        .map(|m| m.spec())
        .ok_or_else(|| ConfigError::at_key("magnet", "this command needs a [magnet] section").into())
}

fn io_err(out: &OutputDir, name: &str) -> impl Fn(std::io::Error) -> CliError {
    let path = out.root().join(name);
    move |e| CliError::io(path.clone(), e)
}

pub fn landscape(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = magnet(config)?;
    let stresses: Vec<f64> = config.landscape.stresses.iter().map(|q| q.si).collect();
    let rows = landscape_table(&spec, &stresses, &theta_grid(config.landscape.theta_points))?;
    let err = io_err(out, "landscape.csv");
    out.write("landscape.csv", |w| write_landscape_csv(w, &rows).map_err(err))?;

    let summary: Vec<serde_json::Value> = stresses
        .iter()
        .map(|&s| {
            let barrier = barrier_height(&spec, StressState::uniaxial(s, &spec));
            serde_json::json!({
                "stress_Pa": s,
                "barrier_J": barrier,
                "barrier_kT": barrier / spec.thermal_energy(),
                "easy_axis": format!("{:?}", rsn_core::magnet::easy_axis(&spec, StressState::uniaxial(s, &spec))),
            })
        })
        .collect();
    let critical = rsn_core::magnet::critical_stress(&spec).ok();
    let json = serde_json::json!({ "critical_stress_Pa": critical, "barriers": summary });
    out.write_text("barriers.json", &format!("{}\n", serde_json::to_string_pretty(&json).expect("json")))
}

pub fn simulate_cmd(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = magnet(config)?;
    let sim = config.simulation.config(config.run.seed);
    let runs = config.simulation.runs;
    let trajectories = if runs == 1 {
        vec![simulate(&spec, &sim)?]
    } else {
        ensemble(&spec, &sim, runs, config.run.seed)?
    };
    for (i, traj) in trajectories.iter().enumerate() {
        let name = if runs == 1 {
            "trajectory.csv".to_string()
        } else {
            format!("trajectory_{i:03}.csv")
        };
        out.write(&name, |w| Ok(write_trajectory_csv(w, traj)?))?;
    }
    Ok(())
}

pub fn analyze(config: &RunConfig, input: Option<PathBuf>, out: &mut OutputDir) -> Result<(), CliError> {
    let path = input
        .or_else(|| config.analysis.input.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| out.root().join("trajectory.csv"));
    let file = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let traj = read_trajectory_csv(BufReader::new(file))?;
    let a = &config.analysis;
    let my = traj.my();
    let interval = traj.sample_interval();
    let report = classify_series(&my, interval, &a.thresholds())?;
    let dwells = dwell_times_of(&my, interval, a.dwell_upper, a.dwell_lower)?;
    out.write_text("report.json", &format!("{}\n", report.to_json()?))?;
    let hist = histogram_of(&my, a.bins)?;
    let err = io_err(out, "histogram.csv");
    out.write("histogram.csv", |w| write_histogram_csv(w, &hist).map_err(err))?;
    let err = io_err(out, "dwells.csv");
    out.write("dwells.csv", |w| {
        (|| {
            writeln!(w, "dwell_s")?;
            for d in &dwells.complete {
                writeln!(w, "{}", fmt_f64(*d))?;
            }
            Ok(())
        })()
        .map_err(err)
    })
}

pub fn reconfig_cost(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = magnet(config)?;
    let report = reconfig_report(&config.piezo.stack(), &spec, config.piezo.stress.si)?;
    let json = serde_json::json!({ "stress_Pa": config.piezo.stress.si, "report": report });
    out.write_text("reconfig.json", &format!("{}\n", serde_json::to_string_pretty(&json).expect("json")))
}

pub fn retention_plan(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let spec = magnet(config)?;
    let r = &config.retention;
    let rows = plan_hierarchy(&spec, &r.tiers(), r.attempt_time.si, r.policy())?;
    let err = io_err(out, "hierarchy.csv");
    out.write("hierarchy.csv", |w| write_hierarchy_csv(w, &rows).map_err(err))?;
    if let Some(eq) = &r.equalize {
        let specs: Vec<MagnetSpec> = eq
            .minor_axes
            .iter()
            .map(|b| MagnetSpec {
                minor_axis: b.si,
                ..spec
            })
            .collect();
        let target = eq.target_barrier_kt * spec.thermal_energy();
        let stresses = equalize_barriers(&specs, target, r.policy())?;
        let err = io_err(out, "equalize.csv");
        out.write("equalize.csv", |w| {
            (|| {
                writeln!(w, "device,minor_axis_m,natural_barrier_J,stress_Pa,barrier_J")?;
                for (i, (s, sigma)) in specs.iter().zip(&stresses).enumerate() {
                    writeln!(
                        w,
                        "{i},{},{},{},{}",
                        fmt_f64(s.minor_axis),
                        fmt_f64(barrier_height(s, StressState::zero())),
                        fmt_f64(*sigma),
                        fmt_f64(barrier_height(s, StressState::uniaxial(*sigma, s)))
                    )?;
                }
                Ok(())
            })()
            .map_err(err)
        })?;
    }
    Ok(())
}

pub fn anneal_cmd(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let a = config
        .anneal
        .as_ref()
        .ok_or_else(|| ConfigError::at_key("anneal", "this command needs an [anneal] section"))?;
    let edges = a.edges.as_deref().unwrap_or_default();
    let problem = IsingProblem::parse(std::io::Cursor::new(edges))?;
    let schedule = match &a.schedule {
        ScheduleSection::Linear { beta_start, beta_end } => AnnealSchedule::global_linear(*beta_start, *beta_end, a.sweeps)?,
        ScheduleSection::StressRamp {
            stress_start,
            stress_end,
        } => {
            let spec = magnet(config)?;
            let ramp: Vec<f64> = (0..=a.sweeps)
                .map(|t| stress_start.si + (stress_end.si - stress_start.si) * t as f64 / a.sweeps as f64)
                .collect();
            AnnealSchedule::from_stress_profile(&[spec], &vec![ramp; problem.len()])?
        }
        ScheduleSection::Table { rows } => AnnealSchedule::per_neuron_table(rows.clone())?,
    };
    let seeds: Vec<u64> = (0..a.restarts as u64).map(|k| derive_seed(config.run.seed, k)).collect();
    let result = anneal_restarts(&problem, &schedule, a.sweeps, &seeds).map_err(|e| match e {
        Error::InvalidSchedule(m) => CliError::Config(ConfigError::at_key("anneal.schedule", m)),
        other => other.into(),
    })?;
    let json = serde_json::json!({
        "best_energy": result.best_energy,
        "best_state": result.best_state,
        "seed": result.seed,
        "sweeps": result.sweeps,
        "restarts": a.restarts,
    });
    out.write_text("anneal.json", &format!("{}\n", serde_json::to_string_pretty(&json).expect("json")))?;
    let err = io_err(out, "trace.csv");
    out.write("trace.csv", |w| write_trace_csv(w, &result.energy_trace).map_err(err))
}
