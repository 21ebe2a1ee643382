//! Grids of seeded instances × controls × `φ` × schedules, run in parallel.

use std::io::Write;
use std::time::Instant;

use feasik_core::instances::random_polyhedral;
use feasik_core::{CounterMode, RunConfig, Solver};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ControlDoc, CounterModeDoc, OverrelaxationDoc, PhiDoc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Number of seeded random polyhedral instances.
    pub instances: u64,
    #[serde(default)]
    pub first_seed: u64,
    pub controls: Vec<ControlDoc>,
    pub phi: Vec<PhiDoc>,
    pub schedules: Vec<OverrelaxationDoc>,
    #[serde(default)]
    pub counter_mode: CounterModeDoc,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
    /// Seed of the random controls.
    #[serde(default)]
    pub seed: u64,
}

fn default_max_iter() -> u64 {
    100_000
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("grid is empty")]
    Empty,
    #[error("instance {seed}: {message}")]
    Run { seed: u64, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub instance: u64,
    pub control: &'static str,
    pub phi: &'static str,
    pub schedule: String,
    pub k_feasible: Option<u64>,
    pub corrections: u64,
    pub wall_time_ms: f64,
}

impl GridConfig {
    pub fn len(&self) -> u64 {
        self.instances * (self.controls.len() * self.phi.len() * self.schedules.len()) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn run_one(
    grid: &GridConfig,
    seed: u64,
    control: &ControlDoc,
    phi: PhiDoc,
    schedule: &OverrelaxationDoc,
) -> Result<SweepRow, SweepError> {
    let err = |e: &dyn std::fmt::Display| SweepError::Run {
        seed,
        message: e.to_string(),
    };
    let inst = random_polyhedral(seed).map_err(|e| err(&e))?;
    let spec = control
        .build(inst.problem.cardinality(), grid.seed ^ seed)
        .map_err(|e| err(&e))?;
    let mut cfg = RunConfig::new(inst.problem, spec, inst.x0).map_err(|e| err(&e))?;
    cfg.phi = phi.build();
    cfg.overrelaxation = schedule.build();
    cfg.counter_mode = match grid.counter_mode {
        CounterModeDoc::Bracketed => CounterMode::Bracketed,
        CounterModeDoc::Raw => CounterMode::Raw,
    };
    cfg.max_iter = grid.max_iter;
    cfg.keep_trace = false;
    let start = Instant::now();
    let res = Solver::new(cfg).and_then(|s| s.solve()).map_err(|e| err(&e))?;
    Ok(SweepRow {
        instance: seed,
        control: control.label(),
        phi: phi.label(),
        schedule: schedule.label(),
        k_feasible: res.k_feasible(),
        corrections: res.corrections,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every grid point; rows come back in grid order regardless of
/// scheduling.
pub fn run_grid(grid: &GridConfig) -> Result<Vec<SweepRow>, SweepError> {
    if grid.is_empty() {
        return Err(SweepError::Empty);
    }
    let mut points = Vec::new();
    for seed in grid.first_seed..grid.first_seed + grid.instances {
        for control in &grid.controls {
            for &phi in &grid.phi {
                for schedule in &grid.schedules {
                    points.push((seed, control, phi, schedule));
                }
            }
        }
    }
    points
        .into_par_iter()
        .map(|(seed, control, phi, schedule)| run_one(grid, seed, control, phi, schedule))
        .collect()
}

/// `timing == false` writes `-` for the wall time so reruns are identical.
pub fn write_rows<W: Write>(out: W, rows: &[SweepRow], timing: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instance", "control", "phi", "schedule", "k_feasible", "corrections", "wall_time_ms"])?;
    for r in rows {
        w.write_record([
            r.instance.to_string(),
            r.control.to_string(),
            r.phi.to_string(),
            r.schedule.clone(),
            r.k_feasible.map_or_else(|| "MAX".to_string(), |k| k.to_string()),
            r.corrections.to_string(),
            if timing { format!("{:.3}", r.wall_time_ms) } else { "-".to_string() },
        ])?;
    }
    w.flush()?;
    Ok(())
}
