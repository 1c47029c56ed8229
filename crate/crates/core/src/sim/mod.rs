//! Configuration, time loop and output.

pub mod config;
pub mod output;
pub mod runner;

use std::path::Path;

pub use config::{Setup, SimConfig, TauMode};
pub use output::{write_vtk, DiagnosticsRecord, CSV_HEADER};
pub use runner::{run_loop, Model, RunSummary, Simulation, SteadyDetector, StopReason};

use crate::dsc_state::checkpoint;
use crate::error::Result;

/// Loads a configuration file and runs it, optionally continuing from a
/// checkpoint. Relative paths in the file are resolved against its
/// directory.
pub fn run_file(config: &Path, resume: Option<&Path>) -> Result<RunSummary> {
    let cfg = SimConfig::load(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let setup = cfg.setup(base)?;
    let mut sim = Simulation::from_setup(&setup)?;
    if let Some(ckpt) = resume {
        let (store, grid) = checkpoint::load(ckpt)?;
        sim.restore(store, grid)?;
    }
    run_loop(&mut sim, &setup, base, resume.is_some())
}
