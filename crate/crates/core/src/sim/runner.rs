//! Time loop orchestration.

use std::path::{Path, PathBuf};

use crate::boundary::{assign_boundary_ports, enforce_velocity_bc, BoundaryCondition, VelocityBc};
use crate::boussinesq::{reflect_all, stable_timestep, FluidProperties, LesSmoother};
use crate::dsc_state::{checkpoint, step_cycle, CyclePhases, Field, FieldStore, ScalarField, TimeGrid};
use crate::error::{DscError, Result};
use crate::gradops::connect_interior;
use crate::hexmesh::MeshTopology;
use crate::pressure::{clean_divergence, CleaningReport, SorConfig};

use super::config::{Setup, SteadySpec, TauMode};
use super::output::{write_vtk, DiagnosticsRecord, DiagnosticsWriter};

/// Physics of one cycle; the state lives in a separate [`FieldStore`].
#[derive(Debug, Clone)]
pub struct Model {
    pub topo: MeshTopology,
    pub props: FluidProperties,
    pub bcs: Vec<BoundaryCondition>,
    /// Heat source per cell, K/s.
    pub heat: Vec<f64>,
    pub sor: SorConfig,
    pub les: LesSmoother,
    pub nodal_pressure_gradient: bool,
    pub cleaning: bool,
    pub last_cleaning: CleaningReport,
}

impl Model {
    pub fn new(topo: MeshTopology, props: FluidProperties, bcs: Vec<BoundaryCondition>) -> Result<Self> {
        props.validate()?;
        if bcs.len() != topo.patches().len() {
            return Err(DscError::Config(format!(
                "{} boundary conditions for {} patches",
                bcs.len(),
                topo.patches().len()
            )));
        }
        let n = topo.n_cells();
        Ok(Self {
            topo,
            props,
            bcs,
            heat: vec![0.0; n],
            sor: SorConfig::default(),
            les: LesSmoother::default(),
            nodal_pressure_gradient: true,
            cleaning: true,
            last_cleaning: CleaningReport::default(),
        })
    }

    fn walls(&self) -> Vec<VelocityBc> {
        self.bcs.iter().map(|b| b.velocity).collect()
    }
}

impl CyclePhases for Model {
    fn connect(&mut self, store: &mut FieldStore, _grid: &TimeGrid) -> Result<()> {
        for f in [Field::T, Field::Ux, Field::Uy, Field::Uz] {
            connect_interior(&self.topo, store.get_mut(f))?;
        }
        assign_boundary_ports(&self.topo, &self.bcs, store)
    }

    fn clean(&mut self, store: &mut FieldStore, grid: &TimeGrid) -> Result<()> {
        if !self.cleaning {
            self.last_cleaning = CleaningReport::default();
            return Ok(());
        }
        let walls = self.walls();
        self.last_cleaning = clean_divergence(&self.topo, store, &self.sor, grid.tau, self.props.rho_inf, &walls)?;
        Ok(())
    }

    fn enforce_boundary(&mut self, store: &mut FieldStore, _grid: &TimeGrid) -> Result<()> {
        enforce_velocity_bc(&self.topo, &self.bcs, store);
        Ok(())
    }

    fn smooth(&mut self, store: &mut FieldStore, grid: &TimeGrid) -> Result<()> {
        self.les.apply(&self.topo, store, grid.step + 1);
        Ok(())
    }

    fn reflect(&mut self, store: &mut FieldStore, grid: &TimeGrid) -> Result<()> {
        reflect_all(
            &self.topo,
            store,
            &self.props,
            &self.heat,
            grid.tau,
            self.nodal_pressure_gradient,
        );
        Ok(())
    }
}

/// Model plus state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub model: Model,
    pub store: FieldStore,
    pub grid: TimeGrid,
}

impl Simulation {
    /// Uniform initial state at all time levels.
    pub fn new(model: Model, tau: f64, temperature: f64, velocity: [f64; 3], pressure: f64) -> Result<Self> {
        let n = model.topo.n_cells();
        let mut store = FieldStore::zeros(n);
        *store.get_mut(Field::T) = ScalarField::uniform(n, temperature);
        for (k, f) in Field::VELOCITY.into_iter().enumerate() {
            *store.get_mut(f) = ScalarField::uniform(n, velocity[k]);
        }
        *store.get_mut(Field::P) = ScalarField::uniform(n, pressure);
        Ok(Self {
            model,
            store,
            grid: TimeGrid::new(tau)?,
        })
    }

    pub fn from_setup(setup: &Setup) -> Result<Self> {
        let mut model = Model::new(setup.topo.clone(), setup.props, setup.bcs.clone())?;
        model.heat = setup.heat.clone();
        model.sor = setup.sor;
        model.les = setup.les;
        model.nodal_pressure_gradient = setup.nodal_pressure_gradient;
        model.cleaning = setup.cleaning;
        let tau = match setup.tau {
            TauMode::Fixed(t) => t,
            TauMode::Auto { safety, u_estimate } => {
                let u0 = setup.initial_velocity.iter().map(|x| x * x).sum::<f64>().sqrt();
                stable_timestep(&model.topo, &model.props, u0.max(u_estimate), safety)?
            }
        };
        Self::new(
            model,
            tau,
            setup.initial_temperature,
            setup.initial_velocity,
            setup.initial_pressure,
        )
    }

    /// Replaces state and clock with a checkpoint.
    pub fn restore(&mut self, store: FieldStore, grid: TimeGrid) -> Result<()> {
        if store.n_cells() != self.model.topo.n_cells() {
            return Err(DscError::Checkpoint(format!(
                "checkpoint has {} cells, mesh has {}",
                store.n_cells(),
                self.model.topo.n_cells()
            )));
        }
        self.store = store;
        self.grid = grid;
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let step = self.grid.step + 1;
        step_cycle(&mut self.store, &mut self.grid, &mut self.model).map_err(|e| match e {
            e @ DscError::AtStep { .. } => e,
            e => DscError::AtStep {
                step,
                source: Box::new(e),
            },
        })
    }

    pub fn thermal_content(&self) -> f64 {
        self.model
            .topo
            .geometry
            .iter()
            .zip(&self.store.get(Field::T).node)
            .map(|(g, t)| g.volume * t)
            .sum()
    }

    pub fn max_speed(&self) -> f64 {
        (0..self.store.n_cells())
            .map(|c| {
                let u = self.store.node_velocity(c);
                (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn diagnostics(&self) -> DiagnosticsRecord {
        let t = &self.store.get(Field::T).node;
        DiagnosticsRecord {
            step: self.grid.step,
            time: self.grid.time,
            max_u: self.max_speed(),
            max_t: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_t: t.iter().copied().fold(f64::INFINITY, f64::min),
            div_residual: self.model.last_cleaning.residual,
            sor_iters: self.model.last_cleaning.sweeps,
            thermal_content: self.thermal_content(),
        }
    }
}

/// Compares nodal T and u against a snapshot taken `window` steps earlier.
#[derive(Debug, Clone)]
pub struct SteadyDetector {
    spec: SteadySpec,
    reference: Option<(u64, Vec<f64>, Vec<[f64; 3]>)>,
    /// Last measured per-step relative change.
    pub last_change: Option<f64>,
}

impl SteadyDetector {
    pub fn new(spec: SteadySpec) -> Self {
        Self {
            spec,
            reference: None,
            last_change: None,
        }
    }

    fn snapshot(sim: &Simulation) -> (u64, Vec<f64>, Vec<[f64; 3]>) {
        let n = sim.store.n_cells();
        (
            sim.grid.step,
            sim.store.get(Field::T).node.clone(),
            (0..n).map(|c| sim.store.node_velocity(c)).collect(),
        )
    }

    /// Relative change per step: T scaled by its current span, u by the
    /// current maximum speed.
    pub fn change_rate(sim: &Simulation, since: u64, t_old: &[f64], u_old: &[[f64; 3]]) -> f64 {
        let t = &sim.store.get(Field::T).node;
        let (lo, hi) = t
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = hi - lo;
        let dt = t.iter().zip(t_old).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let du = u_old
            .iter()
            .enumerate()
            .map(|(c, o)| {
                let u = sim.store.node_velocity(c);
                ((u[0] - o[0]).powi(2) + (u[1] - o[1]).powi(2) + (u[2] - o[2]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        let umax = sim.max_speed();
        let rel = |d: f64, scale: f64| if d == 0.0 { 0.0 } else { d / scale };
        let steps = (sim.grid.step - since).max(1) as f64;
        rel(dt, span).max(rel(du, umax)) / steps
    }

    /// Returns true once the field change rate drops below the tolerance.
    pub fn observe(&mut self, sim: &Simulation) -> bool {
        let step = sim.grid.step;
        if step < self.spec.min_steps {
            return false;
        }
        match &self.reference {
            Some((since, t_old, u_old)) if step - since >= self.spec.window => {
                let rate = Self::change_rate(sim, *since, t_old, u_old);
                self.last_change = Some(rate);
                self.reference = Some(Self::snapshot(sim));
                rate < self.spec.tolerance
            }
            Some(_) => false,
            None => {
                self.reference = Some(Self::snapshot(sim));
                false
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxSteps,
    EndTime,
    Steady,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub time: f64,
    pub reason: StopReason,
    pub last: DiagnosticsRecord,
    pub diagnostics: PathBuf,
}

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

/// Runs `sim` until a stop condition holds, writing outputs under the
/// configured directory. `resumed` appends to an existing diagnostics file.
pub fn run_loop(sim: &mut Simulation, setup: &Setup, base: &Path, resumed: bool) -> Result<RunSummary> {
    let out = base.join(&setup.output.dir);
    std::fs::create_dir_all(&out)?;
    let diag_path = out.join(DIAGNOSTICS_FILE);
    let mut diag = DiagnosticsWriter::create(&diag_path, resumed)?;
    let mut steady = setup.steady.clone().map(SteadyDetector::new);
    let period = setup.output.period;
    let snapshot = |sim: &Simulation| -> Result<()> {
        let step = sim.grid.step;
        if setup.output.vtk {
            let title = format!("dsc step {step} time {}", sim.grid.time);
            write_vtk(
                &sim.model.topo,
                &sim.store,
                &out.join(format!("fields_{step:06}.vtk")),
                &title,
            )?;
        }
        if setup.output.checkpoint {
            checkpoint::save(&out.join(CHECKPOINT_FILE), &sim.store, &sim.grid)?;
        }
        Ok(())
    };
    let reached_end = |sim: &Simulation| -> Option<StopReason> {
        if setup.max_steps.is_some_and(|m| sim.grid.step >= m) {
            return Some(StopReason::MaxSteps);
        }
        // tolerate rounding in the accumulated clock
        if setup.end_time.is_some_and(|t| sim.grid.time >= t - 1e-9 * sim.grid.tau) {
            return Some(StopReason::EndTime);
        }
        None
    };
    let mut last_written = None;
    let reason = loop {
        if let Some(r) = reached_end(sim) {
            break r;
        }
        sim.step()?;
        if sim.grid.step.is_multiple_of(period) {
            diag.push(&sim.diagnostics())?;
            snapshot(sim)?;
            last_written = Some(sim.grid.step);
        }
        if let Some(d) = steady.as_mut() {
            if d.observe(sim) {
                break StopReason::Steady;
            }
        }
    };
    if last_written != Some(sim.grid.step) {
        diag.push(&sim.diagnostics())?;
        snapshot(sim)?;
    }
    Ok(RunSummary {
        steps: sim.grid.step,
        time: sim.grid.time,
        reason,
        last: sim.diagnostics(),
        diagnostics: diag_path,
    })
}
