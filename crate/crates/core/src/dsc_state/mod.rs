//! Time-staggered storage of node and port fields and the two-step
//! update cycle.
//!
//! Ports live at integer multiples `m * tau`, nodes at `(m + 1/2) * tau`.
//! Between cycles a [`ScalarField`] holds:
//!
//! | array       | time        |
//! |-------------|-------------|
//! | `port`      | `t`         |
//! | `port_prev` | `t - tau`   |
//! | `node`      | `t + tau/2` |
//! | `node_prev` | `t - tau/2` |
//!
//! `grad_b` holds the node-direction differences of each port at `t`.

pub mod checkpoint;
pub mod scatter;

pub use scatter::{decompose_scattering, node_boundary_map, Channel, ScatterDiag, ScatterTracker};

use crate::error::{DscError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub tau: f64,
    /// Ports are at `time`, nodes at `time + tau / 2`.
    pub step: u64,
    pub time: f64,
}

impl TimeGrid {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(DscError::InvalidParameter(format!("timestep must be > 0, got {tau}")));
        }
        Ok(Self {
            tau,
            step: 0,
            time: 0.0,
        })
    }

    pub fn port_time(&self) -> f64 {
        self.time
    }

    pub fn node_time(&self) -> f64 {
        self.time + 0.5 * self.tau
    }

    fn advance(&mut self) {
        self.step += 1;
        self.time += self.tau;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum Field {
    T = 0,
    Ux = 1,
    Uy = 2,
    Uz = 3,
    P = 4,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::T, Field::Ux, Field::Uy, Field::Uz, Field::P];
    pub const VELOCITY: [Field; 3] = [Field::Ux, Field::Uy, Field::Uz];

    pub fn name(self) -> &'static str {
        match self {
            Field::T => "T",
            Field::Ux => "u_x",
            Field::Uy => "u_y",
            Field::Uz => "u_z",
            Field::P => "p",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub node: Vec<f64>,
    pub node_prev: Vec<f64>,
    pub port: Vec<[f64; 6]>,
    pub port_prev: Vec<[f64; 6]>,
    pub grad_b: Vec<[[f64; 3]; 6]>,
}

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        Self {
            node: vec![0.0; n],
            node_prev: vec![0.0; n],
            port: vec![[0.0; 6]; n],
            port_prev: vec![[0.0; 6]; n],
            grad_b: vec![[[0.0; 3]; 6]; n],
        }
    }

    /// Same value on every node and port, zero differences.
    pub fn uniform(n: usize, value: f64) -> Self {
        Self {
            node: vec![value; n],
            node_prev: vec![value; n],
            port: vec![[value; 6]; n],
            port_prev: vec![[value; 6]; n],
            grad_b: vec![[[0.0; 3]; 6]; n],
        }
    }

    fn first_non_finite(&self) -> Option<usize> {
        (0..self.node.len()).find(|&c| {
            !self.node[c].is_finite()
                || self.port[c].iter().any(|v| !v.is_finite())
                || self.grad_b[c].iter().flatten().any(|v| !v.is_finite())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldStore {
    pub fields: [ScalarField; 5],
}

impl FieldStore {
    /// All fields zero, matching the zero history before `t = 0`.
    pub fn zeros(n_cells: usize) -> Self {
        Self {
            fields: std::array::from_fn(|_| ScalarField::zeros(n_cells)),
        }
    }

    pub fn n_cells(&self) -> usize {
        self.fields[0].node.len()
    }

    #[inline]
    pub fn get(&self, f: Field) -> &ScalarField {
        &self.fields[f as usize]
    }

    #[inline]
    pub fn get_mut(&mut self, f: Field) -> &mut ScalarField {
        &mut self.fields[f as usize]
    }

    pub fn node_velocity(&self, cell: usize) -> [f64; 3] {
        Field::VELOCITY.map(|f| self.get(f).node[cell])
    }

    pub fn port_velocity(&self, cell: usize, face: usize) -> [f64; 3] {
        Field::VELOCITY.map(|f| self.get(f).port[cell][face])
    }

    pub fn set_port_velocity(&mut self, cell: usize, face: usize, u: [f64; 3]) {
        for (k, f) in Field::VELOCITY.into_iter().enumerate() {
            self.get_mut(f).port[cell][face] = u[k];
        }
    }

    /// `port_prev <- port` for every field.
    pub fn rotate_ports(&mut self) {
        for f in &mut self.fields {
            f.port_prev.clone_from(&f.port);
        }
    }

    /// `node_prev <- node` for every field.
    pub fn rotate_nodes(&mut self) {
        for f in &mut self.fields {
            f.node_prev.clone_from(&f.node);
        }
    }

    pub fn check_finite(&self, step: u64) -> Result<()> {
        for f in Field::ALL {
            if let Some(cell) = self.get(f).first_non_finite() {
                return Err(DscError::NonFiniteState {
                    field: f.name(),
                    cell,
                    step,
                });
            }
        }
        Ok(())
    }
}

/// The sub-operations of one cycle. Each phase sees the grid before it is
/// advanced: connection produces ports at `time + tau`, reflection nodes
/// at `time + 3 tau / 2`.
pub trait CyclePhases {
    /// Port update from `node` and `port_prev`, boundary ports included.
    fn connect(&mut self, store: &mut FieldStore, grid: &TimeGrid) -> Result<()>;
    fn clean(&mut self, store: &mut FieldStore, grid: &TimeGrid) -> Result<()>;
    fn enforce_boundary(&mut self, store: &mut FieldStore, grid: &TimeGrid) -> Result<()>;
    fn smooth(&mut self, _store: &mut FieldStore, _grid: &TimeGrid) -> Result<()> {
        Ok(())
    }
    /// Node update from `node_prev` and `port`.
    fn reflect(&mut self, store: &mut FieldStore, grid: &TimeGrid) -> Result<()>;
}

/// Advances the state by one timestep:
/// connection, cleaning, boundary, smoothing, reflection.
pub fn step_cycle(store: &mut FieldStore, grid: &mut TimeGrid, phases: &mut impl CyclePhases) -> Result<()> {
    store.rotate_ports();
    phases.connect(store, grid)?;
    phases.clean(store, grid)?;
    phases.enforce_boundary(store, grid)?;
    phases.smooth(store, grid)?;
    store.rotate_nodes();
    phases.reflect(store, grid)?;
    store.check_finite(grid.step + 1)?;
    grid.advance();
    Ok(())
}
