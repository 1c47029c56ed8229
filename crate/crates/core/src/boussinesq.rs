//! Nodal reflection of temperature and velocity under the Oberbeck-Boussinesq
//! approximation, plus time step estimation and optional nodal smoothing.

use rayon::prelude::*;

use crate::dsc_state::{Field, FieldStore};
use crate::error::{DscError, Result};
use crate::gradops::nodal_gradient;
use crate::hexmesh::{CellGeometry, MeshTopology, Vec3};

/// Constant fluid properties. `mu` is the dynamic viscosity and `alpha`
/// the thermal diffusivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidProperties {
    pub alpha: f64,
    pub mu: f64,
    pub rho_inf: f64,
    pub beta: f64,
    pub g: Vec3,
    pub t_inf: f64,
}

impl FluidProperties {
    /// Dry air near 300 K.
    pub fn air() -> Self {
        Self {
            alpha: 2.2e-5,
            mu: 1.85e-5,
            rho_inf: 1.177,
            beta: 1.0 / 300.0,
            g: Vec3::new(0.0, -9.81, 0.0),
            t_inf: 300.0,
        }
    }

    pub fn nu(&self) -> f64 {
        self.mu / self.rho_inf
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("alpha", self.alpha, self.alpha >= 0.0),
            ("mu", self.mu, self.mu >= 0.0),
            ("rho_inf", self.rho_inf, self.rho_inf > 0.0),
            ("beta", self.beta, self.beta.is_finite()),
            ("t_inf", self.t_inf, self.t_inf.is_finite()),
        ];
        for (name, v, ok) in checks {
            if !ok || !v.is_finite() {
                return Err(DscError::InvalidParameter(format!("{name} = {v}")));
            }
        }
        if !self.g.iter().all(|x| x.is_finite()) {
            return Err(DscError::InvalidParameter("gravity must be finite".into()));
        }
        Ok(())
    }
}

/// Sum of `u_p . f` over the six ports of a cell.
pub fn boundary_integral(geom: &CellGeometry, store: &FieldStore, cell: usize) -> f64 {
    (0..6)
        .map(|i| Vec3::from(store.port_velocity(cell, i)).dot(&geom.face_vectors[i]))
        .sum()
}

pub fn nodal_divergence(geom: &CellGeometry, store: &FieldStore, cell: usize) -> f64 {
    boundary_integral(geom, store, cell) / geom.volume
}

/// New nodal temperature from the previous node value and the current
/// ports. `q` is the volumetric heat source in K/s.
pub fn reflect_temperature(
    geom: &CellGeometry,
    store: &FieldStore,
    cell: usize,
    props: &FluidProperties,
    q: f64,
    tau: f64,
) -> f64 {
    let t = store.get(Field::T);
    let t0 = t.node_prev[cell];
    let mut sum = 0.0;
    let mut div = 0.0;
    for i in 0..6 {
        let un = Vec3::from(store.port_velocity(cell, i)).dot(&geom.face_vectors[i]);
        div += un;
        sum += props.alpha * geom.flux(i, &t.grad_b[cell][i]) - t.port[cell][i] * un;
    }
    t0 + tau * (t0 * div / geom.volume + q) + tau / geom.volume * sum
}

/// New nodal velocity from the previous node values and the current ports.
pub fn reflect_velocity(
    geom: &CellGeometry,
    store: &FieldStore,
    cell: usize,
    props: &FluidProperties,
    tau: f64,
    with_pressure: bool,
) -> [f64; 3] {
    let t0 = store.get(Field::T).node_prev[cell];
    let mut un = [0.0; 6];
    for (i, v) in un.iter_mut().enumerate() {
        *v = Vec3::from(store.port_velocity(cell, i)).dot(&geom.face_vectors[i]);
    }
    let div = un.iter().sum::<f64>() / geom.volume;
    let grad_p = if with_pressure {
        nodal_gradient(geom, &store.get(Field::P).port[cell])
    } else {
        Vec3::zeros()
    };
    let nu = props.nu();
    let buoy = props.beta * (t0 - props.t_inf);
    std::array::from_fn(|k| {
        let f = store.get(Field::VELOCITY[k]);
        let uk = f.node_prev[cell];
        let mut visc = 0.0;
        let mut adv = 0.0;
        for i in 0..6 {
            visc += geom.flux(i, &f.grad_b[cell][i]);
            adv += f.port[cell][i] * un[i];
        }
        uk + tau * (uk * div - buoy * props.g[k] - grad_p[k] / props.rho_inf) + tau / geom.volume * (nu * visc - adv)
    })
}

/// Reflection of temperature and velocity in every cell; writes the node
/// arrays. `heat` is indexed by cell.
pub fn reflect_all(
    topo: &MeshTopology,
    store: &mut FieldStore,
    props: &FluidProperties,
    heat: &[f64],
    tau: f64,
    with_pressure: bool,
) {
    let snapshot: &FieldStore = store;
    let new: Vec<(f64, [f64; 3])> = (0..topo.n_cells())
        .into_par_iter()
        .map(|c| {
            let g = &topo.geometry[c];
            let q = heat.get(c).copied().unwrap_or(0.0);
            (
                reflect_temperature(g, snapshot, c, props, q, tau),
                reflect_velocity(g, snapshot, c, props, tau, with_pressure),
            )
        })
        .collect();
    for (c, (t, u)) in new.into_iter().enumerate() {
        store.get_mut(Field::T).node[c] = t;
        for k in 0..3 {
            store.get_mut(Field::VELOCITY[k]).node[c] = u[k];
        }
    }
}

/// Velocity floor used in the advective limit.
pub const U_FLOOR: f64 = 1e-6;

/// Time step from diffusive and advective limits over all cells, scaled by
/// `safety`.
pub fn stable_timestep(topo: &MeshTopology, props: &FluidProperties, u_max: f64, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(DscError::InvalidParameter(format!("safety factor {safety}")));
    }
    let nu = props.nu();
    let u = u_max.abs() + U_FLOOR;
    let tau = topo
        .geometry
        .iter()
        .map(|g| {
            let fmax = (0..6).map(|i| g.face_area(i)).fold(0.0, f64::max);
            let h = g.volume / fmax;
            let mut t = h / u;
            if props.alpha > 0.0 {
                t = t.min(h * h / (6.0 * props.alpha));
            }
            if nu > 0.0 {
                t = t.min(h * h / (6.0 * nu));
            }
            t
        })
        .fold(f64::INFINITY, f64::min);
    Ok(safety * tau)
}

/// Periodic blending of nodal velocity with the mean of face neighbors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LesSmoother {
    /// Cycles between applications; zero disables smoothing.
    pub period: u64,
    pub lambda: f64,
}

impl Default for LesSmoother {
    fn default() -> Self {
        Self { period: 0, lambda: 0.1 }
    }
}

impl LesSmoother {
    /// Applies the filter if `cycle` is a multiple of the period. Returns
    /// whether anything was done.
    pub fn apply(&self, topo: &MeshTopology, store: &mut FieldStore, cycle: u64) -> bool {
        if self.period == 0 || !cycle.is_multiple_of(self.period) {
            return false;
        }
        for f in Field::VELOCITY {
            let node = &store.get(f).node;
            let new: Vec<f64> = (0..topo.n_cells())
                .map(|c| {
                    let (sum, n) = topo
                        .neighbors(c)
                        .fold((0.0, 0usize), |(s, n), nb| (s + node[nb], n + 1));
                    if n == 0 {
                        node[c]
                    } else {
                        (1.0 - self.lambda) * node[c] + self.lambda * sum / n as f64
                    }
                })
                .collect();
            store.get_mut(f).node = new;
        }
        true
    }
}
