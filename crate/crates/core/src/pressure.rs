//! Divergence cleaning of port velocities by an iterative pressure
//! correction.
//!
//! Each cleaning solves for a pressure increment `phi` that starts from
//! zero. With `I0` the boundary integral `sum u_p . f` of the connected
//! velocity, every cell must satisfy
//!
//! ```text
//! (tau / rho) sum_faces S(phi) = I0
//! ```
//!
//! where `S` is the outward face flux of `phi`. Cells are relaxed by SOR on
//! the local solution of that balance, with each relaxed cell's ports
//! updated right away, then all ports are made continuous again. Port velocities are corrected by
//! `u_p = u_p* - (tau / rho) grad phi` until `sum |I| < eps`, after which
//! `phi` is added to the stored pressure and the mean is shifted to zero.

use rayon::prelude::*;

use crate::boundary::VelocityBc;
use crate::boussinesq::boundary_integral;
use crate::dsc_state::{Field, FieldStore, ScalarField};
use crate::error::{DscError, Result};
use crate::gradops::{
    boundary_nabla_b, connect_face, port_difference, reconnect_interior, write_link, zero_flux_port_value,
    ZERO_DENOMINATOR_REL,
};
use crate::hexmesh::cell::{face_direction, face_parity};
use crate::hexmesh::{Adjacent, MeshTopology, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    #[default]
    Lexicographic,
    /// Graph coloring; cells of one color are relaxed in parallel.
    Colored,
}

/// How the per-cell solve treats the ports of the relaxed cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalSolve {
    /// Ports follow the node through the continuity update: interior ports
    /// by their linear response, zero-flux wall ports fully.
    #[default]
    Coupled,
    /// Ports held at their current values.
    FixedPorts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SorConfig {
    pub omega: f64,
    /// Absolute tolerance on `sum |I|` over all cells, in m^3/s.
    pub eps: f64,
    /// SOR sweeps between two velocity corrections.
    pub max_sweeps: usize,
    /// Velocity corrections before giving up.
    pub max_outer: usize,
    pub order: SweepOrder,
    pub local: LocalSolve,
}

impl Default for SorConfig {
    fn default() -> Self {
        Self {
            omega: 1.5,
            eps: 1e-10,
            max_sweeps: 1,
            max_outer: 10_000,
            order: SweepOrder::Lexicographic,
            local: LocalSolve::Coupled,
        }
    }
}

impl SorConfig {
    /// Tolerance scaled by a reference velocity, face area and cell count.
    pub fn scaled_eps(u_ref: f64, a_ref: f64, cells: usize) -> f64 {
        1e-8 * u_ref * a_ref * cells as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(DscError::InvalidParameter(format!(
                "SOR omega must lie in (0, 2), got {}",
                self.omega
            )));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(DscError::InvalidParameter(format!("SOR eps {}", self.eps)));
        }
        if self.max_sweeps == 0 || self.max_outer == 0 {
            return Err(DscError::InvalidParameter(
                "SOR sweep and iteration limits must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CleaningReport {
    /// Velocity corrections performed.
    pub outer: usize,
    /// SOR sweeps performed.
    pub sweeps: usize,
    /// Final `sum |I|`.
    pub residual: f64,
    /// `sum |I|` before each correction, starting with the input field.
    pub history: Vec<f64>,
}

/// Tangential channels of `face` from the current ports, averaged with the
/// neighbor across interior links. The normal slot is zero.
pub fn face_tangentials(topo: &MeshTopology, cell: usize, face: usize, ports: &[[f64; 6]]) -> [f64; 3] {
    let d = face_direction(face);
    let mut z: [f64; 3] = std::array::from_fn(|mu| {
        if mu == d {
            0.0
        } else {
            port_difference(&ports[cell], mu)
        }
    });
    if let Adjacent::Cell { cell: nb, tangents, .. } = topo.adjacency[cell][face] {
        for t in tangents {
            z[t.mine] = 0.5 * (z[t.mine] + t.sign * port_difference(&ports[nb], t.theirs));
        }
    }
    z
}

/// Relaxed nodal value of `phi` in `cell` that balances `source` against
/// the flux sum `(tau / rho) sum S(phi)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_cell_pressure(
    topo: &MeshTopology,
    cell: usize,
    source: f64,
    phi: &ScalarField,
    tau: f64,
    rho: f64,
    omega: f64,
    local: LocalSolve,
) -> Result<f64> {
    let g = &topo.geometry[cell];
    let old = phi.node[cell];
    let mut flux = 0.0;
    let mut diag = 0.0;
    let mut scale = 0.0f64;
    for face in 0..6 {
        let d = face_direction(face);
        let two_par = 2.0 * face_parity(face);
        let s = &g.s[face];
        let mut z = face_tangentials(topo, cell, face, &phi.port);
        z[d] = two_par * (old - phi.port[cell][face]);
        flux += s[0] * z[0] + s[1] * z[1] + s[2] * z[2];
        let response = match (local, topo.adjacency[cell][face]) {
            (LocalSolve::FixedPorts, _) => 0.0,
            (LocalSolve::Coupled, Adjacent::Boundary { .. }) => 1.0,
            (LocalSolve::Coupled, Adjacent::Cell { cell: nb, face: nf, .. }) => {
                let sb = topo.geometry[nb].s[nf][face_direction(nf)];
                s[d] / (s[d] + face_parity(face) * face_parity(nf) * sb)
            }
        };
        diag += s[d] * two_par * (1.0 - response);
        scale = scale.max(s.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    if !(diag.abs() >= ZERO_DENOMINATOR_REL * scale) {
        return Err(DscError::ZeroDiagonal { cell, face: 0 });
    }
    let k = tau / rho;
    Ok(old + omega * (source - k * flux) / (k * diag))
}

/// Re-establishes port continuity of a pressure-like field: interior ports
/// from the continuity update, boundary ports from the zero normal flux
/// condition.
pub fn restore_pressure_continuity(topo: &MeshTopology, field: &mut ScalarField) -> Result<()> {
    reconnect_interior(topo, field)?;
    let values = topo
        .boundary_faces
        .iter()
        .map(|&(c, f, _)| zero_flux_port_value(&topo.geometry[c], c, f, field.node[c], &field.port[c]))
        .collect::<Result<Vec<_>>>()?;
    let old = field.port.clone();
    for (&(c, f, _), v) in topo.boundary_faces.iter().zip(values) {
        field.port[c][f] = v;
        field.grad_b[c][f] = boundary_nabla_b(f, field.node[c], v, &old[c]);
    }
    Ok(())
}

/// Updates the ports of the six faces of `cell` after its node changed.
fn refresh_cell_ports(topo: &MeshTopology, cell: usize, field: &mut ScalarField) -> Result<()> {
    for face in 0..6 {
        match topo.adjacency[cell][face] {
            Adjacent::Cell { cell: nb, face: nf, .. } => {
                let u = connect_face(topo, cell, face, &field.node, &field.port)?;
                write_link(field, (cell, face), (nb, nf), &u);
            }
            Adjacent::Boundary { .. } => {
                let g = &topo.geometry[cell];
                let v = zero_flux_port_value(g, cell, face, field.node[cell], &field.port[cell])?;
                field.grad_b[cell][face] = boundary_nabla_b(face, field.node[cell], v, &field.port[cell]);
                field.port[cell][face] = v;
            }
        }
    }
    Ok(())
}

/// Greedy coloring of the face adjacency graph.
pub fn color_cells(topo: &MeshTopology) -> Vec<Vec<usize>> {
    let n = topo.n_cells();
    let mut color = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for c in 0..n {
        let used: Vec<usize> = topo.neighbors(c).map(|nb| color[nb]).collect();
        let k = (0..).find(|k| !used.contains(k)).unwrap_or(0);
        color[c] = k;
        if k == classes.len() {
            classes.push(Vec::new());
        }
        classes[k].push(c);
    }
    classes
}

struct Sweeper<'a> {
    topo: &'a MeshTopology,
    sources: &'a [f64],
    tau: f64,
    rho: f64,
    cfg: SorConfig,
    colors: Option<Vec<Vec<usize>>>,
}

impl Sweeper<'_> {
    fn sweep(&self, phi: &mut ScalarField) -> Result<()> {
        let (topo, k) = (self.topo, (self.tau, self.rho, self.cfg.omega, self.cfg.local));
        match &self.colors {
            None => {
                for c in 0..topo.n_cells() {
                    phi.node[c] = solve_cell_pressure(topo, c, self.sources[c], phi, k.0, k.1, k.2, k.3)?;
                    refresh_cell_ports(topo, c, phi)?;
                }
            }
            Some(classes) => {
                for class in classes {
                    let snapshot: &ScalarField = phi;
                    let new = class
                        .par_iter()
                        .map(|&c| solve_cell_pressure(topo, c, self.sources[c], snapshot, k.0, k.1, k.2, k.3))
                        .collect::<Result<Vec<_>>>()?;
                    for (&c, v) in class.iter().zip(new) {
                        phi.node[c] = v;
                    }
                    for &c in class {
                        refresh_cell_ports(topo, c, phi)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Gradient of `phi` applied to the port velocity of `(cell, face)`: the
/// mean of both sides on interior faces, one-sided on walls.
fn correction_gradient(topo: &MeshTopology, phi: &ScalarField, cell: usize, face: usize) -> Vec3 {
    let own = topo.geometry[cell].to_global(&phi.grad_b[cell][face]);
    match topo.adjacency[cell][face] {
        Adjacent::Cell { cell: nb, face: nf, .. } => 0.5 * (own + topo.geometry[nb].to_global(&phi.grad_b[nb][nf])),
        Adjacent::Boundary { .. } => own,
    }
}

fn correct_ports(
    topo: &MeshTopology,
    store: &mut FieldStore,
    u_star: &[[[f64; 3]; 6]],
    phi: &ScalarField,
    k: f64,
    walls: &[VelocityBc],
) {
    for c in 0..topo.n_cells() {
        for f in 0..6 {
            let mut g = correction_gradient(topo, phi, c, f);
            if let Adjacent::Boundary { patch } = topo.adjacency[c][f] {
                match walls[patch] {
                    VelocityBc::NoSlip => continue,
                    VelocityBc::FreeSlip => {
                        let n = topo.geometry[c].face_vectors[f].normalize();
                        g -= g.dot(&n) * n;
                    }
                }
            }
            let u = Vec3::from(u_star[c][f]) - k * g;
            store.set_port_velocity(c, f, u.into());
        }
    }
}

fn total_imbalance(topo: &MeshTopology, store: &FieldStore) -> f64 {
    let per_cell: Vec<f64> = (0..topo.n_cells())
        .into_par_iter()
        .map(|c| boundary_integral(&topo.geometry[c], store, c).abs())
        .collect();
    // fixed summation order keeps results independent of the thread count
    per_cell.iter().sum()
}

/// Cleans the divergence of the port velocities in `store` and accumulates
/// the pressure increment into the pressure field. `walls` holds the
/// velocity condition of each patch.
pub fn clean_divergence(
    topo: &MeshTopology,
    store: &mut FieldStore,
    cfg: &SorConfig,
    tau: f64,
    rho: f64,
    walls: &[VelocityBc],
) -> Result<CleaningReport> {
    cfg.validate()?;
    let n = topo.n_cells();
    let sources: Vec<f64> = (0..n).map(|c| boundary_integral(&topo.geometry[c], store, c)).collect();
    let mut report = CleaningReport::default();
    let r0: f64 = sources.iter().map(|s| s.abs()).sum();
    report.history.push(r0);
    report.residual = r0;
    if r0 < cfg.eps {
        return Ok(report);
    }
    let u_star: Vec<[[f64; 3]; 6]> = (0..n)
        .map(|c| std::array::from_fn(|f| store.port_velocity(c, f)))
        .collect();
    let sweeper = Sweeper {
        topo,
        sources: &sources,
        tau,
        rho,
        cfg: *cfg,
        colors: (cfg.order == SweepOrder::Colored).then(|| color_cells(topo)),
    };
    let mut phi = ScalarField::zeros(n);
    loop {
        if report.outer == cfg.max_outer {
            return Err(DscError::NoConvergence {
                outer: report.outer,
                residual: report.residual,
            });
        }
        for _ in 0..cfg.max_sweeps {
            sweeper.sweep(&mut phi)?;
        }
        report.sweeps += cfg.max_sweeps;
        restore_pressure_continuity(topo, &mut phi)?;
        correct_ports(topo, store, &u_star, &phi, tau / rho, walls);
        report.outer += 1;
        report.residual = total_imbalance(topo, store);
        report.history.push(report.residual);
        if !report.residual.is_finite() {
            return Err(DscError::NoConvergence {
                outer: report.outer,
                residual: report.residual,
            });
        }
        if report.residual < cfg.eps {
            break;
        }
    }
    accumulate_pressure(topo, store.get_mut(Field::P), &phi);
    Ok(report)
}

/// `p += phi`, then shifts `p` so its volume-weighted nodal mean is zero.
fn accumulate_pressure(topo: &MeshTopology, p: &mut ScalarField, phi: &ScalarField) {
    for c in 0..topo.n_cells() {
        p.node[c] += phi.node[c];
        for f in 0..6 {
            p.port[c][f] += phi.port[c][f];
            for mu in 0..3 {
                p.grad_b[c][f][mu] += phi.grad_b[c][f][mu];
            }
        }
    }
    let mean = topo
        .geometry
        .iter()
        .zip(&p.node)
        .map(|(g, v)| g.volume * v)
        .sum::<f64>()
        / topo.total_volume();
    for c in 0..topo.n_cells() {
        p.node[c] -= mean;
        for v in &mut p.port[c] {
            *v -= mean;
        }
    }
}
