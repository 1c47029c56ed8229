//! Discrete differential operators on hexahedral cells.
//!
//! Field values are sampled at the node (cell center) and at the six ports
//! (face centroids). Differences are first taken along the node vectors,
//! `grad_b[mu] ~ b[mu] . grad Z`, then mapped to the global frame with
//! `gamma`. The face-normal flux is `S = f . grad Z = s . grad_b`.
//!
//! At face `iota` with normal direction `d = iota / 2` and parity
//! `par = (-1)^iota` the node-side quantities are
//!
//! ```text
//! z_n[d]  = 2 par Z_node
//! z_n[mu] = Z_port[2 mu + 1] - Z_port[2 mu]          (mu != d)
//! ```
//!
//! and the port quantity is `z_p[d] = 2 par Z_port[iota]`. The face
//! difference vector is `z_n - delta_{mu d} z_p`.

use rayon::prelude::*;

use crate::dsc_state::ScalarField;
use crate::error::{DscError, Result};
use crate::hexmesh::cell::{face_direction, face_parity};
use crate::hexmesh::{Adjacent, CellGeometry, LinkSide, MeshTopology, Vec3};

/// Relative size below which an interface denominator counts as zero.
pub const ZERO_DENOMINATOR_REL: f64 = 1e-12;

#[inline]
pub(crate) fn port_difference(ports: &[f64; 6], mu: usize) -> f64 {
    ports[2 * mu + 1] - ports[2 * mu]
}

/// Node-side quantities of face `face` from a node value and the ports one
/// half step older.
pub fn z_node(face: usize, node: f64, ports: &[f64; 6]) -> [f64; 3] {
    let d = face_direction(face);
    std::array::from_fn(|mu| {
        if mu == d {
            2.0 * face_parity(face) * node
        } else {
            port_difference(ports, mu)
        }
    })
}

/// Time-shifted face differences at port time `t`, from the node at
/// `t - tau/2`, the port at `t` and the opposite-face differences at
/// `t - tau`.
pub fn face_nabla_b(field: &ScalarField, cell: usize, face: usize) -> [f64; 3] {
    let d = face_direction(face);
    let par = face_parity(face);
    let mut g = z_node(face, field.node_prev[cell], &field.port_prev[cell]);
    g[d] = 2.0 * par * (field.node_prev[cell] - field.port[cell][face]);
    g
}

/// Global-frame face gradient from node-direction differences.
pub fn face_gradient(geom: &CellGeometry, nabla_b: &[f64; 3]) -> Vec3 {
    geom.to_global(nabla_b)
}

/// Outward normal flux `f . grad Z` of face `face` using the stored
/// differences of the current port time.
pub fn face_flux(geom: &CellGeometry, field: &ScalarField, cell: usize, face: usize) -> f64 {
    geom.flux(face, &field.grad_b[cell][face])
}

/// Nodal node-direction differences from the six ports.
pub fn nodal_nabla_b(ports: &[f64; 6]) -> [f64; 3] {
    std::array::from_fn(|mu| port_difference(ports, mu))
}

pub fn nodal_gradient(geom: &CellGeometry, ports: &[f64; 6]) -> Vec3 {
    geom.to_global(&nodal_nabla_b(ports))
}

/// Result of the interface update on one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkUpdate {
    /// Shared port value written to both sides.
    pub value: f64,
    pub grad_a: [f64; 3],
    pub grad_b: [f64; 3],
}

/// Continuity update of the shared port between `(cell_a, face_a)` and the
/// neighbor recorded in its adjacency. Tangential channels take the mean
/// of the two sides; the normal channel is then fixed by requiring equal
/// port values and opposite fluxes.
///
/// `node` holds node values at `t + tau/2`, `ports` port values at `t`.
pub fn connect_face(
    topo: &MeshTopology,
    cell_a: usize,
    face_a: usize,
    node: &[f64],
    ports: &[[f64; 6]],
) -> Result<LinkUpdate> {
    let Adjacent::Cell {
        cell: cell_b,
        face: face_b,
        tangents,
    } = topo.adjacency[cell_a][face_a]
    else {
        return Err(DscError::InvalidParameter(format!(
            "face {face_a} of cell {cell_a} is a boundary face"
        )));
    };
    let (ga, gb) = (&topo.geometry[cell_a], &topo.geometry[cell_b]);
    let (da, db) = (face_direction(face_a), face_direction(face_b));
    let (pa, pb) = (face_parity(face_a), face_parity(face_b));
    // the update commutes with adding a constant; shifting by the node
    // mean keeps the normal channels free of cancellation
    let shift = 0.5 * (node[cell_a] + node[cell_b]);
    let mut za = z_node(face_a, node[cell_a] - shift, &ports[cell_a]);
    let mut zb = z_node(face_b, node[cell_b] - shift, &ports[cell_b]);
    for t in tangents {
        let mean = 0.5 * (za[t.mine] + t.sign * zb[t.theirs]);
        za[t.mine] = mean;
        zb[t.theirs] = t.sign * mean;
    }
    let (sa, sb) = (&ga.s[face_a], &gb.s[face_b]);
    let den = sa[da] + pa * pb * sb[db];
    let smax = sa.iter().chain(sb).fold(0.0f64, |m, v| m.max(v.abs()));
    if !(den.abs() >= ZERO_DENOMINATOR_REL * smax) {
        return Err(DscError::ZeroDenominator {
            cell: cell_a,
            face: face_a,
        });
    }
    let num = ga.flux(face_a, &za) + gb.flux(face_b, &zb);
    let zp = num / den;
    let value = 0.5 * pa * zp;
    za[da] -= zp;
    zb[db] -= 2.0 * pb * value;
    Ok(LinkUpdate {
        value: value + shift,
        grad_a: za,
        grad_b: zb,
    })
}

/// Differences of a boundary port whose value is already set: normal
/// channel from node and port, tangential channels one-sided.
pub fn boundary_nabla_b(face: usize, node: f64, port: f64, ports_old: &[f64; 6]) -> [f64; 3] {
    let mut g = z_node(face, node, ports_old);
    g[face_direction(face)] -= 2.0 * face_parity(face) * port;
    g
}

/// Port value making the face flux vanish, tangential channels taken
/// one-sided from `ports_old`.
pub fn zero_flux_port_value(
    geom: &CellGeometry,
    cell: usize,
    face: usize,
    node: f64,
    ports_old: &[f64; 6],
) -> Result<f64> {
    let d = face_direction(face);
    let s = &geom.s[face];
    let smax = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(s[d].abs() >= ZERO_DENOMINATOR_REL * smax) || smax == 0.0 {
        return Err(DscError::ZeroDiagonal { cell, face });
    }
    let tangential: f64 = (0..3)
        .filter(|&mu| mu != d)
        .map(|mu| s[mu] * port_difference(ports_old, mu))
        .sum();
    Ok(node + tangential / (2.0 * face_parity(face) * s[d]))
}

/// Interface update of every interior link of one field, from `node` and
/// `port_prev` into `port` and `grad_b`.
pub fn connect_interior(topo: &MeshTopology, field: &mut ScalarField) -> Result<()> {
    let updates = interior_updates(topo, &field.node, &field.port_prev)?;
    write_updates(topo, field, &updates);
    Ok(())
}

/// Same as [`connect_interior`] but reading tangential channels from the
/// current ports, as used when restoring continuity of a static field.
pub fn reconnect_interior(topo: &MeshTopology, field: &mut ScalarField) -> Result<()> {
    let updates = interior_updates(topo, &field.node, &field.port)?;
    write_updates(topo, field, &updates);
    Ok(())
}

fn interior_updates(topo: &MeshTopology, node: &[f64], ports: &[[f64; 6]]) -> Result<Vec<LinkUpdate>> {
    topo.interior
        .par_iter()
        .map(|&l| {
            let link = &topo.links[l];
            connect_face(topo, link.cell, link.face, node, ports)
        })
        .collect()
}

fn write_updates(topo: &MeshTopology, field: &mut ScalarField, updates: &[LinkUpdate]) {
    for (&l, u) in topo.interior.iter().zip(updates) {
        let link = &topo.links[l];
        let LinkSide::Cell { cell, face } = link.side_b else {
            unreachable!("interior link list holds cell pairs")
        };
        write_link(field, (link.cell, link.face), (cell, face), u);
    }
}

#[inline]
pub fn write_link(field: &mut ScalarField, a: (usize, usize), b: (usize, usize), u: &LinkUpdate) {
    field.port[a.0][a.1] = u.value;
    field.port[b.0][b.1] = u.value;
    field.grad_b[a.0][a.1] = u.grad_a;
    field.grad_b[b.0][b.1] = u.grad_b;
}

/// Recomputes the stored differences of all boundary ports from `node`,
/// `port` and `port_prev`.
pub fn refresh_boundary_nabla_b(topo: &MeshTopology, field: &mut ScalarField) {
    for &(c, f, _) in &topo.boundary_faces {
        field.grad_b[c][f] = boundary_nabla_b(f, field.node[c], field.port[c][f], &field.port_prev[c]);
    }
}
