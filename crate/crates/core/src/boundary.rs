//! Wall conditions on boundary ports.

use crate::dsc_state::{Field, FieldStore};
use crate::error::Result;
use crate::gradops::{boundary_nabla_b, zero_flux_port_value};
use crate::hexmesh::{MeshTopology, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum VelocityBc {
    #[default]
    NoSlip,
    FreeSlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ThermalBc {
    Isothermal(f64),
    #[default]
    Adiabatic,
}

/// Condition attached to one boundary patch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryCondition {
    pub velocity: VelocityBc,
    pub thermal: ThermalBc,
}

/// Port velocity obeying the wall condition, given a candidate `u` and the
/// outward face vector.
pub fn apply_velocity_bc(u: [f64; 3], kind: VelocityBc, face_vector: &Vec3) -> [f64; 3] {
    match kind {
        VelocityBc::NoSlip => [0.0; 3],
        VelocityBc::FreeSlip => {
            let n = face_vector.normalize();
            let v = Vec3::from(u);
            (v - v.dot(&n) * n).into()
        }
    }
}

/// Boundary port temperature for `face` of `cell`. Adiabatic walls get the
/// port value whose normal heat flux vanishes, using the one-sided
/// tangential differences of `ports_old`.
pub fn apply_thermal_bc(
    topo: &MeshTopology,
    cell: usize,
    face: usize,
    kind: ThermalBc,
    node: f64,
    ports_old: &[f64; 6],
) -> Result<f64> {
    match kind {
        ThermalBc::Isothermal(t) => Ok(t),
        ThermalBc::Adiabatic => zero_flux_port_value(&topo.geometry[cell], cell, face, node, ports_old),
    }
}

/// Sets temperature and velocity on every boundary port from the new node
/// values and stores the matching face differences. `bcs` is indexed by
/// patch.
pub fn assign_boundary_ports(topo: &MeshTopology, bcs: &[BoundaryCondition], store: &mut FieldStore) -> Result<()> {
    for &(c, f, patch) in &topo.boundary_faces {
        let bc = bcs[patch];
        let fv = topo.geometry[c].face_vectors[f];
        let u = apply_velocity_bc(store.node_velocity(c), bc.velocity, &fv);
        for (k, field) in Field::VELOCITY.into_iter().enumerate() {
            let s = store.get_mut(field);
            s.port[c][f] = u[k];
            s.grad_b[c][f] = boundary_nabla_b(f, s.node[c], u[k], &s.port_prev[c]);
        }
        let t = store.get_mut(Field::T);
        let tp = apply_thermal_bc(topo, c, f, bc.thermal, t.node[c], &t.port_prev[c])?;
        t.port[c][f] = tp;
        t.grad_b[c][f] = boundary_nabla_b(f, t.node[c], tp, &t.port_prev[c]);
    }
    Ok(())
}

/// Re-projects boundary port velocities onto the wall condition, e.g. after
/// the pressure correction, and refreshes their stored differences.
pub fn enforce_velocity_bc(topo: &MeshTopology, bcs: &[BoundaryCondition], store: &mut FieldStore) {
    for &(c, f, patch) in &topo.boundary_faces {
        let fv = topo.geometry[c].face_vectors[f];
        let u = apply_velocity_bc(store.port_velocity(c, f), bcs[patch].velocity, &fv);
        for (k, field) in Field::VELOCITY.into_iter().enumerate() {
            let s = store.get_mut(field);
            s.port[c][f] = u[k];
            s.grad_b[c][f] = boundary_nabla_b(f, s.node[c], u[k], &s.port_prev[c]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsc_state::ScalarField;
    use crate::hexmesh::gen_box;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn no_slip_zeroes_velocity() {
        let f = Vec3::new(0.0, 0.0, 2.0);
        assert_eq!(apply_velocity_bc([1.0, 2.0, 3.0], VelocityBc::NoSlip, &f), [0.0; 3]);
    }

    #[test]
    fn free_slip_removes_normal_part() {
        let f = Vec3::new(0.0, 0.0, -4.0);
        let u = apply_velocity_bc([1.0, 2.0, 3.0], VelocityBc::FreeSlip, &f);
        assert_eq!(u, [1.0, 2.0, 0.0]);
    }

    proptest! {
        #[test]
        fn free_slip_is_idempotent_and_tangent(
            u in prop::array::uniform3(-10.0f64..10.0),
            f in prop::array::uniform3(-3.0f64..3.0),
        ) {
            let fv = Vec3::from(f);
            prop_assume!(fv.norm() > 1e-3);
            let once = apply_velocity_bc(u, VelocityBc::FreeSlip, &fv);
            let twice = apply_velocity_bc(once, VelocityBc::FreeSlip, &fv);
            prop_assert!(Vec3::from(once).dot(&fv).abs() <= 1e-12 * fv.norm() * (1.0 + Vec3::from(u).norm()));
            for k in 0..3 {
                prop_assert!((once[k] - twice[k]).abs() <= 1e-12 * (1.0 + once[k].abs()));
            }
        }
    }

    fn cube() -> MeshTopology {
        MeshTopology::build(gen_box([1, 1, 1], Vec3::new(1.0, 1.0, 1.0)).unwrap(), 1e-9).unwrap()
    }

    #[test]
    fn isothermal_port_takes_wall_temperature() {
        let t = cube();
        let v = apply_thermal_bc(&t, 0, 2, ThermalBc::Isothermal(313.15), 290.0, &[290.0; 6]).unwrap();
        assert_eq!(v, 313.15);
    }

    #[test]
    fn adiabatic_port_on_uniform_field() {
        let t = cube();
        let v = apply_thermal_bc(&t, 0, 5, ThermalBc::Adiabatic, 300.0, &[300.0; 6]).unwrap();
        assert_eq!(v, 300.0);
    }

    #[test]
    fn assigned_boundary_fluxes() {
        let t = cube();
        let mut s = FieldStore::zeros(1);
        *s.get_mut(Field::T) = ScalarField::uniform(1, 300.0);
        s.get_mut(Field::T).node[0] = 301.0;
        s.get_mut(Field::Ux).node[0] = 1.0;
        let mut bcs = vec![BoundaryCondition::default(); t.patches().len()];
        bcs[0].thermal = ThermalBc::Isothermal(305.0);
        assign_boundary_ports(&t, &bcs, &mut s).unwrap();
        let tf = s.get(Field::T);
        // adiabatic faces carry no flux
        for f in 1..6 {
            assert_relative_eq!(t.geometry[0].flux(f, &tf.grad_b[0][f]), 0.0, epsilon = 1e-12);
        }
        assert_eq!(tf.port[0][0], 305.0);
        // half-cell gradient from node 301 to wall 305 across 0.5
        assert_relative_eq!(t.geometry[0].flux(0, &tf.grad_b[0][0]), 8.0, epsilon = 1e-12);
        assert_eq!(s.port_velocity(0, 3), [0.0; 3]);
    }
}
