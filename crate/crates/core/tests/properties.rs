//! Whole-solver properties: locality, linearity of conduction, invariance
//! under a common temperature offset, restart and output stability.

use dsc_core::boundary::{BoundaryCondition, ThermalBc, VelocityBc};
use dsc_core::boussinesq::FluidProperties;
use dsc_core::dsc_state::{checkpoint, Field, FieldStore};
use dsc_core::hexmesh::{gen_box, MeshTopology, Vec3};
use dsc_core::sim::output::vtk_string;
use dsc_core::sim::{Model, Simulation};
use nalgebra::Matrix3;
use proptest::prelude::*;

fn box_topo(n: [usize; 3], sheared: bool) -> MeshTopology {
    let mut m = gen_box(n, Vec3::new(0.01 * n[0] as f64, 0.01 * n[1] as f64, 0.01 * n[2] as f64)).unwrap();
    if sheared {
        let a = Matrix3::new(1.0, 0.25, 0.0, 0.1, 1.0, 0.2, 0.0, 0.0, 1.0);
        m.transform(|p| a * p);
    }
    MeshTopology::build(m, 1e-9).unwrap()
}

/// Conduction only: no gravity, so the velocity stays zero.
fn conduction(topo: MeshTopology, wall: Option<f64>) -> Simulation {
    let mut props = FluidProperties::air();
    props.g = Vec3::zeros();
    let mut bcs = vec![BoundaryCondition::default(); topo.patches().len()];
    if let Some(t) = wall {
        for bc in &mut bcs {
            bc.thermal = ThermalBc::Isothermal(t);
        }
    }
    let model = Model::new(topo, props, bcs).unwrap();
    let h = 0.01;
    let tau = 0.2 * h * h / (6.0 * props.alpha);
    Simulation::new(model, tau, 0.0, [0.0; 3], 0.0).unwrap()
}

/// Buoyant flow in a sheared box with one heated wall and one free-slip wall.
fn buoyant(offset: f64) -> Simulation {
    let topo = box_topo([4, 3, 3], true);
    let mut props = FluidProperties::air();
    props.g = Vec3::new(0.0, 0.0, -9.81);
    props.t_inf += offset;
    let mut bcs = vec![BoundaryCondition::default(); topo.patches().len()];
    bcs[0].thermal = ThermalBc::Isothermal(props.t_inf + 8.0);
    bcs[1].thermal = ThermalBc::Isothermal(props.t_inf - 8.0);
    bcs[5].velocity = VelocityBc::FreeSlip;
    let mut model = Model::new(topo, props, bcs).unwrap();
    model.sor.eps = 1e-14;
    Simulation::new(model, 5e-3, props.t_inf, [0.0; 3], 0.0).unwrap()
}

fn set_temperature(sim: &mut Simulation, values: &[f64]) {
    let t = sim.store.get_mut(Field::T);
    for (c, &v) in values.iter().enumerate() {
        t.node[c] = v;
        t.node_prev[c] = v;
        t.port[c] = [v; 6];
        t.port_prev[c] = [v; 6];
    }
}

fn run(sim: &mut Simulation, steps: usize) {
    for _ in 0..steps {
        sim.step().unwrap();
    }
}

#[test]
fn perturbation_spreads_at_most_one_layer_per_cycle() {
    let n = 9;
    let topo = box_topo([n, n, n], false);
    let mut base = conduction(topo, None);
    set_temperature(&mut base, &vec![300.0; n * n * n]);
    let mut hit = base.clone();
    let centre = 4 + n * (4 + n * 4);
    let mut t = vec![300.0; n * n * n];
    t[centre] = 301.0;
    set_temperature(&mut hit, &t);
    for k in 1..=3usize {
        base.step().unwrap();
        hit.step().unwrap();
        let a = &base.store.get(Field::T).node;
        let b = &hit.store.get(Field::T).node;
        for c in 0..n * n * n {
            let ijk = [c % n, (c / n) % n, c / (n * n)];
            let dist = ijk.iter().map(|&q| q.abs_diff(4)).max().unwrap();
            if dist > k {
                assert_eq!(a[c], b[c], "cell {ijk:?} changed after {k} cycles");
            }
        }
        let neighbour = centre + k;
        assert_ne!(a[neighbour], b[neighbour], "front did not reach distance {k}");
    }
}

#[test]
fn restart_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid.bin");
    let mut whole = buoyant(0.0);
    run(&mut whole, 40);
    let mut first = buoyant(0.0);
    run(&mut first, 20);
    checkpoint::save(&path, &first.store, &first.grid).unwrap();
    let (store, grid) = checkpoint::load(&path).unwrap();
    let mut second = buoyant(0.0);
    second.restore(store, grid).unwrap();
    run(&mut second, 20);
    assert_eq!(whole.grid, second.grid);
    for f in Field::ALL {
        let (a, b) = (&whole.store.get(f).node, &second.store.get(f).node);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-12 * scale, "{f:?}: {x} vs {y}");
        }
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let mut a = buoyant(0.0);
    let mut b = buoyant(0.0);
    run(&mut a, 25);
    run(&mut b, 25);
    assert!(a.max_speed() > 0.0);
    assert!(a.store == b.store);
    let (ra, rb) = (a.diagnostics().csv_row(), b.diagnostics().csv_row());
    assert_eq!(ra, rb);
}

#[test]
fn vtk_output_is_stable() {
    let mut sim = buoyant(0.0);
    run(&mut sim, 5);
    let a = vtk_string(&sim.model.topo, &sim.store, "snapshot");
    let b = vtk_string(&sim.model.topo, &sim.clone().store, "snapshot");
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.vtk");
    dsc_core::sim::write_vtk(&sim.model.topo, &sim.store, &path, "snapshot").unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
    // one value per cell for each scalar, one triple per cell for u
    let cells = sim.store.n_cells();
    let body = a.split("CELL_DATA").nth(1).unwrap();
    assert_eq!(body.lines().count(), 1 + 2 * (2 + cells) + 1 + cells);
}

#[test]
fn temperature_offset_leaves_flow_unchanged() {
    let mut a = buoyant(0.0);
    let mut b = buoyant(25.0);
    run(&mut a, 30);
    run(&mut b, 30);
    let scale = a.max_speed();
    assert!(scale > 0.0);
    for c in 0..a.store.n_cells() {
        let (ua, ub) = (a.store.node_velocity(c), b.store.node_velocity(c));
        for k in 0..3 {
            assert!((ua[k] - ub[k]).abs() <= 1e-9 * scale, "cell {c}: {ua:?} vs {ub:?}");
        }
        let dt = a.store.get(Field::T).node[c] - (b.store.get(Field::T).node[c] - 25.0);
        assert!(dt.abs() < 1e-9, "cell {c}: temperature differs by {dt}");
    }
}

fn conduction_after(values: &[f64], steps: usize) -> Vec<f64> {
    let mut sim = conduction(box_topo([4, 3, 2], true), Some(0.0));
    set_temperature(&mut sim, values);
    run(&mut sim, steps);
    sim.store.get(Field::T).node.clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conduction_is_linear(
        x in prop::collection::vec(-5.0f64..5.0, 24),
        y in prop::collection::vec(-5.0f64..5.0, 24),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (tx, ty, tm) = (conduction_after(&x, 15), conduction_after(&y, 15), conduction_after(&mix, 15));
        for c in 0..24 {
            let expect = a * tx[c] + b * ty[c];
            prop_assert!((tm[c] - expect).abs() <= 1e-12 * 50.0, "cell {}: {} vs {}", c, tm[c], expect);
        }
    }

    #[test]
    fn insulated_conduction_keeps_heat(x in prop::collection::vec(250.0f64..350.0, 24)) {
        let mut sim = conduction(box_topo([4, 3, 2], true), None);
        set_temperature(&mut sim, &x);
        let q0 = sim.thermal_content();
        run(&mut sim, 50);
        prop_assert!((sim.thermal_content() - q0).abs() <= 1e-12 * q0.abs());
        prop_assert!(sim.store.get(Field::T).node.iter().all(|t| t.is_finite()));
    }

    #[test]
    fn uniform_state_is_a_fixed_point(t in 200.0f64..400.0) {
        let mut sim = conduction(box_topo([3, 2, 2], true), None);
        set_temperature(&mut sim, &[t; 12]);
        let before: FieldStore = sim.store.clone();
        run(&mut sim, 10);
        prop_assert!(sim.store == before);
    }
}
