//! Hexahedral cell geometry, mesh topology and generators.

pub mod cell;
pub mod generate;
pub mod io;
pub mod topology;

pub use cell::{CellGeometry, Point3, Vec3};
pub use generate::{gen_annulus, gen_box};
pub use topology::{Adjacent, FaceLink, HexMesh, LinkSide, MeshTopology, TangentPair};

use nalgebra::Matrix3;

/// Geometric sanity figures over a whole mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshReport {
    pub cells: usize,
    pub interior_links: usize,
    pub boundary_faces: usize,
    /// `max |sum f| / max |f|` over cells.
    pub max_closure: f64,
    /// `max |gamma^T beta - I|` entrywise over cells.
    pub max_gamma_residual: f64,
    pub min_volume: f64,
    pub max_volume: f64,
    pub total_volume: f64,
    pub patch_faces: Vec<(String, usize)>,
}

impl MeshReport {
    pub fn new(topo: &MeshTopology) -> Self {
        let mut max_closure = 0.0f64;
        let mut max_gamma_residual = 0.0f64;
        let mut min_volume = f64::INFINITY;
        let mut max_volume = 0.0f64;
        for g in &topo.geometry {
            let sum: Vec3 = g.face_vectors.iter().sum();
            let fmax = g.face_vectors.iter().map(|f| f.norm()).fold(0.0, f64::max);
            max_closure = max_closure.max(sum.norm() / fmax);
            let r = g.gamma.transpose() * cell::node_matrix(&g.node_vectors) - Matrix3::identity();
            max_gamma_residual = max_gamma_residual.max(r.amax());
            min_volume = min_volume.min(g.volume);
            max_volume = max_volume.max(g.volume);
        }
        let patch_faces = topo
            .patches()
            .iter()
            .enumerate()
            .map(|(p, name)| {
                let n = topo.boundary_faces.iter().filter(|b| b.2 == p).count();
                (name.clone(), n)
            })
            .collect();
        Self {
            cells: topo.n_cells(),
            interior_links: topo.interior.len(),
            boundary_faces: topo.boundary_faces.len(),
            max_closure,
            max_gamma_residual,
            min_volume,
            max_volume,
            total_volume: topo.total_volume(),
            patch_faces,
        }
    }
}

impl std::fmt::Display for MeshReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "cells            {}", self.cells)?;
        writeln!(f, "interior links   {}", self.interior_links)?;
        writeln!(f, "boundary faces   {}", self.boundary_faces)?;
        writeln!(f, "closure |sum f|  {:.3e} (relative)", self.max_closure)?;
        writeln!(f, "gamma residual   {:.3e}", self.max_gamma_residual)?;
        writeln!(f, "volume min/max   {:.6e} / {:.6e}", self.min_volume, self.max_volume)?;
        writeln!(f, "total volume     {:.12e}", self.total_volume)?;
        for (name, n) in &self.patch_faces {
            writeln!(f, "patch {name:<12} {n} faces")?;
        }
        Ok(())
    }
}
