//! VTK legacy snapshots and the diagnostics table.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::dsc_state::{Field, FieldStore};
use crate::error::Result;
use crate::hexmesh::MeshTopology;

/// Corner order of a VTK hexahedron in terms of local vertex labels.
pub const VTK_HEX_ORDER: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];
pub const VTK_HEXAHEDRON: u8 = 12;

pub const CSV_HEADER: &str = "step,time,max_u,max_T,min_T,div_residual,sor_iters,thermal_content";

/// Legacy ASCII unstructured grid with cell data `T`, `p` and `u`.
pub fn vtk_string(topo: &MeshTopology, store: &FieldStore, title: &str) -> String {
    let mesh = &topo.mesh;
    let n = mesh.cells.len();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or(""));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
    }
    let _ = writeln!(s, "CELLS {} {}", n, 9 * n);
    for c in &mesh.cells {
        s.push('8');
        for k in VTK_HEX_ORDER {
            let _ = write!(s, " {}", c[k]);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {n}");
    for _ in 0..n {
        let _ = writeln!(s, "{VTK_HEXAHEDRON}");
    }
    let _ = writeln!(s, "CELL_DATA {n}");
    for (name, field) in [("T", Field::T), ("p", Field::P)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in &store.get(field).node {
            let _ = writeln!(s, "{v}");
        }
    }
    s.push_str("VECTORS u double\n");
    for c in 0..n {
        let u = store.node_velocity(c);
        let _ = writeln!(s, "{} {} {}", u[0], u[1], u[2]);
    }
    s
}

pub fn write_vtk(topo: &MeshTopology, store: &FieldStore, path: &Path, title: &str) -> Result<()> {
    std::fs::write(path, vtk_string(topo, store, title))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub time: f64,
    pub max_u: f64,
    pub max_t: f64,
    pub min_t: f64,
    pub div_residual: f64,
    pub sor_iters: usize,
    pub thermal_content: f64,
}

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.step,
            self.time,
            self.max_u,
            self.max_t,
            self.min_t,
            self.div_residual,
            self.sor_iters,
            self.thermal_content
        )
    }
}

/// Appends rows to a diagnostics file, writing the header for new files.
pub struct DiagnosticsWriter {
    out: std::io::BufWriter<std::fs::File>,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path, append: bool) -> Result<Self> {
        let exists = append && path.exists();
        let file = std::fs::OpenOptions::new()
            .create(true)
            .write(true)
            .append(exists)
            .truncate(!exists)
            .open(path)?;
        let mut out = std::io::BufWriter::new(file);
        if !exists {
            writeln!(out, "{CSV_HEADER}")?;
        }
        Ok(Self { out })
    }

    pub fn push(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.out, "{}", r.csv_row())?;
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::{gen_box, Vec3};

    fn topo(n: usize) -> MeshTopology {
        MeshTopology::build(gen_box([n; 3], Vec3::new(1.0, 1.0, 1.0)).unwrap(), 1e-9).unwrap()
    }

    #[test]
    fn single_cube_layout() {
        let t = topo(1);
        let s = FieldStore::zeros(1);
        let v = vtk_string(&t, &s, "cube");
        assert!(v.contains("POINTS 8 double"));
        assert!(v.contains("CELLS 1 9\n8 0 1 3 2 4 5 7 6\n"));
        assert!(v.contains("CELL_TYPES 1\n12\n"));
        assert_eq!(v.matches("SCALARS").count() + v.matches("VECTORS").count(), 3);
    }

    #[test]
    fn box_counts() {
        let t = topo(4);
        let v = vtk_string(&t, &FieldStore::zeros(64), "box");
        assert!(v.contains("POINTS 125 double"));
        assert!(v.contains("CELLS 64 576"));
        assert!(v.contains("CELL_DATA 64"));
    }

    #[test]
    fn vtk_hex_is_positively_oriented() {
        // VTK expects the bottom quad counter-clockwise seen from the top
        let t = topo(1);
        let c = t.mesh.cells[0];
        let p: Vec<_> = VTK_HEX_ORDER.iter().map(|&k| t.mesh.vertices[c[k]]).collect();
        let n = (p[1] - p[0]).cross(&(p[3] - p[0]));
        assert!(n.dot(&(p[4] - p[0])) > 0.0);
    }

    #[test]
    fn csv_row_matches_header() {
        let r = DiagnosticsRecord {
            step: 3,
            time: 0.5,
            max_u: 0.0,
            max_t: 301.0,
            min_t: 300.0,
            div_residual: 1e-9,
            sor_iters: 4,
            thermal_content: 300.5,
        };
        assert_eq!(r.csv_row().split(',').count(), CSV_HEADER.split(',').count());
        assert_eq!(r.csv_row(), "3,0.5,0,301,300,0.000000001,4,300.5");
    }
}
