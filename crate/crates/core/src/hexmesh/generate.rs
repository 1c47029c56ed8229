//! Structured mesh generators.

use std::f64::consts::PI;

use super::cell::{Point3, Vec3};
use super::topology::HexMesh;
use crate::error::{DscError, Result};

pub const BOX_PATCHES: [&str; 6] = ["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"];
pub const ANNULUS_PATCHES: [&str; 4] = ["inner", "outer", "zmin", "zmax"];

/// Axis-aligned box `[0, extent]` split into `n[0] x n[1] x n[2]` cells.
/// Boundary faces are tagged `xmin` .. `zmax`.
pub fn gen_box(n: [usize; 3], extent: Vec3) -> Result<HexMesh> {
    if n.contains(&0) {
        return Err(DscError::InvalidParameter(format!(
            "box cell counts must be >= 1, got {n:?}"
        )));
    }
    if !extent.iter().all(|e| e.is_finite() && *e > 0.0) {
        return Err(DscError::InvalidParameter(format!(
            "box extent must be positive, got {extent:?}"
        )));
    }
    let [nx, ny, nz] = n;
    let vid = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(Point3::new(
                    extent.x * i as f64 / nx as f64,
                    extent.y * j as f64 / ny as f64,
                    extent.z * k as f64 / nz as f64,
                ));
            }
        }
    }
    let mut mesh = HexMesh {
        vertices,
        patches: BOX_PATCHES.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    };
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = mesh.cells.len();
                mesh.cells.push(std::array::from_fn(|v| {
                    vid(i + (v & 1), j + ((v >> 1) & 1), k + ((v >> 2) & 1))
                }));
                let idx = [i, j, k];
                for mu in 0..3 {
                    if idx[mu] == 0 {
                        mesh.face_tags.insert((c, 2 * mu), 2 * mu);
                    }
                    if idx[mu] + 1 == n[mu] {
                        mesh.face_tags.insert((c, 2 * mu + 1), 2 * mu + 1);
                    }
                }
            }
        }
    }
    Ok(mesh)
}

/// Annular gap between coaxial cylinders around the z axis, `n = [radial,
/// azimuthal, axial]`. Local directions are radial, counter-clockwise
/// azimuthal and axial; cells are straight-sided prisms, so the domain is
/// the polygonal annulus. Vertex angles are `2 pi j / n_theta`.
pub fn gen_annulus(n: [usize; 3], r_in: f64, r_out: f64, length: f64) -> Result<HexMesh> {
    let [nr, nt, nz] = n;
    if nr == 0 || nz == 0 || nt < 3 {
        return Err(DscError::InvalidParameter(format!(
            "annulus needs n_r, n_z >= 1 and n_theta >= 3, got {n:?}"
        )));
    }
    if !(r_in > 0.0 && r_in < r_out && length > 0.0 && r_out.is_finite() && length.is_finite()) {
        return Err(DscError::InvalidParameter(format!(
            "annulus needs 0 < r_in < r_out and length > 0, got r_in={r_in}, r_out={r_out}, length={length}"
        )));
    }
    let vid = |i: usize, j: usize, k: usize| i + (nr + 1) * ((j % nt) + nt * k);
    let mut vertices = Vec::with_capacity((nr + 1) * nt * (nz + 1));
    for k in 0..=nz {
        let z = length * k as f64 / nz as f64;
        for j in 0..nt {
            let theta = 2.0 * PI * j as f64 / nt as f64;
            for i in 0..=nr {
                let r = r_in + (r_out - r_in) * i as f64 / nr as f64;
                vertices.push(Point3::new(r * theta.cos(), r * theta.sin(), z));
            }
        }
    }
    let mut mesh = HexMesh {
        vertices,
        patches: ANNULUS_PATCHES.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    };
    for k in 0..nz {
        for j in 0..nt {
            for i in 0..nr {
                let c = mesh.cells.len();
                mesh.cells.push(std::array::from_fn(|v| {
                    vid(i + (v & 1), j + ((v >> 1) & 1), k + ((v >> 2) & 1))
                }));
                if i == 0 {
                    mesh.face_tags.insert((c, 0), 0);
                }
                if i + 1 == nr {
                    mesh.face_tags.insert((c, 1), 1);
                }
                if k == 0 {
                    mesh.face_tags.insert((c, 4), 2);
                }
                if k + 1 == nz {
                    mesh.face_tags.insert((c, 5), 3);
                }
            }
        }
    }
    Ok(mesh)
}

/// Volume of the polygonal annulus produced by [`gen_annulus`].
pub fn annulus_volume(n_theta: usize, r_in: f64, r_out: f64, length: f64) -> f64 {
    0.5 * n_theta as f64 * (2.0 * PI / n_theta as f64).sin() * (r_out * r_out - r_in * r_in) * length
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::MeshTopology;
    use approx::assert_relative_eq;

    #[test]
    fn single_box_is_unit_cube() {
        let m = gen_box([1, 1, 1], Vec3::new(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(m.cells.len(), 1);
        let t = MeshTopology::build(m, 1e-9).unwrap();
        assert_eq!(t.geometry[0].volume, 1.0);
        assert_eq!(t.boundary_faces.len(), 6);
    }

    #[test]
    fn box_volumes_add_up() {
        let t = MeshTopology::build(gen_box([4, 4, 4], Vec3::new(1.0, 2.0, 0.5)).unwrap(), 1e-9).unwrap();
        assert_relative_eq!(t.total_volume(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn annulus_cells_valid() {
        let t = MeshTopology::build(gen_annulus([4, 16, 1], 0.05, 0.115, 0.02).unwrap(), 1e-9).unwrap();
        assert_eq!(t.n_cells(), 64);
        for g in &t.geometry {
            assert!(g.volume > 0.0);
            let closure: Vec3 = g.face_vectors.iter().sum();
            let fmax = g.face_vectors.iter().map(|f| f.norm()).fold(0.0, f64::max);
            assert!(closure.norm() <= 1e-12 * fmax);
        }
        assert_relative_eq!(
            t.total_volume(),
            annulus_volume(16, 0.05, 0.115, 0.02),
            max_relative = 1e-10
        );
        // inner and outer conductor faces
        let inner = t.boundary_faces.iter().filter(|b| b.2 == 0).count();
        let outer = t.boundary_faces.iter().filter(|b| b.2 == 1).count();
        assert_eq!((inner, outer), (16, 16));
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(gen_box([0, 1, 1], Vec3::new(1.0, 1.0, 1.0)).is_err());
        assert!(gen_annulus([2, 8, 1], 0.2, 0.1, 1.0).is_err());
        assert!(gen_annulus([2, 2, 1], 0.1, 0.2, 1.0).is_err());
    }
}
