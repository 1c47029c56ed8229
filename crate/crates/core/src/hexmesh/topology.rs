use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::cell::{face_direction, CellGeometry, Point3, FACE_VERTICES};
use crate::error::{DscError, Result};

/// Vertex table plus hexahedra, with optional boundary patch tags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HexMesh {
    pub vertices: Vec<Point3>,
    pub cells: Vec<[usize; 8]>,
    /// Named boundary patches; `face_tags` refers to them by index.
    pub patches: Vec<String>,
    pub face_tags: BTreeMap<(usize, usize), usize>,
}

impl HexMesh {
    pub fn cell_vertices(&self, cell: usize) -> [Point3; 8] {
        self.cells[cell].map(|v| self.vertices[v])
    }

    pub fn patch_index(&self, name: &str) -> Option<usize> {
        self.patches.iter().position(|p| p == name)
    }

    /// Adds a patch if missing and returns its index.
    pub fn ensure_patch(&mut self, name: &str) -> usize {
        match self.patch_index(name) {
            Some(i) => i,
            None => {
                self.patches.push(name.to_string());
                self.patches.len() - 1
            }
        }
    }

    /// Applies `map` to every vertex.
    pub fn transform(&mut self, map: impl Fn(Point3) -> Point3) {
        for v in &mut self.vertices {
            *v = map(*v);
        }
    }

    pub fn validate_indices(&self) -> Result<()> {
        for (c, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                if v >= self.vertices.len() {
                    return Err(DscError::InvalidParameter(format!(
                        "cell {c} references vertex {v}, only {} vertices",
                        self.vertices.len()
                    )));
                }
            }
            let mut sorted = *cell;
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(DscError::InvalidParameter(format!("cell {c} repeats a vertex")));
            }
        }
        for (&(c, f), &p) in &self.face_tags {
            if c >= self.cells.len() || f >= 6 || p >= self.patches.len() {
                return Err(DscError::InvalidParameter(format!(
                    "patch tag ({c}, {f}) -> {p} out of range"
                )));
            }
        }
        Ok(())
    }
}

/// Correspondence of one tangential node direction across a shared face:
/// local direction `mine` in this cell runs along `sign * theirs` in the
/// neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPair {
    pub mine: usize,
    pub theirs: usize,
    pub sign: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Adjacent {
    Cell {
        cell: usize,
        face: usize,
        tangents: [TangentPair; 2],
    },
    Boundary {
        patch: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkSide {
    Cell { cell: usize, face: usize },
    Boundary { patch: usize },
}

/// Interface record: `side_a` is always a cell face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceLink {
    pub cell: usize,
    pub face: usize,
    pub side_b: LinkSide,
}

impl FaceLink {
    pub fn is_interior(&self) -> bool {
        matches!(self.side_b, LinkSide::Cell { .. })
    }
}

#[derive(Debug, Clone)]
pub struct MeshTopology {
    pub mesh: HexMesh,
    pub geometry: Vec<CellGeometry>,
    /// Every cell face exactly once.
    pub links: Vec<FaceLink>,
    /// Per cell face, what lies across it.
    pub adjacency: Vec<[Adjacent; 6]>,
    /// Indices into `links` of interior links, in ascending order.
    pub interior: Vec<usize>,
    /// `(cell, face, patch)` of every boundary face, ascending by cell.
    pub boundary_faces: Vec<(usize, usize, usize)>,
}

/// Name given to boundary faces that carry no tag.
pub const UNTAGGED_PATCH: &str = "untagged";

impl MeshTopology {
    /// Builds geometry and face adjacency. Faces sharing the same four
    /// vertex ids become interior links; shared centroids must coincide
    /// within `tolerance` times the cell scale.
    pub fn build(mut mesh: HexMesh, tolerance: f64) -> Result<Self> {
        mesh.validate_indices()?;
        let geometry = mesh
            .cells
            .par_iter()
            .enumerate()
            .map(|(c, _)| CellGeometry::build(c, &mesh.cell_vertices(c)))
            .collect::<Result<Vec<_>>>()?;

        let mut by_key: HashMap<[usize; 4], Vec<(usize, usize)>> = HashMap::new();
        for (c, cell) in mesh.cells.iter().enumerate() {
            for (f, fv) in FACE_VERTICES.iter().enumerate() {
                let mut key = fv.map(|v| cell[v]);
                key.sort_unstable();
                by_key.entry(key).or_default().push((c, f));
            }
        }

        let mut untagged: Option<usize> = None;
        let mut adjacency = vec![[Adjacent::Boundary { patch: usize::MAX }; 6]; mesh.cells.len()];
        let mut pending: Vec<((usize, usize), Adjacent)> = Vec::new();
        for sides in by_key.values() {
            match sides.as_slice() {
                [(c, f)] => {
                    let patch = match mesh.face_tags.get(&(*c, *f)) {
                        Some(&p) => p,
                        None => *untagged
                            .get_or_insert_with(|| mesh.patch_index(UNTAGGED_PATCH).unwrap_or(mesh.patches.len())),
                    };
                    pending.push(((*c, *f), Adjacent::Boundary { patch }));
                }
                [(ca, fa), (cb, fb)] => {
                    if ca == cb {
                        return Err(DscError::NonConformingMesh(format!(
                            "cell {ca} faces {fa} and {fb} coincide"
                        )));
                    }
                    let d = (geometry[*ca].face_centroids[*fa] - geometry[*cb].face_centroids[*fb]).norm();
                    let scale = geometry[*ca].scale.min(geometry[*cb].scale);
                    if d > tolerance * scale {
                        return Err(DscError::NonConformingMesh(format!(
                            "shared face of cells {ca} and {cb} has mismatched centroids ({d:e})"
                        )));
                    }
                    let ab = tangent_map(&mesh, (*ca, *fa), (*cb, *fb))?;
                    let ba = ab.map(|t| TangentPair {
                        mine: t.theirs,
                        theirs: t.mine,
                        sign: t.sign,
                    });
                    let ba = if ba[0].mine < ba[1].mine { ba } else { [ba[1], ba[0]] };
                    pending.push((
                        (*ca, *fa),
                        Adjacent::Cell {
                            cell: *cb,
                            face: *fb,
                            tangents: ab,
                        },
                    ));
                    pending.push((
                        (*cb, *fb),
                        Adjacent::Cell {
                            cell: *ca,
                            face: *fa,
                            tangents: ba,
                        },
                    ));
                }
                more => {
                    let (c, f) = more[0];
                    return Err(DscError::NonConformingMesh(format!(
                        "face {f} of cell {c} is shared by {} cells",
                        more.len()
                    )));
                }
            }
        }
        if untagged == Some(mesh.patches.len()) {
            mesh.patches.push(UNTAGGED_PATCH.to_string());
        }
        for ((c, f), adj) in pending {
            adjacency[c][f] = adj;
        }

        let mut links = Vec::new();
        let mut interior = Vec::new();
        let mut boundary_faces = Vec::new();
        for (c, adj) in adjacency.iter().enumerate() {
            for (f, a) in adj.iter().enumerate() {
                match *a {
                    Adjacent::Cell { cell, face, .. } => {
                        if (c, f) < (cell, face) {
                            interior.push(links.len());
                            links.push(FaceLink {
                                cell: c,
                                face: f,
                                side_b: LinkSide::Cell { cell, face },
                            });
                        }
                    }
                    Adjacent::Boundary { patch } => {
                        boundary_faces.push((c, f, patch));
                        links.push(FaceLink {
                            cell: c,
                            face: f,
                            side_b: LinkSide::Boundary { patch },
                        });
                    }
                }
            }
        }

        Ok(Self {
            mesh,
            geometry,
            links,
            adjacency,
            interior,
            boundary_faces,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.geometry.len()
    }

    pub fn patches(&self) -> &[String] {
        &self.mesh.patches
    }

    pub fn total_volume(&self) -> f64 {
        self.geometry.iter().map(|g| g.volume).sum()
    }

    /// Replaces the patch list; `assign` maps each boundary face to a new
    /// patch index given its old patch name, or `None` if nothing matches.
    pub fn reassign_patches(
        &mut self,
        names: Vec<String>,
        mut assign: impl FnMut(usize, usize, &str) -> Option<usize>,
    ) -> Result<()> {
        let old = std::mem::take(&mut self.mesh.patches);
        let mut new_faces = Vec::with_capacity(self.boundary_faces.len());
        for &(c, f, p) in &self.boundary_faces {
            let np = assign(c, f, &old[p]).ok_or_else(|| {
                DscError::Config(format!(
                    "boundary face {f} of cell {c} (mesh patch '{}') matches no configured patch",
                    old[p]
                ))
            })?;
            if np >= names.len() {
                return Err(DscError::Config(format!("patch index {np} out of range")));
            }
            new_faces.push((c, f, np));
        }
        self.mesh.face_tags.clear();
        for &(c, f, p) in &new_faces {
            self.adjacency[c][f] = Adjacent::Boundary { patch: p };
            self.mesh.face_tags.insert((c, f), p);
        }
        for link in &mut self.links {
            if let LinkSide::Boundary { patch } = &mut link.side_b {
                *patch = match self.adjacency[link.cell][link.face] {
                    Adjacent::Boundary { patch } => patch,
                    Adjacent::Cell { .. } => unreachable!(),
                };
            }
        }
        self.boundary_faces = new_faces;
        self.mesh.patches = names;
        Ok(())
    }

    /// Cells sharing a face with `cell`.
    pub fn neighbors(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[cell].iter().filter_map(|a| match a {
            Adjacent::Cell { cell, .. } => Some(*cell),
            Adjacent::Boundary { .. } => None,
        })
    }
}

/// Maps the two tangential directions of face `a` onto those of face `b`
/// using the shared vertex ids.
fn tangent_map(mesh: &HexMesh, (ca, fa): (usize, usize), (cb, fb): (usize, usize)) -> Result<[TangentPair; 2]> {
    let da = face_direction(fa);
    let db = face_direction(fb);
    let side_a = fa % 2;
    let local_b = |global: usize| mesh.cells[cb].iter().position(|&v| v == global);
    let mut out = [TangentPair {
        mine: 0,
        theirs: 0,
        sign: 0.0,
    }; 2];
    for (n, mu) in (0..3).filter(|&mu| mu != da).enumerate() {
        let base = side_a << da;
        let g0 = mesh.cells[ca][base];
        let g1 = mesh.cells[ca][base | (1 << mu)];
        let (Some(l0), Some(l1)) = (local_b(g0), local_b(g1)) else {
            return Err(DscError::NonConformingMesh(format!(
                "cells {ca} and {cb} share a face key but not its vertices"
            )));
        };
        let diff = l0 ^ l1;
        if diff.count_ones() != 1 || diff == 1 << db {
            return Err(DscError::NonConformingMesh(format!(
                "edge of face {fa} in cell {ca} does not map to an edge of face {fb} in cell {cb}"
            )));
        }
        let theirs = diff.trailing_zeros() as usize;
        let sign = if l1 & diff != 0 { 1.0 } else { -1.0 };
        out[n] = TangentPair { mine: mu, theirs, sign };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::cell::Vec3;
    use crate::hexmesh::generate::gen_box;

    #[test]
    fn box_link_counts() {
        let t = MeshTopology::build(gen_box([2, 1, 1], Vec3::new(2.0, 1.0, 1.0)).unwrap(), 1e-9).unwrap();
        assert_eq!(t.interior.len(), 1);
        assert_eq!(t.boundary_faces.len(), 10);
        let t = MeshTopology::build(gen_box([1, 1, 1], Vec3::new(1.0, 1.0, 1.0)).unwrap(), 1e-9).unwrap();
        assert_eq!(t.interior.len(), 0);
        assert_eq!(t.boundary_faces.len(), 6);
    }

    #[test]
    fn every_face_linked_once() {
        let t = MeshTopology::build(gen_box([3, 2, 4], Vec3::new(1.0, 1.0, 1.0)).unwrap(), 1e-9).unwrap();
        let mut seen = vec![[0u8; 6]; t.n_cells()];
        for l in &t.links {
            seen[l.cell][l.face] += 1;
            if let LinkSide::Cell { cell, face } = l.side_b {
                seen[cell][face] += 1;
            }
        }
        assert!(seen.iter().flatten().all(|&n| n == 1));
    }

    #[test]
    fn interior_adjacency_is_symmetric() {
        let t = MeshTopology::build(gen_box([2, 2, 2], Vec3::new(1.0, 1.0, 1.0)).unwrap(), 1e-9).unwrap();
        for c in 0..t.n_cells() {
            for f in 0..6 {
                if let Adjacent::Cell { cell, face, tangents } = t.adjacency[c][f] {
                    match t.adjacency[cell][face] {
                        Adjacent::Cell {
                            cell: back, face: bf, ..
                        } => {
                            assert_eq!((back, bf), (c, f));
                        }
                        _ => panic!("asymmetric link"),
                    }
                    for tp in tangents {
                        assert_eq!(tp.mine, tp.theirs);
                        assert_eq!(tp.sign, 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn rotated_neighbor_labeling_maps_tangents() {
        // second cell relabeled by swapping local directions 1 and 2
        let mut mesh = gen_box([2, 1, 1], Vec3::new(2.0, 1.0, 1.0)).unwrap();
        mesh.face_tags.clear();
        let c = mesh.cells[1];
        mesh.cells[1] = std::array::from_fn(|v| {
            let (i, j, k) = (v & 1, (v >> 1) & 1, (v >> 2) & 1);
            c[i | (k << 1) | (j << 2)]
        });
        // that relabeling is left-handed; mirror local direction 1 to fix it
        let c = mesh.cells[1];
        mesh.cells[1] = std::array::from_fn(|v| c[v ^ 2]);
        let t = MeshTopology::build(mesh, 1e-9).unwrap();
        assert_eq!(t.interior.len(), 1);
        let Adjacent::Cell { face, tangents, .. } = t.adjacency[0][1] else {
            panic!()
        };
        assert_eq!(face, 0);
        assert_eq!(tangents[0].mine, 1);
        assert_eq!(tangents[0].theirs, 2);
        assert_eq!(tangents[0].sign, 1.0);
        assert_eq!(tangents[1].mine, 2);
        assert_eq!(tangents[1].theirs, 1);
        assert_eq!(tangents[1].sign, -1.0);
    }

    #[test]
    fn triple_shared_face_is_rejected() {
        let mut mesh = gen_box([2, 1, 1], Vec3::new(2.0, 1.0, 1.0)).unwrap();
        let extra = mesh.cells[1];
        mesh.cells.push(extra);
        assert!(matches!(
            MeshTopology::build(mesh, 1e-9),
            Err(DscError::NonConformingMesh(_))
        ));
    }
}
