//! Per-cell geometry of a hexahedron: edge, node and face vectors, volume,
//! the adjoint-inverse `gamma` of the node-vector matrix and the flux
//! weights `s = f . gamma`.
//!
//! Vertex labeling is binary: vertex `i + 2j + 4k` sits at local corner
//! `(i, j, k)`. Edges come in direction triples, `e[4*mu + nu]` for
//! `nu = 0..4` spanning local direction `mu`, each oriented from the
//! lower to the higher corner. Faces `2*mu` and `2*mu + 1` lie on the
//! negative and positive side of direction `mu`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{DscError, Result};

pub type Vec3 = Vector3<f64>;
pub type Point3 = Vector3<f64>;

/// `(from, to)` local vertex indices of the twelve edges.
pub const EDGE_VERTICES: [(usize, usize); 12] = [
    // direction 0, at (j, k) = (0,0), (1,0), (1,1), (0,1)
    (0, 1),
    (2, 3),
    (6, 7),
    (4, 5),
    // direction 1, at (i, k) = (0,0), (0,1), (1,1), (1,0)
    (0, 2),
    (4, 6),
    (5, 7),
    (1, 3),
    // direction 2, at (i, j) = (0,0), (1,0), (1,1), (0,1)
    (0, 4),
    (1, 5),
    (3, 7),
    (2, 6),
];

/// Local vertices of each face, in cyclic order around the face.
pub const FACE_VERTICES: [[usize; 4]; 6] = [
    [0, 2, 6, 4],
    [1, 3, 7, 5],
    [0, 4, 5, 1],
    [2, 6, 7, 3],
    [0, 1, 3, 2],
    [4, 5, 7, 6],
];

/// Relative threshold on `|det b| / scale^3` below which a cell is singular.
pub const SINGULAR_REL_DET: f64 = 1e-12;
/// Relative threshold on `V / scale^3` below which a cell is degenerate.
pub const DEGENERATE_REL_VOLUME: f64 = 1e-8;

/// Direction normal to face `iota`.
#[inline]
pub fn face_direction(face: usize) -> usize {
    face / 2
}

/// `(-1)^iota`: +1 on negative-side faces, -1 on positive-side faces.
#[inline]
pub fn face_parity(face: usize) -> f64 {
    if face.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn compute_edges(vertices: &[Point3; 8]) -> [Vec3; 12] {
    std::array::from_fn(|nu| {
        let (a, b) = EDGE_VERTICES[nu];
        vertices[b] - vertices[a]
    })
}

pub fn compute_node_vectors(edges: &[Vec3; 12]) -> [Vec3; 3] {
    std::array::from_fn(|mu| (edges[4 * mu] + edges[4 * mu + 1] + edges[4 * mu + 2] + edges[4 * mu + 3]) * 0.25)
}

/// Face vectors from the edge groups, indices cyclic modulo 12.
pub fn compute_face_vectors(edges: &[Vec3; 12]) -> [Vec3; 6] {
    std::array::from_fn(|iota| {
        let i = iota as i64;
        let sign = face_parity(iota);
        let e = |k: i64| edges[k.rem_euclid(12) as usize];
        let first = e(8 + 2 * i) + e(9 + 2 * (i + sign as i64));
        let second = e(4 + 2 * i) + e(5 + 2 * i);
        first.cross(&second) * (sign / 4.0)
    })
}

pub fn compute_face_centroids(vertices: &[Point3; 8]) -> [Point3; 6] {
    std::array::from_fn(|iota| FACE_VERTICES[iota].iter().map(|&v| vertices[v]).sum::<Vec3>() * 0.25)
}

/// Divergence theorem applied to the position field.
pub fn compute_volume(face_vectors: &[Vec3; 6], face_centroids: &[Point3; 6]) -> f64 {
    face_vectors
        .iter()
        .zip(face_centroids)
        .map(|(f, c)| c.dot(f))
        .sum::<f64>()
        / 3.0
}

/// Matrix with the node vectors as columns, in the global frame.
pub fn node_matrix(b: &[Vec3; 3]) -> Matrix3<f64> {
    Matrix3::from_columns(b)
}

/// `gamma = (beta^T)^-1`; `None` if `beta` cannot be inverted.
pub fn compute_gamma(b: &[Vec3; 3]) -> Option<Matrix3<f64>> {
    node_matrix(b).transpose().try_inverse()
}

/// `s[iota][mu] = sum_nu f[iota][nu] * gamma[nu][mu]`.
pub fn compute_s_coeffs(f: &[Vec3; 6], gamma: &Matrix3<f64>) -> [[f64; 3]; 6] {
    std::array::from_fn(|iota| {
        let s = gamma.transpose() * f[iota];
        [s[0], s[1], s[2]]
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub center: Point3,
    pub edges: [Vec3; 12],
    pub node_vectors: [Vec3; 3],
    pub face_vectors: [Vec3; 6],
    pub face_centroids: [Point3; 6],
    pub volume: f64,
    /// `gamma[(nu, mu)]`, global component `nu`, node direction `mu`.
    pub gamma: Matrix3<f64>,
    pub s: [[f64; 3]; 6],
    /// Longest edge, the length scale for relative thresholds.
    pub scale: f64,
}

impl CellGeometry {
    /// Builds and validates the geometry of one cell. `cell` only labels errors.
    pub fn build(cell: usize, vertices: &[Point3; 8]) -> Result<Self> {
        let edges = compute_edges(vertices);
        let node_vectors = compute_node_vectors(&edges);
        let face_vectors = compute_face_vectors(&edges);
        let face_centroids = compute_face_centroids(vertices);
        let center = vertices.iter().sum::<Vec3>() / 8.0;
        let scale = edges.iter().map(|e| e.norm()).fold(0.0, f64::max);
        let scale3 = scale * scale * scale;

        let det = node_matrix(&node_vectors).determinant();
        if !(det.abs() >= SINGULAR_REL_DET * scale3) {
            return Err(DscError::SingularCell { cell, det });
        }
        for (iota, (f, c)) in face_vectors.iter().zip(&face_centroids).enumerate() {
            if f.dot(&(c - center)) <= 0.0 {
                return Err(DscError::Orientation { cell, face: iota });
            }
        }
        let volume = compute_volume(&face_vectors, &face_centroids);
        if !(volume > DEGENERATE_REL_VOLUME * scale3) {
            return Err(DscError::DegenerateCell { cell, volume });
        }
        let gamma = compute_gamma(&node_vectors).ok_or(DscError::SingularCell { cell, det })?;
        let s = compute_s_coeffs(&face_vectors, &gamma);
        Ok(Self {
            center,
            edges,
            node_vectors,
            face_vectors,
            face_centroids,
            volume,
            gamma,
            s,
            scale,
        })
    }

    /// Global-frame vector from node-direction components, `gamma * v`.
    #[inline]
    pub fn to_global(&self, v_b: &[f64; 3]) -> Vec3 {
        self.gamma * Vec3::new(v_b[0], v_b[1], v_b[2])
    }

    /// `s[iota] . v`.
    #[inline]
    pub fn flux(&self, face: usize, v_b: &[f64; 3]) -> f64 {
        let s = &self.s[face];
        s[0] * v_b[0] + s[1] * v_b[1] + s[2] * v_b[2]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        self.face_vectors[face].norm()
    }

    /// Characteristic length `V / max |f|` used by timestep control.
    pub fn length_scale(&self) -> f64 {
        let fmax = (0..6).map(|i| self.face_area(i)).fold(0.0, f64::max);
        self.volume / fmax
    }
}

/// Corners of an axis-aligned box cell in canonical order.
pub fn box_corners(origin: Point3, size: Vec3) -> [Point3; 8] {
    std::array::from_fn(|v| {
        let (i, j, k) = ((v & 1) as f64, ((v >> 1) & 1) as f64, ((v >> 2) & 1) as f64);
        origin + Vec3::new(i * size.x, j * size.y, k * size.z)
    })
}

/// Corners of the parallelepiped spanned by `spans` from `origin`.
pub fn parallelepiped_corners(origin: Point3, spans: [Vec3; 3]) -> [Point3; 8] {
    std::array::from_fn(|v| {
        let mut p = origin;
        for (mu, span) in spans.iter().enumerate() {
            if (v >> mu) & 1 == 1 {
                p += span;
            }
        }
        p
    })
}
