//! Incident/outgoing decomposition of a DSC process.
//!
//! Each channel pairs a port value with its nodal image. Here the nodal
//! image of every port of a cell is the cell's node value. The
//! decomposition is recursive in time:
//!
//! ```text
//! z_in(t)          = z_port(t)          - nb(z_out(t - tau/2))
//! z_out(t + tau/2) = z_node(t + tau/2)  - nb(z_in(t))
//! ```
//!
//! with both zero before `t = 0`. It is a diagnostic; the solver updates
//! field values directly.

/// A scattering channel: port value and nodal-image value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel<T> {
    pub port: T,
    pub image: T,
}

impl<T> Channel<T> {
    /// The node-boundary map, swapping port and nodal image.
    pub fn nb(self) -> Self {
        Channel {
            port: self.image,
            image: self.port,
        }
    }
}

pub fn node_boundary_map<T>((port, image): (T, T)) -> (T, T) {
    (image, port)
}

/// Incident port fields and outgoing node fields for one observation pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterDiag {
    pub z_in: Vec<[f64; 6]>,
    pub z_out: Vec<[f64; 6]>,
}

/// Streaming decomposition of one scalar field.
#[derive(Debug, Clone)]
pub struct ScatterTracker {
    z_in: Vec<[f64; 6]>,
    z_out: Vec<[f64; 6]>,
    z_out_prev: Vec<[f64; 6]>,
}

impl ScatterTracker {
    pub fn new(n_cells: usize) -> Self {
        Self {
            z_in: vec![[0.0; 6]; n_cells],
            z_out: vec![[0.0; 6]; n_cells],
            z_out_prev: vec![[0.0; 6]; n_cells],
        }
    }

    /// Feeds the port values at `t`.
    pub fn observe_ports(&mut self, ports: &[[f64; 6]]) {
        std::mem::swap(&mut self.z_out_prev, &mut self.z_out);
        for ((zin, zp), zo) in self.z_in.iter_mut().zip(ports).zip(&self.z_out_prev) {
            for f in 0..6 {
                zin[f] = zp[f] - zo[f];
            }
        }
    }

    /// Feeds the node values at `t + tau/2`.
    pub fn observe_nodes(&mut self, nodes: &[f64]) {
        for ((zo, &zn), zin) in self.z_out.iter_mut().zip(nodes).zip(&self.z_in) {
            for f in 0..6 {
                zo[f] = zn - zin[f];
            }
        }
    }

    pub fn z_in(&self) -> &[[f64; 6]] {
        &self.z_in
    }

    pub fn z_out(&self) -> &[[f64; 6]] {
        &self.z_out
    }

    /// Largest relative defect of `z_port(t) = nb(z_out(t - tau/2)) + z_in(t)`
    /// after [`Self::observe_ports`].
    pub fn port_defect(&self, ports: &[[f64; 6]]) -> f64 {
        defect(
            ports.iter().flat_map(|p| p.iter().copied()),
            &self.z_out_prev,
            &self.z_in,
        )
    }

    /// Largest relative defect of `z_node(t + tau/2) = nb(z_in(t)) + z_out(t + tau/2)`
    /// after [`Self::observe_nodes`].
    pub fn node_defect(&self, nodes: &[f64]) -> f64 {
        defect(
            nodes.iter().flat_map(|&n| std::iter::repeat_n(n, 6)),
            &self.z_in,
            &self.z_out,
        )
    }

    pub fn snapshot(&self) -> ScatterDiag {
        ScatterDiag {
            z_in: self.z_in.clone(),
            z_out: self.z_out.clone(),
        }
    }
}

/// `max |z - (a + b)| / max(|z|, |a|, |b|)` in units of machine epsilon.
fn defect(z: impl Iterator<Item = f64>, a: &[[f64; 6]], b: &[[f64; 6]]) -> f64 {
    z.zip(a.iter().flatten().zip(b.iter().flatten()))
        .map(|(z, (&a, &b))| {
            let scale = z.abs().max(a.abs()).max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (z - (a + b)).abs() / (scale * f64::EPSILON)
            }
        })
        .fold(0.0, f64::max)
}

/// Decomposes a recorded process: `ports[m]` at `m tau`, `nodes[m]` at
/// `(m + 1/2) tau`.
pub fn decompose_scattering(ports: &[Vec<[f64; 6]>], nodes: &[Vec<f64>]) -> Vec<ScatterDiag> {
    let n = ports.first().map_or(0, |p| p.len());
    let mut tracker = ScatterTracker::new(n);
    ports
        .iter()
        .zip(nodes)
        .map(|(p, z)| {
            tracker.observe_ports(p);
            tracker.observe_nodes(z);
            tracker.snapshot()
        })
        .collect()
}
