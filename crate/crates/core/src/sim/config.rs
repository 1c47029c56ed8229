//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::boundary::{BoundaryCondition, ThermalBc, VelocityBc};
use crate::boussinesq::{FluidProperties, LesSmoother};
use crate::error::{DscError, Result};
use crate::hexmesh::io::read_mesh;
use crate::hexmesh::{gen_annulus, gen_box, HexMesh, MeshTopology, Point3, Vec3};
use crate::pressure::{LocalSolve, SorConfig, SweepOrder};

/// Relative tolerance for matching shared face centroids.
pub const MESH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub mesh: MeshSpec,
    #[serde(default)]
    pub fluid: FluidSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default, rename = "patch")]
    pub patches: Vec<PatchSpec>,
    #[serde(default)]
    pub heat: HeatSpec,
    pub time: TimeSpec,
    pub steady: Option<SteadySpec>,
    #[serde(default)]
    pub sor: SorSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub les: LesSpec,
    #[serde(default)]
    pub pressure: PressureSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshSpec {
    Box {
        cells: [usize; 3],
        extent: [f64; 3],
        #[serde(default)]
        origin: [f64; 3],
    },
    Annulus {
        cells: [usize; 3],
        r_inner: f64,
        r_outer: f64,
        length: f64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidSpec {
    pub alpha: f64,
    pub mu: f64,
    pub rho_inf: f64,
    pub beta: f64,
    pub t_inf: f64,
    pub gravity: [f64; 3],
    /// Specific heat, J/(kg K); only used to convert heat powers.
    pub cp: f64,
}

impl Default for FluidSpec {
    fn default() -> Self {
        let air = FluidProperties::air();
        Self {
            alpha: air.alpha,
            mu: air.mu,
            rho_inf: air.rho_inf,
            beta: air.beta,
            t_inf: air.t_inf,
            gravity: air.g.into(),
            cp: 1005.0,
        }
    }
}

impl FluidSpec {
    pub fn properties(&self) -> FluidProperties {
        FluidProperties {
            alpha: self.alpha,
            mu: self.mu,
            rho_inf: self.rho_inf,
            beta: self.beta,
            g: Vec3::from(self.gravity),
            t_inf: self.t_inf,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    /// Defaults to the reference temperature.
    pub temperature: Option<f64>,
    pub velocity: [f64; 3],
    pub pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VelocityKind {
    NoSlip,
    FreeSlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalKind {
    Adiabatic,
    Isothermal,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Selector {
    /// Faces carrying this tag in the mesh.
    Tag(String),
    /// Faces whose centroid lies in the axis-aligned box.
    Box { min: [f64; 3], max: [f64; 3] },
    /// Faces whose centroid lies at a distance in `[r_min, r_max]` from the
    /// line through `point` along `axis`.
    Shell {
        #[serde(default)]
        point: [f64; 3],
        axis: [f64; 3],
        r_min: f64,
        r_max: f64,
    },
    /// Explicit `(cell, face)` pairs.
    Faces(Vec<[usize; 2]>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub name: String,
    /// Defaults to the mesh tag equal to `name`.
    pub select: Option<Selector>,
    pub velocity: VelocityKind,
    pub thermal: ThermalKind,
    /// Wall temperature of isothermal patches, K.
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatSpec {
    /// K/s in every cell.
    pub uniform: f64,
    #[serde(rename = "patch")]
    pub patches: Vec<PatchHeat>,
    /// Text file with `cell rate` lines, rate in K/s.
    pub table: Option<PathBuf>,
}

/// Heat released in the cells adjacent to a patch.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchHeat {
    pub patch: String,
    /// Total power in W, spread over the adjacent cells by volume.
    pub power: Option<f64>,
    /// Rate in K/s.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Fixed(f64),
    Mode(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub tau: TauSpec,
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Velocity scale for the automatic step, m/s.
    #[serde(default)]
    pub u_estimate: f64,
    pub end_time: Option<f64>,
    pub max_steps: Option<u64>,
}

fn default_safety() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySpec {
    /// Steps between comparisons.
    pub window: u64,
    /// Bound on the per-step relative change of T and u.
    pub tolerance: f64,
    /// Steps before the detector is armed.
    #[serde(default)]
    pub min_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingKind {
    Lexicographic,
    Colored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalKind {
    Coupled,
    FixedPorts,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SorSpec {
    pub omega: f64,
    /// Absolute tolerance; derived from the reference scales if absent.
    pub eps: Option<f64>,
    pub u_ref: f64,
    /// Reference face area; mean boundary face area if absent.
    pub a_ref: Option<f64>,
    pub max_sweeps: usize,
    pub max_outer: usize,
    pub ordering: OrderingKind,
    pub local: LocalKind,
}

impl Default for SorSpec {
    fn default() -> Self {
        Self {
            omega: 1.5,
            eps: None,
            u_ref: 0.1,
            a_ref: None,
            max_sweeps: 1,
            max_outer: 10_000,
            ordering: OrderingKind::Lexicographic,
            local: LocalKind::Coupled,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Steps between diagnostics rows and snapshots.
    pub period: u64,
    pub vtk: bool,
    pub checkpoint: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            period: 100,
            vtk: true,
            checkpoint: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LesSpec {
    /// Cycles between smoothing passes, 0 disables.
    pub period: u64,
    pub lambda: f64,
}

impl Default for LesSpec {
    fn default() -> Self {
        let d = LesSmoother::default();
        Self {
            period: d.period,
            lambda: d.lambda,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PressureSpec {
    /// Include the nodal pressure gradient in the velocity update.
    pub nodal_gradient: bool,
    /// Run the divergence cleaning each cycle.
    pub cleaning: bool,
}

impl Default for PressureSpec {
    fn default() -> Self {
        Self {
            nodal_gradient: true,
            cleaning: true,
        }
    }
}

/// How the time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMode {
    Fixed(f64),
    Auto { safety: f64, u_estimate: f64 },
}

/// Everything needed to start a run, with file references resolved.
#[derive(Debug, Clone)]
pub struct Setup {
    pub topo: MeshTopology,
    pub props: FluidProperties,
    pub bcs: Vec<BoundaryCondition>,
    pub heat: Vec<f64>,
    pub sor: SorConfig,
    pub les: LesSmoother,
    pub tau: TauMode,
    pub nodal_pressure_gradient: bool,
    pub cleaning: bool,
    pub initial_temperature: f64,
    pub initial_velocity: [f64; 3],
    pub initial_pressure: f64,
    pub end_time: Option<f64>,
    pub max_steps: Option<u64>,
    pub steady: Option<SteadySpec>,
    pub output: OutputSpec,
}

fn config_err(msg: impl Into<String>) -> DscError {
    DscError::Config(msg.into())
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn build_mesh(&self, base: &Path) -> Result<HexMesh> {
        match &self.mesh {
            MeshSpec::Box { cells, extent, origin } => {
                let mut m = gen_box(*cells, Vec3::from(*extent))?;
                let o = Vec3::from(*origin);
                if o != Vec3::zeros() {
                    m.transform(|p| p + o);
                }
                Ok(m)
            }
            MeshSpec::Annulus {
                cells,
                r_inner,
                r_outer,
                length,
            } => gen_annulus(*cells, *r_inner, *r_outer, *length),
            MeshSpec::File { path } => read_mesh(&base.join(path)),
        }
    }

    /// Resolves the configuration against the mesh. Relative paths are
    /// taken from `base`.
    pub fn setup(&self, base: &Path) -> Result<Setup> {
        let props = self.fluid.properties();
        props.validate()?;
        let mut topo = MeshTopology::build(self.build_mesh(base)?, MESH_TOLERANCE)?;
        let bcs = self.resolve_patches(&mut topo)?;
        let heat = self.heat_rates(&topo, base)?;
        let tau = self.tau_mode()?;
        let (end_time, max_steps) = (self.time.end_time, self.time.max_steps);
        if end_time.is_none() && max_steps.is_none() {
            return Err(config_err("[time] needs end_time or max_steps"));
        }
        if let Some(t) = end_time {
            if !(t > 0.0) {
                return Err(config_err(format!("end_time must be positive, got {t}")));
            }
        }
        if let Some(s) = &self.steady {
            if s.window == 0 || !(s.tolerance > 0.0) {
                return Err(config_err("[steady] needs window >= 1 and tolerance > 0"));
            }
        }
        if self.output.period == 0 {
            return Err(config_err("[output] period must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.les.lambda) {
            return Err(config_err(format!("[les] lambda {} outside [0, 1]", self.les.lambda)));
        }
        let sor = self.sor_config(&topo)?;
        Ok(Setup {
            props,
            bcs,
            heat,
            sor,
            les: LesSmoother {
                period: self.les.period,
                lambda: self.les.lambda,
            },
            tau,
            nodal_pressure_gradient: self.pressure.nodal_gradient,
            cleaning: self.pressure.cleaning,
            initial_temperature: self.initial.temperature.unwrap_or(props.t_inf),
            initial_velocity: self.initial.velocity,
            initial_pressure: self.initial.pressure,
            end_time,
            max_steps,
            steady: self.steady.clone(),
            output: self.output.clone(),
            topo,
        })
    }

    fn tau_mode(&self) -> Result<TauMode> {
        match &self.time.tau {
            TauSpec::Fixed(t) if *t > 0.0 && t.is_finite() => Ok(TauMode::Fixed(*t)),
            TauSpec::Fixed(t) => Err(config_err(format!("tau must be positive, got {t}"))),
            TauSpec::Mode(m) if m == "auto" => Ok(TauMode::Auto {
                safety: self.time.safety,
                u_estimate: self.time.u_estimate,
            }),
            TauSpec::Mode(m) => Err(config_err(format!("tau must be a number or \"auto\", got \"{m}\""))),
        }
    }

    fn sor_config(&self, topo: &MeshTopology) -> Result<SorConfig> {
        let s = &self.sor;
        let a_ref = s.a_ref.unwrap_or_else(|| {
            let (sum, n) = topo.boundary_faces.iter().fold((0.0, 0usize), |(a, n), &(c, f, _)| {
                (a + topo.geometry[c].face_area(f), n + 1)
            });
            if n == 0 {
                1.0
            } else {
                sum / n as f64
            }
        });
        let cfg = SorConfig {
            omega: s.omega,
            eps: s
                .eps
                .unwrap_or_else(|| SorConfig::scaled_eps(s.u_ref, a_ref, topo.n_cells())),
            max_sweeps: s.max_sweeps,
            max_outer: s.max_outer,
            order: match s.ordering {
                OrderingKind::Lexicographic => SweepOrder::Lexicographic,
                OrderingKind::Colored => SweepOrder::Colored,
            },
            local: match s.local {
                LocalKind::Coupled => LocalSolve::Coupled,
                LocalKind::FixedPorts => LocalSolve::FixedPorts,
            },
        };
        cfg.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(cfg)
    }

    /// Maps every boundary face onto the first configured patch whose
    /// selector matches it, replacing the mesh's own tags.
    fn resolve_patches(&self, topo: &mut MeshTopology) -> Result<Vec<BoundaryCondition>> {
        let mut bcs = Vec::with_capacity(self.patches.len());
        for p in &self.patches {
            if self.patches.iter().filter(|q| q.name == p.name).count() > 1 {
                return Err(config_err(format!("patch '{}' defined twice", p.name)));
            }
            let thermal = match (p.thermal, p.temperature) {
                (ThermalKind::Adiabatic, _) => ThermalBc::Adiabatic,
                (ThermalKind::Isothermal, Some(t)) if t.is_finite() => ThermalBc::Isothermal(t),
                (ThermalKind::Isothermal, _) => {
                    return Err(config_err(format!(
                        "isothermal patch '{}' needs a finite temperature",
                        p.name
                    )))
                }
            };
            let velocity = match p.velocity {
                VelocityKind::NoSlip => VelocityBc::NoSlip,
                VelocityKind::FreeSlip => VelocityBc::FreeSlip,
            };
            bcs.push(BoundaryCondition { velocity, thermal });
        }
        for p in &self.patches {
            let tag = match &p.select {
                None => Some(p.name.as_str()),
                Some(Selector::Tag(t)) => Some(t.as_str()),
                _ => None,
            };
            if let Some(tag) = tag {
                if topo.mesh.patch_index(tag).is_none() {
                    return Err(config_err(format!(
                        "patch '{}': the mesh has no boundary tag '{tag}' (available: {})",
                        p.name,
                        topo.patches().join(", ")
                    )));
                }
            }
        }
        let geometry = topo.geometry.clone();
        let names: Vec<String> = self.patches.iter().map(|p| p.name.clone()).collect();
        let mut hits = vec![0usize; self.patches.len()];
        topo.reassign_patches(names, |c, f, old| {
            let centroid = geometry[c].face_centroids[f];
            let k = self
                .patches
                .iter()
                .position(|p| selector_matches(p, c, f, old, &centroid))?;
            hits[k] += 1;
            Some(k)
        })?;
        if let Some(k) = hits.iter().position(|&h| h == 0) {
            return Err(config_err(format!(
                "patch '{}' matches no boundary face",
                self.patches[k].name
            )));
        }
        Ok(bcs)
    }

    fn heat_rates(&self, topo: &MeshTopology, base: &Path) -> Result<Vec<f64>> {
        let n = topo.n_cells();
        let mut q = vec![self.heat.uniform; n];
        for h in &self.heat.patches {
            let p = topo
                .mesh
                .patch_index(&h.patch)
                .ok_or_else(|| config_err(format!("heat source names unknown patch '{}'", h.patch)))?;
            let mut cells: Vec<usize> = topo
                .boundary_faces
                .iter()
                .filter(|&&(_, _, bp)| bp == p)
                .map(|&(c, _, _)| c)
                .collect();
            cells.sort_unstable();
            cells.dedup();
            let rate = match (h.power, h.rate) {
                (Some(w), None) => {
                    let vol: f64 = cells.iter().map(|&c| topo.geometry[c].volume).sum();
                    w / (self.fluid.rho_inf * self.fluid.cp * vol)
                }
                (None, Some(r)) => r,
                _ => {
                    return Err(config_err(format!(
                        "heat source on '{}' needs exactly one of power or rate",
                        h.patch
                    )))
                }
            };
            for c in cells {
                q[c] += rate;
            }
        }
        if let Some(table) = &self.heat.table {
            let path = base.join(table);
            let text = std::fs::read_to_string(&path)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let bad = || config_err(format!("{}:{}: expected '<cell> <rate>'", path.display(), i + 1));
                let mut it = line.split_whitespace();
                let cell: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                let rate: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                if cell >= n || !rate.is_finite() || it.next().is_some() {
                    return Err(bad());
                }
                q[cell] += rate;
            }
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(config_err("heat source is not finite"));
        }
        Ok(q)
    }
}

fn selector_matches(p: &PatchSpec, cell: usize, face: usize, old: &str, centroid: &Point3) -> bool {
    match &p.select {
        None => old == p.name,
        Some(Selector::Tag(t)) => old == t,
        Some(Selector::Box { min, max }) => (0..3).all(|k| centroid[k] >= min[k] && centroid[k] <= max[k]),
        Some(Selector::Shell {
            point,
            axis,
            r_min,
            r_max,
        }) => {
            let a = Vec3::from(*axis).normalize();
            let d = centroid - Vec3::from(*point);
            let r = (d - d.dot(&a) * a).norm();
            r >= *r_min && r <= *r_max
        }
        Some(Selector::Faces(list)) => list.contains(&[cell, face]),
    }
}
