//! Experiment configuration: defaults, key=value config files, and
//! command-line overrides, resolved into one echoable struct.
//!
//! Precedence is defaults < config file < command-line flags. The resolved
//! config is embedded verbatim in every report, and re-running from that
//! echo reproduces all numbers bit-for-bit (timings aside).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;
pub const DEFAULT_EIGEN_COUNT: usize = 8;
pub const DEFAULT_THM1_SLACK: f64 = 0.02;
pub const DEFAULT_THM2_TOL: f64 = 0.05;
pub const DEFAULT_SCAN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceSpec {
    SphereLinear { radius: f64, slope: f64 },
    TorusCosine { lu: f64, lv: f64, beta: f64 },
    UserMesh {
        off: PathBuf,
        #[serde(skip_serializing_if = "Option::is_none")]
        potential: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResolutionSpec {
    Subdivision { level: u32 },
    Grid { nu: usize, nv: usize },
    /// User meshes carry their own resolution.
    FromFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZGridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl Default for ZGridSpec {
    fn default() -> Self {
        ZGridSpec {
            min: 1e-3,
            max: 1e2,
            count: 50,
            log: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSpec {
    pub c: f64,
    pub dt: f64,
    pub t_end: f64,
    pub p_list: Vec<f64>,
    pub record_every: usize,
    /// "implicit-euler" or "spectral-expansion".
    pub integrator: String,
    /// Relative slack in the decay verdict.
    pub tol: f64,
    /// Optional per-vertex initial data CSV; otherwise seeded random.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<PathBuf>,
}

impl Default for HeatSpec {
    fn default() -> Self {
        HeatSpec {
            c: 0.0,
            dt: 1e-3,
            t_end: 2.0,
            p_list: vec![1.0, 2.0, 3.0, 4.0],
            record_every: 20,
            integrator: "implicit-euler".into(),
            tol: DEFAULT_THM2_TOL,
            u0: None,
        }
    }
}

/// Fully resolved experiment description; everything a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub surface: SurfaceSpec,
    pub resolution: ResolutionSpec,
    pub eigen_tol: f64,
    pub eigen_count: usize,
    pub z: ZGridSpec,
    pub slack: f64,
    pub heat: HeatSpec,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            surface: SurfaceSpec::SphereLinear {
                radius: 1.0,
                slope: 0.0,
            },
            resolution: ResolutionSpec::Subdivision { level: 4 },
            eigen_tol: DEFAULT_EIGEN_TOL,
            eigen_count: DEFAULT_EIGEN_COUNT,
            z: ZGridSpec::default(),
            slack: DEFAULT_THM1_SLACK,
            heat: HeatSpec::default(),
            samples: DEFAULT_SCAN_SAMPLES,
            seed: 0,
        }
    }
}

/// Partial settings collected from a config file or command-line flags;
/// `None` means "not specified here".
#[derive(Debug, Clone, Default)]
pub struct ConfigOverlay {
    pub surface: Option<String>,
    pub radius: Option<f64>,
    pub slope: Option<f64>,
    pub lu: Option<f64>,
    pub lv: Option<f64>,
    pub beta: Option<f64>,
    pub off: Option<PathBuf>,
    pub potential: Option<PathBuf>,
    pub subdiv: Option<u32>,
    pub grid: Option<(usize, usize)>,
    pub k: Option<usize>,
    pub tol: Option<f64>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub z_count: Option<usize>,
    pub z_log: Option<bool>,
    pub slack: Option<f64>,
    pub c: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub p_list: Option<Vec<f64>>,
    pub record_every: Option<usize>,
    pub integrator: Option<String>,
    pub u0: Option<PathBuf>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl ConfigOverlay {
    /// Parse a flat `key = value` file; `#` starts a comment.
    pub fn from_key_value_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut overlay = ConfigOverlay::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected key = value, found {raw:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            overlay
                .set(key.trim(), value.trim())
                .map_err(|msg| CliError::Config(format!("{}:{}: {msg}", path.display(), lineno + 1)))?;
        }
        Ok(overlay)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse()
                .map_err(|_| format!("invalid value {v:?} for {key}"))
        }
        match key {
            "surface" => self.surface = Some(value.to_string()),
            "radius" => self.radius = Some(num(key, value)?),
            "slope" => self.slope = Some(num(key, value)?),
            "lu" => self.lu = Some(num(key, value)?),
            "lv" => self.lv = Some(num(key, value)?),
            "beta" => self.beta = Some(num(key, value)?),
            "off" => self.off = Some(PathBuf::from(value)),
            "potential" => self.potential = Some(PathBuf::from(value)),
            "subdiv" => self.subdiv = Some(num(key, value)?),
            "grid" => self.grid = Some(parse_grid(value)?),
            "k" => self.k = Some(num(key, value)?),
            "tol" => self.tol = Some(num(key, value)?),
            "z-min" => self.z_min = Some(num(key, value)?),
            "z-max" => self.z_max = Some(num(key, value)?),
            "z-count" => self.z_count = Some(num(key, value)?),
            "z-log" => self.z_log = Some(num(key, value)?),
            "slack" => self.slack = Some(num(key, value)?),
            "c" => self.c = Some(num(key, value)?),
            "dt" => self.dt = Some(num(key, value)?),
            "t-end" => self.t_end = Some(num(key, value)?),
            "p-list" => self.p_list = Some(parse_p_list(value)?),
            "record-every" => self.record_every = Some(num(key, value)?),
            "integrator" => self.integrator = Some(value.to_string()),
            "u0" => self.u0 = Some(PathBuf::from(value)),
            "samples" => self.samples = Some(num(key, value)?),
            "seed" => self.seed = Some(num(key, value)?),
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// Right-hand side wins field by field.
    pub fn merged_with(mut self, over: ConfigOverlay) -> ConfigOverlay {
        macro_rules! take {
            ($($f:ident),+) => { $( if over.$f.is_some() { self.$f = over.$f; } )+ };
        }
        take!(
            surface, radius, slope, lu, lv, beta, off, potential, subdiv, grid, k, tol, z_min,
            z_max, z_count, z_log, slack, c, dt, t_end, p_list, record_every, integrator, u0,
            samples, seed
        );
        self
    }

    /// Fill in defaults and cross-check the surface/resolution combination.
    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::default();

        let surface_kind = self.surface.as_deref().unwrap_or("sphere");
        cfg.surface = match surface_kind {
            "sphere" | "sphere-linear" => SurfaceSpec::SphereLinear {
                radius: self.radius.unwrap_or(1.0),
                slope: self.slope.unwrap_or(0.0),
            },
            "torus" | "torus-cosine" => {
                let tau = 2.0 * std::f64::consts::PI;
                SurfaceSpec::TorusCosine {
                    lu: self.lu.unwrap_or(tau),
                    lv: self.lv.unwrap_or(tau),
                    beta: self.beta.unwrap_or(0.0),
                }
            }
            "off" | "user" => {
                let off = self.off.clone().ok_or_else(|| {
                    CliError::Config("surface = off requires an --off mesh path".into())
                })?;
                SurfaceSpec::UserMesh {
                    off,
                    potential: self.potential.clone(),
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown surface {other:?}; expected sphere, torus, or off"
                )))
            }
        };

        cfg.resolution = match (&cfg.surface, self.subdiv, self.grid) {
            (SurfaceSpec::UserMesh { .. }, None, None) => ResolutionSpec::FromFile,
            (SurfaceSpec::UserMesh { .. }, _, _) => {
                return Err(CliError::Config(
                    "user meshes carry their own resolution; drop --subdiv/--grid".into(),
                ))
            }
            (SurfaceSpec::SphereLinear { .. }, level, None) => ResolutionSpec::Subdivision {
                level: level.unwrap_or(4),
            },
            (SurfaceSpec::SphereLinear { .. }, _, Some(_)) => {
                return Err(CliError::Config(
                    "sphere surfaces take --subdiv, not --grid".into(),
                ))
            }
            (SurfaceSpec::TorusCosine { .. }, None, grid) => {
                let (nu, nv) = grid.unwrap_or((64, 64));
                ResolutionSpec::Grid { nu, nv }
            }
            (SurfaceSpec::TorusCosine { .. }, Some(_), _) => {
                return Err(CliError::Config(
                    "torus surfaces take --grid, not --subdiv".into(),
                ))
            }
        };

        if let Some(tol) = self.tol {
            cfg.eigen_tol = tol;
        }
        if let Some(k) = self.k {
            cfg.eigen_count = k;
        }
        if let Some(v) = self.z_min {
            cfg.z.min = v;
        }
        if let Some(v) = self.z_max {
            cfg.z.max = v;
        }
        if let Some(v) = self.z_count {
            cfg.z.count = v;
        }
        if let Some(v) = self.z_log {
            cfg.z.log = v;
        }
        if let Some(v) = self.slack {
            cfg.slack = v;
        }
        if let Some(v) = self.c {
            cfg.heat.c = v;
        }
        if let Some(v) = self.dt {
            cfg.heat.dt = v;
        }
        if let Some(v) = self.t_end {
            cfg.heat.t_end = v;
        }
        if let Some(v) = self.p_list {
            cfg.heat.p_list = v;
        }
        if let Some(v) = self.record_every {
            cfg.heat.record_every = v;
        }
        if let Some(v) = self.integrator {
            match v.as_str() {
                "implicit-euler" | "spectral-expansion" => cfg.heat.integrator = v,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown integrator {other:?}; expected implicit-euler or spectral-expansion"
                    )))
                }
            }
        }
        if let Some(v) = self.u0 {
            cfg.heat.u0 = Some(v);
        }
        // one --slack flag: the eigenvalue verdict and the decay verdict
        // each read their own field, so set both when given
        if let Some(v) = self.slack {
            cfg.heat.tol = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        Ok(cfg)
    }
}

pub fn parse_grid(value: &str) -> Result<(usize, usize), String> {
    let (a, b) = value
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid must look like 64x64, got {value:?}"))?;
    let nu = a
        .trim()
        .parse()
        .map_err(|_| format!("invalid grid size {a:?}"))?;
    let nv = b
        .trim()
        .parse()
        .map_err(|_| format!("invalid grid size {b:?}"))?;
    Ok((nu, nv))
}

pub fn parse_p_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| format!("invalid p value {s:?}"))
        })
        .collect()
}
