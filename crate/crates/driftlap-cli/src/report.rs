//! Machine-readable run reports and the CSV side files.
//!
//! `report.json` uses struct declaration order for its keys, so two runs of
//! the same config serialize identically except for the `timings` object.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use driftlap::heat::EnergyTrace;
use driftlap::{EigenResult64, TriangleMesh64};

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshSummary {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub is_closed: bool,
    pub is_oriented: bool,
    pub euler_characteristic: i64,
    pub min_triangle_area: f64,
    pub min_angle: f64,
    pub boundary_edge_count: usize,
    pub total_area: f64,
}

impl MeshSummary {
    pub fn from_mesh(mesh: &TriangleMesh64) -> Self {
        let d = mesh.validate();
        MeshSummary {
            vertex_count: mesh.vertex_count(),
            triangle_count: mesh.triangle_count(),
            is_closed: d.is_closed,
            is_oriented: d.is_oriented,
            euler_characteristic: d.euler_characteristic,
            min_triangle_area: d.min_triangle_area,
            min_angle: d.min_angle,
            boundary_edge_count: d.boundary_edge_count,
            total_area: mesh.total_area(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSummary {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub tolerance: f64,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZReportRow {
    pub z: f64,
    pub a: f64,
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub satisfiable: bool,
    pub argmin_location: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub k_constant: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_bound: Option<f64>,
    pub rows: Vec<ZReportRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub lambda1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_bound: Option<f64>,
    pub slack: f64,
    /// `lambda1 - best_bound (1 - slack)`; positive means pass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PVerdict {
    pub p: f64,
    pub pass: bool,
    pub worst_margin: f64,
    pub worst_time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub k_constant: f64,
    pub c: f64,
    pub tol: f64,
    pub verdicts: Vec<PVerdict>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub resolution: String,
    pub vertex_count: usize,
    pub lambda1: f64,
    /// Error against the analytic oracle or the finest level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_lambda1: Option<f64>,
    pub rows: Vec<ConvergenceRow>,
    pub estimated_order: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub artifact_version: String,
    pub command: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem1: Option<Theorem1Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem2: Option<Theorem2Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<StageError>,
    /// Wall-clock stage timings in seconds; excluded from determinism.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str, config: ExperimentConfig) -> Self {
        RunReport {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            mesh: None,
            eigen: None,
            conditions: None,
            theorem1: None,
            theorem2: None,
            convergence: None,
            error: None,
            timings: BTreeMap::new(),
        }
    }
}

/// Everything a run may leave on disk besides the report.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub mesh: Option<std::sync::Arc<TriangleMesh64>>,
    pub eigen: Option<EigenResult64>,
    pub trace: Option<TraceArtifact>,
    pub sweep: Option<Vec<ZReportRow>>,
    pub convergence: Option<ConvergenceSummary>,
}

/// Energy trace plus what the bound columns need.
#[derive(Debug)]
pub struct TraceArtifact {
    pub trace: EnergyTrace<f64>,
    /// `(K, c)` when the decay bound applies.
    pub bound: Option<(f64, f64)>,
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(std::io::BufWriter::new(file))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// Format p for a CSV column header: integral values lose the dot.
fn p_label(p: f64) -> String {
    if p.fract() == 0.0 && p.abs() < 1e6 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

pub fn write_trace_csv(artifact: &TraceArtifact, path: &Path) -> Result<(), CliError> {
    let trace = &artifact.trace;
    let mut w = create(path)?;
    let err = io_err(path);
    let mut header = String::from("time");
    for &p in &trace.p_list {
        header.push_str(&format!(",E_{}", p_label(p)));
    }
    header.push_str(",weighted_mean,weighted_l2");
    if artifact.bound.is_some() {
        for &p in &trace.p_list {
            header.push_str(&format!(",bound_{}", p_label(p)));
        }
    }
    writeln!(w, "{header}").map_err(&err)?;
    for (ti, &t) in trace.times.iter().enumerate() {
        let mut line = format!("{t}");
        for pi in 0..trace.p_list.len() {
            line.push_str(&format!(",{}", trace.energies[pi][ti]));
        }
        line.push_str(&format!(
            ",{},{}",
            trace.weighted_means[ti], trace.weighted_l2[ti]
        ));
        if let Some((k, c)) = artifact.bound {
            for (pi, &p) in trace.p_list.iter().enumerate() {
                let bound = (p * (k - c) * t).exp() * trace.energies[pi][0];
                line.push_str(&format!(",{bound}"));
            }
        }
        writeln!(w, "{line}").map_err(&err)?;
    }
    Ok(())
}

pub fn write_sweep_csv(rows: &[ZReportRow], path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "z,A,K,bound,satisfiable").map_err(&err)?;
    for r in rows {
        let bound = r.bound.map(|b| b.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", r.z, r.a, r.k, bound, r.satisfiable).map_err(&err)?;
    }
    Ok(())
}

/// Eigenvalues in the header row, one eigenvector per column.
pub fn write_eigen_csv(eigen: &EigenResult64, path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = io_err(path);
    let header = eigen
        .eigenvalues()
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(",");
    writeln!(w, "{header}").map_err(&err)?;
    let n = eigen.eigenvector(0).len();
    for row in 0..n {
        let line = (0..eigen.len())
            .map(|j| eigen.eigenvector(j)[row].to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}").map_err(&err)?;
    }
    Ok(())
}

pub fn write_convergence_csv(summary: &ConvergenceSummary, path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "resolution,vertices,lambda1,error,ratio").map_err(&err)?;
    for r in &summary.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.resolution,
            r.vertex_count,
            r.lambda1,
            r.error.map(|e| e.to_string()).unwrap_or_default(),
            r.ratio.map(|e| e.to_string()).unwrap_or_default()
        )
        .map_err(&err)?;
    }
    writeln!(w, "# estimated_order = {}", summary.estimated_order).map_err(&err)?;
    Ok(())
}

/// Write `report.json` and the side files into `dir`.
///
/// An existing `report.json` is a collision: runs never merge into a
/// previous run's directory.
pub fn emit_report(
    report: &RunReport,
    artifacts: &Artifacts,
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let report_path = dir.join("report.json");
    if report_path.exists() {
        return Err(CliError::OutputCollision {
            path: report_path.display().to_string(),
        });
    }

    let mut written = Vec::new();
    let json = serde_json::to_string_pretty(report).map_err(|e| CliError::Config(format!(
        "report serialization failed: {e}"
    )))?;
    std::fs::write(&report_path, json.as_bytes()).map_err(|e| CliError::Io {
        path: report_path.display().to_string(),
        source: e,
    })?;
    written.push(report_path);

    if let Some(mesh) = &artifacts.mesh {
        // only embedded meshes have an OFF representation
        if matches!(
            mesh.geometry(),
            driftlap::mesh::MeshGeometry::Embedded3D { .. }
        ) {
            let path = dir.join("mesh.off");
            driftlap::mesh::save_off_path(mesh.as_ref(), &path)?;
            written.push(path);
        }
    }
    if let Some(eigen) = &artifacts.eigen {
        let path = dir.join("eigen.csv");
        write_eigen_csv(eigen, &path)?;
        written.push(path);
    }
    if let Some(trace) = &artifacts.trace {
        let path = dir.join("trace.csv");
        write_trace_csv(trace, &path)?;
        written.push(path);
    }
    if let Some(rows) = &artifacts.sweep {
        let path = dir.join("sweep.csv");
        write_sweep_csv(rows, &path)?;
        written.push(path);
    }
    if let Some(summary) = &artifacts.convergence {
        let path = dir.join("converge.csv");
        write_convergence_csv(summary, &path)?;
        written.push(path);
    }
    Ok(written)
}
