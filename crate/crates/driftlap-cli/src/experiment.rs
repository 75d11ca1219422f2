//! Experiment drivers: wire meshes, operators, eigensolves, condition
//! scans, and heat flows into reproducible runs.
//!
//! Stage failures never panic and never abort silently: the failing stage
//! is named in the report and all downstream fields stay absent.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use driftlap::catalog::{condition_report, z_grid, AnalyticSurface, MeshResolution};
use driftlap::heat::{evolve, verify_decay, HeatConfig, Integrator};
use driftlap::mesh::load_off_path;
use driftlap::operator::{read_values_csv_path, Potential, WeightedOperator};
use driftlap::spectral::{first_positive_eigenvalue, smallest_eigenpairs};
use driftlap::{AnalyticSurface64, Potential64, TriangleMesh64, WeightedOperator64};

use crate::config::{ExperimentConfig, ResolutionSpec, SurfaceSpec};
use crate::report::{
    Artifacts, ConditionSummary, ConvergenceRow, ConvergenceSummary, EigenSummary, MeshSummary,
    PVerdict, RunReport, StageError, Theorem1Report, Theorem2Report, TraceArtifact, Verdict,
    ZReportRow,
};
use crate::CliError;

pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Artifacts,
}

impl RunOutput {
    /// Exit status the CLI maps to: 0 completed, 1 stage error, 3 verdict
    /// failure.
    pub fn exit_code(&self) -> i32 {
        if self.report.error.is_some() {
            return 1;
        }
        let thm1_failed = matches!(
            &self.report.theorem1,
            Some(t) if t.verdict == Verdict::Fail
        );
        let thm2_failed = matches!(
            &self.report.theorem2,
            Some(t) if t.verdict == Verdict::Fail
        );
        if thm1_failed || thm2_failed {
            3
        } else {
            0
        }
    }
}

struct StageClock {
    start: Instant,
}

impl StageClock {
    fn start() -> Self {
        StageClock {
            start: Instant::now(),
        }
    }

    fn lap(&mut self, report: &mut RunReport, stage: &str) {
        let elapsed = self.start.elapsed().as_secs_f64();
        report.timings.insert(stage.to_string(), elapsed);
        self.start = Instant::now();
    }
}

fn fail(report: &mut RunReport, stage: &str, err: impl std::fmt::Display) {
    report.error = Some(StageError {
        stage: stage.to_string(),
        message: err.to_string(),
    });
}

/// Mesh + potential (+ the analytic surface when the config names one).
pub fn realize_surface(
    cfg: &ExperimentConfig,
) -> Result<(Arc<TriangleMesh64>, Potential64, Option<AnalyticSurface64>), CliError> {
    match &cfg.surface {
        SurfaceSpec::SphereLinear { radius, slope } => {
            let level = match cfg.resolution {
                ResolutionSpec::Subdivision { level } => level,
                _ => return Err(CliError::Config("sphere needs a subdivision level".into())),
            };
            let surface = AnalyticSurface::sphere_linear(*radius, *slope)?;
            let (mesh, potential) = surface.realize(MeshResolution::Subdivision(level))?;
            Ok((mesh, potential, Some(surface)))
        }
        SurfaceSpec::TorusCosine { lu, lv, beta } => {
            let (nu, nv) = match cfg.resolution {
                ResolutionSpec::Grid { nu, nv } => (nu, nv),
                _ => return Err(CliError::Config("torus needs grid sizes".into())),
            };
            let surface = AnalyticSurface::torus_cosine(*lu, *lv, *beta)?;
            let (mesh, potential) = surface.realize(MeshResolution::Grid { nu, nv })?;
            Ok((mesh, potential, Some(surface)))
        }
        SurfaceSpec::UserMesh { off, potential } => {
            let mesh = Arc::new(load_off_path::<f64, _>(off)?);
            let pot = match potential {
                Some(path) => {
                    let values = read_values_csv_path::<f64, _>(path)?;
                    Potential::new(values)?
                        .with_descriptor(format!("csv:{}", path.display()))
                }
                None => Potential::zero(mesh.vertex_count()),
            };
            Ok((mesh, pot, None))
        }
    }
}

fn assemble_stage(
    report: &mut RunReport,
    clock: &mut StageClock,
    cfg: &ExperimentConfig,
) -> Option<(WeightedOperator64, Option<AnalyticSurface64>)> {
    let (mesh, potential, surface) = match realize_surface(cfg) {
        Ok(v) => v,
        Err(e) => {
            fail(report, "mesh", e);
            return None;
        }
    };
    report.mesh = Some(MeshSummary::from_mesh(&mesh));
    clock.lap(report, "mesh");

    let op = match WeightedOperator::assemble(mesh, potential) {
        Ok(op) => op,
        Err(e) => {
            fail(report, "assemble", e);
            return None;
        }
    };
    clock.lap(report, "assemble");
    Some((op, surface))
}

/// Seeded uniform values projected to weighted mean zero.
pub fn random_mean_zero(op: &WeightedOperator64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..op.vertex_count())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    op.remove_weighted_mean(&raw)
        .expect("length matches by construction")
}

/// Spectrum-only run: k smallest certified pairs.
pub fn run_eigs(cfg: &ExperimentConfig) -> RunOutput {
    let mut report = RunReport::new("eigs", cfg.clone());
    let mut artifacts = Artifacts::default();
    let mut clock = StageClock::start();

    let Some((op, surface)) = assemble_stage(&mut report, &mut clock, cfg) else {
        return RunOutput { report, artifacts };
    };
    // mesh.off is written back only for meshes this run generated
    if surface.is_some() {
        artifacts.mesh = Some(op.mesh().clone());
    }

    match smallest_eigenpairs(&op, cfg.eigen_count, cfg.eigen_tol) {
        Ok(eig) => {
            report.eigen = Some(EigenSummary {
                eigenvalues: eig.eigenvalues().to_vec(),
                residuals: eig.residuals().to_vec(),
                tolerance: cfg.eigen_tol,
                method: eig.method_used().to_string(),
                lambda1: None,
            });
            artifacts.eigen = Some(eig);
        }
        Err(e) => fail(&mut report, "eigensolve", e),
    }
    clock.lap(&mut report, "eigensolve");
    RunOutput { report, artifacts }
}

/// Full eigenvalue-bound pipeline: spectrum, z sweep, verdict.
pub fn run_eigen_experiment(cfg: &ExperimentConfig) -> RunOutput {
    let mut report = RunReport::new("verify-thm1", cfg.clone());
    let mut artifacts = Artifacts::default();
    let mut clock = StageClock::start();

    let Some((op, surface)) = assemble_stage(&mut report, &mut clock, cfg) else {
        return RunOutput { report, artifacts };
    };
    if surface.is_some() {
        artifacts.mesh = Some(op.mesh().clone());
    }

    let first = match first_positive_eigenvalue(&op, cfg.eigen_tol) {
        Ok(fp) => fp,
        Err(e) => {
            fail(&mut report, "eigensolve", e);
            return RunOutput { report, artifacts };
        }
    };
    // also record the low spectrum for the report
    match smallest_eigenpairs(&op, cfg.eigen_count.min(op.vertex_count()), cfg.eigen_tol) {
        Ok(eig) => {
            report.eigen = Some(EigenSummary {
                eigenvalues: eig.eigenvalues().to_vec(),
                residuals: eig.residuals().to_vec(),
                tolerance: cfg.eigen_tol,
                method: eig.method_used().to_string(),
                lambda1: Some(first.lambda1),
            });
            artifacts.eigen = Some(eig);
        }
        Err(e) => {
            fail(&mut report, "eigensolve", e);
            return RunOutput { report, artifacts };
        }
    }
    clock.lap(&mut report, "eigensolve");

    let Some(surface) = surface else {
        // user meshes carry no closed-form curvature: the hypothesis of the
        // bound cannot be checked, so the verdict is not-applicable
        report.theorem1 = Some(Theorem1Report {
            lambda1: first.lambda1,
            best_bound: None,
            slack: cfg.slack,
            margin: None,
            verdict: Verdict::NotApplicable,
        });
        return RunOutput { report, artifacts };
    };

    let grid = match z_grid(cfg.z.min, cfg.z.max, cfg.z.count, cfg.z.log) {
        Ok(g) => g,
        Err(e) => {
            fail(&mut report, "z-sweep", e);
            return RunOutput { report, artifacts };
        }
    };
    let mut rows = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    let mut k_constant = f64::NAN;
    for &z in &grid {
        match condition_report(&surface, z, cfg.samples) {
            Ok(r) => {
                k_constant = r.k;
                if let Some(bound) = r.bound {
                    if best.is_none_or(|(_, b)| bound > b) {
                        best = Some((z, bound));
                    }
                }
                rows.push(ZReportRow {
                    z: r.z,
                    a: r.a,
                    k: r.k,
                    bound: r.bound,
                    satisfiable: r.satisfiable,
                    argmin_location: r.argmin_location,
                });
            }
            Err(e) => {
                fail(&mut report, "z-sweep", e);
                return RunOutput { report, artifacts };
            }
        }
    }
    report.conditions = Some(ConditionSummary {
        k_constant,
        samples: cfg.samples,
        best_z: best.map(|(z, _)| z),
        best_bound: best.map(|(_, b)| b),
        rows: rows.clone(),
    });
    artifacts.sweep = Some(rows);
    clock.lap(&mut report, "z-sweep");

    report.theorem1 = Some(match best {
        Some((_z, bound)) => {
            let margin = first.lambda1 - bound * (1.0 - cfg.slack);
            Theorem1Report {
                lambda1: first.lambda1,
                best_bound: Some(bound),
                slack: cfg.slack,
                margin: Some(margin),
                verdict: if margin >= 0.0 {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                },
            }
        }
        None => Theorem1Report {
            lambda1: first.lambda1,
            best_bound: None,
            slack: cfg.slack,
            margin: None,
            verdict: Verdict::NotApplicable,
        },
    });
    RunOutput { report, artifacts }
}

/// Heat-flow run: evolve, record energies, verify the decay bound.
pub fn run_heat_experiment(cfg: &ExperimentConfig) -> RunOutput {
    let mut report = RunReport::new("heat", cfg.clone());
    let mut artifacts = Artifacts::default();
    let mut clock = StageClock::start();

    let Some((op, surface)) = assemble_stage(&mut report, &mut clock, cfg) else {
        return RunOutput { report, artifacts };
    };
    if surface.is_some() {
        artifacts.mesh = Some(op.mesh().clone());
    }

    let u0 = match &cfg.heat.u0 {
        Some(path) => match read_values_csv_path::<f64, _>(path) {
            Ok(v) => v,
            Err(e) => {
                fail(&mut report, "initial-data", e);
                return RunOutput { report, artifacts };
            }
        },
        None => random_mean_zero(&op, cfg.seed),
    };

    let heat_cfg = HeatConfig {
        c: cfg.heat.c,
        dt: cfg.heat.dt,
        t_end: cfg.heat.t_end,
        p_list: cfg.heat.p_list.clone(),
        integrator: if cfg.heat.integrator == "spectral-expansion" {
            Integrator::SpectralExpansion
        } else {
            Integrator::ImplicitEuler
        },
        record_every: cfg.heat.record_every,
    };
    let trace = match evolve(&op, &u0, &heat_cfg) {
        Ok(t) => t,
        Err(e) => {
            fail(&mut report, "evolve", e);
            return RunOutput { report, artifacts };
        }
    };
    clock.lap(&mut report, "evolve");

    // the decay constant comes from the analytic surface; user meshes get
    // the trace but no verdict
    let bound = match &surface {
        Some(surface) => {
            match driftlap::catalog::condition4_k(surface, cfg.samples) {
                Ok(k) => Some((k, cfg.heat.c)),
                Err(e) => {
                    fail(&mut report, "condition-scan", e);
                    return RunOutput { report, artifacts };
                }
            }
        }
        None => None,
    };
    if let Some((k_constant, c)) = bound {
        let verdicts = verify_decay(&trace, k_constant, c, cfg.heat.tol);
        let all_pass = verdicts.iter().all(|v| v.pass);
        report.theorem2 = Some(Theorem2Report {
            k_constant,
            c,
            tol: cfg.heat.tol,
            verdicts: verdicts
                .iter()
                .map(|v| PVerdict {
                    p: v.p,
                    pass: v.pass,
                    worst_margin: v.worst_margin,
                    worst_time: v.worst_time,
                })
                .collect(),
            verdict: if all_pass { Verdict::Pass } else { Verdict::Fail },
        });
    }
    artifacts.trace = Some(TraceArtifact { trace, bound });
    clock.lap(&mut report, "verify");
    RunOutput { report, artifacts }
}

/// Resolution ladder for the convergence study.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StudyLevels {
    Subdivisions(Vec<u32>),
    Grids(Vec<usize>),
}

/// `lambda_1` per resolution with error ratios and an order estimate.
///
/// Assumes each successive level halves the mesh size, which both ladders
/// the CLI accepts (subdivision levels, doubling grids) satisfy.
pub fn convergence_study(cfg: &ExperimentConfig, levels: &StudyLevels) -> RunOutput {
    let mut report = RunReport::new("converge", cfg.clone());
    let mut artifacts = Artifacts::default();
    let mut clock = StageClock::start();

    let level_list: Vec<String> = match levels {
        StudyLevels::Subdivisions(l) => l.iter().map(|s| format!("subdiv-{s}")).collect(),
        StudyLevels::Grids(g) => g.iter().map(|s| format!("grid-{s}x{s}")).collect(),
    };
    if level_list.len() < 3 {
        fail(&mut report, "levels", "need at least 3 resolutions");
        return RunOutput { report, artifacts };
    }
    for (i, a) in level_list.iter().enumerate() {
        if level_list[i + 1..].contains(a) {
            fail(
                &mut report,
                "levels",
                format!("duplicate resolution {a} supplied"),
            );
            return RunOutput { report, artifacts };
        }
    }

    let oracle = analytic_lambda1(&cfg.surface);
    let mut lambdas = Vec::new();
    let mut counts = Vec::new();
    for (i, label) in level_list.iter().enumerate() {
        let level_cfg = ExperimentConfig {
            resolution: match levels {
                StudyLevels::Subdivisions(l) => ResolutionSpec::Subdivision { level: l[i] },
                StudyLevels::Grids(g) => ResolutionSpec::Grid { nu: g[i], nv: g[i] },
            },
            ..cfg.clone()
        };
        let (mesh, potential, _) = match realize_surface(&level_cfg) {
            Ok(v) => v,
            Err(e) => {
                fail(&mut report, &format!("mesh:{label}"), e);
                return RunOutput { report, artifacts };
            }
        };
        counts.push(mesh.vertex_count());
        let op = match WeightedOperator::assemble(mesh, potential) {
            Ok(op) => op,
            Err(e) => {
                fail(&mut report, &format!("assemble:{label}"), e);
                return RunOutput { report, artifacts };
            }
        };
        match first_positive_eigenvalue(&op, cfg.eigen_tol) {
            Ok(fp) => lambdas.push(fp.lambda1),
            Err(e) => {
                fail(&mut report, &format!("eigensolve:{label}"), e);
                return RunOutput { report, artifacts };
            }
        }
    }
    clock.lap(&mut report, "ladder");

    let n = lambdas.len();
    let errors: Vec<Option<f64>> = match oracle {
        Some(exact) => lambdas.iter().map(|l| Some((l - exact).abs())).collect(),
        None => lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| {
                if i + 1 < n {
                    Some((l - lambdas[n - 1]).abs())
                } else {
                    None
                }
            })
            .collect(),
    };
    let mut rows = Vec::new();
    let mut order_terms = Vec::new();
    for i in 0..n {
        let ratio = match (errors[i], errors.get(i + 1).copied().flatten()) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        if let Some(r) = ratio {
            if oracle.is_some() || i + 2 < n {
                order_terms.push(r.log2());
            }
        }
        rows.push(ConvergenceRow {
            resolution: level_list[i].clone(),
            vertex_count: counts[i],
            lambda1: lambdas[i],
            error: errors[i],
            ratio,
        });
    }
    let estimated_order = if oracle.is_some() {
        order_terms.iter().sum::<f64>() / order_terms.len().max(1) as f64
    } else {
        // Richardson on consecutive triples of lambda values
        let mut terms = Vec::new();
        for w in lambdas.windows(3) {
            let d1 = w[0] - w[1];
            let d2 = w[1] - w[2];
            if d2 != 0.0 && (d1 / d2) > 0.0 {
                terms.push((d1 / d2).log2());
            }
        }
        terms.iter().sum::<f64>() / terms.len().max(1) as f64
    };
    let summary = ConvergenceSummary {
        oracle_lambda1: oracle,
        rows,
        estimated_order,
    };
    report.convergence = Some(summary.clone());
    artifacts.convergence = Some(summary);
    RunOutput { report, artifacts }
}

/// Closed-form first positive eigenvalue, known only for drift-free
/// catalog surfaces.
fn analytic_lambda1(surface: &SurfaceSpec) -> Option<f64> {
    match surface {
        SurfaceSpec::SphereLinear { radius, slope } if *slope == 0.0 => {
            Some(2.0 / (radius * radius))
        }
        SurfaceSpec::TorusCosine { lu, lv, beta } if *beta == 0.0 => {
            let tau = 2.0 * std::f64::consts::PI;
            let a = (tau / lu).powi(2);
            let b = (tau / lv).powi(2);
            Some(a.min(b))
        }
        _ => None,
    }
}
