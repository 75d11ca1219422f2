use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use driftlap_cli::config::{parse_grid, parse_p_list, ConfigOverlay};
use driftlap_cli::experiment::{
    convergence_study, run_eigen_experiment, run_eigs, run_heat_experiment, RunOutput,
    StudyLevels,
};
use driftlap_cli::report::{emit_report, MeshSummary, Verdict};
use driftlap_cli::CliError;

/// Exit codes: 0 completed run (including "bound not applicable"),
/// 1 stage or I/O error, 2 usage error (clap), 3 theorem verdict failure.
#[derive(Parser)]
#[command(
    name = "driftlap",
    version,
    about = "Weighted-Laplacian spectra, curvature eigenvalue bounds, and heat-flow energy checks on closed triangulated surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, validate, or canonically rewrite meshes
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
    /// Smallest certified eigenpairs of the weighted operator
    Eigs(RunArgs),
    /// Eigenvalue lower-bound verification: z sweep plus verdict
    VerifyThm1(RunArgs),
    /// Drifting heat flow with energy recording and decay verdicts
    Heat(RunArgs),
    /// lambda_1 across a resolution ladder with an order estimate
    Converge(ConvergeArgs),
}

#[derive(Subcommand)]
enum MeshAction {
    /// Build a catalog mesh, validate it, and write the artifacts
    Generate(MeshGenArgs),
    /// Parse an OFF file and print its diagnostics as JSON
    Validate {
        #[arg(long)]
        off: PathBuf,
    },
    /// Reload an OFF file and rewrite it with canonical formatting
    Convert {
        #[arg(long)]
        off: PathBuf,
        /// Output OFF path
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct MeshGenArgs {
    /// sphere | torus
    #[arg(long)]
    surface: String,
    #[arg(long)]
    subdiv: Option<u32>,
    /// Torus grid, e.g. 64x64
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    lu: Option<f64>,
    #[arg(long)]
    lv: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// key = value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// sphere | torus | off
    #[arg(long)]
    surface: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    /// Sphere drift slope a in f = a x3
    #[arg(long, allow_negative_numbers = true)]
    slope: Option<f64>,
    #[arg(long)]
    lu: Option<f64>,
    #[arg(long)]
    lv: Option<f64>,
    /// Torus drift amplitude in f = beta cos(2 pi u / Lu)
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// OFF mesh path (surface = off)
    #[arg(long)]
    off: Option<PathBuf>,
    /// Per-vertex potential CSV (surface = off)
    #[arg(long)]
    potential: Option<PathBuf>,
    #[arg(long)]
    subdiv: Option<u32>,
    /// Torus grid, e.g. 64x64
    #[arg(long)]
    grid: Option<String>,
    /// Number of eigenpairs
    #[arg(long)]
    k: Option<usize>,
    /// Eigensolver tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    z_min: Option<f64>,
    #[arg(long)]
    z_max: Option<f64>,
    #[arg(long)]
    z_count: Option<usize>,
    #[arg(long)]
    z_log: Option<bool>,
    /// Verdict slack (fraction)
    #[arg(long, allow_negative_numbers = true)]
    slack: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Comma-separated energy exponents, e.g. 1,2,3,4
    #[arg(long)]
    p_list: Option<String>,
    #[arg(long)]
    record_every: Option<usize>,
    /// implicit-euler | spectral-expansion
    #[arg(long)]
    integrator: Option<String>,
    /// Initial data CSV for heat runs
    #[arg(long)]
    u0: Option<PathBuf>,
    /// Condition-scan grid points
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Sphere subdivision ladder, e.g. 2,3,4
    #[arg(long)]
    levels: Option<String>,
    /// Torus grid ladder, e.g. 16,32,64
    #[arg(long)]
    grids: Option<String>,
}

impl RunArgs {
    fn overlay(&self) -> Result<ConfigOverlay, CliError> {
        let from_file = match &self.config {
            Some(path) => ConfigOverlay::from_key_value_file(path)?,
            None => ConfigOverlay::default(),
        };
        let grid = match &self.grid {
            Some(g) => Some(parse_grid(g).map_err(CliError::Config)?),
            None => None,
        };
        let p_list = match &self.p_list {
            Some(p) => Some(parse_p_list(p).map_err(CliError::Config)?),
            None => None,
        };
        let flags = ConfigOverlay {
            surface: self.surface.clone(),
            radius: self.radius,
            slope: self.slope,
            lu: self.lu,
            lv: self.lv,
            beta: self.beta,
            off: self.off.clone(),
            potential: self.potential.clone(),
            subdiv: self.subdiv,
            grid,
            k: self.k,
            tol: self.tol,
            z_min: self.z_min,
            z_max: self.z_max,
            z_count: self.z_count,
            z_log: self.z_log,
            slack: self.slack,
            c: self.c,
            dt: self.dt,
            t_end: self.t_end,
            p_list,
            record_every: self.record_every,
            integrator: self.integrator.clone(),
            u0: self.u0.clone(),
            samples: self.samples,
            seed: self.seed,
        };
        Ok(from_file.merged_with(flags))
    }
}

fn parse_ladder<T: std::str::FromStr>(value: &str, what: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid {what} entry {s:?}")))
        })
        .collect()
}

fn finish_run(output: RunOutput, out_dir: &Path) -> Result<i32, CliError> {
    let written = emit_report(&output.report, &output.artifacts, out_dir)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    if let Some(err) = &output.report.error {
        eprintln!("stage {} failed: {}", err.stage, err.message);
    }
    if let Some(t1) = &output.report.theorem1 {
        match t1.verdict {
            Verdict::Pass => println!(
                "theorem-1 verdict: pass (lambda1 = {}, best bound = {})",
                t1.lambda1,
                t1.best_bound.unwrap_or(f64::NAN)
            ),
            Verdict::Fail => println!(
                "theorem-1 verdict: FAIL (lambda1 = {}, best bound = {})",
                t1.lambda1,
                t1.best_bound.unwrap_or(f64::NAN)
            ),
            Verdict::NotApplicable => println!(
                "theorem-1 verdict: bound not applicable (lambda1 = {})",
                t1.lambda1
            ),
        }
    }
    if let Some(t2) = &output.report.theorem2 {
        for v in &t2.verdicts {
            println!(
                "decay p = {}: {} (worst margin {:.3e} at t = {})",
                v.p,
                if v.pass { "pass" } else { "FAIL" },
                v.worst_margin,
                v.worst_time
            );
        }
    }
    if let Some(c) = &output.report.convergence {
        for row in &c.rows {
            println!(
                "{}: n = {}, lambda1 = {}{}",
                row.resolution,
                row.vertex_count,
                row.lambda1,
                row.error
                    .map(|e| format!(", error = {e:.3e}"))
                    .unwrap_or_default()
            );
        }
        println!("estimated order: {:.3}", c.estimated_order);
    }
    Ok(output.exit_code())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Mesh { action } => run_mesh(action),
        Command::Eigs(args) => {
            let cfg = args.overlay()?.resolve()?;
            finish_run(run_eigs(&cfg), &args.out)
        }
        Command::VerifyThm1(args) => {
            let cfg = args.overlay()?.resolve()?;
            finish_run(run_eigen_experiment(&cfg), &args.out)
        }
        Command::Heat(args) => {
            let cfg = args.overlay()?.resolve()?;
            finish_run(run_heat_experiment(&cfg), &args.out)
        }
        Command::Converge(args) => {
            let cfg = args.run.overlay()?.resolve()?;
            let levels = match (&args.levels, &args.grids) {
                (Some(l), None) => StudyLevels::Subdivisions(parse_ladder(l, "level")?),
                (None, Some(g)) => StudyLevels::Grids(parse_ladder(g, "grid")?),
                _ => {
                    return Err(CliError::Config(
                        "converge needs exactly one of --levels or --grids".into(),
                    ))
                }
            };
            finish_run(convergence_study(&cfg, &levels), &args.run.out)
        }
    }
}

fn run_mesh(action: MeshAction) -> Result<i32, CliError> {
    match action {
        MeshAction::Generate(args) => {
            let mesh: driftlap::TriangleMesh64 = match args.surface.as_str() {
                "sphere" => driftlap::mesh::generate_icosphere(
                    args.subdiv.unwrap_or(4),
                    args.radius.unwrap_or(1.0),
                )?,
                "torus" => {
                    let (nu, nv) = match &args.grid {
                        Some(g) => parse_grid(g).map_err(CliError::Config)?,
                        None => (64, 64),
                    };
                    let tau = 2.0 * std::f64::consts::PI;
                    driftlap::mesh::generate_flat_torus(
                        nu,
                        nv,
                        args.lu.unwrap_or(tau),
                        args.lv.unwrap_or(tau),
                    )?
                }
                other => {
                    return Err(CliError::Config(format!(
                        "unknown surface {other:?}; expected sphere or torus"
                    )))
                }
            };
            std::fs::create_dir_all(&args.out).map_err(|e| CliError::Io {
                path: args.out.display().to_string(),
                source: e,
            })?;
            let summary = MeshSummary::from_mesh(&mesh);
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
            if matches!(
                mesh.geometry(),
                driftlap::mesh::MeshGeometry::Embedded3D { .. }
            ) {
                let path = args.out.join("mesh.off");
                driftlap::mesh::save_off_path(&mesh, &path)?;
                println!("wrote {}", path.display());
            } else {
                eprintln!("note: periodic meshes have no embedding, skipping mesh.off");
            }
            Ok(0)
        }
        MeshAction::Validate { off } => {
            let mesh = driftlap::mesh::load_off_path::<f64, _>(&off)?;
            let summary = MeshSummary::from_mesh(&mesh);
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
            Ok(0)
        }
        MeshAction::Convert { off, out } => {
            let mesh = driftlap::mesh::load_off_path::<f64, _>(&off)?;
            driftlap::mesh::save_off_path(&mesh, &out)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
