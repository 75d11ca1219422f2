//! Acceptance suite: one test per numbered criterion, each printing a
//! pass/fail line with the measured numbers (visible under --nocapture).
//!
//! Criterion 8's sphere half is expected red: on icospheres the first
//! positive eigenvalue superconverges (measured order ~3.5, confirmed by an
//! independent implementation), so the pinned second-order window [1.7, 2.3]
//! cannot hold for that quantity. The check is implemented as stated rather
//! than loosened; the torus half passes at order ~2.0.

use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use driftlap::catalog::{
    classical_lichnerowicz, condition2_a, condition4_k, theorem1_bound, AnalyticSurface,
    MeshResolution, DEFAULT_SAMPLES,
};
use driftlap::heat::{evolve, spectral_evolve, verify_decay, HeatConfig, ImplicitStepper, Integrator};
use driftlap::linalg::dense::orthonormality_defect;
use driftlap::mesh::generate_flat_torus;
use driftlap::operator::{Potential, WeightedOperator};
use driftlap::spectral::{first_positive_eigenvalue, smallest_eigenpairs};
use driftlap::{EigenResult64, WeightedOperator64};

use driftlap_cli::config::{ExperimentConfig, ResolutionSpec, SurfaceSpec};
use driftlap_cli::experiment::{
    convergence_study, random_mean_zero, run_eigen_experiment, run_heat_experiment, StudyLevels,
};
use driftlap_cli::report::Verdict;

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn sphere_operator(subdiv: u32, slope: f64) -> WeightedOperator64 {
    let surf = AnalyticSurface::sphere_linear(1.0f64, slope).unwrap();
    let (mesh, pot) = surf.realize(MeshResolution::Subdivision(subdiv)).unwrap();
    WeightedOperator::assemble(mesh, pot).unwrap()
}

fn torus_operator(grid: usize, beta: f64) -> WeightedOperator64 {
    let surf = AnalyticSurface::torus_cosine(TAU, TAU, beta).unwrap();
    let (mesh, pot) = surf
        .realize(MeshResolution::Grid { nu: grid, nv: grid })
        .unwrap();
    WeightedOperator::assemble(mesh, pot).unwrap()
}

/// Criterion-1 pipeline, shared with criterion 2.
fn sphere4_solution() -> &'static (WeightedOperator64, EigenResult64, Duration) {
    static CELL: OnceLock<(WeightedOperator64, EigenResult64, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let op = sphere_operator(4, 0.0);
        let eig = smallest_eigenpairs(&op, 5, 1e-8).unwrap();
        let elapsed = start.elapsed();
        (op, eig, elapsed)
    })
}

#[test]
fn criterion_01_sphere_spectrum_oracle() {
    let (op, eig, elapsed) = sphere4_solution();
    assert_eq!(op.vertex_count(), 2562);
    let l = eig.eigenvalues();
    let lambda1 = l[1];
    assert!(
        (lambda1 - 2.0).abs() / 2.0 < 0.01,
        "lambda1 = {lambda1} not within 1% of 2"
    );
    let mut spread = 0.0f64;
    for i in 1..4 {
        for j in (i + 1)..4 {
            let rel = (l[i] - l[j]).abs() / l[j];
            spread = spread.max(rel);
            assert!(rel < 0.01, "cluster members {i},{j} differ by {rel}");
        }
    }
    assert!(
        *elapsed < Duration::from_secs(60),
        "solve took {elapsed:?}, budget 60 s"
    );
    println!(
        "criterion 1 (sphere spectrum oracle): PASS - lambda1 = {lambda1:.9}, \
         cluster spread {spread:.2e}, {elapsed:.2?}"
    );
}

#[test]
fn criterion_02_classical_lichnerowicz_limit() {
    let limit = theorem1_bound::<f64>(2, 1e-9, 1.0).unwrap();
    assert!(
        (limit - 2.0).abs() < 1e-5,
        "z -> 0 limit {limit} misses the classical value 2"
    );
    let classical = classical_lichnerowicz::<f64>(2, 1.0).unwrap();
    assert!((limit - classical).abs() < 1e-5);

    let (_, eig, _) = sphere4_solution();
    let lambda1 = eig.eigenvalues()[1];
    assert!(
        lambda1 >= 2.0 * (1.0 - 0.02),
        "lambda1 = {lambda1} below the classical bound with 2% slack"
    );
    println!(
        "criterion 2 (classical limit): PASS - bound(z=1e-9) = {limit:.8}, \
         lambda1 = {lambda1:.8} >= 1.96"
    );
}

#[test]
fn criterion_03_theorem1_sweep() {
    let z_values = [0.25, 0.5, 1.0, 2.0];
    let slopes = [0.25, 0.5, 0.75];
    let mut satisfiable_cases = 0;
    let mut worst_ratio = f64::INFINITY;
    for &a in &slopes {
        let surf = AnalyticSurface::sphere_linear(1.0f64, a).unwrap();
        let op = sphere_operator(4, a);
        let fp = first_positive_eigenvalue(&op, 1e-8).unwrap();
        for &z in &z_values {
            let scan = condition2_a(&surf, z, DEFAULT_SAMPLES).unwrap();
            if scan.a > 0.0 {
                satisfiable_cases += 1;
                let bound = theorem1_bound(2, z, scan.a).unwrap();
                worst_ratio = worst_ratio.min(fp.lambda1 / bound);
                assert!(
                    fp.lambda1 >= bound * (1.0 - 0.02),
                    "a={a} z={z}: lambda1 {} < bound {bound} (1 - 2%)",
                    fp.lambda1
                );
            }
        }
    }
    assert!(satisfiable_cases >= 9, "expected most cases satisfiable");

    // grid-scan oracle for the pinned middle case
    let surf = AnalyticSurface::sphere_linear(1.0f64, 0.5).unwrap();
    let scan = condition2_a(&surf, 1.0, DEFAULT_SAMPLES).unwrap();
    assert!(
        (scan.a - 0.5).abs() < 1e-4,
        "A(a=0.5, z=1) = {} not within 1e-4 of 0.5",
        scan.a
    );
    println!(
        "criterion 3 (theorem-1 sweep): PASS - {satisfiable_cases} satisfiable cases, \
         min lambda1/bound = {worst_ratio:.3}, A(0.5, z=1) = {:.6}",
        scan.a
    );
}

#[test]
fn criterion_04_negative_control() {
    // weighted torus: hypothesis fails for every tested z
    let surf = AnalyticSurface::torus_cosine(TAU, TAU, 1.0f64).unwrap();
    for &z in &[0.25, 0.5, 1.0, 2.0, 10.0, 100.0] {
        let scan = condition2_a(&surf, z, DEFAULT_SAMPLES).unwrap();
        assert!(scan.a <= 0.0, "z={z}: A = {} unexpectedly positive", scan.a);
    }
    let cfg = ExperimentConfig {
        surface: SurfaceSpec::TorusCosine {
            lu: TAU,
            lv: TAU,
            beta: 1.0,
        },
        resolution: ResolutionSpec::Grid { nu: 64, nv: 64 },
        ..Default::default()
    };
    let output = run_eigen_experiment(&cfg);
    let t1 = output.report.theorem1.as_ref().unwrap();
    assert_eq!(
        t1.verdict,
        Verdict::NotApplicable,
        "weighted torus must report bound-not-applicable"
    );
    let weighted_lambda1 = t1.lambda1;
    assert!(
        (weighted_lambda1 - 1.0).abs() < 0.01,
        "weighted torus lambda1 = {weighted_lambda1}"
    );
    assert_eq!(output.exit_code(), 0, "not-applicable is not a failure");

    // drift-free torus: A(z) = 0 exactly, still unsatisfiable, Fourier lambda1
    let flat = AnalyticSurface::torus_cosine(TAU, TAU, 0.0f64).unwrap();
    for &z in &[0.25, 1.0, 4.0] {
        let scan = condition2_a(&flat, z, DEFAULT_SAMPLES).unwrap();
        assert!(scan.a <= 0.0);
    }
    let flat_cfg = ExperimentConfig {
        surface: SurfaceSpec::TorusCosine {
            lu: TAU,
            lv: TAU,
            beta: 0.0,
        },
        resolution: ResolutionSpec::Grid { nu: 64, nv: 64 },
        ..Default::default()
    };
    let flat_output = run_eigen_experiment(&flat_cfg);
    let flat_t1 = flat_output.report.theorem1.as_ref().unwrap();
    assert_eq!(flat_t1.verdict, Verdict::NotApplicable);
    assert!(
        (flat_t1.lambda1 - 1.0).abs() < 0.01,
        "flat torus lambda1 = {}",
        flat_t1.lambda1
    );
    assert_eq!(flat_output.exit_code(), 0);
    println!(
        "criterion 4 (negative control): PASS - A(z) <= 0 everywhere, \
         lambda1(beta=1) = {weighted_lambda1:.6}, lambda1(beta=0) = {:.6}",
        flat_t1.lambda1
    );
}

#[test]
fn criterion_05_exact_semigroup_and_stepper_order() {
    let op = sphere_operator(3, 0.0);
    let eig = smallest_eigenpairs(&op, 6, 1e-10).unwrap();
    let lambda1 = eig.eigenvalues()[1];
    let u0 = eig.eigenvector(1).to_vec();

    let mut cfg = HeatConfig::<f64>::standard();
    cfg.integrator = Integrator::SpectralExpansion;
    cfg.dt = 1e-2;
    cfg.t_end = 1.0;
    cfg.record_every = 10;
    let trace = evolve(&op, &u0, &cfg).unwrap();
    let e0 = trace.energies[1][0];
    let mut worst = 0.0f64;
    for (ti, &t) in trace.times.iter().enumerate() {
        let ratio = trace.energies[1][ti] / e0;
        let exact = (-2.0 * lambda1 * t).exp();
        let err = (ratio - exact).abs() / exact;
        worst = worst.max(err);
        assert!(err <= 1e-6, "t = {t}: relative deviation {err}");
    }

    // implicit Euler converges to the exact semigroup at first order
    let t_end = 0.1;
    let exact = spectral_evolve(&op, &eig, &u0, t_end, 0.0).unwrap();
    let err_at = |dt: f64| -> f64 {
        let steps = (t_end / dt).round() as usize;
        let stepper = ImplicitStepper::new(&op, dt, 0.0).unwrap();
        let mut u = u0.clone();
        for _ in 0..steps {
            u = stepper.step(&u).unwrap();
        }
        let diff: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| a - b).collect();
        op.weighted_l2_sq(&diff).unwrap().sqrt()
    };
    let e_coarse = err_at(1e-3);
    let e_fine = err_at(5e-4);
    let order_ratio = e_coarse / e_fine;
    assert!(
        (1.7..=2.3).contains(&order_ratio),
        "halving dt changed the error by {order_ratio}, expected first order"
    );
    println!(
        "criterion 5 (exact semigroup): PASS - worst semigroup deviation {worst:.2e}, \
         dt-halving error ratio {order_ratio:.3}"
    );
}

#[test]
fn criterion_06_theorem2_verification() {
    let mut cfg = HeatConfig::<f64>::standard();
    cfg.c = 0.0;
    cfg.dt = 1e-3;
    cfg.t_end = 2.0;
    cfg.record_every = 20;

    // sphere with drift: K = -1/2 from the grid scan
    let surf = AnalyticSurface::sphere_linear(1.0f64, 0.5).unwrap();
    let k_sphere = condition4_k(&surf, DEFAULT_SAMPLES).unwrap();
    assert!((k_sphere + 0.5).abs() < 1e-9, "K = {k_sphere}");
    let op = sphere_operator(4, 0.5);
    let mut worst_margin = f64::NEG_INFINITY;
    for seed in 0..10u64 {
        let u0 = random_mean_zero(&op, seed);
        let trace = evolve(&op, &u0, &cfg).unwrap();
        for v in verify_decay(&trace, k_sphere, cfg.c, 0.05) {
            worst_margin = worst_margin.max(v.worst_margin);
            assert!(
                v.pass,
                "sphere seed {seed} p {}: margin {} at t {}",
                v.p, v.worst_margin, v.worst_time
            );
        }
    }

    // weighted torus: K = 1, the bound allows growth while the flow decays
    let tsurf = AnalyticSurface::torus_cosine(TAU, TAU, 1.0f64).unwrap();
    let k_torus = condition4_k(&tsurf, DEFAULT_SAMPLES).unwrap();
    assert!((k_torus - 1.0).abs() < 1e-7, "K = {k_torus}");
    let top = torus_operator(64, 1.0);
    for seed in 0..10u64 {
        let u0 = random_mean_zero(&top, seed);
        let trace = evolve(&top, &u0, &cfg).unwrap();
        for v in verify_decay(&trace, k_torus, cfg.c, 0.05) {
            worst_margin = worst_margin.max(v.worst_margin);
            assert!(
                v.pass,
                "torus seed {seed} p {}: margin {} at t {}",
                v.p, v.worst_margin, v.worst_time
            );
        }
    }
    println!(
        "criterion 6 (theorem-2 verification): PASS - K_sphere = {k_sphere}, \
         K_torus = {k_torus}, 20 runs x 4 exponents, worst margin {worst_margin:.2e}"
    );
}

#[test]
fn criterion_07_structural_invariants() {
    // the generated-mesh test matrix: spheres and tori, with and without drift
    let cases: Vec<(&str, WeightedOperator64)> = vec![
        ("sphere2/f=0", sphere_operator(2, 0.0)),
        ("sphere3/f=0.5x3", sphere_operator(3, 0.5)),
        ("torus16/f=cos", torus_operator(16, 1.0)),
        ("torus24x24(1x2)/f=0", {
            let mesh = Arc::new(generate_flat_torus::<f64>(24, 24, 1.0, 2.0).unwrap());
            let n = mesh.vertex_count();
            WeightedOperator::assemble(mesh, Potential::zero(n)).unwrap()
        }),
    ];
    for (name, op) in &cases {
        let n = op.vertex_count();
        let s = op.stiffness();

        // S symmetry and kernel
        assert!(s.max_asymmetry() <= 1e-12 * s.max_abs(), "{name}: asymmetry");
        let ones = vec![1.0; n];
        let s1 = s.matvec(&ones);
        let s1_norm: f64 = s1.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(
            s1_norm <= 1e-12 * s.max_abs() * (n as f64).sqrt(),
            "{name}: S*1 = {s1_norm}"
        );

        // M positivity
        assert!(op.mass().iter().all(|&m| m > 0.0), "{name}: mass");

        // potential shift scale law
        let shift = 0.8;
        let shifted: Vec<f64> = op.potential().values().iter().map(|f| f + shift).collect();
        let op2 =
            WeightedOperator::assemble(op.mesh().clone(), Potential::new(shifted).unwrap())
                .unwrap();
        let scale = (-shift).exp();
        for (i, j, v) in s.iter() {
            let w = op2.stiffness().get(i, j);
            assert!(
                (w - scale * v).abs() <= 1e-12 * (scale * v).abs().max(scale),
                "{name}: scale law at ({i},{j})"
            );
        }

        // E_2 = u^T S u
        let u = random_mean_zero(op, 99);
        let e2 = op.energy(&u, 2.0).unwrap();
        let su = s.matvec(&u);
        let quad: f64 = u.iter().zip(&su).map(|(a, b)| a * b).sum();
        assert!(
            (e2 - quad).abs() <= 1e-10 * (1.0 + quad),
            "{name}: E2 vs quadratic form"
        );

        // eigen residual certificates and M-orthonormality
        let tol = 1e-8;
        let eig = smallest_eigenpairs(op, 5, tol).unwrap();
        for (i, &r) in eig.residuals().iter().enumerate() {
            assert!(r <= tol, "{name}: pair {i} residual {r}");
        }
        let vecs: Vec<Vec<f64>> = (0..eig.len()).map(|i| eig.eigenvector(i).to_vec()).collect();
        let defect = orthonormality_defect(&vecs, op.mass());
        assert!(defect <= 1e-8, "{name}: orthonormality defect {defect}");

        // c = 0 weighted-mean conservation per implicit step
        let stepper = ImplicitStepper::new(op, 1e-3, 0.0).unwrap();
        let scale_rms =
            op.weighted_l2_sq(&u).unwrap().sqrt() / op.total_weighted_area().sqrt();
        let mut state = u.clone();
        for _ in 0..20 {
            let next = stepper.step(&state).unwrap();
            let drift = (op.weighted_mean(&next).unwrap() - op.weighted_mean(&state).unwrap())
                .abs();
            assert!(
                drift <= 1e-12 * scale_rms,
                "{name}: mean drift {drift} per step"
            );
            state = next;
        }
    }
    println!(
        "criterion 7 (structural invariants): PASS - {} mesh/potential cases, all checks green",
        cases.len()
    );
}

#[test]
fn criterion_08_convergence_order_torus() {
    let cfg = ExperimentConfig {
        surface: SurfaceSpec::TorusCosine {
            lu: TAU,
            lv: TAU,
            beta: 0.0,
        },
        resolution: ResolutionSpec::Grid { nu: 16, nv: 16 },
        ..Default::default()
    };
    let output = convergence_study(&cfg, &StudyLevels::Grids(vec![16, 32, 64]));
    assert!(output.report.error.is_none(), "{:?}", output.report.error);
    let summary = output.report.convergence.as_ref().unwrap();
    let order = summary.estimated_order;
    assert!(
        (1.7..=2.3).contains(&order),
        "torus lambda1 order {order} outside [1.7, 2.3]"
    );
    println!("criterion 8 (convergence order, torus): PASS - estimated order {order:.3}");
}

/// Expected red: the icosphere first positive eigenvalue superconverges.
///
/// Measured orders are ~3.1-3.7 (errors 9.2e-5 / 8.1e-6 / 6.4e-7 at levels
/// 2 / 3 / 4), reproduced independently with a separate implementation; the
/// l = 1 eigenspace is special on inscribed icospheres, while higher modes
/// (e.g. lambda -> 6) do converge at second order. The pinned [1.7, 2.3]
/// window therefore cannot hold for this quantity; the assertion is kept
/// as stated instead of being loosened.
#[test]
fn criterion_08_convergence_order_sphere() {
    let cfg = ExperimentConfig {
        surface: SurfaceSpec::SphereLinear {
            radius: 1.0,
            slope: 0.0,
        },
        ..Default::default()
    };
    let output = convergence_study(&cfg, &StudyLevels::Subdivisions(vec![2, 3, 4]));
    assert!(output.report.error.is_none(), "{:?}", output.report.error);
    let summary = output.report.convergence.as_ref().unwrap();
    let order = summary.estimated_order;
    let verdict = if (1.7..=2.3).contains(&order) {
        "PASS"
    } else {
        "FAIL (expected: superconvergent quantity)"
    };
    println!("criterion 8 (convergence order, sphere): {verdict} - estimated order {order:.3}");
    assert!(
        (1.7..=2.3).contains(&order),
        "sphere lambda1 order {order:.3} outside [1.7, 2.3]: the first eigenvalue \
         superconverges on icospheres (higher eigenvalues do show second order); \
         kept as stated rather than loosened"
    );
}

#[test]
fn criterion_09_determinism() {
    let strip_timings = |report: &driftlap_cli::report::RunReport| -> String {
        let mut v = serde_json::to_value(report).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string(&v).unwrap()
    };

    let heat_cfg = ExperimentConfig {
        surface: SurfaceSpec::SphereLinear {
            radius: 1.0,
            slope: 0.5,
        },
        resolution: ResolutionSpec::Subdivision { level: 2 },
        seed: 7,
        heat: driftlap_cli::config::HeatSpec {
            dt: 1e-2,
            t_end: 0.2,
            ..Default::default()
        },
        ..Default::default()
    };
    let a = strip_timings(&run_heat_experiment(&heat_cfg).report);
    let b = strip_timings(&run_heat_experiment(&heat_cfg).report);
    assert_eq!(a, b, "heat reports must be byte-identical modulo timings");

    let eigen_cfg = ExperimentConfig {
        surface: SurfaceSpec::SphereLinear {
            radius: 1.0,
            slope: 0.25,
        },
        resolution: ResolutionSpec::Subdivision { level: 2 },
        z: driftlap_cli::config::ZGridSpec {
            count: 10,
            ..Default::default()
        },
        seed: 3,
        ..Default::default()
    };
    let a = strip_timings(&run_eigen_experiment(&eigen_cfg).report);
    let b = strip_timings(&run_eigen_experiment(&eigen_cfg).report);
    assert_eq!(a, b, "eigen reports must be byte-identical modulo timings");
    println!("criterion 9 (determinism): PASS - heat and eigen reports identical modulo timings");
}
