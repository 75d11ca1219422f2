//! The whole pipeline instantiates at f32 as well as f64; tolerances scale
//! with the epsilon of the chosen type.

use driftlap::catalog::{condition4_k, theorem1_bound, AnalyticSurface, MeshResolution};
use driftlap::heat::{evolve, HeatConfig, Integrator};
use driftlap::operator::WeightedOperator;
use driftlap::spectral::smallest_eigenpairs;

#[test]
fn f32_pipeline_end_to_end() {
    let surf = AnalyticSurface::<f32>::sphere_linear(1.0, 0.5).unwrap();
    let (mesh, pot) = surf.realize(MeshResolution::Subdivision(2)).unwrap();
    let op = WeightedOperator::assemble(mesh, pot).unwrap();

    // spectrum at f32-appropriate tolerance
    let eig = smallest_eigenpairs(&op, 4, 1e-4f32).unwrap();
    assert!(eig.eigenvalues()[0].abs() < 1e-4);
    assert!((eig.eigenvalues()[1] - 2.04).abs() < 0.05, "{}", eig.eigenvalues()[1]);

    // curvature scan and bound formula
    let k = condition4_k(&surf, 2000).unwrap();
    assert!((k + 0.5).abs() < 1e-4);
    let bound = theorem1_bound(2, 1.0f32, 0.5).unwrap();
    assert!((bound - 2.0 / 3.0).abs() < 1e-6);
    assert!(eig.eigenvalues()[1] >= bound);

    // a few heat steps with energy recording
    let u0 = eig.eigenvector(1).to_vec();
    let cfg = HeatConfig::<f32> {
        c: 0.0,
        dt: 1e-2,
        t_end: 0.1,
        p_list: vec![1.0, 2.0],
        integrator: Integrator::ImplicitEuler,
        record_every: 2,
    };
    let trace = evolve(&op, &u0, &cfg).unwrap();
    let e2 = &trace.energies[1];
    assert!(e2[0] > 0.0);
    assert!(e2.last().unwrap() < &e2[0], "flow must dissipate");
}

#[test]
fn f32_mesh_generation_and_off() {
    let mesh = driftlap::mesh::generate_icosphere::<f32>(2, 1.5).unwrap();
    let d = mesh.validate();
    assert!(d.is_closed && d.is_oriented);
    assert_eq!(d.euler_characteristic, 2);

    let mut buf = Vec::new();
    driftlap::mesh::save_off(&mesh, &mut buf).unwrap();
    let back = driftlap::mesh::load_off::<f32, _>(buf.as_slice()).unwrap();
    for i in 0..mesh.vertex_count() {
        assert_eq!(mesh.position(i).unwrap(), back.position(i).unwrap());
    }
}
