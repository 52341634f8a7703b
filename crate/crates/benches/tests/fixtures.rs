use setopt::linalg::min_norm_point;
use setopt::partition::{minimal_structure, DEFAULT_VALUE_TOL};
use setopt_benches::{hull_points, Fixture};

#[test]
fn every_registry_midpoint_is_a_valid_fixture() {
    for id in setopt::problem::list_ids() {
        let f = Fixture::midpoint(id);
        assert!(f.problem.bounds().contains(&f.x), "{id}");
        let s = minimal_structure(&f.problem, &f.cone, &f.x, DEFAULT_VALUE_TOL).unwrap();
        assert!(s.partition_size() >= 1, "{id}");
    }
}

#[test]
fn hull_fixtures_are_deterministic() {
    let a = hull_points(64, 10);
    assert_eq!(a, hull_points(64, 10));
    let (w, x) = min_norm_point(&a);
    assert_eq!((w.len(), x.len()), (64, 10));
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}
