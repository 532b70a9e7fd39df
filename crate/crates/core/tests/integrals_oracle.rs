//! Integral engine against brute-force quadrature.

mod common;

use cse_core::integrals::{boys_f0, hydrogen_chain, Geometry};

use common::quadrature;

#[test]
fn hydrogen_molecule_matches_quadrature() {
    let d = quadrature::deviation(&hydrogen_chain(2, 0.74).unwrap());
    assert!(d.one_electron < 1e-7, "{}", d.one_electron);
    assert!(d.repulsion < 1e-6, "{}", d.repulsion);
}

#[test]
fn bent_three_center_geometry_matches_quadrature() {
    let g = Geometry::new(vec![[0.0, 0.0, 0.0], [1.4, 0.3, 0.0], [0.2, 1.1, 0.8]], vec![1.0, 1.0, 1.0], "H3 bent").unwrap();
    let d = quadrature::deviation(&g);
    assert!(d.one_electron < 1e-7, "{}", d.one_electron);
    assert!(d.repulsion < 1e-6, "{}", d.repulsion);
}

#[test]
fn boys_function_matches_quadrature() {
    assert!((boys_f0(1.0).unwrap() - 0.7468241328).abs() < 1e-10);
    for x in [0.0, 1e-8, 1e-3, 0.5, 1.0, 3.0, 10.0, 35.0] {
        let got = boys_f0(x).unwrap();
        let want = quadrature::boys_f0(x);
        assert!((got - want).abs() < 1e-11, "F0({x}) {got} vs {want}");
    }
}
