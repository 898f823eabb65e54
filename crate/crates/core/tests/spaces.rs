mod common;

use chbs::rng::FieldRng;
use chbs::spaces::{
    apply_f, form_a, inner_h, inner_v, mean, norm_v0, norm_v0_star, poincare_constant,
    project_zero_mean, solve_f_inverse, subgrad_phi, Functional,
};
use chbs::verify::interpolation_constant;
use chbs::{DiscreteDomain, Error, FieldPair};
use common::DenseModel;
use proptest::prelude::*;

#[test]
fn inner_products_of_constants() {
    let dom = DiscreteDomain::build_unit_square(6).unwrap();
    let one = FieldPair::constant(&dom, 1.0);
    assert!((inner_h(&dom, &one, &one).unwrap() - 5.0).abs() < 1e-12);
    let z = FieldRng::new(1).h_pair(&dom);
    assert!(form_a(&dom, &one, &z).unwrap().abs() < 1e-12);
    let bulk_only = FieldPair::new(vec![1.0; dom.num_nodes()], vec![0.0; dom.num_boundary()]);
    assert!((mean(&dom, &bulk_only).unwrap() - 0.2).abs() < 1e-12);
    assert!((mean(&dom, &FieldPair::constant(&dom, -0.7)).unwrap() + 0.7).abs() < 1e-12);
}

#[test]
fn apply_f_matches_dense_product_on_n3() {
    let dom = DiscreteDomain::build_unit_square(3).unwrap();
    let model = DenseModel::new(3);
    let raw = FieldPair::from_bulk(&dom, vec![0.2, -0.4, 0.1, 0.5, 0.0, -0.3, 0.6, 0.05, -0.15]);
    let z = project_zero_mean(&dom, &raw).unwrap();
    let ours = apply_f(&dom, &z).unwrap();
    let k = model.stiffness();
    let zb = nalgebra::DVector::from_column_slice(&z.bulk);
    let oracle = &k * &zb;
    for i in 0..9 {
        assert!((ours.0[i] - oracle[i]).abs() < 1e-14, "{i}");
    }
}

#[test]
fn f_inverse_matches_dense_oracle_on_n3() {
    let dom = DiscreteDomain::build_unit_square(3).unwrap();
    let model = DenseModel::new(3);
    let rhs = Functional(vec![1.0, 0.0, -0.5, 0.25, 0.0, 0.0, -0.25, 0.5, -1.0]);
    let w = solve_f_inverse(&dom, &rhs).unwrap();
    let oracle = model.f_inverse(&rhs.0);
    for (a, b) in w.bulk.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
    let dual = norm_v0_star(&dom, &rhs).unwrap();
    let expected: f64 = rhs.0.iter().zip(&oracle).map(|(a, b)| a * b).sum::<f64>().sqrt();
    assert!(dual > 0.0);
    assert!((dual - expected).abs() < 1e-12);
}

#[test]
fn f_inverse_rejects_nonzero_total() {
    let dom = DiscreteDomain::build_unit_square(4).unwrap();
    let rhs = Functional(vec![1.0; dom.num_nodes()]);
    assert!(matches!(solve_f_inverse(&dom, &rhs), Err(Error::Precondition(_))));
    let zero = Functional(vec![0.0; dom.num_nodes()]);
    assert!(solve_f_inverse(&dom, &zero).unwrap().bulk.iter().all(|x| *x == 0.0));
}

#[test]
fn apply_f_rejects_nonzero_mean() {
    let dom = DiscreteDomain::build_unit_square(4).unwrap();
    let z = FieldPair::constant(&dom, 0.3);
    assert!(matches!(apply_f(&dom, &z), Err(Error::Precondition(_))));
}

#[test]
fn poincare_matches_dense_generalized_eigenproblem() {
    for n in [4, 6] {
        let dom = DiscreteDomain::build_unit_square(n).unwrap();
        let c = poincare_constant(&dom).unwrap();
        let oracle = DenseModel::new(n).poincare();
        assert!((c - oracle).abs() < 1e-10, "n={n}: {c} vs {oracle}");
        assert!(c > 0.0 && c <= 1.0);
    }
}

#[test]
fn interpolation_constant_is_mesh_stable() {
    for delta in [0.2, 0.1, 0.05] {
        let coarse = interpolation_constant(&DiscreteDomain::build_unit_square(9).unwrap(), delta, 50, 3).unwrap();
        let fine = interpolation_constant(&DiscreteDomain::build_unit_square(17).unwrap(), delta, 50, 3).unwrap();
        assert!(coarse.is_finite() && fine.is_finite() && fine > 0.0);
        assert!((coarse - fine).abs() / fine < 0.05, "delta {delta}: {coarse} vs {fine}");
    }
}

#[test]
fn subgradient_of_zero_is_zero() {
    let dom = DiscreteDomain::build_unit_square(5).unwrap();
    let z = subgrad_phi(&dom, &FieldPair::zeros(&dom)).unwrap();
    assert!(z.bulk.iter().chain(&z.boundary).all(|x| *x == 0.0));
}

fn pair(dom: &DiscreteDomain, seed: u64) -> FieldPair {
    FieldRng::new(seed).zero_mean_pair(dom)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent(seed in any::<u64>()) {
        let dom = DiscreteDomain::build_unit_square(5).unwrap();
        let z = FieldRng::new(seed).h_pair(&dom);
        let p = project_zero_mean(&dom, &z).unwrap();
        prop_assert!(mean(&dom, &p).unwrap().abs() < 1e-12);
        let pp = project_zero_mean(&dom, &p).unwrap();
        for (a, b) in p.bulk.iter().zip(&pp.bulk) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn norms_are_ordered_and_dual(seed in any::<u64>()) {
        let dom = DiscreteDomain::build_unit_square(5).unwrap();
        let z = pair(&dom, seed);
        let w = pair(&dom, seed.wrapping_add(1));
        prop_assert!(form_a(&dom, &z, &z).unwrap() <= inner_v(&dom, &z, &z).unwrap());
        let fz = apply_f(&dom, &z).unwrap();
        let fw = apply_f(&dom, &w).unwrap();
        // Symmetry, Cauchy-Schwarz and duality of the norms.
        prop_assert!((fz.apply(&w) - fw.apply(&z)).abs() < 1e-12);
        prop_assert!(fz.apply(&w).abs() <= norm_v0(&dom, &z).unwrap() * norm_v0(&dom, &w).unwrap() + 1e-12);
        let d = norm_v0_star(&dom, &fz).unwrap();
        prop_assert!((d - norm_v0(&dom, &z).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn poincare_inequality_on_random_fields(seed in any::<u64>()) {
        let dom = DiscreteDomain::build_unit_square(6).unwrap();
        let c = poincare_constant(&dom).unwrap();
        let z = pair(&dom, seed);
        prop_assert!(c * inner_v(&dom, &z, &z).unwrap() <= form_a(&dom, &z, &z).unwrap() + 1e-12);
    }
}
