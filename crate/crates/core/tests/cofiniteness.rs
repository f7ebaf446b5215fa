mod common;

use common::{frac, q, rank, VirOracle};
use proptest::prelude::*;
use vertexbound::cofinite::{
    choose_complement, cm_echelon, cm_quotient_dims, graded_dims, log_power_bound, log_recursion, nilpotency,
    weight_support,
};
use vertexbound::exact::Rational;
use vertexbound::voa::{find_singular_vectors, ModuleSpec, Partition, RealizedModule, SingularVector, Voa, VoaSpec};

fn ising_quotient(depth: usize) -> (Voa, std::sync::Arc<RealizedModule>, Vec<Rational>) {
    let spec = VoaSpec::virasoro(frac(1, 2), depth);
    let s = find_singular_vectors(&frac(1, 2), &frac(1, 2), false, 2).remove(0);
    let sv = SingularVector { level: 2, coefficients: s.clone() };
    let m = RealizedModule::new(&ModuleSpec::quotient(&spec, frac(1, 2), vec![sv], depth)).unwrap();
    (Voa::new(&spec).unwrap(), m, s)
}

#[test]
fn virasoro_vacuum_is_c1_cofinite() {
    let spec = VoaSpec::virasoro(frac(-22, 5), 6);
    let voa = Voa::new(&spec).unwrap();
    let dims = cm_quotient_dims(&voa, voa.adjoint(), 1, 4).unwrap();
    assert_eq!(dims, vec![1, 0, 0, 0, 0]);
    let oracle = VirOracle { c: frac(-22, 5), h: q(0), vacuum: true };
    let expected: Vec<usize> = (0..=4).map(|n| oracle.basis(n).len() - rank(oracle.basis(n).len(), oracle.c1_rows(n))).collect();
    assert_eq!(dims, expected);
}

#[test]
fn fock_is_c1_cofinite() {
    let spec = VoaSpec::heisenberg(5);
    let voa = Voa::new(&spec).unwrap();
    let m = RealizedModule::new(&ModuleSpec::fock(&spec, q(1), 5)).unwrap();
    assert_eq!(cm_quotient_dims(&voa, &m, 1, 4).unwrap(), vec![1, 0, 0, 0, 0]);
}

#[test]
fn generic_verma_is_not_cofinite() {
    let spec = VoaSpec::virasoro(frac(1, 2), 6);
    let voa = Voa::new(&spec).unwrap();
    let m = RealizedModule::new(&ModuleSpec::verma(&spec, frac(1, 16), 6)).unwrap();
    let dims = cm_quotient_dims(&voa, &m, 1, 4).unwrap();
    assert_eq!(dims, vec![1, 1, 1, 1, 1]);
    let oracle = VirOracle { c: frac(1, 2), h: frac(1, 16), vacuum: false };
    for n in 0..=4 {
        let d = oracle.basis(n).len();
        assert_eq!(dims[n], d - rank(d, oracle.c1_rows(n)));
    }
    let err = choose_complement(&voa, &m, 4).unwrap_err();
    assert_eq!(err.kind(), "NotCofiniteUpToDepth");
}

#[test]
fn level_two_quotient_dims_match_oracle() {
    let (voa, m, s) = ising_quotient(6);
    let dims = cm_quotient_dims(&voa, &m, 1, 4).unwrap();
    assert_eq!(dims, vec![1, 1, 0, 0, 0]);
    let oracle = VirOracle { c: frac(1, 2), h: frac(1, 2), vacuum: false };
    for n in 0..=4 {
        let d = oracle.basis(n).len();
        let sub = oracle.submodule_rows(2, &s, n);
        let quotient_dim = d - rank(d, sub.clone());
        let mut rows = sub;
        rows.extend(oracle.c1_rows(n));
        assert_eq!(dims[n], d - rank(d, rows), "level {n}");
        assert_eq!(m.dim(n), quotient_dim);
    }
}

#[test]
fn depth_guard_raises_truncation() {
    let spec = VoaSpec::virasoro(frac(1, 2), 5);
    let voa = Voa::new(&spec).unwrap();
    let err = cm_quotient_dims(&voa, voa.adjoint(), 1, 4).unwrap_err();
    assert_eq!(err.kind(), "TruncationError");
    assert!(cm_quotient_dims(&voa, voa.adjoint(), 1, 3).is_ok());
    assert_eq!(cm_quotient_dims(&voa, voa.adjoint(), 0, 3).unwrap_err().kind(), "InputShapeError");
}

#[test]
fn c2_quotient_of_virasoro_vacuum_is_polynomial_in_omega() {
    let spec = VoaSpec::virasoro(frac(1, 2), 7);
    let voa = Voa::new(&spec).unwrap();
    assert_eq!(cm_quotient_dims(&voa, voa.adjoint(), 2, 4).unwrap(), vec![1, 0, 1, 0, 1]);
}

#[test]
fn c2_is_contained_in_c1() {
    let spec = VoaSpec::virasoro(frac(-22, 5), 7);
    let voa = Voa::new(&spec).unwrap();
    let m = RealizedModule::new(&ModuleSpec::verma(&spec, frac(3, 5), 7)).unwrap();
    for n in 0..=4 {
        let c1 = cm_echelon(&voa, &m, 1, n);
        let c2 = cm_echelon(&voa, &m, 2, n);
        for r in 0..c2.rank() {
            assert!(c1.contains(c2.basis.row(r)));
        }
    }
}

#[test]
fn surjection_does_not_increase_quotients() {
    let (voa, quotient, _) = ising_quotient(6);
    let verma = RealizedModule::new(&ModuleSpec::verma(voa.spec(), frac(1, 2), 6)).unwrap();
    let a = cm_quotient_dims(&voa, &verma, 1, 4).unwrap();
    let b = cm_quotient_dims(&voa, &quotient, 1, 4).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
}

#[test]
fn complement_examples() {
    let spec = VoaSpec::heisenberg(5);
    let voa = Voa::new(&spec).unwrap();
    let fock = RealizedModule::new(&ModuleSpec::fock(&spec, q(1), 5)).unwrap();
    let basis = choose_complement(&voa, &fock, 4).unwrap();
    assert_eq!(basis.vectors.len(), 1);
    assert_eq!((basis.vectors[0].level, basis.window()), (0, 0));
    assert!(basis.larger_window_possible);

    let (vir, m, _) = ising_quotient(6);
    let basis = choose_complement(&vir, &m, 4).unwrap();
    let levels: Vec<usize> = basis.vectors.iter().map(|v| v.level).collect();
    assert_eq!(levels, vec![0, 1]);
    assert_eq!(basis.window(), 1);
    assert_eq!(m.basis_word(1, 0), Some(Partition(vec![1])));

    let sum = RealizedModule::new(&ModuleSpec::direct_sum(
        &spec,
        vec![ModuleSpec::fock(&spec, q(1), 5), ModuleSpec::fock(&spec, q(2), 5)],
        5,
    ))
    .unwrap();
    let basis = choose_complement(&voa, &sum, 4).unwrap();
    let summands: Vec<usize> = basis.vectors.iter().map(|v| v.summand).collect();
    assert_eq!(summands, vec![0, 1]);
    assert_eq!(basis.lowest_weights, vec![frac(1, 2), q(2)]);
}

#[test]
fn graded_dims_examples() {
    let spec = VoaSpec::heisenberg(6);
    let voa = Voa::new(&spec).unwrap();
    let fock = RealizedModule::new(&ModuleSpec::fock(&spec, frac(2, 3), 6)).unwrap();
    let g = graded_dims(&voa, &fock, 5);
    assert_eq!(g.dims, vec![1, 1, 2, 3, 5, 7]);
    assert_eq!(g.certificate.len(), 6);
    assert!(g.certificate.iter().all(|c| c.spanned));

    let vspec = VoaSpec::virasoro(frac(1, 2), 5);
    let vir = Voa::new(&vspec).unwrap();
    assert_eq!(graded_dims(&vir, vir.adjoint(), 5).dims, vec![1, 0, 1, 1, 2, 2]);

    let zero = RealizedModule::new(&ModuleSpec::direct_sum(&spec, vec![], 6)).unwrap();
    assert_eq!(graded_dims(&voa, &zero, 3).dims, vec![0, 0, 0, 0]);
}

#[test]
fn weight_support_examples() {
    let spec = VoaSpec::heisenberg(3);
    let fock = RealizedModule::new(&ModuleSpec::fock(&spec, q(1), 3)).unwrap();
    assert_eq!(weight_support(&fock), vec![frac(1, 2)]);
    let sum = RealizedModule::new(&ModuleSpec::direct_sum(
        &spec,
        vec![ModuleSpec::fock(&spec, q(1), 3), ModuleSpec::fock(&spec, q(2), 3), ModuleSpec::fock(&spec, q(3), 3)],
        3,
    ))
    .unwrap();
    // 9/2 ≡ 1/2 mod Z and is dropped
    assert_eq!(weight_support(&sum), vec![frac(1, 2), q(2)]);
    let vspec = VoaSpec::virasoro(frac(1, 2), 3);
    assert_eq!(weight_support(Voa::new(&vspec).unwrap().adjoint()), vec![q(0)]);
}

#[test]
fn shipped_modules_are_semisimple() {
    let (_, m, _) = ising_quotient(4);
    let rep = nilpotency(&m, 4);
    assert_eq!(rep.order, 1);
    let spec = VoaSpec::heisenberg(4);
    let fock = RealizedModule::new(&ModuleSpec::fock(&spec, frac(-3, 2), 4)).unwrap();
    assert_eq!(nilpotency(&fock, 4).per_level, vec![1; 5]);
}

#[test]
fn log_recursion_examples() {
    // (2,2,2): vanishes from k = 4 on, nonzero at k = 3
    let phis = log_recursion(2, 2, 2).unwrap();
    assert_eq!(phis.len(), 5);
    assert!(!phis[3].is_zero());
    assert_eq!(log_power_bound(2, 2, 2).unwrap().sharp, 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fock_quotients_are_trivial_above_zero(n in -6i64..7, d in 1i64..4) {
        let spec = VoaSpec::heisenberg(4);
        let voa = Voa::new(&spec).unwrap();
        let m = RealizedModule::new(&ModuleSpec::fock(&spec, Rational::new(n.into(), d.into()), 4)).unwrap();
        prop_assert_eq!(cm_quotient_dims(&voa, &m, 1, 3).unwrap(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn complement_spans_every_level(n in -4i64..5, d in 1i64..3) {
        let spec = VoaSpec::virasoro(frac(-22, 5), 6);
        let voa = Voa::new(&spec).unwrap();
        let h = Rational::new(n.into(), d.into());
        let m = RealizedModule::new(&ModuleSpec::verma(&spec, h, 6)).unwrap();
        // Verma modules never stabilize, so use the vacuum module for the positive check
        prop_assert!(choose_complement(&voa, &m, 4).is_err());
        let basis = choose_complement(&voa, voa.adjoint(), 4).unwrap();
        for level in 0..=4 {
            let dim = voa.dim(level);
            let mut rows: Vec<Vec<Rational>> = (0..cm_echelon(&voa, voa.adjoint(), 1, level).rank())
                .map(|r| cm_echelon(&voa, voa.adjoint(), 1, level).basis.row(r).to_vec())
                .collect();
            rows.extend(basis.vectors.iter().filter(|v| v.level == level).map(|v| v.coords.clone()));
            prop_assert_eq!(rank(dim, rows), dim);
        }
    }
}
