mod common;

use common::{frac, q};
use proptest::prelude::*;
use vertexbound::exact::{LaurentPoly, Rational};
use vertexbound::fusion::IntertwinerData;
use vertexbound::ode::{
    all_frobenius_solutions, default_max_log, frobenius_series, indicial_exponents, pole_order, residual,
    solution_space_dim,
};
use vertexbound::reduce::{OdeSystem, Reducer};
use vertexbound::voa::{find_singular_vectors, ModuleSpec, RealizedModule, SingularVector, Voa, VoaSpec};

fn mono(c: i64, p: i64) -> LaurentPoly {
    LaurentPoly::monomial(q(c), p)
}

fn zero() -> LaurentPoly {
    LaurentPoly::zero()
}

fn values(b: &OdeSystem) -> Vec<(Rational, usize)> {
    indicial_exponents(b).unwrap().exponents.into_iter().map(|e| (e.value, e.multiplicity)).collect()
}

#[test]
fn pole_order_examples() {
    assert_eq!(pole_order(&OdeSystem::from_matrix(vec![vec![mono(2, -1)]]).unwrap()), 1);
    assert_eq!(pole_order(&OdeSystem::from_matrix(vec![vec![zero()]]).unwrap()), 0);
    let irregular = OdeSystem::from_matrix(vec![vec![LaurentPoly::from_terms([(-2, q(1)), (-1, q(1))])]]).unwrap();
    assert_eq!(pole_order(&irregular), 2);
    assert_eq!(indicial_exponents(&irregular).unwrap_err().kind(), "IrregularSingularity");
    assert_eq!(frobenius_series(&irregular, &q(0), 3, 1).unwrap_err().kind(), "IrregularSingularity");
}

#[test]
fn indicial_examples() {
    assert_eq!(values(&OdeSystem::from_matrix(vec![vec![mono(2, -1)]]).unwrap()), vec![(q(2), 1)]);
    assert_eq!(values(&OdeSystem::from_matrix(vec![vec![zero()]]).unwrap()), vec![(q(0), 1)]);
    let diag = OdeSystem::from_matrix(vec![vec![mono(2, -1), zero()], vec![zero(), mono(-2, -1)]]).unwrap();
    assert_eq!(values(&diag), vec![(q(-2), 1), (q(2), 1)]);
    // x^2 - 2 has no rational root
    let rot = OdeSystem::from_matrix(vec![vec![zero(), mono(2, -1)], vec![mono(1, -1), zero()]]).unwrap();
    let data = indicial_exponents(&rot).unwrap();
    assert!(data.exponents.is_empty());
    assert_eq!(data.residual_factor, vec![q(-2), q(0), q(1)]);
}

#[test]
fn frobenius_examples() {
    let b = OdeSystem::from_matrix(vec![vec![mono(2, -1)]]).unwrap();
    let sols = frobenius_series(&b, &q(2), 4, 0).unwrap();
    assert_eq!(sols.len(), 1);
    assert_eq!(sols[0].terms.len(), 1);
    assert_eq!(sols[0].terms[&(0, 0)], vec![q(1)]);

    let b = OdeSystem::from_matrix(vec![vec![zero()]]).unwrap();
    let sols = frobenius_series(&b, &q(0), 4, 0).unwrap();
    assert_eq!(sols[0].terms.keys().copied().collect::<Vec<_>>(), vec![(0, 0)]);

    assert_eq!(frobenius_series(&b, &q(1), 4, 0).unwrap_err().kind(), "InputShapeError");
}

#[test]
fn nilpotent_residue_gives_a_log() {
    let b = OdeSystem::from_matrix(vec![vec![zero(), mono(1, -1)], vec![zero(), zero()]]).unwrap();
    let sols = frobenius_series(&b, &q(0), 3, 1).unwrap();
    assert_eq!(sols.len(), 2);
    assert_eq!(sols.iter().map(|s| s.max_log_power()).max(), Some(1));
    // the log solution is (c log z + d, c) with the constant solution (1, 0) free to add
    let log_sol = sols.iter().find(|s| s.max_log_power() == 1).unwrap();
    let c = &log_sol.terms[&(0, 1)];
    assert_eq!(c[1], q(0));
    assert_eq!(log_sol.terms[&(0, 0)][1], c[0]);
    for s in &sols {
        assert!(residual(&b, s).iter().all(|x| *x == q(0)));
    }
    let err = frobenius_series(&b, &q(0), 3, 0).unwrap_err();
    assert_eq!(err.kind(), "LogDepthExceeded");
}

#[test]
fn resonance_needs_a_log() {
    // A' = B A with residue diag(0, 1) and a z^0 coupling: the exponent-0 solution picks up
    // a log from the exponent-1 resonance.
    let b = OdeSystem::from_matrix(vec![vec![zero(), zero()], vec![mono(1, 0), mono(1, -1)]]).unwrap();
    assert_eq!(values(&b), vec![(q(0), 1), (q(1), 1)]);
    assert_eq!(frobenius_series(&b, &q(0), 3, 0).unwrap_err().kind(), "LogDepthExceeded");
    let sols = frobenius_series(&b, &q(0), 3, 1).unwrap();
    assert_eq!(sols.len(), 1);
    assert_eq!(sols[0].terms[&(1, 1)], vec![q(0), q(1)]);
    assert_eq!(all_frobenius_solutions(&b, 3, 1).unwrap().len(), 2);
}

#[test]
fn solution_space_dims() {
    assert_eq!(solution_space_dim(&OdeSystem::from_matrix(vec![vec![mono(2, -1)]]).unwrap()), 1);
    let diag = OdeSystem::from_matrix(vec![vec![mono(2, -1), zero()], vec![zero(), mono(-2, -1)]]).unwrap();
    assert_eq!(solution_space_dim(&diag), 2);
    assert_eq!(default_max_log(1), 3);
    assert_eq!(default_max_log(2), 6);
}

#[test]
fn frobenius_json_shape() {
    let b = OdeSystem::from_matrix(vec![vec![mono(2, -1)]]).unwrap();
    let sol = &frobenius_series(&b, &q(2), 2, 0).unwrap()[0];
    let json = serde_json::to_value(sol.to_json()).unwrap();
    assert_eq!(json, serde_json::json!({"exponent": "2", "depth": 2, "terms": [{"k": 0, "log_power": 0, "vector": ["1"]}]}));
}

#[test]
fn free_boson_exponent_matches_oracle() {
    let voa = Voa::new(&VoaSpec::heisenberg(8)).unwrap();
    for (l, m) in [(q(1), q(2)), (frac(1, 2), frac(-3, 2)), (frac(2, 3), frac(3, 5))] {
        let u = RealizedModule::new(&ModuleSpec::fock(voa.spec(), l.clone(), 7)).unwrap();
        let w = RealizedModule::new(&ModuleSpec::fock(voa.spec(), m.clone(), 7)).unwrap();
        let ode = Reducer::with_depth(&voa, &u, &w, 6).unwrap().assemble_ode().unwrap();
        let rho = &l * &m;
        assert_eq!(values(&ode), vec![(rho.clone(), 1)]);
        let sol = &frobenius_series(&ode, &rho, 8, 0).unwrap()[0];
        let y = IntertwinerData::heisenberg(&voa, l.clone(), m.clone(), 8).unwrap();
        let top = (&l + &m) * (&l + &m) / q(2);
        for k in 0..=8usize {
            let r = &top + q(k as i64);
            let coef = y.coefficient((0, &[q(1)]), (0, &[q(1)]), &r).unwrap();
            // the top functional only sees the k = 0 coefficient
            let oracle = if k == 0 { coef[0].clone() } else { q(0) };
            assert_eq!(sol.coefficient(k, 0, 1)[0], oracle);
        }
        let (power, value) = y.correlator((&top, &[q(1)]), (0, &[q(1)]), (0, &[q(1)])).unwrap();
        assert_eq!((power, value), (rho, q(1)));
    }
}

#[test]
fn level_two_quotient_system_is_solvable() {
    let spec = VoaSpec::virasoro(frac(1, 2), 8);
    let voa = Voa::new(&spec).unwrap();
    let s = find_singular_vectors(&frac(1, 2), &frac(1, 2), false, 2).remove(0);
    let sv = SingularVector { level: 2, coefficients: s };
    let m = RealizedModule::new(&ModuleSpec::quotient(&spec, frac(1, 2), vec![sv], 7)).unwrap();
    let ode = Reducer::with_depth(&voa, &m, &m, 5).unwrap().assemble_ode().unwrap().balanced();
    assert_eq!(pole_order(&ode), 1);
    // h = h_{2,1}; the products are h_{1,1} = 0 and h_{3,1} = 5/3, shifted by -2h and by the
    // levels of the complement pairs
    let expected: Vec<(Rational, usize)> = [frac(-1, 1), frac(2, 3), frac(5, 3), frac(8, 3)].into_iter().map(|x| (x, 1)).collect();
    assert_eq!(values(&ode), expected);
    let sols = all_frobenius_solutions(&ode, 4, default_max_log(1)).unwrap();
    assert_eq!(sols.len(), solution_space_dim(&ode));
    for s in &sols {
        assert!(residual(&ode, s).iter().all(|x| *x == q(0)));
    }
}

fn small() -> impl Strategy<Value = i64> {
    -2i64..=2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Triangular residues have rational exponents; the solver then finds a full basis and every
    /// solution substitutes exactly.
    #[test]
    fn triangular_systems_have_full_solution_spaces(
        diag in proptest::collection::vec(small(), 2),
        upper in small(),
        holo in proptest::collection::vec(small(), 4),
        linear in proptest::collection::vec(small(), 4),
    ) {
        let entry = |i: usize, j: usize| {
            let mut terms = vec![(0, q(holo[2 * i + j])), (1, q(linear[2 * i + j]))];
            if i == j {
                terms.push((-1, q(diag[i])));
            }
            if i == 0 && j == 1 {
                terms.push((-1, q(upper)));
            }
            LaurentPoly::from_terms(terms)
        };
        let b = OdeSystem::from_matrix(vec![vec![entry(0, 0), entry(0, 1)], vec![entry(1, 0), entry(1, 1)]]).unwrap();
        let sols = all_frobenius_solutions(&b, 5, 3).unwrap();
        prop_assert_eq!(sols.len(), 2);
        for s in &sols {
            prop_assert!(residual(&b, s).iter().all(|x| *x == q(0)));
        }
    }
}
