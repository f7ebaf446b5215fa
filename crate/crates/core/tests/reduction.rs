mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::{frac, q};
use proptest::prelude::*;
use vertexbound::exact::{LaurentPoly, Rational};
use vertexbound::fusion::IntertwinerData;
use vertexbound::reduce::{fusion_bound, reduce, CorrelatorCombination, OdeSystem, Reducer};
use vertexbound::voa::{find_singular_vectors, ModuleSpec, RealizedModule, Partition, SingularVector, Voa, VoaSpec};
use vertexbound::Error;

fn heis(depth: usize) -> Voa {
    Voa::new(&VoaSpec::heisenberg(depth)).unwrap()
}

fn fock(voa: &Voa, charge: Rational, depth: usize) -> Arc<RealizedModule> {
    RealizedModule::new(&ModuleSpec::fock(voa.spec(), charge, depth)).unwrap()
}

fn fock_sum(voa: &Voa, charges: &[Rational], depth: usize) -> Arc<RealizedModule> {
    let parts = charges.iter().map(|c| ModuleSpec::fock(voa.spec(), c.clone(), depth)).collect();
    RealizedModule::new(&ModuleSpec::direct_sum(voa.spec(), parts, depth)).unwrap()
}

fn unit(dim: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![q(0); dim];
    v[i] = q(1);
    v
}

fn single(c: &CorrelatorCombination) -> LaurentPoly {
    assert!(c.entries().all(|(k, _)| *k == (0, 0)), "{c:?}");
    c.get(0, 0)
}

#[test]
fn reduce_examples() {
    let voa = heis(6);
    let (lambda, mu) = (frac(1, 2), frac(-2, 3));
    let u = fock(&voa, lambda.clone(), 6);
    let w = fock(&voa, mu.clone(), 6);
    let r = Reducer::with_depth(&voa, &u, &w, 5).unwrap();
    assert_eq!(r.reduce(0, &[q(1)], 0, &[q(1)]).unwrap(), CorrelatorCombination::unit(0, 0));
    assert_eq!(single(&r.reduce(1, &[q(1)], 0, &[q(1)]).unwrap()), LaurentPoly::monomial(mu, -1));
    // The free-boson matrix element <top, Y(|λ>,z) a(-1)|μ>> is -λ z^{λμ-1}: moving a(-1) across
    // the vertex operator picks up a minus sign.
    assert_eq!(single(&r.reduce(0, &[q(1)], 1, &[q(1)]).unwrap()), LaurentPoly::monomial(-lambda, -1));
}

#[test]
fn express_examples() {
    let voa = heis(6);
    let u = fock(&voa, q(1), 6);
    let r = Reducer::with_depth(&voa, &u, &u, 5).unwrap();
    let top = r.express(true, 0, &[q(1)]).unwrap();
    assert!(top[0].c1_terms.is_empty());
    assert_eq!(top[0].complement, vec![(0, q(1))]);
    // a(-2)|λ> = (L(-1)a)_{-1}|λ>
    let level2 = u.basis_labels(2);
    let idx = level2.iter().position(|p| p.starts_with("a(-2)|")).unwrap();
    let d = r.express(true, 2, &unit(2, idx)).unwrap();
    assert!(d[0].complement.is_empty());
    assert_eq!(d[0].c1_terms.len(), 1);
    let (label, c) = &d[0].c1_terms[0];
    assert_eq!((label.v_weight, label.u_level, c.clone()), (2, 0, q(1)));
    assert_eq!(voa.basis_state(2, label.v_index).terms, vec![(Partition(vec![2]), q(1))]);
}

fn ising_quotient(depth: usize) -> (Voa, Arc<RealizedModule>) {
    let spec = VoaSpec::virasoro(frac(1, 2), depth + 1);
    let voa = Voa::new(&spec).unwrap();
    let s = find_singular_vectors(&frac(1, 2), &frac(1, 2), false, 2).remove(0);
    let sv = SingularVector { level: 2, coefficients: s };
    let m = RealizedModule::new(&ModuleSpec::quotient(&spec, frac(1, 2), vec![sv], depth)).unwrap();
    (voa, m)
}

#[test]
fn express_in_level_two_quotient() {
    let (voa, m) = ising_quotient(7);
    let r = Reducer::with_depth(&voa, &m, &m, 5).unwrap();
    assert_eq!(m.dim(2), 1);
    // L(-1)^2|h> = (2(2h+1)/3) L(-2)|h> lies in C_1
    let d = r.express(true, 2, &[q(1)]).unwrap();
    assert!(d[0].complement.is_empty());
    assert_eq!(d[0].c1_terms.len(), 1);
    let (label, c) = &d[0].c1_terms[0];
    assert_eq!((label.v_weight, label.u_level), (2, 0));
    assert_eq!(*c, frac(4, 3));
    let l1 = r.express(true, 1, &[q(1)]).unwrap();
    assert_eq!(l1[0].complement, vec![(1, q(1))]);
}

#[test]
fn ode_examples() {
    let voa = heis(6);
    let r = Reducer::with_depth(&voa, &fock(&voa, q(1), 6), &fock(&voa, q(2), 6), 5).unwrap();
    let ode = r.assemble_ode().unwrap();
    assert_eq!(ode.dimension, 1);
    assert_eq!(ode.entry(0, 0), LaurentPoly::monomial(q(2), -1));
    assert_eq!(ode.pole_order(), 1);

    let r = Reducer::with_depth(&voa, &fock(&voa, q(0), 6), &fock(&voa, frac(5, 3), 6), 5).unwrap();
    assert_eq!(r.assemble_ode().unwrap().entry(0, 0), LaurentPoly::zero());

    let u = fock_sum(&voa, &[q(1), q(-1)], 6);
    let r = Reducer::with_depth(&voa, &u, &fock(&voa, q(2), 6), 5).unwrap();
    let ode = r.assemble_ode().unwrap();
    assert_eq!(ode.dimension, 2);
    assert!(ode.is_block_diagonal(&[0, 1]));
    assert_eq!(ode.entry(0, 0), LaurentPoly::monomial(q(2), -1));
    assert_eq!(ode.entry(1, 1), LaurentPoly::monomial(q(-2), -1));
    let json = serde_json::to_value(ode.to_json()).unwrap();
    assert_eq!(json["labels"], serde_json::json!([[0, 0], [1, 0]]));
    assert_eq!(json["entries"][0]["terms"][0], serde_json::json!({"power": -1, "num": "2", "den": "1"}));
}

#[test]
fn ising_ode_is_regular_after_balancing() {
    let (voa, m) = ising_quotient(7);
    let r = Reducer::with_depth(&voa, &m, &m, 5).unwrap();
    let ode = r.assemble_ode().unwrap();
    assert_eq!(ode.dimension, 4);
    let balanced = ode.balanced();
    assert_eq!(balanced.pole_order(), 1);
    assert_eq!(balanced.coefficient(-1).rows(), 4);
}

#[test]
fn fusion_bound_examples() {
    let voa = heis(6);
    assert_eq!(fusion_bound(&voa, &fock(&voa, q(1), 6), &fock(&voa, q(3), 6), 5).unwrap().value, 1);
    let u = fock_sum(&voa, &[q(1), q(-1)], 6);
    let b = fusion_bound(&voa, &u, &fock(&voa, q(2), 6), 5).unwrap();
    assert_eq!(b.value, 2);
    assert_eq!(b.pairs.len(), 2);
    let (ivoa, m) = ising_quotient(7);
    assert_eq!(fusion_bound(&ivoa, &m, &m, 5).unwrap().value, 4);
}

#[test]
fn fusion_bound_adds_over_summands() {
    let voa = heis(6);
    let charges = [q(1), frac(-1, 2), q(0)];
    let u = fock_sum(&voa, &charges[..2], 6);
    let w = fock_sum(&voa, &charges[1..], 6);
    let total = fusion_bound(&voa, &u, &w, 5).unwrap().value;
    let mut sum = 0;
    for a in &charges[..2] {
        for b in &charges[1..] {
            sum += fusion_bound(&voa, &fock(&voa, a.clone(), 6), &fock(&voa, b.clone(), 6), 5).unwrap().value;
        }
    }
    assert_eq!(total, sum);
    // a Verma module is not C_1-cofinite within the window
    let vir = Voa::new(&VoaSpec::virasoro(frac(1, 2), 6)).unwrap();
    let verma = RealizedModule::new(&ModuleSpec::verma(vir.spec(), frac(1, 16), 7)).unwrap();
    let err = fusion_bound(&vir, &verma, &verma, 4).unwrap_err();
    assert_eq!(err.kind(), "NotCofiniteUpToDepth");
}

#[test]
fn reduce_beyond_window_is_a_truncation() {
    let voa = heis(4);
    let u = fock(&voa, q(1), 4);
    let r = Reducer::with_depth(&voa, &u, &u, 3).unwrap();
    let dim = u.dim(4);
    assert!(matches!(r.reduce(4, &unit(dim, 0), 0, &[q(1)]), Err(Error::Truncation(_))));
}

/// `<θ, Y(p,z)q>` as a map from (rational) powers of `z` to coefficients.
type Series = BTreeMap<Rational, Rational>;

fn add(s: &mut Series, power: Rational, c: Rational) {
    let slot = s.entry(power.clone()).or_insert_with(|| q(0));
    *slot += c;
    if *slot == q(0) {
        s.remove(&power);
    }
}

fn embed(module: &RealizedModule, summand: usize, level: usize, local: &[Rational]) -> Vec<Rational> {
    let off = module.block_offsets(level);
    let mut v = vec![q(0); *off.last().unwrap()];
    v[off[summand]..off[summand] + local.len()].clone_from_slice(local);
    v
}

/// Checks `<θ, Y(p,z)q> = Σ c_ij(z) <θ, Y(p^i,z)q^j>` for all basis pairs up to the oracle depth
/// and every functional vanishing on `C_1` of the target. Returns the number of checks.
fn soundness(r: &Reducer, y: &IntertwinerData) -> usize {
    let thetas = y.annihilators().unwrap();
    assert!(!thetas.is_empty());
    let (u, w) = (y.left(), y.right());
    let es = &r.left_basis().vectors;
    let fs = &r.right_basis().vectors;
    let mut checks = 0;
    for a in 0..=y.depth() {
        for b in 0..=y.depth() - a {
            for pi in 0..u.dim(a) {
                for qi in 0..w.dim(b) {
                    let (p, qv) = (unit(u.dim(a), pi), unit(w.dim(b), qi));
                    let combo = r.reduce(a, &p, b, &qv).unwrap();
                    for (r_theta, theta) in &thetas {
                        let mut lhs = Series::new();
                        let (pw, val) = y.correlator((r_theta, theta), (a, &p), (b, &qv)).unwrap();
                        add(&mut lhs, pw, val);
                        let mut rhs = Series::new();
                        for (&(i, j), poly) in combo.entries() {
                            let (e, f) = (&es[i], &fs[j]);
                            let pe = embed(u, e.summand, e.level, &e.coords);
                            let qf = embed(w, f.summand, f.level, &f.coords);
                            let (pw, val) = y.correlator((r_theta, theta), (e.level, &pe), (f.level, &qf)).unwrap();
                            for (k, c) in poly.terms() {
                                add(&mut rhs, &pw + q(k), c * &val);
                            }
                        }
                        assert_eq!(lhs, rhs, "p=({a},{pi}) q=({b},{qi}) θ at {r_theta}");
                        checks += 1;
                    }
                }
            }
        }
    }
    checks
}

#[test]
fn oracle_soundness_single_fock() {
    let voa = heis(7);
    let (u, w) = (fock(&voa, q(1), 7), fock(&voa, q(2), 7));
    let r = Reducer::with_depth(&voa, &u, &w, 6).unwrap();
    let y = IntertwinerData::free_boson(&voa, &u, &w, &[(0, 0, q(1))], 5).unwrap();
    // the same combinations serve every target: θ-independence
    assert_eq!(soundness(&r, &y), 74);
    assert_eq!(soundness(&r, &y.scale(&frac(-7, 3))), 74);
}

#[test]
fn oracle_soundness_direct_sums() {
    let voa = heis(6);
    let u = fock_sum(&voa, &[q(1), frac(-1, 2)], 6);
    let w = fock_sum(&voa, &[frac(2, 3), q(0)], 6);
    let r = Reducer::with_depth(&voa, &u, &w, 5).unwrap();
    let y = IntertwinerData::free_boson(&voa, &u, &w, &[(0, 0, q(1)), (1, 1, q(2)), (0, 1, frac(1, 3))], 4).unwrap();
    assert_eq!(y.c1_quotient_dim().unwrap(), 3);
    assert!(y.c1_quotient_dim().unwrap() <= r.fusion_bound().value);
    assert!(soundness(&r, &y) > 100);
}

#[test]
fn ode_holds_on_the_oracle() {
    // d/dz A = B A for A = <θ, Y(p^i,z)q^j>, checked coefficientwise
    let voa = heis(6);
    let u = fock_sum(&voa, &[q(1), q(-1)], 6);
    let w = fock(&voa, q(2), 6);
    let r = Reducer::with_depth(&voa, &u, &w, 5).unwrap();
    let ode: OdeSystem = r.assemble_ode().unwrap();
    let y = IntertwinerData::free_boson(&voa, &u, &w, &[(0, 0, q(1)), (1, 0, q(1))], 3).unwrap();
    for (rt, theta) in y.annihilators().unwrap() {
        let a: Vec<(Rational, Rational)> = ode
            .labels
            .iter()
            .map(|&(i, j)| {
                let (e, f) = (&r.left_basis().vectors[i], &r.right_basis().vectors[j]);
                let pe = embed(&u, e.summand, e.level, &e.coords);
                let qf = embed(&w, f.summand, f.level, &f.coords);
                y.correlator((&rt, &theta), (e.level, &pe), (f.level, &qf)).unwrap()
            })
            .collect();
        for row in 0..ode.dimension {
            let mut lhs = Series::new();
            add(&mut lhs, &a[row].0 - q(1), &a[row].0 * &a[row].1);
            let mut rhs = Series::new();
            for col in 0..ode.dimension {
                for (k, c) in ode.entry(row, col).terms() {
                    add(&mut rhs, &a[col].0 + q(k), c * &a[col].1);
                }
            }
            assert_eq!(lhs, rhs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reduce_is_linear(
        x in proptest::collection::vec(-4i64..=4, 3),
        y in proptest::collection::vec(-4i64..=4, 3),
        alpha in -3i64..=3,
        beta in -3i64..=3,
    ) {
        let voa = heis(6);
        let (u, w) = (fock(&voa, frac(1, 2), 6), fock(&voa, frac(-3, 2), 6));
        let r = Reducer::with_depth(&voa, &u, &w, 5).unwrap();
        let (p1, p2): (Vec<Rational>, Vec<Rational>) = (x.iter().map(|&n| q(n)).collect(), y.iter().map(|&n| q(n)).collect());
        let mix: Vec<Rational> = p1.iter().zip(&p2).map(|(a, b)| q(alpha) * a + q(beta) * b).collect();
        let qv = [q(1), q(-2)];
        let mut expected = CorrelatorCombination::zero();
        expected.add_scaled(&r.reduce(3, &p1, 2, &qv).unwrap(), &q(alpha), 0);
        expected.add_scaled(&r.reduce(3, &p2, 2, &qv).unwrap(), &q(beta), 0);
        prop_assert_eq!(r.reduce(3, &mix, 2, &qv).unwrap(), expected);
        // the same coefficients come out of the convenience entry point
        prop_assert_eq!(reduce(&voa, &u, &w, 5, (3, &p1), (2, &qv)).unwrap(), r.reduce(3, &p1, 2, &qv).unwrap());
    }
}
