//! Exact checks of the Borcherds-type identities satisfied by vertex operator modes, guarded
//! against truncation: a check whose own intermediate levels leave the realized window raises
//! `Error::Truncation` instead of answering.

use std::collections::HashMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::algebra::Voa;
use super::module::RealizedModule;
use super::state::State;
use super::vector::GradedVector;
use crate::error::{Error, Result};
use crate::exact::{binomial, Matrix, Rational};

/// Image of a mode action together with the sticky truncation flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeOutcome {
    pub vector: GradedVector,
    pub truncated: bool,
}

/// `v_k w`. Components landing above the module depth are dropped and flagged.
pub fn mode_action(module: &RealizedModule, v: &State, k: i64, w: &GradedVector) -> ModeOutcome {
    let mut out = GradedVector::zero();
    let mut truncated = false;
    for (level, coords) in w.components() {
        let target = level as i64 + v.weight as i64 - k - 1;
        if target < 0 {
            continue;
        }
        if target as usize > module.depth() {
            truncated = true;
            continue;
        }
        out.apply_level(target as usize, &module.state_mode(v, k, level), coords);
    }
    ModeOutcome { vector: out, truncated }
}

fn truncation(what: &str, level: i64, depth: usize) -> Error {
    Error::Truncation(format!("{what} reaches level {level}, beyond depth {depth}"))
}

fn sign(n: i64) -> Rational {
    if n.rem_euclid(2) == 0 {
        Rational::from_integer(1.into())
    } else {
        -Rational::from_integer(1.into())
    }
}

/// Product states `v1_i v2` and composed mode matrices shared between many checks of the
/// same pair.
struct Products<'a> {
    voa: &'a Voa,
    v1: &'a State,
    v2: &'a State,
    memo: HashMap<i64, Option<State>>,
    composed: HashMap<(bool, i64, i64, usize), Matrix>,
}

impl<'a> Products<'a> {
    fn new(voa: &'a Voa, v1: &'a State, v2: &'a State) -> Self {
        Self { voa, v1, v2, memo: HashMap::new(), composed: HashMap::new() }
    }

    /// `v1_k1 v2_k2` (or `v2_k1 v1_k2` when `swapped`) from `src` to `target`.
    fn compose(&mut self, module: &RealizedModule, swapped: bool, k1: i64, k2: i64, src: usize, target: usize) -> Matrix {
        let key = (swapped, k1, k2, src);
        if let Some(m) = self.composed.get(&key) {
            return m.clone();
        }
        let (outer, inner) = if swapped { (self.v2, self.v1) } else { (self.v1, self.v2) };
        let m = compose(module, (outer, k1), (inner, k2), src, target);
        self.composed.insert(key, m.clone());
        m
    }

    fn get(&mut self, i: i64) -> Result<Option<State>> {
        let level = self.v1.weight as i64 + self.v2.weight as i64 - i - 1;
        if level > self.voa.depth() as i64 {
            return Err(truncation("product state", level, self.voa.depth()));
        }
        if let Some(s) = self.memo.get(&i) {
            return Ok(s.clone());
        }
        let s = self.voa.product(self.v1, i, self.v2);
        self.memo.insert(i, s.clone());
        Ok(s)
    }
}

/// `A · B` where `B` maps level `src` to level `mid`; zero when `mid` is negative.
fn compose(module: &RealizedModule, outer: (&State, i64), inner: (&State, i64), src: usize, target: usize) -> Matrix {
    let mid = src as i64 + inner.0.weight as i64 - inner.1 - 1;
    if mid < 0 {
        return Matrix::zeros(module.dim(target), module.dim(src));
    }
    module.state_mode(outer.0, outer.1, mid as usize).mul(&module.state_mode(inner.0, inner.1, src))
}

fn commutator_matrices(
    module: &RealizedModule,
    products: &mut Products,
    n: i64,
    m: i64,
    level: usize,
) -> Result<Option<(Matrix, Matrix)>> {
    let (v1, v2) = (products.v1, products.v2);
    let (a, b, l) = (v1.weight as i64, v2.weight as i64, level as i64);
    let depth = module.depth();
    let target = l + a + b - n - m - 2;
    if target < 0 {
        return Ok(None);
    }
    for (what, lvl) in [("target", target), ("intermediate v2 image", l + b - m - 1), ("intermediate v1 image", l + a - n - 1)] {
        if lvl > depth as i64 {
            return Err(truncation(what, lvl, depth));
        }
    }
    let t = target as usize;
    let lhs = products.compose(module, false, n, m, level, t).sub(&products.compose(module, true, m, n, level, t));
    let mut rhs = Matrix::zeros(module.dim(t), module.dim(level));
    for i in 0..a + b {
        let c = binomial(n, i as u32);
        if c.is_zero() {
            continue;
        }
        if let Some(p) = products.get(i)? {
            rhs = rhs.add(&module.state_mode(&p, n + m - i, level).scale(&c));
        }
    }
    Ok(Some((lhs, rhs)))
}

fn associativity_matrices(
    module: &RealizedModule,
    products: &mut Products,
    n: i64,
    m: i64,
    level: usize,
) -> Result<Option<(Matrix, Matrix)>> {
    let (v1, v2) = (products.v1, products.v2);
    let (a, b, l) = (v1.weight as i64, v2.weight as i64, level as i64);
    let depth = module.depth();
    let target = l + a + b - n - m - 2;
    if target < 0 {
        return Ok(None);
    }
    for (what, lvl) in [("target", target), ("intermediate v2 image", l + b - m - 1), ("intermediate v1 image", l + a - 1)] {
        if lvl > depth as i64 {
            return Err(truncation(what, lvl, depth));
        }
    }
    let t = target as usize;
    let lhs = match products.get(n)? {
        Some(p) => module.state_mode(&p, m, level),
        None => Matrix::zeros(module.dim(t), module.dim(level)),
    };
    let i_max = if n >= 0 { n } else { (l + b - m - 1).max(l + a - 1).max(0) };
    let mut rhs = Matrix::zeros(module.dim(t), module.dim(level));
    let sn = sign(n);
    for i in 0..=i_max {
        let c = binomial(n, i as u32) * sign(i);
        if c.is_zero() {
            continue;
        }
        let first = products.compose(module, false, n - i, m + i, level, t);
        let second = products.compose(module, true, n + m - i, i, level, t);
        rhs = rhs.add(&first.sub(&second.scale(&sn)).scale(&c));
    }
    Ok(Some((lhs, rhs)))
}

fn apply_pair(
    w: &GradedVector,
    mut per_level: impl FnMut(usize) -> Result<Option<(Matrix, Matrix)>>,
    shift: i64,
) -> Result<bool> {
    let mut lhs = GradedVector::zero();
    let mut rhs = GradedVector::zero();
    for (level, coords) in w.components() {
        if let Some((l, r)) = per_level(level)? {
            let target = (level as i64 + shift) as usize;
            lhs.apply_level(target, &l, coords);
            rhs.apply_level(target, &r, coords);
        }
    }
    Ok(lhs == rhs)
}

/// Checks `[v1_n, v2_m] w = Σ_{i≥0} binom(n,i) (v1_i v2)_{n+m-i} w`.
pub fn check_commutator(
    voa: &Voa,
    module: &RealizedModule,
    v1: &State,
    v2: &State,
    n: i64,
    m: i64,
    w: &GradedVector,
) -> Result<bool> {
    let mut products = Products::new(voa, v1, v2);
    let shift = v1.weight as i64 + v2.weight as i64 - n - m - 2;
    apply_pair(w, |level| commutator_matrices(module, &mut products, n, m, level), shift)
}

/// Checks `(v1_n v2)_m w = Σ_{i≥0} binom(n,i)(-1)^i [v1_{n-i} v2_{m+i} - (-1)^n v2_{n+m-i} v1_i] w`.
pub fn check_associativity(
    voa: &Voa,
    module: &RealizedModule,
    v1: &State,
    v2: &State,
    n: i64,
    m: i64,
    w: &GradedVector,
) -> Result<bool> {
    let mut products = Products::new(voa, v1, v2);
    let shift = v1.weight as i64 + v2.weight as i64 - n - m - 2;
    apply_pair(w, |level| associativity_matrices(module, &mut products, n, m, level), shift)
}

/// Both sides of `(L(-1)v)_{-m} w = m v_{-m-1} w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftCheck {
    pub lhs: GradedVector,
    pub rhs: GradedVector,
    pub equal: bool,
}

pub fn l_minus_one_shift(voa: &Voa, module: &RealizedModule, v: &State, m: i64, w: &GradedVector) -> Result<ShiftCheck> {
    if m <= 0 {
        return Err(Error::InputShape(format!("shift index must be positive, got {m}")));
    }
    for (level, _) in w.components() {
        let target = level as i64 + v.weight as i64 + m;
        if target > module.depth() as i64 {
            return Err(truncation("shifted mode", target, module.depth()));
        }
    }
    let derived = voa.l_minus_one(v);
    let lhs = mode_action(module, &derived, -m, w).vector;
    let rhs = mode_action(module, v, -m - 1, w).vector.scale(&Rational::from_integer(m.into()));
    let equal = lhs == rhs;
    Ok(ShiftCheck { lhs, rhs, equal })
}

/// Tally of an exhaustive identity run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub passed: usize,
    pub failed: usize,
    pub truncated: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn merge(mut self, other: SuiteReport) -> SuiteReport {
        self.passed += other.passed;
        self.failed += other.failed;
        self.truncated += other.truncated;
        self.failures.extend(other.failures);
        self
    }
}

/// Runs both identities on every pair of basis states `(v1, v2)` of V with
/// `wt(v1) + wt(v2) - 1 <= depth(V)`, every mode pair that can act nontrivially, and every
/// source level of each module, as exact matrix identities. Checks outside the guard are
/// counted as truncated, never as passed.
pub fn identity_suite(voa: &Voa, modules: &[&RealizedModule]) -> SuiteReport {
    let depth = voa.depth();
    let mut states = Vec::new();
    for level in 0..=depth {
        for idx in 0..voa.dim(level) {
            states.push((format!("V[{level}][{idx}]"), voa.basis_state(level, idx)));
        }
    }
    let mut jobs = Vec::new();
    for (mi, _) in modules.iter().enumerate() {
        for (i, (_, v1)) in states.iter().enumerate() {
            for (j, (_, v2)) in states.iter().enumerate() {
                if v1.weight + v2.weight <= depth + 1 {
                    jobs.push((mi, i, j));
                }
            }
        }
    }
    let reports: Vec<SuiteReport> = jobs
        .par_iter()
        .map(|&(mi, i, j)| {
            let module = modules[mi];
            let (name1, v1) = &states[i];
            let (name2, v2) = &states[j];
            let mut products = Products::new(voa, v1, v2);
            let mut rep = SuiteReport::default();
            let dm = module.depth() as i64;
            let (a, b) = (v1.weight as i64, v2.weight as i64);
            for level in 0..=module.depth() {
                for n in a - 1 - dm..=a - 1 + dm {
                    for m in b - 1 - dm..=b - 1 + dm {
                        let checks = [
                            ("commutator", commutator_matrices(module, &mut products, n, m, level)),
                            ("associativity", associativity_matrices(module, &mut products, n, m, level)),
                        ];
                        for (what, outcome) in checks {
                            match outcome {
                                Ok(None) => {}
                                Ok(Some((l, r))) if l == r => rep.passed += 1,
                                Ok(Some(_)) => {
                                    rep.failed += 1;
                                    rep.failures.push(format!(
                                        "{what}: v1={name1} v2={name2} n={n} m={m} level={level} module={}",
                                        module.spec()
                                    ));
                                }
                                Err(_) => rep.truncated += 1,
                            }
                        }
                    }
                }
            }
            rep
        })
        .collect();
    reports.into_iter().fold(SuiteReport::default(), SuiteReport::merge)
}
