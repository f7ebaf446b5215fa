//! Regular-singular analysis of `d/dz A = B A` at `z = 0`: residue, indicial exponents and
//! truncated Frobenius series `A = z^ρ Σ_{k,ℓ} c_{k,ℓ} z^k log^ℓ z`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cofinite::log_power_bound;
use crate::error::{Error, Result};
use crate::exact::{rational_from_i64, Matrix, Rational};
use crate::reduce::OdeSystem;

/// Rational root with its multiplicity in the characteristic polynomial of the residue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exponent {
    #[serde(serialize_with = "crate::exact::serialize_rational")]
    pub value: Rational,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicialData {
    pub residue: Matrix,
    /// `det(x - B_{-1})`, coefficients from `x^0` upwards.
    pub characteristic: Vec<Rational>,
    pub exponents: Vec<Exponent>,
    /// Monic cofactor collecting the roots outside Q; `[1]` when every root is rational.
    pub residual_factor: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndicialJson {
    pub residue: Vec<Vec<String>>,
    pub characteristic: Vec<String>,
    pub exponents: Vec<Exponent>,
    pub residual_factor: Vec<String>,
}

impl IndicialData {
    pub fn all_rational(&self) -> bool {
        self.residual_factor.len() == 1
    }

    pub fn multiplicity(&self, rho: &Rational) -> usize {
        self.exponents.iter().find(|e| e.value == *rho).map_or(0, |e| e.multiplicity)
    }

    pub fn to_json(&self) -> IndicialJson {
        let strings = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        IndicialJson {
            residue: (0..self.residue.rows()).map(|r| strings(self.residue.row(r))).collect(),
            characteristic: strings(&self.characteristic),
            exponents: self.exponents.clone(),
            residual_factor: strings(&self.residual_factor),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusSolution {
    pub exponent: Rational,
    pub depth: usize,
    /// `(k, ℓ) -> c_{k,ℓ}`; zero vectors are omitted.
    pub terms: BTreeMap<(usize, usize), Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrobeniusTerm {
    pub k: usize,
    pub log_power: usize,
    pub vector: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrobeniusJson {
    pub exponent: String,
    pub depth: usize,
    pub terms: Vec<FrobeniusTerm>,
}

impl FrobeniusSolution {
    pub fn coefficient(&self, k: usize, log_power: usize, dim: usize) -> Vec<Rational> {
        self.terms.get(&(k, log_power)).cloned().unwrap_or_else(|| vec![Rational::zero(); dim])
    }

    pub fn max_log_power(&self) -> usize {
        self.terms.keys().map(|(_, l)| *l).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> FrobeniusJson {
        FrobeniusJson {
            exponent: self.exponent.to_string(),
            depth: self.depth,
            terms: self
                .terms
                .iter()
                .map(|(&(k, log_power), v)| FrobeniusTerm {
                    k,
                    log_power,
                    vector: v.iter().map(|x| x.to_string()).collect(),
                })
                .collect(),
        }
    }
}

pub fn pole_order(b: &OdeSystem) -> usize {
    b.pole_order()
}

/// Dimension of the solution space of the first-order system.
pub fn solution_space_dim(b: &OdeSystem) -> usize {
    b.dimension
}

/// Default cap on log powers from the nilpotency order of `L(0)` on the modules involved.
pub fn default_max_log(max_nilpotency: usize) -> usize {
    let n = max_nilpotency.max(1);
    log_power_bound(n, n, n).map(|b| b.general).unwrap_or(3)
}

fn check_regular(b: &OdeSystem) -> Result<()> {
    match b.pole_order() {
        p if p > 1 => Err(Error::IrregularSingularity(p)),
        _ => Ok(()),
    }
}

/// Faddeev-LeVerrier: coefficients of `det(x - A)`.
fn characteristic_polynomial(a: &Matrix) -> Vec<Rational> {
    let n = a.rows();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a.mul(&m);
        for i in 0..n {
            let x = next.get(i, i) + &coeffs[n - k + 1];
            next.set(i, i, x);
        }
        m = next;
        let am = a.mul(&m);
        let trace = (0..n).fold(Rational::zero(), |acc, i| acc + am.get(i, i));
        coeffs[n - k] = -trace / rational_from_i64(k as i64);
    }
    coeffs
}

fn eval(poly: &[Rational], x: &Rational) -> Rational {
    poly.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Quotient by `x - root`, assuming `root` is a root.
fn deflate(poly: &[Rational], root: &Rational) -> Vec<Rational> {
    let n = poly.len() - 1;
    let mut out = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for i in (1..=n).rev() {
        carry = &poly[i] + carry * root;
        out[i - 1] = carry.clone();
    }
    out
}

const DIVISOR_SEARCH_LIMIT: u64 = 10_000_000;

fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    let mut out = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n {
        if d > DIVISOR_SEARCH_LIMIT {
            return None;
        }
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    Some(out)
}

/// Rational roots with multiplicity, and the leftover monic factor.
fn rational_roots(poly: &[Rational]) -> (Vec<Exponent>, Vec<Rational>) {
    let mut p = poly.to_vec();
    let mut found: BTreeMap<Rational, usize> = BTreeMap::new();
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        *found.entry(Rational::zero()).or_default() += 1;
    }
    if p.len() > 1 {
        let denom = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = p.iter().map(|c| (c * Rational::from_integer(denom.clone())).to_integer()).collect();
        if let (Some(num), Some(den)) = (divisors(&ints[0]), divisors(ints.last().unwrap())) {
            let mut candidates: Vec<Rational> = Vec::new();
            for a in &num {
                for b in &den {
                    let r = Rational::new(BigInt::from(*a), BigInt::from(*b));
                    candidates.push(r.clone());
                    candidates.push(-r);
                }
            }
            candidates.sort();
            candidates.dedup();
            for r in candidates {
                while p.len() > 1 && eval(&p, &r).is_zero() {
                    p = deflate(&p, &r);
                    *found.entry(r.clone()).or_default() += 1;
                }
            }
        }
    }
    let lead = p.last().cloned().unwrap_or_else(Rational::one);
    let residual = p.iter().map(|c| c / &lead).collect();
    (found.into_iter().map(|(value, multiplicity)| Exponent { value, multiplicity }).collect(), residual)
}

pub fn indicial_exponents(b: &OdeSystem) -> Result<IndicialData> {
    check_regular(b)?;
    let residue = b.coefficient(-1);
    let characteristic = characteristic_polynomial(&residue);
    let (exponents, residual_factor) = rational_roots(&characteristic);
    Ok(IndicialData { residue, characteristic, exponents, residual_factor })
}

/// Index of `c_{k,ℓ}[i]` among the unknowns.
fn slot(n: usize, logs: usize, k: usize, l: usize, i: usize) -> usize {
    (k * logs + l) * n + i
}

/// Rows of the coefficient equations
/// `Σ_{s=0}^{k} R_s c_{k-s,ℓ} - (ρ+k) c_{k,ℓ} - (ℓ+1) c_{k,ℓ+1} = 0`, `B = Σ_s R_s z^{s-1}`.
fn frobenius_equations(b: &OdeSystem, rho: &Rational, depth: usize, max_log: usize) -> Matrix {
    let n = b.dimension;
    let logs = max_log + 1;
    let unknowns = n * (depth + 1) * logs;
    let r: Vec<Matrix> = (0..=depth).map(|s| b.coefficient(s as i64 - 1)).collect();
    let mut rows = Vec::new();
    for k in 0..=depth {
        for l in 0..logs {
            for i in 0..n {
                let mut row = vec![Rational::zero(); unknowns];
                for (s, rs) in r.iter().enumerate().take(k + 1) {
                    for j in 0..n {
                        let x = rs.get(i, j);
                        if !x.is_zero() {
                            row[slot(n, logs, k - s, l, j)] += x;
                        }
                    }
                }
                row[slot(n, logs, k, l, i)] -= rho + rational_from_i64(k as i64);
                if l + 1 < logs {
                    row[slot(n, logs, k, l + 1, i)] -= rational_from_i64(l as i64 + 1);
                }
                rows.push(row);
            }
        }
    }
    Matrix::from_rows(unknowns, rows)
}

/// Independent truncated solutions whose leading exponent is exactly `ρ`, one per dimension of
/// the generalized eigenspace of the residue at `ρ`. Higher powers of `log z` than `max_log`
/// are never introduced; if they would be needed, the result is LogDepthExceeded.
pub fn frobenius_series(b: &OdeSystem, rho: &Rational, depth: usize, max_log: usize) -> Result<Vec<FrobeniusSolution>> {
    let data = indicial_exponents(b)?;
    let wanted = data.multiplicity(rho);
    if wanted == 0 {
        return Err(Error::InputShape(format!("{rho} is not an indicial exponent")));
    }
    let n = b.dimension;
    let logs = max_log + 1;
    let system = frobenius_equations(b, rho, depth, max_log);
    let kernel = system.nullspace();
    // keep kernel vectors whose leading block (k = 0, all ℓ) is independent; the rest start at
    // a higher exponent ρ + k
    let lead = n * logs;
    let mut chosen = Vec::new();
    let mut leads: Vec<Vec<Rational>> = Vec::new();
    for v in kernel {
        let head = v[..lead].to_vec();
        let mut trial = leads.clone();
        trial.push(head.clone());
        if Matrix::from_rows(lead, trial).rank() > leads.len() {
            leads.push(head);
            chosen.push(v);
        }
    }
    if chosen.len() < wanted {
        return Err(Error::LogDepthExceeded { exponent: rho.to_string(), max_log });
    }
    let solutions: Vec<FrobeniusSolution> = chosen
        .into_iter()
        .map(|v| {
            let mut terms = BTreeMap::new();
            for k in 0..=depth {
                for l in 0..logs {
                    let c = v[slot(n, logs, k, l, 0)..slot(n, logs, k, l, 0) + n].to_vec();
                    if c.iter().any(|x| !x.is_zero()) {
                        terms.insert((k, l), c);
                    }
                }
            }
            FrobeniusSolution { exponent: rho.clone(), depth, terms }
        })
        .collect();
    for s in &solutions {
        if !residual(b, s).iter().all(Zero::is_zero) {
            return Err(Error::InternalInvariantViolation("Frobenius solution fails substitution".into()));
        }
    }
    Ok(solutions)
}

/// Coefficients of `z^{-ρ+1}(A' - BA)` at `z^k log^ℓ z` for `k <= depth`, flattened.
pub fn residual(b: &OdeSystem, sol: &FrobeniusSolution) -> Vec<Rational> {
    let n = b.dimension;
    let logs = sol.max_log_power() + 1;
    let mut out = Vec::new();
    for k in 0..=sol.depth {
        for l in 0..logs {
            let mut acc: Vec<Rational> = sol
                .coefficient(k, l, n)
                .iter()
                .map(|x| x * (&sol.exponent + rational_from_i64(k as i64)))
                .collect();
            let next = sol.coefficient(k, l + 1, n);
            for (a, x) in acc.iter_mut().zip(&next) {
                *a += x * rational_from_i64(l as i64 + 1);
            }
            for s in 0..=k {
                let rs = b.coefficient(s as i64 - 1);
                let bc = rs.mul_vec(&sol.coefficient(k - s, l, n));
                for (a, x) in acc.iter_mut().zip(bc) {
                    *a -= x;
                }
            }
            out.extend(acc);
        }
    }
    out
}

/// Solutions for every rational exponent, in increasing exponent order.
pub fn all_frobenius_solutions(b: &OdeSystem, depth: usize, max_log: usize) -> Result<Vec<FrobeniusSolution>> {
    let data = indicial_exponents(b)?;
    let mut out = Vec::new();
    for e in &data.exponents {
        out.extend(frobenius_series(b, &e.value, depth, max_log)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::LaurentPoly;

    fn q(n: i64) -> Rational {
        rational_from_i64(n)
    }

    #[test]
    fn characteristic_of_companion() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let a = Matrix::from_rows(3, vec![vec![q(0), q(0), q(6)], vec![q(1), q(0), q(-11)], vec![q(0), q(1), q(6)]]);
        let p = characteristic_polynomial(&a);
        assert_eq!(p, vec![q(-6), q(11), q(-6), q(1)]);
        let (roots, rest) = rational_roots(&p);
        assert_eq!(roots.iter().map(|e| e.value.clone()).collect::<Vec<_>>(), vec![q(1), q(2), q(3)]);
        assert_eq!(rest, vec![q(1)]);
    }

    #[test]
    fn irrational_roots_stay_symbolic() {
        // x^2 - 2 times (x - 1/2)
        let p = vec![Rational::new(1.into(), 1.into()), q(-2), Rational::new((-1).into(), 2.into()), q(1)];
        let (roots, rest) = rational_roots(&p);
        assert_eq!(roots, vec![Exponent { value: Rational::new(1.into(), 2.into()), multiplicity: 1 }]);
        assert_eq!(rest, vec![q(-2), q(0), q(1)]);
    }

    #[test]
    fn resonant_exponents_without_logs() {
        // B = diag(0, 1)/z: exponents 0 and 1 differ by an integer but need no log
        let b = OdeSystem::from_matrix(vec![
            vec![LaurentPoly::zero(), LaurentPoly::zero()],
            vec![LaurentPoly::zero(), LaurentPoly::monomial(q(1), -1)],
        ])
        .unwrap();
        let sols = all_frobenius_solutions(&b, 3, 0).unwrap();
        assert_eq!(sols.len(), 2);
    }
}
