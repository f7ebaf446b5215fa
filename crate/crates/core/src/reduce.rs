//! Rewriting correlators `<θ, Y(p,z)q>` over complement basis pairs, the first-order system
//! they satisfy, and the resulting fusion bound (the `m = 1` case).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cofinite::{choose_complement, cm_spanning, ComplementBasis, SpanLabel};
use crate::error::{Error, Result};
use crate::exact::{rational_from_i64, LaurentPoly, LaurentTerm, Matrix, Rational};
use crate::voa::{RealizedModule, Voa};

/// `Σ c_ij(z) F(p^i, q^j; z)`, keyed by global complement indices `(i, j)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorrelatorCombination {
    entries: BTreeMap<(usize, usize), LaurentPoly>,
}

impl CorrelatorCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(i: usize, j: usize) -> Self {
        let mut c = Self::zero();
        c.add_term(i, j, &LaurentPoly::constant(Rational::one()));
        c
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &LaurentPoly)> {
        self.entries.iter()
    }

    pub fn get(&self, i: usize, j: usize) -> LaurentPoly {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add_term(&mut self, i: usize, j: usize, p: &LaurentPoly) {
        let slot = self.entries.entry((i, j)).or_default();
        *slot += p;
        if slot.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    /// `self += c z^shift other`.
    pub fn add_scaled(&mut self, other: &CorrelatorCombination, c: &Rational, shift: i64) {
        if c.is_zero() {
            return;
        }
        for ((i, j), p) in &other.entries {
            self.add_term(*i, *j, &p.scale(c).shift(shift));
        }
    }

    pub fn serialize(&self) -> Vec<CombinationEntry> {
        self.entries.iter().map(|((i, j), p)| CombinationEntry { i: *i, j: *j, terms: p.serialize_terms() }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombinationEntry {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<LaurentTerm>,
}

/// `p = Σ_k x_k v^k_{-1} a^k + Σ_i y_i p^i` with the complement part indexed globally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub c1_terms: Vec<(SpanLabel, Rational)>,
    pub complement: Vec<(usize, Rational)>,
}

struct Side {
    module: Arc<RealizedModule>,
    leaves: Vec<Arc<RealizedModule>>,
    basis: ComplementBasis,
    /// Global complement indices of each leaf, and their levels / coordinates.
    complement_of: Vec<Vec<usize>>,
    decompositions: RwLock<HashMap<(usize, usize), Arc<Vec<Decomposition>>>>,
}

impl Side {
    fn new(module: &Arc<RealizedModule>, basis: ComplementBasis) -> Result<Self> {
        let leaves = module.summands();
        if basis.windows.len() != leaves.len() {
            return Err(Error::InputShape(format!(
                "complement basis has {} summands but {} has {}",
                basis.windows.len(),
                module.spec(),
                leaves.len()
            )));
        }
        let complement_of = (0..leaves.len())
            .map(|s| basis.vectors.iter().enumerate().filter(|(_, v)| v.summand == s).map(|(i, _)| i).collect())
            .collect();
        Ok(Self { module: module.clone(), leaves, basis, complement_of, decompositions: RwLock::new(HashMap::new()) })
    }

    fn decompositions(&self, voa: &Voa, leaf: usize, level: usize) -> Result<Arc<Vec<Decomposition>>> {
        if level > self.basis.certified_depth {
            return Err(Error::Truncation(format!(
                "level {level} of {} lies outside the certified window 0..={}",
                self.leaves[leaf].spec(),
                self.basis.certified_depth
            )));
        }
        if let Some(d) = self.decompositions.read().unwrap().get(&(leaf, level)) {
            return Ok(d.clone());
        }
        let module = &self.leaves[leaf];
        let dim = module.dim(level);
        let spanning = cm_spanning(voa, module, 1, level);
        let comp: Vec<usize> =
            self.complement_of[leaf].iter().copied().filter(|&i| self.basis.vectors[i].level == level).collect();
        let mut columns: Vec<Vec<Rational>> = spanning.iter().map(|(_, v)| v.clone()).collect();
        columns.extend(comp.iter().map(|&i| self.basis.vectors[i].coords.clone()));
        let mat = Matrix::from_columns(dim, &columns);
        let mut out = Vec::with_capacity(dim);
        for x in 0..dim {
            let mut e = vec![Rational::zero(); dim];
            e[x] = Rational::one();
            let sol = mat.solve(&e).ok_or_else(|| {
                Error::InternalInvariantViolation(format!(
                    "basis vector {x} at level {level} of {} is not in C_1 + complement",
                    module.spec()
                ))
            })?;
            let (head, tail) = sol.split_at(spanning.len());
            let c1_terms =
                spanning.iter().zip(head).filter(|(_, c)| !c.is_zero()).map(|((l, _), c)| (*l, c.clone())).collect();
            let complement = comp.iter().zip(tail).filter(|(_, c)| !c.is_zero()).map(|(i, c)| (*i, c.clone())).collect();
            out.push(Decomposition { c1_terms, complement });
        }
        let out = Arc::new(out);
        self.decompositions.write().unwrap().insert((leaf, level), out.clone());
        Ok(out)
    }
}

/// Rewriting engine for one source pair `(U, W)` with fixed complement bases.
pub struct Reducer {
    voa: Voa,
    left: Side,
    right: Side,
    memo: RwLock<HashMap<(usize, usize, usize, usize, usize, usize), Arc<CorrelatorCombination>>>,
    right_memo: RwLock<HashMap<(usize, usize, usize, usize, usize), Arc<CorrelatorCombination>>>,
}

fn level_split(module: &RealizedModule, level: usize, coords: &[Rational]) -> Result<Vec<Vec<Rational>>> {
    let offsets = module.block_offsets(level);
    if coords.len() != *offsets.last().unwrap() {
        return Err(Error::InputShape(format!(
            "level {level} of {} has dimension {} but {} coordinates were given",
            module.spec(),
            offsets.last().unwrap(),
            coords.len()
        )));
    }
    Ok(offsets.windows(2).map(|w| coords[w[0]..w[1]].to_vec()).collect())
}

impl Reducer {
    pub fn new(voa: &Voa, u: &Arc<RealizedModule>, w: &Arc<RealizedModule>, e: ComplementBasis, f: ComplementBasis) -> Result<Self> {
        Ok(Self {
            voa: voa.clone(),
            left: Side::new(u, e)?,
            right: Side::new(w, f)?,
            memo: RwLock::new(HashMap::new()),
            right_memo: RwLock::new(HashMap::new()),
        })
    }

    /// Builds both complements at the given certified depth.
    pub fn with_depth(voa: &Voa, u: &Arc<RealizedModule>, w: &Arc<RealizedModule>, depth: usize) -> Result<Self> {
        let e = choose_complement(voa, u, depth)?;
        let f = choose_complement(voa, w, depth)?;
        Self::new(voa, u, w, e, f)
    }

    pub fn left_basis(&self) -> &ComplementBasis {
        &self.left.basis
    }

    pub fn right_basis(&self) -> &ComplementBasis {
        &self.right.basis
    }

    pub fn voa(&self) -> &Voa {
        &self.voa
    }

    /// Decomposes a homogeneous vector of `U` (when `left`) or `W` into `C_1` part and complement.
    pub fn express(&self, left: bool, level: usize, coords: &[Rational]) -> Result<Vec<Decomposition>> {
        let side = if left { &self.left } else { &self.right };
        let parts = level_split(&side.module, level, coords)?;
        let mut out = Vec::new();
        for (s, part) in parts.iter().enumerate() {
            let decs = side.decompositions(&self.voa, s, level)?;
            let mut c1: BTreeMap<SpanLabel, Rational> = BTreeMap::new();
            let mut comp: BTreeMap<usize, Rational> = BTreeMap::new();
            for (x, c) in part.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (l, y) in &decs[x].c1_terms {
                    *c1.entry(*l).or_insert_with(Rational::zero) += c * y;
                }
                for (i, y) in &decs[x].complement {
                    *comp.entry(*i).or_insert_with(Rational::zero) += c * y;
                }
            }
            out.push(Decomposition {
                c1_terms: c1.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
                complement: comp.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            });
        }
        Ok(out)
    }

    /// `reduce(p, q)` for homogeneous `p ∈ U_(a)`, `q ∈ W_(b)` given by coordinates.
    pub fn reduce(&self, a: usize, p: &[Rational], b: usize, q: &[Rational]) -> Result<CorrelatorCombination> {
        let ps = level_split(&self.left.module, a, p)?;
        let qs = level_split(&self.right.module, b, q)?;
        let mut out = CorrelatorCombination::zero();
        for (r, pr) in ps.iter().enumerate() {
            for (k, qk) in qs.iter().enumerate() {
                for (x, cx) in pr.iter().enumerate() {
                    if cx.is_zero() {
                        continue;
                    }
                    for (y, cy) in qk.iter().enumerate() {
                        if cy.is_zero() {
                            continue;
                        }
                        let basic = self.reduce_basis(r, k, a, x, b, y)?;
                        out.add_scaled(&basic, &(cx * cy), 0);
                    }
                }
            }
        }
        Ok(out)
    }

    fn reduce_vectors(&self, r: usize, k: usize, a: usize, p: &[Rational], b: usize, q: &[Rational]) -> Result<CorrelatorCombination> {
        let mut out = CorrelatorCombination::zero();
        for (x, cx) in p.iter().enumerate() {
            if cx.is_zero() {
                continue;
            }
            for (y, cy) in q.iter().enumerate() {
                if !cy.is_zero() {
                    out.add_scaled(&*self.reduce_basis(r, k, a, x, b, y)?, &(cx * cy), 0);
                }
            }
        }
        Ok(out)
    }

    /// Left rewriting: `F(v_{-1}a, q) = Σ_{h≥0} z^{-h-1} F(a, v_h q)` modulo `C_1(T)`.
    fn reduce_basis(&self, r: usize, k: usize, a: usize, x: usize, b: usize, y: usize) -> Result<Arc<CorrelatorCombination>> {
        let key = (r, k, a, x, b, y);
        if let Some(c) = self.memo.read().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let dec = self.left.decompositions(&self.voa, r, a)?[x].clone();
        let u = &self.left.leaves[r];
        let w = &self.right.leaves[k];
        let mut out = CorrelatorCombination::zero();
        let mut q = vec![Rational::zero(); w.dim(b)];
        q[y] = Rational::one();
        for (label, c) in &dec.c1_terms {
            let v = self.voa.basis_state(label.v_weight, label.v_index);
            let mut e = vec![Rational::zero(); u.dim(label.u_level)];
            e[label.u_index] = Rational::one();
            for h in 0..(b + label.v_weight) as i64 {
                let target = b + label.v_weight - h as usize - 1;
                if label.u_level + target >= a + b {
                    return Err(Error::InternalInvariantViolation("left rewriting did not lower the weight".into()));
                }
                let vq = w.state_mode(&v, h, b).mul_vec(&q);
                if vq.iter().all(Zero::is_zero) {
                    continue;
                }
                let sub = self.reduce_vectors(r, k, label.u_level, &e, target, &vq)?;
                out.add_scaled(&sub, c, -h - 1);
            }
        }
        for (i, c) in &dec.complement {
            out.add_scaled(&*self.reduce_right(r, k, *i, b, y)?, c, 0);
        }
        let out = Arc::new(out);
        self.memo.write().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// Right rewriting for a complement vector `p^i`:
    /// `F(p^i, v_{-1}b) = -Σ_{s≥0} binom(-1,s) z^{-1-s} F(v_s p^i, b)` modulo `C_1(T)`.
    fn reduce_right(&self, r: usize, k: usize, i: usize, b: usize, y: usize) -> Result<Arc<CorrelatorCombination>> {
        let key = (r, k, i, b, y);
        if let Some(c) = self.right_memo.read().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let dec = self.right.decompositions(&self.voa, k, b)?[y].clone();
        let u = &self.left.leaves[r];
        let pv = &self.left.basis.vectors[i];
        let mut out = CorrelatorCombination::zero();
        for (label, c) in &dec.c1_terms {
            let v = self.voa.basis_state(label.v_weight, label.v_index);
            let mut e = vec![Rational::zero(); self.right.leaves[k].dim(label.u_level)];
            e[label.u_index] = Rational::one();
            for s in 0..(pv.level + label.v_weight) as i64 {
                let target = pv.level + label.v_weight - s as usize - 1;
                if target + label.u_level >= pv.level + b {
                    return Err(Error::InternalInvariantViolation("right rewriting did not lower the weight".into()));
                }
                let vp = u.state_mode(&v, s, pv.level).mul_vec(&pv.coords);
                if vp.iter().all(Zero::is_zero) {
                    continue;
                }
                let sub = self.reduce_vectors(r, k, target, &vp, label.u_level, &e)?;
                // -binom(-1, s) = (-1)^{s+1}
                let sign = if s % 2 == 0 { -Rational::one() } else { Rational::one() };
                out.add_scaled(&sub, &(c * sign), -1 - s);
            }
        }
        for (j, c) in &dec.complement {
            out.add_term(i, *j, &LaurentPoly::constant(c.clone()));
        }
        let out = Arc::new(out);
        self.right_memo.write().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// Row labels `(i, j)` of the system, `i`-major.
    pub fn labels(&self) -> Vec<(usize, usize)> {
        let n_i = self.left.basis.vectors.len();
        let n_j = self.right.basis.vectors.len();
        (0..n_i).flat_map(|i| (0..n_j).map(move |j| (i, j))).collect()
    }

    /// Assembles `d/dz A = B A` with `A = (F(p^i, q^j))_{(i,j)}` from `L(-1)`-derivatives.
    pub fn assemble_ode(&self) -> Result<OdeSystem> {
        let labels = self.labels();
        let index: HashMap<(usize, usize), usize> = labels.iter().enumerate().map(|(n, l)| (*l, n)).collect();
        let omega = self.voa.conformal_vector();
        let rows: Vec<Result<Vec<(usize, LaurentPoly)>>> = labels
            .par_iter()
            .map(|&(i, j)| {
                let pv = &self.left.basis.vectors[i];
                let qv = &self.right.basis.vectors[j];
                let r = pv.summand;
                let k = qv.summand;
                let derived = self.left.leaves[r].state_mode(&omega, 0, pv.level).mul_vec(&pv.coords);
                let combo = self.reduce_vectors(r, k, pv.level + 1, &derived, qv.level, &qv.coords)?;
                Ok(combo.entries().map(|(l, p)| (index[l], p.clone())).collect())
            })
            .collect();
        let mut entries = BTreeMap::new();
        for (row, cols) in rows.into_iter().enumerate() {
            for (col, p) in cols? {
                entries.insert((row, col), p);
            }
        }
        let levels = labels
            .iter()
            .map(|&(i, j)| self.left.basis.vectors[i].level + self.right.basis.vectors[j].level)
            .collect();
        Ok(OdeSystem::new(labels.len(), labels, entries, levels))
    }

    /// `f_1(U, W) = Σ_{r,k} |I^(r)| |J^(k)|`.
    pub fn fusion_bound(&self) -> FusionBound {
        let mut pairs = Vec::new();
        for r in 0..self.left.leaves.len() {
            for k in 0..self.right.leaves.len() {
                let left = self.left.basis.summand_len(r);
                let right = self.right.basis.summand_len(k);
                pairs.push(PairBound { left_summand: r, right_summand: k, left, right, bound: left * right });
            }
        }
        FusionBound { value: pairs.iter().map(|p| p.bound).sum(), pairs, convention: "dim T/C_1(T) <= value".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairBound {
    pub left_summand: usize,
    pub right_summand: usize,
    pub left: usize,
    pub right: usize,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FusionBound {
    pub value: usize,
    pub pairs: Vec<PairBound>,
    pub convention: String,
}

/// `d/dz A = B A` with Laurent polynomial entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeSystem {
    pub dimension: usize,
    pub labels: Vec<(usize, usize)>,
    entries: BTreeMap<(usize, usize), LaurentPoly>,
    /// Level `lvl(p^i) + lvl(q^j)` of each label; coefficients of the raw system are
    /// homogeneous with respect to it.
    pub levels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OdeEntry {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<LaurentTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OdeJson {
    pub dimension: usize,
    pub labels: Vec<[usize; 2]>,
    pub entries: Vec<OdeEntry>,
    pub pole_order: usize,
}

impl OdeSystem {
    pub fn new(
        dimension: usize,
        labels: Vec<(usize, usize)>,
        entries: BTreeMap<(usize, usize), LaurentPoly>,
        levels: Vec<usize>,
    ) -> Self {
        let entries = entries.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Self { dimension, labels, entries, levels }
    }

    /// A system given directly by its matrix, with trivial labels.
    pub fn from_matrix(rows: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = BTreeMap::new();
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InputShape(format!("row {r} has {} entries, expected {n}", row.len())));
            }
            for (c, p) in row.into_iter().enumerate() {
                entries.insert((r, c), p);
            }
        }
        Ok(Self::new(n, (0..n).map(|i| (i, 0)).collect(), entries, vec![0; n]))
    }

    pub fn entry(&self, row: usize, col: usize) -> LaurentPoly {
        self.entries.get(&(row, col)).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &LaurentPoly)> {
        self.entries.iter()
    }

    /// Order of the pole of `B` at `z = 0` (0 when `B` is holomorphic there).
    pub fn pole_order(&self) -> usize {
        self.entries.values().filter_map(|p| p.min_power()).map(|e| (-e).max(0) as usize).max().unwrap_or(0)
    }

    /// Coefficient matrix of `z^power`.
    pub fn coefficient(&self, power: i64) -> Matrix {
        let mut m = Matrix::zeros(self.dimension, self.dimension);
        for ((r, c), p) in &self.entries {
            let x = p.coeff(power);
            if !x.is_zero() {
                m.set(*r, *c, x);
            }
        }
        m
    }

    pub fn max_power(&self) -> Option<i64> {
        self.entries.values().filter_map(|p| p.max_power()).max()
    }

    /// The system for `z^Λ A` with `Λ = diag(levels)`: `B' = z^Λ B z^{-Λ} + Λ/z`. Because each
    /// raw coefficient is homogeneous of degree `levels[col] - levels[row] - 1`, the balanced
    /// system has at most a simple pole.
    pub fn balanced(&self) -> OdeSystem {
        let mut entries = BTreeMap::new();
        for ((r, c), p) in &self.entries {
            let shift = self.levels[*r] as i64 - self.levels[*c] as i64;
            entries.insert((*r, *c), p.shift(shift));
        }
        for (r, &l) in self.levels.iter().enumerate() {
            if l > 0 {
                let slot: &mut LaurentPoly = entries.entry((r, r)).or_default();
                *slot += &LaurentPoly::monomial(rational_from_i64(l as i64), -1);
            }
        }
        OdeSystem::new(self.dimension, self.labels.clone(), entries, vec![0; self.dimension])
    }

    pub fn to_json(&self) -> OdeJson {
        OdeJson {
            dimension: self.dimension,
            labels: self.labels.iter().map(|&(i, j)| [i, j]).collect(),
            entries: self
                .entries
                .iter()
                .map(|((row, col), p)| OdeEntry { row: *row, col: *col, terms: p.serialize_terms() })
                .collect(),
            pole_order: self.pole_order(),
        }
    }

    /// True when no entry couples rows from different blocks.
    pub fn is_block_diagonal(&self, blocks: &[usize]) -> bool {
        self.entries.keys().all(|(r, c)| blocks[*r] == blocks[*c])
    }
}

/// Convenience: `reduce(p, q)` with complements built at `depth`.
pub fn reduce(
    voa: &Voa,
    u: &Arc<RealizedModule>,
    w: &Arc<RealizedModule>,
    depth: usize,
    p: (usize, &[Rational]),
    q: (usize, &[Rational]),
) -> Result<CorrelatorCombination> {
    Reducer::with_depth(voa, u, w, depth)?.reduce(p.0, p.1, q.0, q.1)
}

pub fn fusion_bound(voa: &Voa, u: &Arc<RealizedModule>, w: &Arc<RealizedModule>, depth: usize) -> Result<FusionBound> {
    Ok(Reducer::with_depth(voa, u, w, depth)?.fusion_bound())
}
