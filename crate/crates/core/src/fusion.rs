//! Truncated intertwining-operator data: the explicit free-boson intertwiner, joins of
//! finitely many such data, the order relation between them, and target-side checks.
//!
//! A datum records, for source basis vectors `u ∈ U_(i)`, `w ∈ W_(j)` with `i + j <= depth`,
//! the coefficient of `Y(u,z)w` in each target weight `r`; the matching power of `z` is
//! `r - wt(u) - wt(w)`. The target is the span of these coefficients inside an ambient
//! product of realized modules.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::rational::is_integer_nonneg;
use crate::exact::{binomial, rational_from_i64, Matrix, Rational};
use crate::voa::ambient::{add_into, fock_apply, Combo};
use crate::voa::{partitions, ModuleSpec, Partition, RealizedModule, State, SuiteReport, Voa};

/// Basis vector `idx` of level `level` of a (possibly direct-sum) source module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceIndex {
    pub level: usize,
    pub index: usize,
}

type Coefficients = BTreeMap<(SourceIndex, SourceIndex), BTreeMap<(Rational, usize), Vec<Rational>>>;

#[derive(Clone, Debug)]
pub struct IntertwinerData {
    voa: Voa,
    left: Arc<RealizedModule>,
    right: Arc<RealizedModule>,
    factors: Vec<Arc<RealizedModule>>,
    depth: usize,
    log_cap: usize,
    coefficients: Coefficients,
}

/// `Y(u,z)w = z^{λμ} Σ_t z^{t-i-j} X_t` for Fock monomials `u`, `w`; stores `X_0, ..., X_depth`.
struct FreeBoson {
    lambda: Rational,
    mu: Rational,
    depth: usize,
    memo: HashMap<(Partition, Partition), Arc<Vec<Combo>>>,
}

impl FreeBoson {
    fn new(lambda: Rational, mu: Rational, depth: usize) -> Self {
        Self { lambda, mu, depth, memo: HashMap::new() }
    }

    fn by_level(&self, combo: Combo) -> Vec<Combo> {
        let mut out = vec![Combo::new(); self.depth + 1];
        for (p, c) in combo {
            if p.size() <= self.depth {
                add_into(&mut out[p.size()], p, c);
            }
        }
        out
    }

    /// `E^-(λ,z) E^+(λ,z) w` with `E^±` the exponentials of `∓λ Σ_{n>0} a_{±n} z^{∓n}/n`.
    fn vertex(&self, w: &Partition) -> Vec<Combo> {
        let lambda = &self.lambda;
        let mut lowered = Combo::new();
        lowered.insert(w.clone(), Rational::one());
        let mut term = lowered.clone();
        for k in 1..=w.size() {
            let mut next = Combo::new();
            for (p, c) in &term {
                for n in 1..=p.size() as i64 {
                    let f = -(lambda / rational_from_i64(n)) / rational_from_i64(k as i64);
                    for (q, x) in fock_apply(lambda, n, p) {
                        add_into(&mut next, q, c * &f * x);
                    }
                }
            }
            for (p, c) in &next {
                add_into(&mut lowered, p.clone(), c.clone());
            }
            term = next;
        }
        let mut raised = lowered.clone();
        let mut term = lowered;
        for k in 1..=self.depth {
            let mut next = Combo::new();
            for (p, c) in &term {
                for n in 1..=(self.depth - p.size().min(self.depth)) as i64 {
                    let f = (lambda / rational_from_i64(n)) / rational_from_i64(k as i64);
                    add_into(&mut next, p.with_part(n as u32), c * f);
                }
            }
            for (p, c) in &next {
                add_into(&mut raised, p.clone(), c.clone());
            }
            term = next;
        }
        self.by_level(raised)
    }

    /// Uses `Y(a_{-n}u', z) = :∂^{(n-1)}a(z) Y(u',z):`, the normal ordering moving
    /// `a_m`, `m >= 0`, to the right where it acts on `w`.
    fn corr(&mut self, u: &Partition, w: &Partition) -> Arc<Vec<Combo>> {
        let key = (u.clone(), w.clone());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let result = match u.parts().split_first() {
            None => self.vertex(w),
            Some((&n, rest)) => {
                let tail = Partition(rest.to_vec());
                let mut out = vec![Combo::new(); self.depth + 1];
                let inner = self.corr(&tail, w);
                for (t, x) in inner.iter().enumerate() {
                    for raise in 1..=(self.depth - t) as i64 {
                        let c = binomial(raise - 1, n - 1);
                        if c.is_zero() {
                            continue;
                        }
                        for (p, y) in x {
                            add_into(&mut out[t + raise as usize], p.with_part(raise as u32), &c * y);
                        }
                    }
                }
                for m in 0..=w.size() as i64 {
                    let c = binomial(-m - 1, n - 1);
                    for (w2, y) in fock_apply(&self.mu, m, w) {
                        let sub = self.corr(&tail, &w2);
                        for (t, x) in sub.iter().enumerate() {
                            for (p, z) in x {
                                add_into(&mut out[t], p.clone(), &c * &y * z);
                            }
                        }
                    }
                }
                out
            }
        };
        let result = Arc::new(result);
        self.memo.insert(key, result.clone());
        result
    }
}

/// Order relation outcome between two data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    LessEq(Witness),
    GreaterEq(Witness),
    Equivalent { forward: Witness, backward: Witness },
    Incomparable,
}

impl Comparison {
    pub fn label(&self) -> &'static str {
        match self {
            Comparison::LessEq(_) => "LessEq",
            Comparison::GreaterEq(_) => "GreaterEq",
            Comparison::Equivalent { .. } => "Equivalent",
            Comparison::Incomparable => "Incomparable",
        }
    }

    /// `p1 <= p2`, counting equivalence.
    pub fn is_le(&self) -> bool {
        matches!(self, Comparison::LessEq(_) | Comparison::Equivalent { .. })
    }
}

/// A module map `f` between targets with `f ∘ Y_source = Y_target`, given per weight by its
/// values on a basis of the source target space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub pieces: Vec<WitnessPiece>,
    /// The constrained linear system for `f` has trivial kernel.
    pub unique: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessPiece {
    #[serde(serialize_with = "crate::exact::serialize_rational")]
    pub weight: Rational,
    #[serde(serialize_with = "serialize_vectors")]
    pub basis: Vec<Vec<Rational>>,
    #[serde(serialize_with = "serialize_vectors")]
    pub images: Vec<Vec<Rational>>,
}

fn serialize_vectors<S: serde::Serializer>(v: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientJson {
    pub u: SourceIndex,
    pub w: SourceIndex,
    pub weight: String,
    pub log: usize,
    pub vector: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntertwinerJson {
    pub left: String,
    pub right: String,
    pub factors: Vec<String>,
    pub depth: usize,
    pub log_cap: usize,
    pub cutoff: Option<String>,
    pub target_dims: Vec<(String, usize)>,
    pub coefficients: Vec<CoefficientJson>,
}

fn locate(module: &RealizedModule, level: usize, index: usize) -> (usize, usize) {
    let off = module.block_offsets(level);
    let s = (0..off.len() - 1).find(|&s| index < off[s + 1]).expect("index within level");
    (s, index - off[s])
}

impl IntertwinerData {
    /// Intertwiners among Fock modules (or direct sums of them): each coupling `(r, k, c)` adds
    /// `c` times the free-boson intertwiner `Fock(λ_r) ⊗ Fock(μ_k) → Fock(λ_r + μ_k)` as a
    /// separate target factor.
    pub fn free_boson(
        voa: &Voa,
        left: &Arc<RealizedModule>,
        right: &Arc<RealizedModule>,
        couplings: &[(usize, usize, Rational)],
        depth: usize,
    ) -> Result<Self> {
        if !voa.spec().is_heisenberg() {
            return Err(Error::InvalidSpec("free-boson intertwiners need the Heisenberg algebra".into()));
        }
        let charges = |m: &Arc<RealizedModule>| -> Result<Vec<Rational>> {
            m.summands()
                .iter()
                .map(|s| {
                    s.fock_charge().ok_or_else(|| Error::InvalidSpec(format!("{}: not a Fock module", s.spec())))
                })
                .collect()
        };
        let lambdas = charges(left)?;
        let mus = charges(right)?;
        let mut factors = Vec::new();
        let mut bosons = Vec::new();
        for (r, k, _) in couplings {
            let (Some(l), Some(m)) = (lambdas.get(*r), mus.get(*k)) else {
                return Err(Error::InputShape(format!("coupling ({r}, {k}) refers to a missing summand")));
            };
            let spec = ModuleSpec::fock(voa.spec(), l + m, depth);
            factors.push(RealizedModule::new(&spec)?);
            bosons.push(FreeBoson::new(l.clone(), m.clone(), depth));
        }
        let mut data = Self {
            voa: voa.clone(),
            left: left.clone(),
            right: right.clone(),
            factors,
            depth,
            log_cap: 0,
            coefficients: Coefficients::new(),
        };
        let lw: Vec<Rational> = data.factors.iter().map(|f| f.lowest_weight().unwrap()).collect();
        for i in 0..=depth {
            for j in 0..=depth - i {
                for ui in 0..left.dim(i) {
                    let (ru, lu) = locate(left, i, ui);
                    let u_word = left.summands()[ru].basis_word(i, lu).unwrap();
                    for wi in 0..right.dim(j) {
                        let (kw, lwi) = locate(right, j, wi);
                        let w_word = right.summands()[kw].basis_word(j, lwi).unwrap();
                        let key = (SourceIndex { level: i, index: ui }, SourceIndex { level: j, index: wi });
                        for (f, (r, k, scale)) in couplings.iter().enumerate() {
                            if (*r, *k) != (ru, kw) {
                                continue;
                            }
                            let xs = bosons[f].corr(&u_word, &w_word);
                            for (t, x) in xs.iter().enumerate() {
                                if x.is_empty() {
                                    continue;
                                }
                                let weight = &lw[f] + rational_from_i64(t as i64);
                                let Some(pieces) = data.piece(&weight) else { continue };
                                let (_, _, offset, dim) = *pieces.iter().find(|p| p.0 == f).unwrap();
                                let total = pieces.iter().map(|p| p.3).sum();
                                let index: HashMap<Partition, usize> =
                                    partitions(t, 1).into_iter().enumerate().map(|(a, p)| (p, a)).collect();
                                let slot = data
                                    .coefficients
                                    .entry(key)
                                    .or_default()
                                    .entry((weight, 0))
                                    .or_insert_with(|| vec![Rational::zero(); total]);
                                debug_assert_eq!(index.len(), dim);
                                for (p, c) in x {
                                    slot[offset + index[p]] += c * scale;
                                }
                            }
                        }
                    }
                }
            }
        }
        data.prune();
        Ok(data)
    }

    /// The standard free-boson intertwiner `Fock(λ) ⊗ Fock(μ) → Fock(λ+μ)`.
    pub fn heisenberg(voa: &Voa, lambda: Rational, mu: Rational, depth: usize) -> Result<Self> {
        let left = RealizedModule::new(&ModuleSpec::fock(voa.spec(), lambda, depth))?;
        let right = RealizedModule::new(&ModuleSpec::fock(voa.spec(), mu, depth))?;
        Self::free_boson(voa, &left, &right, &[(0, 0, Rational::one())], depth)
    }

    /// Data with the zero target.
    pub fn zero(voa: &Voa, left: &Arc<RealizedModule>, right: &Arc<RealizedModule>, depth: usize) -> Self {
        Self {
            voa: voa.clone(),
            left: left.clone(),
            right: right.clone(),
            factors: Vec::new(),
            depth,
            log_cap: 0,
            coefficients: Coefficients::new(),
        }
    }

    pub fn left(&self) -> &Arc<RealizedModule> {
        &self.left
    }

    pub fn right(&self) -> &Arc<RealizedModule> {
        &self.right
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn factors(&self) -> &[Arc<RealizedModule>] {
        &self.factors
    }

    /// Highest target weight at which every factor is fully realized.
    pub fn cutoff(&self) -> Option<Rational> {
        self.factors
            .iter()
            .map(|f| f.lowest_weight().unwrap() + rational_from_i64(f.depth() as i64))
            .min()
    }

    /// Ambient layout at weight `r`: `(factor, level, offset, dim)` per contributing factor;
    /// `None` above the cutoff.
    fn piece(&self, r: &Rational) -> Option<Vec<(usize, usize, usize, usize)>> {
        if self.cutoff().is_some_and(|c| *r > c) {
            return None;
        }
        let mut out = Vec::new();
        let mut offset = 0;
        for (f, m) in self.factors.iter().enumerate() {
            if let Some(level) = is_integer_nonneg(&(r - m.lowest_weight().unwrap())) {
                if level <= m.depth() {
                    let dim = m.dim(level);
                    out.push((f, level, offset, dim));
                    offset += dim;
                }
            }
        }
        Some(out)
    }

    fn ambient_dim(&self, r: &Rational) -> usize {
        self.piece(r).map_or(0, |p| p.iter().map(|x| x.3).sum())
    }

    fn prune(&mut self) {
        let cutoff = self.cutoff();
        for per in self.coefficients.values_mut() {
            per.retain(|(r, _), v| cutoff.as_ref().map_or(false, |c| r <= c) && v.iter().any(|x| !x.is_zero()));
        }
        self.coefficients.retain(|_, per| !per.is_empty());
    }

    /// Realized target weights, in increasing order.
    pub fn weights(&self) -> Vec<Rational> {
        let set: BTreeSet<Rational> =
            self.coefficients.values().flat_map(|per| per.keys().map(|(r, _)| r.clone())).collect();
        set.into_iter().collect()
    }

    fn coefficient_vectors(&self, r: &Rational) -> Vec<Vec<Rational>> {
        self.coefficients
            .values()
            .flat_map(|per| per.iter().filter(|((w, _), _)| w == r).map(|(_, v)| v.clone()))
            .collect()
    }

    pub fn target_basis(&self, r: &Rational) -> Vec<Vec<Rational>> {
        let ech = Matrix::from_rows(self.ambient_dim(r), self.coefficient_vectors(r)).rref();
        (0..ech.rank()).map(|i| ech.basis.row(i).to_vec()).collect()
    }

    pub fn target_dims(&self) -> Vec<(Rational, usize)> {
        self.weights().into_iter().map(|r| (r.clone(), self.target_basis(&r).len())).collect()
    }

    /// The datum with every coefficient multiplied by `c`.
    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        for per in out.coefficients.values_mut() {
            for v in per.values_mut() {
                for x in v.iter_mut() {
                    *x *= c;
                }
            }
        }
        out.prune();
        out
    }

    fn check_same_sources(&self, other: &Self) -> Result<()> {
        if self.left.spec() != other.left.spec() || self.right.spec() != other.right.spec() || self.depth != other.depth {
            return Err(Error::InputShape("intertwiner data have different source pairs or depths".into()));
        }
        Ok(())
    }

    /// `Y(u,z)w = (Y_1(u,z)w, Y_2(u,z)w)` with target the span of paired coefficients.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.check_same_sources(other)?;
        let mut out = Self {
            voa: self.voa.clone(),
            left: self.left.clone(),
            right: self.right.clone(),
            factors: self.factors.iter().chain(&other.factors).cloned().collect(),
            depth: self.depth,
            log_cap: self.log_cap.max(other.log_cap),
            coefficients: Coefficients::new(),
        };
        let keys: BTreeSet<(SourceIndex, SourceIndex)> =
            self.coefficients.keys().chain(other.coefficients.keys()).copied().collect();
        for key in keys {
            let empty = BTreeMap::new();
            let a = self.coefficients.get(&key).unwrap_or(&empty);
            let b = other.coefficients.get(&key).unwrap_or(&empty);
            let tags: BTreeSet<(Rational, usize)> = a.keys().chain(b.keys()).cloned().collect();
            for tag in tags {
                if out.piece(&tag.0).is_none() {
                    continue;
                }
                let mut v = a.get(&tag).cloned().unwrap_or_else(|| vec![Rational::zero(); self.ambient_dim(&tag.0)]);
                v.extend(b.get(&tag).cloned().unwrap_or_else(|| vec![Rational::zero(); other.ambient_dim(&tag.0)]));
                out.coefficients.entry(key).or_default().insert(tag, v);
            }
        }
        out.prune();
        Ok(out)
    }

    /// `v_k` applied to an ambient vector at weight `r`; `None` when the image leaves the
    /// realized window.
    fn apply_mode(&self, v: &State, k: i64, r: &Rational, x: &[Rational]) -> Option<(Rational, Vec<Rational>)> {
        let shift = v.weight as i64 - k - 1;
        let target = r + rational_from_i64(shift);
        let out_piece = self.piece(&target)?;
        let in_piece = self.piece(r)?;
        let mut out = vec![Rational::zero(); out_piece.iter().map(|p| p.3).sum()];
        for &(f, level, offset, dim) in &in_piece {
            let block = &x[offset..offset + dim];
            if block.iter().all(Zero::is_zero) {
                continue;
            }
            let new_level = level as i64 + shift;
            if new_level < 0 {
                continue;
            }
            let &(_, _, o2, _) = out_piece.iter().find(|p| p.0 == f)?;
            let image = self.factors[f].state_mode(v, k, level).mul_vec(block);
            for (a, y) in image.into_iter().enumerate() {
                out[o2 + a] += y;
            }
        }
        Some((target, out))
    }

    /// Spanning vectors of `C_1(T)` at weight `r`.
    fn c1_rows(&self, r: &Rational) -> Result<Vec<Vec<Rational>>> {
        let mut rows = Vec::new();
        let lowest = self.weights().into_iter().next();
        let Some(lowest) = lowest else { return Ok(rows) };
        let span = r - &lowest;
        let max_wt = span.floor().to_integer().try_into().unwrap_or(0usize);
        if max_wt > self.voa.depth() {
            return Err(Error::Truncation(format!(
                "C_1 of the target at weight {r} needs V up to weight {max_wt}, beyond depth {}",
                self.voa.depth()
            )));
        }
        for wt in 1..=max_wt {
            let source = r - rational_from_i64(wt as i64);
            let basis = self.target_basis(&source);
            for vi in 0..self.voa.dim(wt) {
                let v = self.voa.basis_state(wt, vi);
                for x in &basis {
                    if let Some((_, y)) = self.apply_mode(&v, -1, &source, x) {
                        rows.push(y);
                    }
                }
            }
        }
        Ok(rows)
    }

    /// `dim T/C_1(T)` summed over realized weights, computed as `dim (T + C_1)/C_1`.
    pub fn c1_quotient_dim(&self) -> Result<usize> {
        let mut total = 0;
        for r in self.weights() {
            let dim = self.ambient_dim(&r);
            let c1 = self.c1_rows(&r)?;
            let mut both = c1.clone();
            both.extend(self.target_basis(&r));
            total += Matrix::from_rows(dim, both).rank() - Matrix::from_rows(dim, c1).rank();
        }
        Ok(total)
    }

    /// Functionals `θ` on the ambient piece at each weight vanishing on `C_1(T)` there.
    pub fn annihilators(&self) -> Result<Vec<(Rational, Vec<Rational>)>> {
        let mut out = Vec::new();
        for r in self.weights() {
            let dim = self.ambient_dim(&r);
            let rows = self.c1_rows(&r)?;
            let basis = if rows.is_empty() {
                (0..dim)
                    .map(|i| {
                        let mut e = vec![Rational::zero(); dim];
                        e[i] = Rational::one();
                        e
                    })
                    .collect()
            } else {
                Matrix::from_rows(dim, rows).nullspace()
            };
            out.extend(basis.into_iter().map(|t| (r.clone(), t)));
        }
        Ok(out)
    }

    /// Coefficient of `Y(u,z)w` at target weight `r` for homogeneous source vectors; `None` when
    /// the pair lies beyond the recorded levels.
    pub fn coefficient(&self, u: (usize, &[Rational]), w: (usize, &[Rational]), r: &Rational) -> Option<Vec<Rational>> {
        if u.0 + w.0 > self.depth {
            return None;
        }
        let piece = self.piece(r)?;
        let mut out = vec![Rational::zero(); piece.iter().map(|p| p.3).sum()];
        for (ui, cu) in u.1.iter().enumerate() {
            if cu.is_zero() {
                continue;
            }
            for (wi, cw) in w.1.iter().enumerate() {
                if cw.is_zero() {
                    continue;
                }
                let key = (SourceIndex { level: u.0, index: ui }, SourceIndex { level: w.0, index: wi });
                if let Some(v) = self.coefficients.get(&key).and_then(|per| per.get(&(r.clone(), 0))) {
                    let c = cu * cw;
                    for (a, x) in v.iter().enumerate() {
                        out[a] += &c * x;
                    }
                }
            }
        }
        Some(out)
    }

    /// `<θ, Y(u,z)w>` for `θ` homogeneous of weight `r`: the pair `(power of z, coefficient)`.
    pub fn correlator(
        &self,
        theta: (&Rational, &[Rational]),
        u: (usize, &[Rational]),
        w: (usize, &[Rational]),
    ) -> Option<(Rational, Rational)> {
        let coef = self.coefficient(u, w, theta.0)?;
        let value = theta.1.iter().zip(&coef).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
        let wt_u = self.left_weight(u.0, u.1)?;
        let wt_w = self.right_weight(w.0, w.1)?;
        Some((theta.0 - wt_u - wt_w, value))
    }

    fn homogeneous_weight(module: &Arc<RealizedModule>, level: usize, coords: &[Rational]) -> Option<Rational> {
        let off = module.block_offsets(level);
        let summands: Vec<Rational> = module.summands().iter().map(|s| s.lowest_weight().unwrap()).collect();
        let mut weight: Option<Rational> = None;
        for (s, w) in off.windows(2).enumerate() {
            if coords[w[0]..w[1]].iter().any(|x| !x.is_zero()) {
                let wt = summands[s].clone() + rational_from_i64(level as i64);
                match &weight {
                    Some(x) if *x != wt => return None,
                    _ => weight = Some(wt),
                }
            }
        }
        weight.or_else(|| summands.first().map(|l| l + rational_from_i64(level as i64)))
    }

    fn left_weight(&self, level: usize, coords: &[Rational]) -> Option<Rational> {
        Self::homogeneous_weight(&self.left, level, coords)
    }

    fn right_weight(&self, level: usize, coords: &[Rational]) -> Option<Rational> {
        Self::homogeneous_weight(&self.right, level, coords)
    }

    /// Looks for `f: T_src → T_dst` with `f ∘ Y_src = Y_dst`, verifying that it commutes with
    /// every realized generator mode.
    fn map_between(src: &Self, dst: &Self) -> Option<Witness> {
        let weights: BTreeSet<Rational> = src.weights().into_iter().chain(dst.weights()).collect();
        let gen = src.voa.generator();
        let mut pieces = Vec::new();
        let mut unique = true;
        let mut maps: BTreeMap<Rational, (Vec<Vec<Rational>>, Vec<Vec<Rational>>)> = BTreeMap::new();
        for r in weights {
            if src.piece(&r).is_none() || dst.piece(&r).is_none() {
                continue;
            }
            let keys: BTreeSet<(SourceIndex, SourceIndex)> =
                src.coefficients.keys().chain(dst.coefficients.keys()).copied().collect();
            let (ds, dd) = (src.ambient_dim(&r), dst.ambient_dim(&r));
            let mut s_cols = Vec::new();
            let mut d_cols = Vec::new();
            for key in keys {
                let get = |x: &Self, dim: usize| {
                    x.coefficients
                        .get(&key)
                        .and_then(|per| per.get(&(r.clone(), 0)))
                        .cloned()
                        .unwrap_or_else(|| vec![Rational::zero(); dim])
                };
                let s = get(src, ds);
                let d = get(dst, dd);
                if s.iter().all(Zero::is_zero) && d.iter().all(Zero::is_zero) {
                    continue;
                }
                s_cols.push(s);
                d_cols.push(d);
            }
            let ech = Matrix::from_columns(ds, &s_cols).rref();
            let basis_idx = ech.pivots.clone();
            let basis: Vec<Vec<Rational>> = basis_idx.iter().map(|&i| s_cols[i].clone()).collect();
            let images: Vec<Vec<Rational>> = basis_idx.iter().map(|&i| d_cols[i].clone()).collect();
            // each coefficient, written in the basis, must map to the matching coefficient
            for (k, d) in d_cols.iter().enumerate() {
                let mut predicted = vec![Rational::zero(); dd];
                for (row, _) in basis_idx.iter().enumerate() {
                    let alpha = ech.basis.get(row, k);
                    if alpha.is_zero() {
                        continue;
                    }
                    for (a, y) in images[row].iter().enumerate() {
                        predicted[a] += alpha * y;
                    }
                }
                if predicted != *d {
                    return None;
                }
            }
            let alphas = Matrix::from_columns(basis_idx.len(), &(0..s_cols.len()).map(|k| {
                (0..basis_idx.len()).map(|row| ech.basis.get(row, k).clone()).collect::<Vec<_>>()
            }).collect::<Vec<_>>());
            unique &= alphas.rank() == basis_idx.len();
            maps.insert(r.clone(), (basis.clone(), images.clone()));
            pieces.push(WitnessPiece { weight: r, basis, images });
        }
        // module map: f(g_k x) = g_k f(x) for the generator modes within the window
        for (r, (basis, images)) in &maps {
            let lowest = src.weights().into_iter().next().unwrap_or_else(|| r.clone());
            let Some(cut) = src.cutoff().into_iter().chain(dst.cutoff()).min() else { continue };
            let down: i64 = (r - &lowest).floor().to_integer().try_into().unwrap_or(0);
            let up: i64 = (&cut - r).floor().to_integer().try_into().unwrap_or(0);
            for shift in -up..=down {
                let k = gen.weight as i64 - 1 + shift;
                for (x, fx) in basis.iter().zip(images) {
                    let Some((r2, gx)) = src.apply_mode(&gen, k, r, x) else { continue };
                    let Some((_, gfx)) = dst.apply_mode(&gen, k, r, fx) else { continue };
                    let f_gx = match maps.get(&r2) {
                        Some((b2, i2)) => {
                            let m = Matrix::from_columns(gx.len(), b2);
                            let Some(alpha) = m.solve(&gx) else { return None };
                            let mut out = vec![Rational::zero(); gfx.len()];
                            for (a, img) in alpha.iter().zip(i2) {
                                for (o, y) in out.iter_mut().zip(img) {
                                    *o += a * y;
                                }
                            }
                            out
                        }
                        None if gx.iter().all(Zero::is_zero) => vec![Rational::zero(); gfx.len()],
                        None => return None,
                    };
                    if f_gx != gfx {
                        return None;
                    }
                }
            }
        }
        Some(Witness { pieces, unique })
    }

    pub fn compare(&self, other: &Self) -> Result<Comparison> {
        self.check_same_sources(other)?;
        let le = Self::map_between(other, self);
        let ge = Self::map_between(self, other);
        Ok(match (le, ge) {
            (Some(f), Some(g)) => Comparison::Equivalent { forward: f, backward: g },
            (Some(f), None) => Comparison::LessEq(f),
            (None, Some(g)) => Comparison::GreaterEq(g),
            (None, None) => Comparison::Incomparable,
        })
    }

    /// Every realized target weight lies in `∪ (a_i + N)`.
    pub fn weight_support_check(&self, reference: &[Rational]) -> bool {
        self.target_dims()
            .iter()
            .filter(|(_, d)| *d > 0)
            .all(|(r, _)| reference.iter().any(|a| is_integer_nonneg(&(r - a)).is_some()))
    }

    /// Commutator compatibility `[v_n, Y(u,z)] w = Σ_i binom(n,i) z^{n-i} Y(v_i u, z) w` for the
    /// strong generator `v`, `|n| <= 2`, on all recorded basis pairs and weights.
    pub fn check_compatibility(&self) -> SuiteReport {
        let mut rep = SuiteReport::default();
        let v = self.voa.generator();
        let wt_v = v.weight as i64;
        for n in -2i64..=2 {
            for i in 0..=self.depth {
                for j in 0..=self.depth - i {
                    for ui in 0..self.left.dim(i) {
                        for wi in 0..self.right.dim(j) {
                            let mut u = vec![Rational::zero(); self.left.dim(i)];
                            u[ui] = Rational::one();
                            let mut w = vec![Rational::zero(); self.right.dim(j)];
                            w[wi] = Rational::one();
                            for r in self.weights() {
                                match self.compatibility_at(&v, wt_v, n, (i, &u), (j, &w), &r) {
                                    Some(true) => rep.passed += 1,
                                    Some(false) => {
                                        rep.failed += 1;
                                        rep.failures.push(format!("n={n} u=({i},{ui}) w=({j},{wi}) weight={r}"));
                                    }
                                    None => rep.truncated += 1,
                                }
                            }
                        }
                    }
                }
            }
        }
        rep
    }

    fn compatibility_at(
        &self,
        v: &State,
        wt_v: i64,
        n: i64,
        u: (usize, &[Rational]),
        w: (usize, &[Rational]),
        r: &Rational,
    ) -> Option<bool> {
        let shift = wt_v - n - 1;
        let r_src = r - rational_from_i64(shift);
        let dim = self.ambient_dim(r);
        self.piece(r)?;
        let mut lhs = vec![Rational::zero(); dim];
        self.piece(&r_src)?;
        {
            let before = self.coefficient(u, w, &r_src)?;
            if before.iter().any(|x| !x.is_zero()) {
                let (_, moved) = self.apply_mode(v, n, &r_src, &before)?;
                lhs = moved;
            }
        }
        let w_level = w.0 as i64 + shift;
        if w_level >= 0 {
            if w_level as usize > self.right.depth() {
                return None;
            }
            let vw = self.right.state_mode(v, n, w.0).mul_vec(w.1);
            let term = self.coefficient(u, (w_level as usize, &vw), r)?;
            for (a, b) in lhs.iter_mut().zip(term) {
                *a -= b;
            }
        }
        let mut rhs = vec![Rational::zero(); dim];
        for i in 0..=(u.0 as i64 + wt_v - 1).max(0) {
            let c = binomial(n, i as u32);
            let level = u.0 as i64 + wt_v - i - 1;
            if c.is_zero() || level < 0 {
                continue;
            }
            if level as usize > self.left.depth() {
                return None;
            }
            let vu = self.left.state_mode(v, i, u.0).mul_vec(u.1);
            let term = self.coefficient((level as usize, &vu), w, r)?;
            for (a, b) in rhs.iter_mut().zip(term) {
                *a += &c * b;
            }
        }
        Some(lhs == rhs)
    }

    pub fn to_json(&self) -> IntertwinerJson {
        let mut coefficients = Vec::new();
        for ((u, w), per) in &self.coefficients {
            for ((r, log), v) in per {
                coefficients.push(CoefficientJson {
                    u: *u,
                    w: *w,
                    weight: r.to_string(),
                    log: *log,
                    vector: v.iter().map(|x| x.to_string()).collect(),
                });
            }
        }
        IntertwinerJson {
            left: self.left.spec().to_string(),
            right: self.right.spec().to_string(),
            factors: self.factors.iter().map(|f| f.spec().to_string()).collect(),
            depth: self.depth,
            log_cap: self.log_cap,
            cutoff: self.cutoff().map(|c| c.to_string()),
            target_dims: self.target_dims().into_iter().map(|(r, d)| (r.to_string(), d)).collect(),
            coefficients,
        }
    }
}
