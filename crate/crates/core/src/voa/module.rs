//! Lazily realized N-graded modules with exact generator and vertex-operator mode matrices.
//!
//! Levels are built on demand and memoized, so internal computations may look above the
//! declared truncation depth; the depth only bounds what the public operations report.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Signed, Zero};

use super::ambient::{add_into, fock_apply, fock_word_mode, Combo, VirasoroAmbient};
use super::partition::{partitions, Partition};
use super::spec::{ModuleKind, ModuleSpec, SingularVector, VoaKind};
use super::state::State;
use crate::error::{Error, Result};
use crate::exact::{binomial, rational_from_i64, Matrix, Rational, RowEchelon};

enum Family {
    Fock { charge: Rational },
    Virasoro(VirasoroAmbient),
}

struct LevelData {
    ambient: Vec<Partition>,
    index: HashMap<Partition, usize>,
    submodule: Option<RowEchelon>,
    kept: Vec<usize>,
}

struct Leaf {
    family: Family,
    lowest_weight: Rational,
    min_part: u32,
    singular: Vec<SingularVector>,
    levels: RwLock<BTreeMap<usize, Arc<LevelData>>>,
}

enum Body {
    Leaf(Leaf),
    Sum(Vec<Arc<RealizedModule>>),
}

type ModeKey = (Partition, i64, usize);

/// A module `M = ⊕_n M_(n)` realized with explicit bases per level.
pub struct RealizedModule {
    spec: ModuleSpec,
    body: Body,
    generators: RwLock<HashMap<(i64, usize), Arc<Matrix>>>,
    word_modes: RwLock<HashMap<ModeKey, Arc<Matrix>>>,
}

impl std::fmt::Debug for RealizedModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RealizedModule({})", self.spec)
    }
}

impl RealizedModule {
    pub fn new(spec: &ModuleSpec) -> Result<Arc<Self>> {
        let parent = &spec.parent;
        let virasoro = |h: Rational, vacuum: bool| -> Result<Family> {
            match &parent.kind {
                VoaKind::Heisenberg => {
                    Err(Error::InvalidSpec(format!("{spec}: Virasoro modules need a Virasoro parent")))
                }
                VoaKind::VirasoroUniversal { central_charge } | VoaKind::VirasoroQuotient { central_charge, .. } => {
                    Ok(Family::Virasoro(VirasoroAmbient::new(central_charge.clone(), h, vacuum)))
                }
            }
        };
        let leaf = |family: Family, lowest_weight: Rational, singular: Vec<SingularVector>| {
            let min_part = match &family {
                Family::Fock { .. } => 1,
                Family::Virasoro(a) => a.min_part(),
            };
            Leaf { family, lowest_weight, min_part, singular, levels: RwLock::new(BTreeMap::new()) }
        };
        let body = match &spec.kind {
            ModuleKind::Fock { charge } => {
                if !parent.is_heisenberg() {
                    return Err(Error::InvalidSpec(format!("{spec}: Fock modules need a Heisenberg parent")));
                }
                let weight = charge * charge / rational_from_i64(2);
                Body::Leaf(leaf(Family::Fock { charge: charge.clone() }, weight, Vec::new()))
            }
            ModuleKind::Verma { highest_weight } => {
                Body::Leaf(leaf(virasoro(highest_weight.clone(), false)?, highest_weight.clone(), Vec::new()))
            }
            ModuleKind::Quotient { highest_weight, singular } => Body::Leaf(leaf(
                virasoro(highest_weight.clone(), false)?,
                highest_weight.clone(),
                singular.clone(),
            )),
            ModuleKind::Adjoint => match &parent.kind {
                VoaKind::Heisenberg => {
                    Body::Leaf(leaf(Family::Fock { charge: Rational::zero() }, Rational::zero(), Vec::new()))
                }
                VoaKind::VirasoroUniversal { .. } => {
                    Body::Leaf(leaf(virasoro(Rational::zero(), true)?, Rational::zero(), Vec::new()))
                }
                VoaKind::VirasoroQuotient { singular, .. } => {
                    Body::Leaf(leaf(virasoro(Rational::zero(), true)?, Rational::zero(), singular.clone()))
                }
            },
            ModuleKind::DirectSum(summands) => {
                let mut parts = Vec::new();
                for s in summands {
                    if s.parent != *parent {
                        return Err(Error::InvalidSpec(format!("{s}: summand has a different parent algebra")));
                    }
                    let m = RealizedModule::new(&ModuleSpec { depth: spec.depth, ..s.clone() })?;
                    match &m.body {
                        Body::Sum(inner) => parts.extend(inner.iter().cloned()),
                        Body::Leaf(_) => parts.push(m),
                    }
                }
                Body::Sum(parts)
            }
        };
        let module = Self {
            spec: spec.clone(),
            body,
            generators: RwLock::new(HashMap::new()),
            word_modes: RwLock::new(HashMap::new()),
        };
        if let Body::Leaf(leaf) = &module.body {
            if !leaf.singular.is_empty() {
                module.validate_singular(leaf)?;
            }
        }
        Ok(Arc::new(module))
    }

    fn validate_singular(&self, leaf: &Leaf) -> Result<()> {
        let Family::Virasoro(amb) = &leaf.family else {
            return Err(Error::InvalidSpec("singular vectors are only supported for Virasoro modules".into()));
        };
        for (k, s) in leaf.singular.iter().enumerate() {
            let basis = partitions(s.level, leaf.min_part);
            if s.level == 0 || s.coefficients.len() != basis.len() {
                return Err(Error::InvalidSpec(format!(
                    "singular vector {k}: level {} has {} PBW monomials but {} coefficients were given",
                    s.level,
                    basis.len(),
                    s.coefficients.len()
                )));
            }
            if s.coefficients.iter().all(Zero::is_zero) {
                return Err(Error::InvalidSpec(format!("singular vector {k} is zero")));
            }
            let combo = to_combo(&basis, &s.coefficients);
            for j in [1, 2] {
                let mut image = Combo::new();
                for (p, c) in &combo {
                    for (q, x) in amb.apply(j, p).iter() {
                        add_into(&mut image, q.clone(), c * x);
                    }
                }
                if !image.is_empty() {
                    return Err(Error::InvalidSpec(format!(
                        "singular vector {k} at level {} is not annihilated by L({j})",
                        s.level
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &ModuleSpec {
        &self.spec
    }

    pub fn depth(&self) -> usize {
        self.spec.depth
    }

    pub fn is_heisenberg(&self) -> bool {
        self.spec.parent.is_heisenberg()
    }

    /// Indecomposable pieces as declared: the summands of a direct sum, otherwise `[self]`.
    pub fn summands(self: &Arc<Self>) -> Vec<Arc<RealizedModule>> {
        match &self.body {
            Body::Sum(parts) => parts.clone(),
            Body::Leaf(_) => vec![self.clone()],
        }
    }

    pub fn is_direct_sum(&self) -> bool {
        matches!(self.body, Body::Sum(_))
    }

    /// Lowest conformal weight; `None` for direct sums.
    pub fn lowest_weight(&self) -> Option<Rational> {
        match &self.body {
            Body::Leaf(l) => Some(l.lowest_weight.clone()),
            Body::Sum(_) => None,
        }
    }

    /// Charge of a free-boson Fock module (including the adjoint module, charge 0).
    pub fn fock_charge(&self) -> Option<Rational> {
        match &self.body {
            Body::Leaf(Leaf { family: Family::Fock { charge }, .. }) => Some(charge.clone()),
            _ => None,
        }
    }

    pub fn dim(&self, level: usize) -> usize {
        match &self.body {
            Body::Leaf(l) => self.level_data(l, level).kept.len(),
            Body::Sum(parts) => parts.iter().map(|p| p.dim(level)).sum(),
        }
    }

    pub fn dims(&self, depth: usize) -> Vec<usize> {
        (0..=depth).map(|n| self.dim(n)).collect()
    }

    /// Start offset of each summand's block inside level `level` (length = summands + 1).
    pub fn block_offsets(&self, level: usize) -> Vec<usize> {
        match &self.body {
            Body::Leaf(l) => vec![0, self.level_data(l, level).kept.len()],
            Body::Sum(parts) => {
                let mut off = vec![0];
                for p in parts {
                    off.push(off.last().unwrap() + p.dim(level));
                }
                off
            }
        }
    }

    /// The monomial (oscillator or PBW word) behind basis vector `idx` of a non-sum module.
    pub fn basis_word(&self, level: usize, idx: usize) -> Option<Partition> {
        match &self.body {
            Body::Leaf(l) => {
                let data = self.level_data(l, level);
                data.kept.get(idx).map(|&a| data.ambient[a].clone())
            }
            Body::Sum(_) => None,
        }
    }

    pub fn basis_labels(&self, level: usize) -> Vec<String> {
        match &self.body {
            Body::Leaf(l) => {
                let data = self.level_data(l, level);
                let (sym, top) = match &l.family {
                    Family::Fock { charge } => ("a", format!("|{charge}>")),
                    Family::Virasoro(_) => ("L", format!("|{}>", l.lowest_weight)),
                };
                data.kept.iter().map(|&a| format!("{}{top}", data.ambient[a].word(sym))).collect()
            }
            Body::Sum(parts) => parts
                .iter()
                .enumerate()
                .flat_map(|(k, p)| p.basis_labels(level).into_iter().map(move |s| format!("[{k}]{s}")))
                .collect(),
        }
    }

    fn level_data(&self, leaf: &Leaf, level: usize) -> Arc<LevelData> {
        if let Some(d) = leaf.levels.read().unwrap().get(&level) {
            return d.clone();
        }
        let data = Arc::new(self.build_level(leaf, level));
        leaf.levels.write().unwrap().entry(level).or_insert(data).clone()
    }

    fn build_level(&self, leaf: &Leaf, level: usize) -> LevelData {
        let ambient = partitions(level, leaf.min_part);
        let index: HashMap<Partition, usize> = ambient.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut generators: Vec<Vec<Rational>> = Vec::new();
        if let Family::Virasoro(amb) = &leaf.family {
            for s in &leaf.singular {
                if s.level > level {
                    continue;
                }
                let seed = to_combo(&partitions(s.level, leaf.min_part), &s.coefficients);
                for word in partitions(level - s.level, 1) {
                    let image = amb.apply_word(&word, &seed);
                    let mut v = vec![Rational::zero(); ambient.len()];
                    for (p, c) in image {
                        v[index[&p]] = c;
                    }
                    generators.push(v);
                }
            }
        }
        if generators.is_empty() {
            let kept = (0..ambient.len()).collect();
            return LevelData { ambient, index, submodule: None, kept };
        }
        let ech = Matrix::from_rows(ambient.len(), generators).rref();
        let kept = ech.free_columns();
        LevelData { ambient, index, submodule: Some(ech), kept }
    }

    /// Coordinates of an ambient combination in the basis of `level`.
    fn project(&self, leaf: &Leaf, level: usize, combo: &Combo) -> Vec<Rational> {
        let data = self.level_data(leaf, level);
        let mut v = vec![Rational::zero(); data.ambient.len()];
        for (p, c) in combo {
            v[data.index[p]] += c;
        }
        if let Some(sub) = &data.submodule {
            v = sub.reduce(&v);
        }
        data.kept.iter().map(|&a| v[a].clone()).collect()
    }

    fn ambient_generator(&self, leaf: &Leaf, j: i64, p: &Partition) -> Combo {
        match &leaf.family {
            Family::Fock { charge } => fock_apply(charge, j, p),
            Family::Virasoro(amb) => (*amb.apply(j, p)).clone(),
        }
    }

    /// Generator mode `a_j` (Heisenberg) or `L(j)` (Virasoro): a matrix from level `level` to
    /// level `level - j` (zero rows when that is negative).
    pub fn generator(&self, j: i64, level: usize) -> Arc<Matrix> {
        if let Some(m) = self.generators.read().unwrap().get(&(j, level)) {
            return m.clone();
        }
        let target = level as i64 - j;
        let m = Arc::new(match &self.body {
            _ if target < 0 => Matrix::zeros(0, self.dim(level)),
            Body::Leaf(leaf) => {
                let data = self.level_data(leaf, level);
                let columns: Vec<Vec<Rational>> = data
                    .kept
                    .iter()
                    .map(|&a| {
                        let image = self.ambient_generator(leaf, j, &data.ambient[a]);
                        self.project(leaf, target as usize, &image)
                    })
                    .collect();
                Matrix::from_columns(self.dim(target as usize), &columns)
            }
            Body::Sum(parts) => block_diagonal(parts.iter().map(|p| p.generator(j, level)).collect()),
        });
        self.generators.write().unwrap().entry((j, level)).or_insert(m).clone()
    }

    /// Mode `v_k` of the universal state `v` given by `word`, from `level` to
    /// `level + wt(v) - k - 1`.
    pub fn word_mode(&self, word: &Partition, k: i64, level: usize) -> Arc<Matrix> {
        let key = (word.clone(), k, level);
        if let Some(m) = self.word_modes.read().unwrap().get(&key) {
            return m.clone();
        }
        let target = level as i64 + word.size() as i64 - k - 1;
        let m = Arc::new(match &self.body {
            _ if target < 0 => Matrix::zeros(0, self.dim(level)),
            Body::Sum(parts) => block_diagonal(parts.iter().map(|p| p.word_mode(word, k, level)).collect()),
            Body::Leaf(leaf) => match &leaf.family {
                Family::Fock { charge } => {
                    let data = self.level_data(leaf, level);
                    let columns: Vec<Vec<Rational>> = data
                        .kept
                        .iter()
                        .map(|&a| {
                            let image = fock_word_mode(charge, word, k, &data.ambient[a]);
                            self.project(leaf, target as usize, &image)
                        })
                        .collect();
                    Matrix::from_columns(self.dim(target as usize), &columns)
                }
                Family::Virasoro(_) => self.virasoro_word_mode(word, k, level, target as usize),
            },
        });
        self.word_modes.write().unwrap().entry(key).or_insert(m).clone()
    }

    /// Modes of `L(-n1) u = ω_j u` (`j = 1 - n1`) from those of `u` through the iterate formula
    /// `(ω_j u)_m = Σ_i binom(j,i) (-1)^i [ω_{j-i} u_{m+i} - (-1)^j u_{j+m-i} ω_i]`, `ω_i = L(i-1)`.
    fn virasoro_word_mode(&self, word: &Partition, m: i64, level: usize, target: usize) -> Matrix {
        let dim_src = self.dim(level);
        let dim_tgt = self.dim(target);
        let parts = word.parts();
        if parts.is_empty() {
            return if m == -1 { Matrix::identity(dim_src) } else { Matrix::zeros(dim_tgt, dim_src) };
        }
        let n1 = parts[0] as i64;
        let tail = Partition(parts[1..].to_vec());
        let tail_weight = tail.size() as i64;
        let j = 1 - n1;
        let sign_j = if j.rem_euclid(2) == 0 { Rational::one() } else { -Rational::one() };
        let lvl = level as i64;
        let i_max = (lvl + tail_weight - m - 1).max(lvl + 1).max(0);
        let mut acc = Matrix::zeros(dim_tgt, dim_src);
        for i in 0..=i_max {
            let mut b = binomial(j, i as u32);
            if i % 2 == 1 {
                b = -b;
            }
            let mid = lvl + tail_weight - (m + i) - 1;
            if mid >= 0 {
                let u = self.word_mode(&tail, m + i, level);
                let w = self.generator(j - i - 1, mid as usize);
                acc = acc.add(&w.mul(&u).scale(&b));
            }
            let mid = lvl - i + 1;
            if mid >= 0 {
                let w = self.generator(i - 1, level);
                let u = self.word_mode(&tail, j + m - i, mid as usize);
                acc = acc.sub(&u.mul(&w).scale(&(&b * &sign_j)));
            }
        }
        acc
    }

    /// Mode `v_k` of a homogeneous state of V from `level`.
    pub fn state_mode(&self, v: &State, k: i64, level: usize) -> Matrix {
        if let [(word, c)] = v.terms.as_slice() {
            if c.is_one() {
                return (*self.word_mode(word, k, level)).clone();
            }
        }
        let target = level as i64 + v.weight as i64 - k - 1;
        let dim_tgt = if target < 0 { 0 } else { self.dim(target as usize) };
        let mut acc = Matrix::zeros(dim_tgt, self.dim(level));
        for (word, c) in &v.terms {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&self.word_mode(word, k, level).scale(c));
        }
        acc
    }

    /// `(L(0) - weight)` restricted to `level`; `None` for direct sums, whose weight is not
    /// determined by the level.
    pub fn l0_nil(&self, level: usize) -> Option<Matrix> {
        let weight = self.lowest_weight()? + rational_from_i64(level as i64);
        let l0 = if self.is_heisenberg() {
            let mut m = (*self.word_mode(&Partition(vec![1, 1]), 1, level)).clone();
            m = m.scale(&Rational::new(1.into(), 2.into()));
            m
        } else {
            (*self.generator(0, level)).clone()
        };
        Some(l0.sub(&Matrix::identity(self.dim(level)).scale(&weight)))
    }

    /// Snapshot of every memoized generator matrix with level at most `max_level`.
    pub fn generator_table(&self, max_level: usize) -> Vec<((i64, usize), Matrix)> {
        let mut out: Vec<_> = self
            .generators
            .read()
            .unwrap()
            .iter()
            .filter(|((_, l), _)| *l <= max_level)
            .map(|(k, m)| (*k, (**m).clone()))
            .collect();
        out.sort_by_key(|(k, _)| *k);
        out
    }

    /// Pre-populates the generator memo, e.g. from a persistent cache. Entries whose shape does
    /// not match the realized dimensions are rejected.
    pub fn preload_generators(&self, table: Vec<((i64, usize), Matrix)>) -> Result<()> {
        let mut checked = Vec::with_capacity(table.len());
        for ((j, level), m) in table {
            let target = level as i64 - j;
            let rows = if target < 0 { 0 } else { self.dim(target as usize) };
            if m.rows() != rows || m.cols() != self.dim(level) {
                return Err(Error::InputShape(format!("cached generator ({j}, {level}) has the wrong shape")));
            }
            checked.push(((j, level), Arc::new(m)));
        }
        let mut guard = self.generators.write().unwrap();
        for (k, m) in checked {
            guard.insert(k, m);
        }
        Ok(())
    }

    /// Recomputes generator `(j, level)` without consulting the memo.
    pub fn fresh_generator(&self, j: i64, level: usize) -> Matrix {
        let fresh = RealizedModule::new(&self.spec).expect("spec was validated at construction");
        (*fresh.generator(j, level)).clone()
    }
}

fn to_combo(basis: &[Partition], coefficients: &[Rational]) -> Combo {
    let mut combo = Combo::new();
    for (p, c) in basis.iter().zip(coefficients) {
        add_into(&mut combo, p.clone(), c.clone());
    }
    combo
}

fn block_diagonal(blocks: Vec<Arc<Matrix>>) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.rows()).sum();
    let cols: usize = blocks.iter().map(|b| b.cols()).sum();
    let mut m = Matrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for r in 0..b.rows() {
            for c in 0..b.cols() {
                let x = b.get(r, c);
                if !x.is_zero() {
                    m.set(r0 + r, c0 + c, x.clone());
                }
            }
        }
        r0 += b.rows();
        c0 += b.cols();
    }
    m
}

/// Singular vectors at `level` of the Verma (or vacuum) module: the joint kernel of `L(1)`
/// and `L(2)`, as coordinates over the PBW basis of that level.
pub fn find_singular_vectors(
    central_charge: &Rational,
    highest_weight: &Rational,
    vacuum: bool,
    level: usize,
) -> Vec<Vec<Rational>> {
    let amb = VirasoroAmbient::new(central_charge.clone(), highest_weight.clone(), vacuum);
    let basis = partitions(level, amb.min_part());
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for j in [1i64, 2] {
        if (level as i64) < j {
            continue;
        }
        let lower = partitions(level - j as usize, amb.min_part());
        let index: HashMap<&Partition, usize> = lower.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut block = vec![vec![Rational::zero(); basis.len()]; lower.len()];
        for (col, p) in basis.iter().enumerate() {
            for (q, x) in amb.apply(j, p).iter() {
                block[index[q]][col] += x;
            }
        }
        rows.extend(block);
    }
    if rows.is_empty() {
        return Matrix::identity(basis.len()).transpose().nullspace();
    }
    let ns = Matrix::from_rows(basis.len(), rows).nullspace();
    // normalize so the last nonzero coordinate is positive
    ns.into_iter()
        .map(|v| {
            let lead = v.iter().rev().find(|x| !x.is_zero()).cloned().unwrap();
            if lead.is_negative() {
                v.iter().map(|x| -x).collect()
            } else {
                v
            }
        })
        .collect()
}
