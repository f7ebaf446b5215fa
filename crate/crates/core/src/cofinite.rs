//! `C_m` subspaces, quotient dimensions, complements, weight supports and log-power bounds.

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rational_from_i64, Matrix, Rational, RowEchelon};
use crate::voa::{RealizedModule, Voa};

/// Which product `v_{-m} u` produced a spanning vector of `C_m(M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SpanLabel {
    pub v_weight: usize,
    pub v_index: usize,
    pub u_level: usize,
    pub u_index: usize,
}

/// Spanning vectors `v_{-m} u` of `C_m(M)_(level)`, over all basis states `v` of V with
/// `wt(v) > 1 - m` and basis vectors `u` of the right level, ordered by `(wt(v), v, u)`.
/// `module` must not be a direct sum.
pub fn cm_spanning(voa: &Voa, module: &RealizedModule, m: usize, level: usize) -> Vec<(SpanLabel, Vec<Rational>)> {
    let mut out = Vec::new();
    // wt(v) > 1 - m excludes the vacuum for m = 1, and 1_{-m} = 0 for m >= 2
    for w in 1..=(level + 1).saturating_sub(m) {
        let u_level = level + 1 - m - w;
        let dim_u = module.dim(u_level);
        if dim_u == 0 {
            continue;
        }
        for vi in 0..voa.dim(w) {
            let mat = module.state_mode(&voa.basis_state(w, vi), -(m as i64), u_level);
            for ui in 0..dim_u {
                let label = SpanLabel { v_weight: w, v_index: vi, u_level, u_index: ui };
                out.push((label, mat.column(ui)));
            }
        }
    }
    out
}

/// Row echelon form of `C_m(M)_(level)` inside `M_(level)`.
pub fn cm_echelon(voa: &Voa, module: &RealizedModule, m: usize, level: usize) -> RowEchelon {
    let rows: Vec<Vec<Rational>> = cm_spanning(voa, module, m, level).into_iter().map(|(_, v)| v).collect();
    Matrix::from_rows(module.dim(level), rows).rref()
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InputShape("m must be a positive integer".into()));
    }
    Ok(())
}

/// Largest level at which `C_m` quotients can be reported: the spanning set at level `n` uses
/// generator modes reaching `n + g + m - 1`, which must stay within the module depth.
pub fn certified_depth(voa: &Voa, module: &RealizedModule, m: usize) -> Option<usize> {
    let g = voa.spec().generator_weight();
    let by_module = module.depth().checked_sub(g + m - 1)?;
    Some(by_module.min(voa.depth() + m - 1))
}

fn guard(voa: &Voa, module: &RealizedModule, m: usize, depth: usize) -> Result<()> {
    match certified_depth(voa, module, m) {
        Some(c) if depth <= c => Ok(()),
        c => Err(Error::Truncation(format!(
            "C_{m} quotients are certified only up to level {} at module depth {} (requested {depth})",
            c.map_or("none".to_string(), |c| c.to_string()),
            module.depth()
        ))),
    }
}

/// `dim M_(n) / C_m(M)_(n)` for `n = 0..=depth`.
pub fn cm_quotient_dims(voa: &Voa, module: &Arc<RealizedModule>, m: usize, depth: usize) -> Result<Vec<usize>> {
    check_m(m)?;
    guard(voa, module, m, depth)?;
    Ok(unguarded_quotient_dims(voa, module, m, depth))
}

fn unguarded_quotient_dims(voa: &Voa, module: &Arc<RealizedModule>, m: usize, depth: usize) -> Vec<usize> {
    let leaves = leaves(module);
    let mut dims = vec![0; depth + 1];
    for leaf in leaves {
        let per: Vec<usize> = (0..=depth)
            .into_par_iter()
            .map(|n| leaf.dim(n) - cm_echelon(voa, &leaf, m, n).rank())
            .collect();
        for (d, x) in dims.iter_mut().zip(per) {
            *d += x;
        }
    }
    dims
}

fn leaves(module: &Arc<RealizedModule>) -> Vec<Arc<RealizedModule>> {
    module.summands()
}

/// A complement vector, in the coordinates of its own summand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplementVector {
    pub summand: usize,
    pub level: usize,
    #[serde(serialize_with = "crate::exact::serialize_rationals")]
    pub coords: Vec<Rational>,
}

/// Complement of `C_1(M)` per declared summand: `M_(n) = C_1(M)_(n) + span(vectors at n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplementBasis {
    pub vectors: Vec<ComplementVector>,
    /// Largest level carrying a complement vector, per summand.
    pub windows: Vec<usize>,
    #[serde(serialize_with = "crate::exact::serialize_rationals")]
    pub lowest_weights: Vec<Rational>,
    /// Levels up to which the quotient dimensions were certified.
    pub certified_depth: usize,
    /// The window is minimal among those visible up to `certified_depth`; a larger one cannot
    /// be excluded beyond it.
    pub larger_window_possible: bool,
}

impl ComplementBasis {
    pub fn window(&self) -> usize {
        self.windows.iter().copied().max().unwrap_or(0)
    }

    pub fn summand_vectors(&self, summand: usize) -> impl Iterator<Item = &ComplementVector> {
        self.vectors.iter().filter(move |v| v.summand == summand)
    }

    pub fn summand_len(&self, summand: usize) -> usize {
        self.summand_vectors(summand).count()
    }
}

/// Complement of `C_1` in a single (non-sum) module, by greedy selection of the earliest basis
/// vectors not yet spanned.
pub fn leaf_complement(voa: &Voa, leaf: &RealizedModule, depth: usize) -> Result<(Vec<(usize, Vec<Rational>)>, usize)> {
    guard(voa, leaf, 1, depth)?;
    let mut chosen = Vec::new();
    let mut window = None;
    for n in 0..=depth {
        let dim = leaf.dim(n);
        let mut rows: Vec<Vec<Rational>> = cm_spanning(voa, leaf, 1, n).into_iter().map(|(_, v)| v).collect();
        let mut ech = Matrix::from_rows(dim, rows.clone()).rref();
        for i in 0..dim {
            if ech.rank() == dim {
                break;
            }
            let mut e = vec![Rational::zero(); dim];
            e[i] = Rational::one();
            if !ech.contains(&e) {
                rows.push(e.clone());
                ech = Matrix::from_rows(dim, rows.clone()).rref();
                chosen.push((n, e));
                window = Some(n);
            }
        }
    }
    let window = window.unwrap_or(0);
    if leaf.dim(0) > 0 && window >= depth {
        return Err(Error::NotCofiniteUpToDepth {
            depth,
            detail: format!("{}: C_1 quotient is still nonzero at level {depth}", leaf.spec()),
        });
    }
    Ok((chosen, window))
}

pub fn choose_complement(voa: &Voa, module: &Arc<RealizedModule>, depth: usize) -> Result<ComplementBasis> {
    let mut vectors = Vec::new();
    let mut windows = Vec::new();
    let mut lowest_weights = Vec::new();
    for (s, leaf) in leaves(module).iter().enumerate() {
        let (chosen, window) = leaf_complement(voa, leaf, depth)?;
        vectors.extend(chosen.into_iter().map(|(level, coords)| ComplementVector { summand: s, level, coords }));
        windows.push(window);
        lowest_weights.push(leaf.lowest_weight().unwrap());
    }
    Ok(ComplementBasis { vectors, windows, lowest_weights, certified_depth: depth, larger_window_possible: true })
}

/// Per-level evidence that `M_(n)` is spanned by `Σ_{i=1..n} (V_i)_{-1} M_(n-i)` plus complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelCertificate {
    pub level: usize,
    pub dim: usize,
    pub c1_rank: usize,
    pub complement: usize,
    pub spanned: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedDims {
    pub dims: Vec<usize>,
    /// Present for levels within the certified window when a complement exists.
    pub certificate: Vec<LevelCertificate>,
}

pub fn graded_dims(voa: &Voa, module: &Arc<RealizedModule>, depth: usize) -> GradedDims {
    let dims = module.dims(depth);
    let mut certificate = Vec::new();
    let reach = certified_depth(voa, module, 1).map(|c| c.min(depth));
    if let Some(reach) = reach {
        if let Ok(basis) = choose_complement(voa, module, reach) {
            let all = leaves(module);
            for n in 0..=reach {
                let (mut c1_rank, mut complement, mut total) = (0, 0, 0);
                for (s, leaf) in all.iter().enumerate() {
                    let mut rows: Vec<Vec<Rational>> =
                        cm_spanning(voa, leaf, 1, n).into_iter().map(|(_, v)| v).collect();
                    c1_rank += Matrix::from_rows(leaf.dim(n), rows.clone()).rank();
                    let extra: Vec<Vec<Rational>> =
                        basis.summand_vectors(s).filter(|v| v.level == n).map(|v| v.coords.clone()).collect();
                    complement += extra.len();
                    rows.extend(extra);
                    total += Matrix::from_rows(leaf.dim(n), rows).rank();
                }
                certificate.push(LevelCertificate { level: n, dim: dims[n], c1_rank, complement, spanned: total == dims[n] });
            }
        }
    }
    GradedDims { dims, certificate }
}

/// Lowest weights of the declared summands, one representative per class mod Z (the smallest).
pub fn weight_support(module: &Arc<RealizedModule>) -> Vec<Rational> {
    let mut weights: Vec<Rational> = leaves(module).iter().filter_map(|l| l.lowest_weight()).collect();
    weights.sort();
    merge_mod_z(weights)
}

pub(crate) fn merge_mod_z(sorted: Vec<Rational>) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    for w in sorted {
        if !out.iter().any(|a| (&w - a).is_integer()) {
            out.push(w);
        }
    }
    out
}

/// Nilpotency orders of `L(0) - wt` on each realized level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NilpotencyReport {
    pub per_level: Vec<usize>,
    pub order: usize,
}

pub fn nilpotency(module: &Arc<RealizedModule>, depth: usize) -> NilpotencyReport {
    let mut per_level = vec![0; depth + 1];
    for leaf in leaves(module) {
        for (n, slot) in per_level.iter_mut().enumerate() {
            let nil = leaf.l0_nil(n).unwrap();
            let mut power = Matrix::identity(leaf.dim(n));
            let mut k = 0;
            while !power.is_zero() {
                power = power.mul(&nil);
                k += 1;
            }
            *slot = (*slot).max(k);
        }
    }
    let order = per_level.iter().copied().max().unwrap_or(0);
    NilpotencyReport { per_level, order }
}

/// Bounds on the power of `log z` in an intertwining operator whose three modules have
/// `(L(0) - wt)^N = 0` with the given orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LogPowerBound {
    /// `3 max(N_U, N_W, N_T)`.
    pub general: usize,
    /// `N_U + N_W + N_T - 2`.
    pub sharp: usize,
}

pub fn log_power_bound(n_u: usize, n_w: usize, n_t: usize) -> Result<LogPowerBound> {
    if n_u == 0 || n_w == 0 || n_t == 0 {
        return Err(Error::InputShape("nilpotency orders must be positive".into()));
    }
    Ok(LogPowerBound { general: 3 * n_u.max(n_w).max(n_t), sharp: n_u + n_w + n_t - 2 })
}

fn jordan(n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        m.set(i, i + 1, Rational::one());
    }
    m
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let mut m = Matrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    let y = b.get(k, l);
                    if !y.is_zero() {
                        m.set(i * b.rows() + k, j * b.cols() + l, x * y);
                    }
                }
            }
        }
    }
    m
}

/// Iterates `(i+1) Φ_{i+1} = -N_T Φ_i + Φ_i (N_U ⊗ 1 + 1 ⊗ N_W)` from a generic `Φ_0` (all
/// entries one), with single Jordan blocks as the nilpotent parts, and returns the iterates
/// `Φ_0, Φ_1, ...` up to and including the first zero one.
pub fn log_recursion(n_u: usize, n_w: usize, n_t: usize) -> Result<Vec<Matrix>> {
    log_power_bound(n_u, n_w, n_t)?;
    let nt = jordan(n_t);
    let right = kron(&jordan(n_u), &Matrix::identity(n_w)).add(&kron(&Matrix::identity(n_u), &jordan(n_w)));
    let mut phi = Matrix::from_rows(n_u * n_w, vec![vec![Rational::one(); n_u * n_w]; n_t]);
    let mut out = vec![phi.clone()];
    let mut i = 0;
    while !phi.is_zero() {
        let next = nt.mul(&phi).scale(&-Rational::one()).add(&phi.mul(&right));
        i += 1;
        phi = next.scale(&(Rational::one() / rational_from_i64(i)));
        out.push(phi.clone());
    }
    Ok(out)
}

/// Smallest `k` with `u_{(k,n)} w = 0` under [`log_recursion`].
pub fn log_vanishing_order(n_u: usize, n_w: usize, n_t: usize) -> Result<usize> {
    Ok(log_recursion(n_u, n_w, n_t)?.len() - 1)
}
