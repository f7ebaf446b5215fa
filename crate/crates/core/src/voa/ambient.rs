//! Generator actions on the full oscillator / PBW monomial bases, before any quotient is taken.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

use super::partition::Partition;
use crate::exact::{binomial, rational_from_i64, Rational};

pub(crate) type Combo = BTreeMap<Partition, Rational>;

pub(crate) fn add_into(acc: &mut Combo, p: Partition, c: Rational) {
    if c.is_zero() {
        return;
    }
    let slot = acc.entry(p.clone()).or_insert_with(Rational::zero);
    *slot += c;
    if slot.is_zero() {
        acc.remove(&p);
    }
}

fn single(p: Partition, c: Rational) -> Combo {
    let mut out = Combo::new();
    add_into(&mut out, p, c);
    out
}

/// Heisenberg mode `a_j` on the Fock monomial `p` of charge `charge`; `[a_m, a_n] = m δ_{m+n,0}`.
pub(crate) fn fock_apply(charge: &Rational, j: i64, p: &Partition) -> Combo {
    match j {
        j if j < 0 => single(p.with_part((-j) as u32), Rational::one()),
        0 => single(p.clone(), charge.clone()),
        j => {
            let mult = p.multiplicity(j as u32);
            match p.without_part(j as u32) {
                Some(q) => single(q, rational_from_i64(j * mult as i64)),
                None => Combo::new(),
            }
        }
    }
}

/// Mode `v_k` of the Heisenberg state `a(-n_1)...a(-n_r)|0>` on the Fock monomial `w`, computed
/// from the normally ordered free-field product `:∂^{(n_1-1)}a(z) ... ∂^{(n_r-1)}a(z):`.
/// The coefficient of `a_m` in `∂^{(n-1)}a(z)` at `z^{-k-1}` is `binom(-m-1, n-1)`.
pub(crate) fn fock_word_mode(charge: &Rational, word: &Partition, k: i64, w: &Partition) -> Combo {
    let weight = word.size() as i64;
    let level = w.size() as i64;
    let target = level + weight - k - 1;
    let mut out = Combo::new();
    if target < 0 {
        return out;
    }
    if word.parts().is_empty() {
        if k == -1 {
            out.insert(w.clone(), Rational::one());
        }
        return out;
    }
    let mode_sum = k + 1 - weight;
    let factors = word.parts();
    let r = factors.len();
    for mask in 0u32..(1 << r) {
        // annihilation and zero modes act first, creation modes last
        let mut states: BTreeMap<(i64, Partition), Rational> = BTreeMap::new();
        states.insert((0, w.clone()), Rational::one());
        for (i, &n) in factors.iter().enumerate() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let mut next = BTreeMap::new();
            for ((sum, p), c) in &states {
                for m in 0..=p.size() as i64 {
                    let coef = binomial(-m - 1, n - 1);
                    for (q, x) in fock_apply(charge, m, p) {
                        let slot = next.entry((sum + m, q)).or_insert_with(Rational::zero);
                        *slot += c * &coef * x;
                    }
                }
            }
            next.retain(|_, c: &mut Rational| !c.is_zero());
            states = next;
        }
        for (i, &n) in factors.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let mut next = BTreeMap::new();
            for ((sum, p), c) in &states {
                let room = target - p.size() as i64;
                for raise in n as i64..=room {
                    let m = -raise;
                    let coef = binomial(-m - 1, n - 1);
                    let slot = next.entry((sum + m, p.with_part(raise as u32))).or_insert_with(Rational::zero);
                    *slot += c * coef;
                }
            }
            next.retain(|_, c: &mut Rational| !c.is_zero());
            states = next;
        }
        for ((sum, p), c) in states {
            if sum == mode_sum {
                debug_assert_eq!(p.size() as i64, target);
                add_into(&mut out, p, c);
            }
        }
    }
    out
}

/// PBW straightening for the Virasoro algebra acting on `L(-n_1)...L(-n_r)|h>` with
/// `n_1 >= ... >= n_r`. In the vacuum module `L(-1)|0> = 0` and all parts are at least 2.
pub(crate) struct VirasoroAmbient {
    central_charge: Rational,
    highest_weight: Rational,
    vacuum: bool,
    memo: RwLock<HashMap<(i64, Partition), Arc<Combo>>>,
}

impl VirasoroAmbient {
    pub(crate) fn new(central_charge: Rational, highest_weight: Rational, vacuum: bool) -> Self {
        Self { central_charge, highest_weight, vacuum, memo: RwLock::new(HashMap::new()) }
    }

    pub(crate) fn min_part(&self) -> u32 {
        if self.vacuum {
            2
        } else {
            1
        }
    }

    /// `L(j)` applied to a PBW monomial.
    pub(crate) fn apply(&self, j: i64, mono: &Partition) -> Arc<Combo> {
        if let Some(hit) = self.memo.read().unwrap().get(&(j, mono.clone())) {
            return hit.clone();
        }
        let result = Arc::new(self.compute(j, mono));
        self.memo.write().unwrap().insert((j, mono.clone()), result.clone());
        result
    }

    fn compute(&self, j: i64, mono: &Partition) -> Combo {
        let parts = mono.parts();
        if parts.is_empty() {
            return match j {
                j if j > 0 => Combo::new(),
                0 => single(Partition::empty(), self.highest_weight.clone()),
                -1 if self.vacuum => Combo::new(),
                j => single(Partition(vec![(-j) as u32]), Rational::one()),
            };
        }
        let n1 = parts[0] as i64;
        if j < 0 && -j >= n1 {
            let mut v = vec![(-j) as u32];
            v.extend_from_slice(parts);
            return single(Partition(v), Rational::one());
        }
        let rest = Partition(parts[1..].to_vec());
        let mut out = Combo::new();
        // L(j) L(-n1) X = L(-n1) L(j) X + (j + n1) L(j - n1) X + c/12 (j^3 - j) δ_{j,n1} X
        for (m, c) in self.apply(j, &rest).iter() {
            for (q, x) in self.apply(-n1, m).iter() {
                add_into(&mut out, q.clone(), c * x);
            }
        }
        if j + n1 != 0 {
            let f = rational_from_i64(j + n1);
            for (q, x) in self.apply(j - n1, &rest).iter() {
                add_into(&mut out, q.clone(), &f * x);
            }
        }
        if j == n1 {
            let central = &self.central_charge * rational_from_i64(j * j * j - j) / rational_from_i64(12);
            add_into(&mut out, rest, central);
        }
        out
    }

    /// Applies the word `L(-p_1)...L(-p_r)` (rightmost first) to a combination.
    pub(crate) fn apply_word(&self, word: &Partition, v: &Combo) -> Combo {
        let mut cur = v.clone();
        for &p in word.parts().iter().rev() {
            let mut next = Combo::new();
            for (m, c) in &cur {
                for (q, x) in self.apply(-(p as i64), m).iter() {
                    add_into(&mut next, q.clone(), c * x);
                }
            }
            cur = next;
        }
        cur
    }
}
