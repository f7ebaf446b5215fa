#![allow(dead_code)]

use std::collections::BTreeMap;

use vertexbound::exact::{rational_from_i64, Matrix, Rational};

pub fn q(n: i64) -> Rational {
    rational_from_i64(n)
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Virasoro words `L(i_1)...L(i_k)|h>` normal-ordered by adjacent swaps, independently of the
/// engine. A normal-ordered word has weakly increasing negative indices, e.g. `[-3, -1, -1]`.
pub struct VirOracle {
    pub c: Rational,
    pub h: Rational,
    pub vacuum: bool,
}

pub type Combo = BTreeMap<Vec<i64>, Rational>;

impl VirOracle {
    pub fn normal_order(&self, word: Vec<i64>) -> Combo {
        let mut out = Combo::new();
        let mut stack = vec![(word, Rational::from_integer(1.into()))];
        while let Some((w, c)) = stack.pop() {
            if c == q(0) {
                continue;
            }
            let k = w.len();
            if let Some(&last) = w.last() {
                if last > 0 || (self.vacuum && last == -1) {
                    continue;
                }
                if last == 0 {
                    stack.push((w[..k - 1].to_vec(), c * &self.h));
                    continue;
                }
            }
            match (1..k).find(|&i| w[i - 1] > w[i]) {
                None => {
                    *out.entry(w).or_insert_with(|| q(0)) += c;
                }
                Some(i) => {
                    let (a, b) = (w[i - 1], w[i]);
                    let mut swapped = w.clone();
                    swapped.swap(i - 1, i);
                    stack.push((swapped, c.clone()));
                    let mut merged = w[..i - 1].to_vec();
                    merged.push(a + b);
                    merged.extend_from_slice(&w[i + 1..]);
                    stack.push((merged.clone(), &c * q(a - b)));
                    if a + b == 0 {
                        let mut dropped = w[..i - 1].to_vec();
                        dropped.extend_from_slice(&w[i + 1..]);
                        stack.push((dropped, &c * &self.c * q(a * a * a - a) / q(12)));
                    }
                }
            }
        }
        out.retain(|_, v| *v != q(0));
        out
    }

    /// Normal-ordered basis words of a level, in the engine's graded-lex order.
    pub fn basis(&self, level: usize) -> Vec<Vec<i64>> {
        let min = if self.vacuum { 2 } else { 1 };
        let mut out = Vec::new();
        fn go(n: i64, max: i64, min: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if n == 0 {
                out.push(prefix.clone());
                return;
            }
            let mut p = max.min(n);
            while p >= min {
                prefix.push(-p);
                go(n - p, p, min, prefix, out);
                prefix.pop();
                p -= 1;
            }
        }
        go(level as i64, level as i64, min, &mut Vec::new(), &mut out);
        out
    }

    pub fn coords(&self, level: usize, combo: &Combo) -> Vec<Rational> {
        let basis = self.basis(level);
        basis.iter().map(|w| combo.get(w).cloned().unwrap_or_else(|| q(0))).collect()
    }

    /// `L(j)` applied to a normal-ordered basis word.
    pub fn apply(&self, j: i64, word: &[i64]) -> Combo {
        let mut w = vec![j];
        w.extend_from_slice(word);
        self.normal_order(w)
    }

    /// Span of `L(-k) M_(n-k)`, `k >= 2`, plus optional extra rows, as a rank.
    pub fn c1_rows(&self, level: usize) -> Vec<Vec<Rational>> {
        let mut rows = Vec::new();
        for k in 2..=level {
            for w in self.basis(level - k) {
                rows.push(self.coords(level, &self.apply(-(k as i64), &w)));
            }
        }
        rows
    }

    /// Submodule generated by a singular vector given over the basis of `s_level`.
    pub fn submodule_rows(&self, s_level: usize, s: &[Rational], level: usize) -> Vec<Vec<Rational>> {
        if level < s_level {
            return Vec::new();
        }
        let s_basis = self.basis(s_level);
        let raising = VirOracle { c: self.c.clone(), h: self.h.clone(), vacuum: false }.basis(level - s_level);
        raising
            .iter()
            .map(|r| {
                let mut combo = Combo::new();
                for (w, c) in s_basis.iter().zip(s) {
                    let mut word = r.clone();
                    word.extend_from_slice(w);
                    for (x, y) in self.normal_order(word) {
                        *combo.entry(x).or_insert_with(|| q(0)) += c * y;
                    }
                }
                self.coords(level, &combo)
            })
            .collect()
    }
}

pub fn rank(cols: usize, rows: Vec<Vec<Rational>>) -> usize {
    Matrix::from_rows(cols, rows).rank()
}
