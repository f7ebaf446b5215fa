use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::rational::Rational;
use crate::error::{Error, Result};

/// Below this fraction of nonzero entries row reduction runs on a sparse row representation.
pub const SPARSE_DENSITY_THRESHOLD: f64 = 0.25;

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds from row vectors; every row must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        Self { rows: n, cols, data }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged matrix columns");
            for (i, x) in c.iter().enumerate() {
                if !x.is_zero() {
                    m.set(i, j, x.clone());
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Rational) {
        self.data[r * self.cols + c] = x;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn density(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().filter(|x| !x.is_zero()).count() as f64 / self.data.len() as f64
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let x = self.get(r, c);
                if !x.is_zero() {
                    t.set(c, r, x.clone());
                }
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// Reduced row echelon form. The representation (dense or sparse rows) is picked from the
    /// density; the reduced form is unique, so the choice never changes the result.
    pub fn rref(&self) -> RowEchelon {
        if self.density() < SPARSE_DENSITY_THRESHOLD {
            self.rref_sparse()
        } else {
            self.rref_dense()
        }
    }

    /// Gauss-Jordan on dense rows. Pivot: leftmost nonzero column, smallest row index.
    pub fn rref_dense(&self) -> RowEchelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..m.cols {
            if pr == m.rows {
                break;
            }
            let Some(src) = (pr..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                continue;
            };
            if src != pr {
                for j in 0..m.cols {
                    m.data.swap(src * m.cols + j, pr * m.cols + j);
                }
            }
            let inv = m.get(pr, c).recip();
            for j in c..m.cols {
                let idx = pr * m.cols + j;
                if !m.data[idx].is_zero() {
                    m.data[idx] *= &inv;
                }
            }
            for r in 0..m.rows {
                if r == pr {
                    continue;
                }
                let f = m.get(r, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let p = m.data[pr * m.cols + j].clone();
                    if !p.is_zero() {
                        m.data[r * m.cols + j] -= &f * p;
                    }
                }
            }
            pivots.push(c);
            pr += 1;
        }
        let rank = pivots.len();
        m.data.truncate(rank * m.cols);
        m.rows = rank;
        RowEchelon { basis: m, pivots }
    }

    /// Gauss-Jordan on sparse rows, same pivoting rule as [`Matrix::rref_dense`].
    pub fn rref_sparse(&self) -> RowEchelon {
        let mut rows: Vec<BTreeMap<usize, Rational>> = (0..self.rows)
            .map(|r| {
                self.row(r).iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect()
            })
            .collect();
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..self.cols {
            if pr == rows.len() {
                break;
            }
            let Some(src) = (pr..rows.len()).find(|&r| rows[r].contains_key(&c)) else {
                continue;
            };
            rows.swap(src, pr);
            let inv = rows[pr][&c].recip();
            for x in rows[pr].values_mut() {
                *x *= &inv;
            }
            let pivot_row = rows[pr].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == pr {
                    continue;
                }
                let Some(f) = row.get(&c).cloned() else {
                    continue;
                };
                for (j, p) in &pivot_row {
                    let e = row.entry(*j).or_insert_with(Rational::zero);
                    *e -= &f * p;
                    if e.is_zero() {
                        row.remove(j);
                    }
                }
            }
            pivots.push(c);
            pr += 1;
        }
        let mut basis = Matrix::zeros(pivots.len(), self.cols);
        for (r, row) in rows.into_iter().take(pivots.len()).enumerate() {
            for (j, x) in row {
                basis.set(r, j, x);
            }
        }
        RowEchelon { basis, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the right kernel, one vector per free column (that column set to 1).
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let ech = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !ech.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (r, &p) in ech.pivots.iter().enumerate() {
                    v[p] = -ech.basis.get(r, f).clone();
                }
                v
            })
            .collect()
    }

    /// Particular solution of `self * x = b` with all free variables set to zero.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let ech = aug.rref();
        if ech.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (r, &p) in ech.pivots.iter().enumerate() {
            x[p] = ech.basis.get(r, self.cols).clone();
        }
        Some(x)
    }
}

/// Reduced row echelon form: `basis` holds the nonzero rows, `pivots[i]` the pivot column of row `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowEchelon {
    pub basis: Matrix,
    pub pivots: Vec<usize>,
}

impl RowEchelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` modulo the row space; the result vanishes on every pivot column.
    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = v.to_vec();
        for (r, &p) in self.pivots.iter().enumerate() {
            let f = out[p].clone();
            if f.is_zero() {
                continue;
            }
            for (j, x) in self.basis.row(r).iter().enumerate() {
                if !x.is_zero() {
                    out[j] -= &f * x;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Columns that are not pivots, in increasing order.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.basis.cols()).filter(|c| !self.pivots.contains(c)).collect()
    }
}

/// Outcome of a span-membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    InSpan(Vec<Rational>),
    NotInSpan,
}

/// Expresses `target` as a combination of `basis_vectors` (deterministic: free variables are zero).
pub fn solve_membership(basis_vectors: &[Vec<Rational>], target: &[Rational]) -> Result<Membership> {
    if let Some((i, v)) = basis_vectors.iter().enumerate().find(|(_, v)| v.len() != target.len()) {
        return Err(Error::InputShape(format!(
            "vector {i} has length {} but the target has length {}",
            v.len(),
            target.len()
        )));
    }
    let m = Matrix::from_columns(target.len(), basis_vectors);
    Ok(match m.solve(target) {
        Some(x) => Membership::InSpan(x),
        None => Membership::NotInSpan,
    })
}
