use std::collections::BTreeMap;

use num_traits::Zero;

use crate::exact::{Matrix, Rational};

/// Element of a graded space: coordinate vectors keyed by level. Zero components are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedVector {
    components: BTreeMap<usize, Vec<Rational>>,
}

impl GradedVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn homogeneous(level: usize, coords: Vec<Rational>) -> Self {
        let mut v = Self::zero();
        v.add_component(level, &coords);
        v
    }

    /// Basis vector `idx` of a level of dimension `dim`.
    pub fn basis(level: usize, dim: usize, idx: usize) -> Self {
        let mut coords = vec![Rational::zero(); dim];
        coords[idx] = Rational::from_integer(1.into());
        Self::homogeneous(level, coords)
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, &Vec<Rational>)> {
        self.components.iter().map(|(l, v)| (*l, v))
    }

    pub fn component(&self, level: usize) -> Option<&Vec<Rational>> {
        self.components.get(&level)
    }

    /// The single level carrying a nonzero component, if the vector is homogeneous and nonzero.
    pub fn level(&self) -> Option<usize> {
        match self.components.len() {
            1 => self.components.keys().next().copied(),
            _ => None,
        }
    }

    pub fn add_component(&mut self, level: usize, coords: &[Rational]) {
        if coords.iter().all(Zero::is_zero) {
            return;
        }
        match self.components.get_mut(&level) {
            Some(v) => {
                for (a, b) in v.iter_mut().zip(coords) {
                    *a += b;
                }
                if v.iter().all(Zero::is_zero) {
                    self.components.remove(&level);
                }
            }
            None => {
                self.components.insert(level, coords.to_vec());
            }
        }
    }

    pub fn add(&self, other: &GradedVector) -> GradedVector {
        let mut out = self.clone();
        for (l, v) in &other.components {
            out.add_component(*l, v);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> GradedVector {
        let mut out = GradedVector::zero();
        for (l, v) in &self.components {
            let scaled: Vec<Rational> = v.iter().map(|x| x * c).collect();
            out.add_component(*l, &scaled);
        }
        out
    }

    pub fn sub(&self, other: &GradedVector) -> GradedVector {
        self.add(&other.scale(&-Rational::from_integer(1.into())))
    }

    /// Applies `m` to the component at `level` and files the result under `target`.
    pub(crate) fn apply_level(&mut self, target: usize, m: &Matrix, coords: &[Rational]) {
        let image = m.mul_vec(coords);
        self.add_component(target, &image);
    }
}
