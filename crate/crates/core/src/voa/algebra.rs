use std::sync::Arc;

use num_traits::Zero;

use super::module::RealizedModule;
use super::partition::Partition;
use super::spec::{ModuleSpec, VoaSpec};
use super::state::State;
use super::vector::GradedVector;
use crate::error::{Error, Result};
use crate::exact::{Matrix, Rational};

/// A truncated vertex operator algebra, realized through its adjoint module.
#[derive(Debug, Clone)]
pub struct Voa {
    spec: VoaSpec,
    adjoint: Arc<RealizedModule>,
}

impl Voa {
    pub fn new(spec: &VoaSpec) -> Result<Self> {
        let adjoint = RealizedModule::new(&ModuleSpec::adjoint(spec, spec.depth))?;
        Ok(Self { spec: spec.clone(), adjoint })
    }

    pub fn spec(&self) -> &VoaSpec {
        &self.spec
    }

    pub fn depth(&self) -> usize {
        self.spec.depth
    }

    pub fn adjoint(&self) -> &Arc<RealizedModule> {
        &self.adjoint
    }

    pub fn dim(&self, level: usize) -> usize {
        self.adjoint.dim(level)
    }

    pub fn basis_state(&self, level: usize, idx: usize) -> State {
        let word = self.adjoint.basis_word(level, idx).expect("basis index in range");
        State::word(word)
    }

    /// The state with coordinates `coords` over the basis of `V_level`.
    pub fn state(&self, level: usize, coords: &[Rational]) -> Result<State> {
        let dim = self.dim(level);
        if coords.len() != dim {
            return Err(Error::InputShape(format!(
                "V_{level} has dimension {dim} but {} coordinates were given",
                coords.len()
            )));
        }
        let terms = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.adjoint.basis_word(level, i).unwrap(), c.clone()))
            .collect();
        Ok(State { weight: level, terms })
    }

    pub fn state_from_graded(&self, v: &GradedVector) -> Result<State> {
        if v.is_zero() {
            return Ok(State { weight: 0, terms: Vec::new() });
        }
        let level = v.level().ok_or_else(|| Error::InputShape("state is not homogeneous".into()))?;
        self.state(level, v.component(level).unwrap())
    }

    /// Coordinates of `v` over the basis of `V_wt(v)`, computed as `v_{-1}|0>`.
    pub fn coords(&self, v: &State) -> Vec<Rational> {
        self.adjoint.state_mode(v, -1, 0).column(0)
    }

    pub fn vacuum(&self) -> State {
        State::vacuum()
    }

    /// `a(-1)|0>` for the free boson, `L(-2)|0>` for Virasoro.
    pub fn generator(&self) -> State {
        State::word(Partition(vec![self.spec.generator_weight() as u32]))
    }

    pub fn conformal_vector(&self) -> State {
        if self.spec.is_heisenberg() {
            State::word(Partition(vec![1, 1])).scale(&Rational::new(1.into(), 2.into()))
        } else {
            State::word(Partition(vec![2]))
        }
    }

    /// `v_i u` as a state of weight `wt(v) + wt(u) - i - 1`; `None` when that weight is negative.
    pub fn product(&self, v: &State, i: i64, u: &State) -> Option<State> {
        let level = v.weight as i64 + u.weight as i64 - i - 1;
        if level < 0 {
            return None;
        }
        let image = self.adjoint.state_mode(v, i, u.weight).mul_vec(&self.coords(u));
        Some(self.state(level as usize, &image).unwrap())
    }

    /// `L(-1) v = ω_0 v`.
    pub fn l_minus_one(&self, v: &State) -> State {
        self.product(&self.conformal_vector(), 0, v).unwrap()
    }

    /// Mode matrix of `v_k` on a module level, exact regardless of truncation.
    pub fn mode_matrix(&self, module: &RealizedModule, v: &State, k: i64, level: usize) -> Matrix {
        module.state_mode(v, k, level)
    }
}
