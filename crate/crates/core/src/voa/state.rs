use std::fmt;

use num_traits::Zero;

use super::partition::Partition;
use crate::exact::Rational;

/// Homogeneous element of the vertex operator algebra, written as a combination of creation
/// words applied to the vacuum: `a(-n_1)...a(-n_r)|0>` or `L(-n_1)...L(-n_r)|0>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub weight: usize,
    pub terms: Vec<(Partition, Rational)>,
}

impl State {
    pub fn vacuum() -> Self {
        Self::word(Partition::empty())
    }

    pub fn word(word: Partition) -> Self {
        Self { weight: word.size(), terms: vec![(word, Rational::from_integer(1.into()))] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { weight: self.weight, terms: self.terms.iter().map(|(w, x)| (w.clone(), x * c)).collect() }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.terms.iter().filter(|(_, c)| !c.is_zero()).map(|(w, c)| format!("({c}){w}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}
