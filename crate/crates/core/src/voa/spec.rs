use std::fmt;

use crate::exact::Rational;

/// A highest-weight vector inside a Verma or vacuum module, given by its coordinates over the
/// PBW basis of its level (graded-lex order).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SingularVector {
    pub level: usize,
    pub coefficients: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VoaKind {
    /// Rank one free boson generated by `a` of weight 1, conformal vector `a(-1)^2 / 2`.
    Heisenberg,
    VirasoroUniversal { central_charge: Rational },
    VirasoroQuotient { central_charge: Rational, singular: Vec<SingularVector> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VoaSpec {
    pub kind: VoaKind,
    pub depth: usize,
}

impl VoaSpec {
    pub fn heisenberg(depth: usize) -> Self {
        Self { kind: VoaKind::Heisenberg, depth }
    }

    pub fn virasoro(central_charge: Rational, depth: usize) -> Self {
        Self { kind: VoaKind::VirasoroUniversal { central_charge }, depth }
    }

    pub fn central_charge(&self) -> Rational {
        match &self.kind {
            VoaKind::Heisenberg => Rational::from_integer(1.into()),
            VoaKind::VirasoroUniversal { central_charge } | VoaKind::VirasoroQuotient { central_charge, .. } => {
                central_charge.clone()
            }
        }
    }

    pub fn is_heisenberg(&self) -> bool {
        matches!(self.kind, VoaKind::Heisenberg)
    }

    /// Weight of the strong generator (`a` or `ω`).
    pub fn generator_weight(&self) -> usize {
        if self.is_heisenberg() {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for VoaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            VoaKind::Heisenberg => write!(f, "heisenberg(depth={})", self.depth),
            VoaKind::VirasoroUniversal { central_charge } => {
                write!(f, "virasoro(c={central_charge},depth={})", self.depth)
            }
            VoaKind::VirasoroQuotient { central_charge, singular } => {
                write!(f, "virasoro-quotient(c={central_charge},singular={},depth={})", fmt_singular(singular), self.depth)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModuleKind {
    /// Heisenberg Fock module `M(1, λ)`.
    Fock { charge: Rational },
    /// Virasoro Verma module `M(c, h)`.
    Verma { highest_weight: Rational },
    /// Verma module modulo the submodules generated by the listed singular vectors.
    Quotient { highest_weight: Rational, singular: Vec<SingularVector> },
    /// The vertex operator algebra viewed as a module over itself.
    Adjoint,
    /// Declared direct sum; the empty sum is the zero module.
    DirectSum(Vec<ModuleSpec>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleSpec {
    pub parent: VoaSpec,
    pub kind: ModuleKind,
    pub depth: usize,
}

impl ModuleSpec {
    pub fn fock(parent: &VoaSpec, charge: Rational, depth: usize) -> Self {
        Self { parent: parent.clone(), kind: ModuleKind::Fock { charge }, depth }
    }

    pub fn verma(parent: &VoaSpec, highest_weight: Rational, depth: usize) -> Self {
        Self { parent: parent.clone(), kind: ModuleKind::Verma { highest_weight }, depth }
    }

    pub fn quotient(parent: &VoaSpec, highest_weight: Rational, singular: Vec<SingularVector>, depth: usize) -> Self {
        Self { parent: parent.clone(), kind: ModuleKind::Quotient { highest_weight, singular }, depth }
    }

    pub fn adjoint(parent: &VoaSpec, depth: usize) -> Self {
        Self { parent: parent.clone(), kind: ModuleKind::Adjoint, depth }
    }

    pub fn direct_sum(parent: &VoaSpec, summands: Vec<ModuleSpec>, depth: usize) -> Self {
        Self { parent: parent.clone(), kind: ModuleKind::DirectSum(summands), depth }
    }

    /// Declared summands, or the module itself when it is not a direct sum.
    pub fn summands(&self) -> Vec<ModuleSpec> {
        match &self.kind {
            ModuleKind::DirectSum(s) => s.iter().flat_map(ModuleSpec::summands).collect(),
            _ => vec![self.clone()],
        }
    }
}

impl fmt::Display for ModuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModuleKind::Fock { charge } => write!(f, "fock(charge={charge}")?,
            ModuleKind::Verma { highest_weight } => write!(f, "verma(h={highest_weight}")?,
            ModuleKind::Quotient { highest_weight, singular } => {
                write!(f, "quotient(h={highest_weight},singular={}", fmt_singular(singular))?
            }
            ModuleKind::Adjoint => write!(f, "adjoint(")?,
            ModuleKind::DirectSum(s) => {
                let parts: Vec<String> = s.iter().map(|m| m.to_string()).collect();
                write!(f, "sum({}", parts.join(";"))?
            }
        }
        write!(f, ",depth={},voa={})", self.depth, self.parent)
    }
}

fn fmt_singular(s: &[SingularVector]) -> String {
    let items: Vec<String> = s
        .iter()
        .map(|v| {
            let c: Vec<String> = v.coefficients.iter().map(|x| x.to_string()).collect();
            format!("{}:[{}]", v.level, c.join(" "))
        })
        .collect();
    format!("[{}]", items.join(","))
}
