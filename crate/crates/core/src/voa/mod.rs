//! Concrete vertex operator algebras and their modules at finite truncation depth.

mod algebra;
pub(crate) mod ambient;
pub mod identities;
mod module;
mod partition;
mod spec;
mod state;
mod vector;

pub use algebra::Voa;
pub use identities::{
    check_associativity, check_commutator, identity_suite, l_minus_one_shift, mode_action, ModeOutcome, ShiftCheck,
    SuiteReport,
};
pub use module::{find_singular_vectors, RealizedModule};
pub use partition::{partitions, Partition};
pub use spec::{ModuleKind, ModuleSpec, SingularVector, VoaKind, VoaSpec};
pub use state::State;
pub use vector::GradedVector;
