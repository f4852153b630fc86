//! Driven Kerr oscillator coupled to a bath, in Caldeira-Leggett (CL),
//! generalized CL and thermal Lindblad form.
//!
//! Quantum dynamics run on a truncated Fock basis; the semiclassical equations
//! of motion and their rotating-wave slow flow live in [`semiclassics`].

pub mod dissipator;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod operator;
pub mod propagator;
pub mod semiclassics;

pub use dissipator::{
    apply_liouvillian, lindblad_rhs, squeeze_decomposition, DissipatorSpec, LiouvillianContext,
    LiouvillianKernel, TermGroup, TermGroups,
};
pub use error::{Error, Result};
pub use fock::{build_xp, poly_of_x, FockSpace};
pub use model::{hamiltonian_at, DriveTone, Family, ModelParams, SystemOperators};
pub use operator::{anticommutator, commutator, OperatorMatrix};
pub use propagator::{
    evolve, floquet_map_fixed_point, steady_state, DensityMatrix, Propagator, PropagatorConfig, SteadyStateConfig,
    SteadyStateReport,
};
