//! Numerics for one-dimensional Schrödinger operators with a Bessel-type
//! singular left endpoint and a finite limit-circle right endpoint.
//!
//! The crate computes the entire fundamental system `phi`, `theta` and the
//! endpoint solution `chi` together with their spectral-parameter jets,
//! eigenvalues and norming constants, the singular Weyl function and its
//! gauges, the L² classification of the Weyl-solution derivatives that
//! decides n-entireness, and the de Branges kernel built from `phi`.

pub mod config;
pub mod debranges;
pub mod error;
pub mod jet;
pub mod nentire;
pub mod ode;
pub mod problem;
pub mod quadrature;
pub mod spectral;
pub mod weyl;

pub use error::{Error, Result};
pub use jet::{Jet, C64};
pub use problem::{builtin_problems, load_problem, resolve_problem, validate_potential, BoundaryCondition, PotentialSpec, SturmLiouvilleProblem};

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
