//! Solution jets of `-u'' + (q_total - z) u = 0`.

pub mod engine;
pub mod frobenius;
pub mod integrator;

pub use engine::{BlockView, Blocks, Engine, Fundamental, Grid, PassResult, PassSpec, SolutionJet};
pub use frobenius::{Branch, FrobeniusSeries};
