//! Attribution-guided generator refinement.

mod divergence;
mod generator;
mod refinement;

pub use divergence::{identify_divergent_features, DivergentFeature};
pub use generator::{fit_generator, Copula, Generator, GeneratorKind, GeneratorSpec};
pub use refinement::{refine_loop, IterationRecord, RefineConfig, RefineError, RefineOutcome, RefinementTrace};
