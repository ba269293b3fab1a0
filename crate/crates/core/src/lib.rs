//! Reconstruction of the unitary part of noisy quantum channels from their
//! action on small sets of probe states.

pub mod channels;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod probes;
pub mod reconstruct;
pub mod rng;

pub use channels::{ChoiMatrix, DensityMatrix, KrausSet, NoiseKind, NoiseSpec, Scenario, Superoperator};
pub use error::{Error, Result, Warning};
pub use linalg::{ComplexMatrix, C64};
pub use metrics::UnitarityEstimate;
pub use reconstruct::{Method, ReconstructionResult};
