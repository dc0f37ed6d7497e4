//! Spectral construction and numerical certification of k-Schmidt
//! entanglement witnesses on finite bipartite systems.

pub mod bipartite;
pub mod detect;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod optim;
pub mod subspace;
pub mod witness;

pub use bipartite::{BipartiteDims, CoordMatrix, DensityMatrix, PureVector, SchmidtData, Subspace, Subsystem};
pub use error::{Error, Result, WitnessCondition};
pub use maps::{HermPreservingMap, MaxEntangledRef, Normalization};
pub use optim::{OptimizerConfig, TracePoint};
pub use witness::{SpectralSplit, WitnessReport};
