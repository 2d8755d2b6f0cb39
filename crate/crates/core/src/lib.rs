//! Executable ontological-model toolkit: quantum scenarios, finite
//! ontological models, the non-overlap construction and a proof engine
//! that certifies disjoint ontic supports.

pub mod builders;
pub mod construction;
pub mod interfero;
pub mod nogo;
pub mod numerics;
pub mod ontology;
pub mod scenario;
pub mod toymodels;

pub use numerics::{CMatrix, CVector, Tolerances};
