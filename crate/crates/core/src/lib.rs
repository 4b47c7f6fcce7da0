//! Entanglement detection from correlation tensors.
//!
//! A state is compared against a separable reference `ρ₀` (usually its
//! closest PPT state); the difference tensor `D = T(ρ) − T(ρ₀)` defines a
//! linear witness `Σ D_μ T_μ` and a quadratic identifier `Σ D_μ² T_μ²`, each
//! with a separable bound computed over product states.

pub mod closest;
pub mod config;
pub mod densop;
pub mod error;
pub mod incremental;
pub mod states;
pub mod sweep;
pub mod tomo;
pub mod witness;

pub use closest::{closest_ppt, closest_separable_family, PptProjectionResult};
pub use config::Tolerances;
pub use densop::{ComplexMatrix, DensityOperator, C64};
pub use error::{Error, Result};
pub use states::FamilySpec;
pub use tomo::{state_to_tensor, Convention, ExtendedCorrelationTensor};
pub use witness::{build_linear, build_quadratic, DetectionReport, LinearWitness, QuadraticIdentifier, Verdict};
