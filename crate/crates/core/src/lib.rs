//! Analytic wavelet transforms on the upper half-plane, large-sieve concentration certificates
//! and L1 recovery of coefficient fields.

pub mod container;
pub mod error;
pub mod hyperbolic;
pub mod quad;
pub mod recovery;
pub mod selftest;
pub mod sieve;
pub mod special;
pub mod transform;
pub mod wavelet;

pub use error::{Error, Result};
pub use hyperbolic::{AnnulusSpec, DiskSpec, GridSpec, HyperbolicGrid, Primitive, Rect, RegionMask, UHPoint};
pub use num_complex::Complex64;
pub use recovery::{Atom, AtomDictionary, RecoveryProblem, RecoveryResult, SolverParams};
pub use sieve::{DensityEstimate, FieldSpec, SieveCertificate};
pub use transform::{CoefficientField, FreqSignal};
pub use wavelet::WaveletIndex;
