//! Numerical toolkit for the information-theoretic limits of uncloneable
//! quantum encryption of classical messages.
//!
//! The crate is organised around a handful of pluggable families:
//!
//! * encryption schemes implement [`schemes::Qecm`] and are built by name
//!   through a [`schemes::SchemeRegistry`] from a JSON [`schemes::SchemeDescriptor`];
//! * cloning channels and the keyed guessing measurements that go with them are
//!   built by name through an [`attacks::AttackRegistry`];
//! * the discrimination step of the seesaw optimizer is a
//!   [`optimize::Discriminator`] (exact Helstrom for two outcomes, an iterative
//!   fixed point otherwise).
//!
//! Everything that needs randomness takes an explicit [`RngState`], so every
//! estimate is reproducible bit for bit from its seed.

pub mod attacks;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod meg;
pub mod o2h;
pub mod optimize;
pub mod povm;
pub mod rng;
pub mod schemes;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{
    ComplexMatrix, ComplexVector, DensityOperator, KrausChannel, Projector, PureState, Tolerances,
    UnitaryOp, C64, TOL,
};
pub use mc::Estimate;
pub use povm::Povm;
pub use rng::RngState;
