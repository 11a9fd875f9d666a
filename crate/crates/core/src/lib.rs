//! Learning quantum states and unitaries of bounded gate complexity.
//!
//! The building blocks are a small-support pure-state simulator
//! ([`qcore`]), distance measures ([`metrics`]), classical shadows
//! ([`shadows`]), candidate nets ([`nets`]) and junta identification
//! ([`junta`]). [`learners`] combines them into the state, unitary,
//! bootstrap and classical-data learners, and [`harness`] runs seeded
//! sample-complexity sweeps.
//!
//! All numerics are generic over [`Real`]; the aliases at the crate root fix
//! the scalar to `f64`.

pub mod error;
pub mod harness;
pub mod metrics;
pub mod nets;
pub mod junta;
pub mod learners;
pub mod oracle;
pub mod qcore;
pub mod scalar;
pub mod seeding;
pub mod shadows;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type PureState = qcore::PureState<f64>;
pub type DenseUnitary = qcore::DenseUnitary<f64>;
pub type Circuit = qcore::Circuit<f64>;
pub type GatePlacement = qcore::GatePlacement<f64>;
pub type ChoiState = metrics::ChoiState<f64>;
