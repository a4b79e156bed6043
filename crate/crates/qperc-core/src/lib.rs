//! Circuit-level Grover-search training of perceptron classifiers.
//!
//! The crate builds a phase oracle for a labeled integer dataset out of
//! QFT-based arithmetic (multiplier, adder, two's-complement conversion),
//! runs amplitude amplification over every sign-magnitude weight code on a
//! dense statevector simulator, and cross-checks the whole pipeline against
//! classical brute force. A separate analytics module computes the
//! margin-band success probabilities for uniform versus Gaussian weight
//! sampling on the unit ball.

pub mod circuit;
pub mod error;
pub mod grover;
pub mod oracle;
pub mod qasm;
pub mod qft_arith;
pub mod statevector;
pub mod version_space;

pub use circuit::{Circuit, Gate, GateKind, GateStats, RegisterLayout};
pub use error::{Error, Result};
pub use grover::{GroverPlan, IterationMode, TrainConfig, TrainResult};
pub use oracle::{Dataset, EncodedDataset, OracleBundle, RegisterMode, Sample};
pub use qft_arith::FixedPointSpec;
pub use statevector::{CountTable, Statevector};
pub use version_space::BandQuery;
