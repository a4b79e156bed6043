//! Shared fixtures for the criterion benchmarks.

use qperc_core::oracle::{encode_dataset, oracle_circuit, RegisterMode};
use qperc_core::{Dataset, FixedPointSpec, OracleBundle};

/// The bundled 4-sample dataset encoded at one magnitude bit, with its
/// reused-scratch oracle (20 qubits).
pub fn example_bundle() -> OracleBundle {
    let encoded = encode_dataset(&Dataset::example(), FixedPointSpec::new(1).unwrap()).unwrap();
    oracle_circuit(&encoded, RegisterMode::Reuse).unwrap()
}
