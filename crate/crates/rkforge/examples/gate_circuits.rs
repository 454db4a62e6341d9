//! Digital decompositions of the protocol gates, checked against their
//! truth tables.
//!
//! Run with: `cargo run --example gate_circuits`

use rkforge::gates::{decompose, verify_decomposition, GateKind};

fn main() {
    for kind in GateKind::protocol_gates() {
        let c = decompose(kind).expect("protocol gates decompose");
        let h = c.ops.iter().filter(|p| p.is_h()).count();
        println!(
            "{kind:?}: {} qubits, {} primitives ({h} controlled-H), exact: {}",
            c.width,
            c.ops.len(),
            verify_decomposition(kind)
        );
    }
}
