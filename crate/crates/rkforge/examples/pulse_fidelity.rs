//! Non-adiabatic pulse realizations of the protocol gates and their
//! fidelities in the blockade model.
//!
//! Run with: `cargo run --example pulse_fidelity`

use rkforge::gates::GateKind;
use rkforge::pulses::{fidelity, nonadiabatic};

fn main() -> rkforge::Result<()> {
    println!(
        "{:<8} {:>6} {:>10} {:>12} {:>10}",
        "gate", "atoms", "time", "coherent", "forbidden"
    );
    for kind in GateKind::protocol_gates() {
        let r = nonadiabatic(kind)?;
        let f = fidelity(&r, kind)?;
        let t: f64 = r.steps.iter().map(|s| s.schedule.duration()).sum();
        println!(
            "{:<8} {:>6} {:>10.4} {:>12.9} {:>10.1e}",
            format!("{kind:?}"),
            r.cluster.atoms,
            t,
            f.coherent,
            f.forbidden
        );
    }
    let r = nonadiabatic(GateKind::U1c2t)?;
    print!("{}", fidelity(&r, GateKind::U1c2t)?.to_csv());
    Ok(())
}
