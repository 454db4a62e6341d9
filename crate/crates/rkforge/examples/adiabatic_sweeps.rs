//! Single-atom X and H sweeps: infidelity against sweep time.
//!
//! Run with: `cargo run --example adiabatic_sweeps`

use rkforge::pulses::{sweep_ladder, SweepKind};

fn main() -> rkforge::Result<()> {
    let ts = [5.0, 10.0, 20.0, 40.0, 50.0, 80.0];
    for kind in [SweepKind::X, SweepKind::H] {
        println!("{kind:?} sweep");
        for (t, inf) in sweep_ladder(kind, 1.0, 2.0, &ts)? {
            println!("  T = {t:>4}: 1 - F = {inf:.3e}");
        }
    }
    Ok(())
}
