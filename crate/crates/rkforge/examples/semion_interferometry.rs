//! Ancilla interferometry around a planted e anyon.
//!
//! Run with: `cargo run --example semion_interferometry`

use rkforge::probes::{plant_e_pair, semion_interferometry};
use rkforge::protocols::{run_lattice_state, torus_schedule};
use rkforge::{build_lattice, Closure, Orientation};

fn main() -> rkforge::Result<()> {
    let lat = build_lattice(Orientation::YC, 2, 2, Closure::Torus)?;
    let st = run_lattice_state(&torus_schedule(&lat, 0)?, &lat)?;
    let pair = plant_e_pair(&lat, &st)?;
    println!("anyons: {:?}", pair.anyons);
    for (label, sites) in [("enclosing", &pair.enclosing), ("empty", &pair.empty)] {
        let r = semion_interferometry(&lat, &pair.state, sites, 10_000, 1)?;
        println!(
            "{label:<9} P(1) exact {:.6}, sampled {:.4}, phase {:.6}",
            r.exact, r.estimate, r.phase
        );
    }
    Ok(())
}
