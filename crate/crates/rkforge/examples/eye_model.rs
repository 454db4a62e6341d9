//! Grow the YC-2 RK state strip by strip and read its circumferential
//! Z-loops in both sectors.
//!
//! Run with: `cargo run --example eye_model`

use rkforge::coverings::z_circumferential;
use rkforge::probes::z_string_expectation;
use rkforge::protocols::{cylinder_schedule, run_lattice_state, SeedSpec};
use rkforge::{build_lattice, Closure, Orientation};

fn main() -> rkforge::Result<()> {
    let lat = build_lattice(Orientation::YC, 1, 4, Closure::OpenCylinder)?;
    for parity in [1, -1] {
        let schedule = cylinder_schedule(&lat, &SeedSpec::for_sector(1, parity))?;
        let state = run_lattice_state(&schedule, &lat)?;
        let loops: Vec<f64> = (0..lat.m())
            .map(|m| z_string_expectation(&state, &z_circumferential(&lat, m)))
            .collect();
        println!(
            "sector {parity:+}: {} covers, depth {}, Z-loops {loops:?}",
            state.support_len(),
            schedule.depth()
        );
    }
    Ok(())
}
