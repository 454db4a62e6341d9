//! Z-loop patterns on prepared cylinders and the sector swap by the
//! horizontal X-string.
//!
//! Run with: `cargo run --example string_operators`

use rkforge::coverings::{
    apply_x_string, enumerate_covers, sector_of, x_horizontal, z_circumferential, BoundaryCondition,
};
use rkforge::probes::z_string_expectation;
use rkforge::protocols::{cylinder_schedule, run_lattice_state, SeedSpec};
use rkforge::{build_lattice, Closure, Orientation};

fn main() -> rkforge::Result<()> {
    for (o, n) in [(Orientation::YC, 1), (Orientation::XC, 2)] {
        let lat = build_lattice(o, n, 4, Closure::OpenCylinder)?;
        for parity in [1, -1] {
            let st = run_lattice_state(&cylinder_schedule(&lat, &SeedSpec::for_sector(n, parity))?, &lat)?;
            let z: Vec<f64> = (0..lat.m())
                .map(|m| z_string_expectation(&st, &z_circumferential(&lat, m)))
                .collect();
            println!("{o:?}-{} sector {parity:+}: {z:?}", 2 * n);
        }
    }
    let lat = build_lattice(Orientation::YC, 1, 3, Closure::OpenCylinder)?;
    let x = x_horizontal(&lat)?;
    for cover in enumerate_covers(&lat, &BoundaryCondition::Free)?.iter().take(4) {
        let image = apply_x_string(&lat, cover, &x)?;
        println!("{:?} -> {:?}", sector_of(&lat, cover)?, sector_of(&lat, &image)?);
    }
    Ok(())
}
