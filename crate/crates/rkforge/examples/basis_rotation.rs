//! Measure X-strings by rotating each traversed triangle and reading the
//! corner Z-string.
//!
//! Run with: `cargo run --example basis_rotation`

use rkforge::coverings::{x_horizontal, x_strip_loop};
use rkforge::gates::rotation_area;
use rkforge::probes::{x_string_expectation, x_string_via_rotation};
use rkforge::protocols::{cylinder_schedule, run_lattice_state, SeedSpec};
use rkforge::{build_lattice, Closure, Orientation};

fn main() -> rkforge::Result<()> {
    println!("rotation area {:.9}", rotation_area());
    let lat = build_lattice(Orientation::XC, 2, 3, Closure::OpenCylinder)?;
    let st = run_lattice_state(&cylinder_schedule(&lat, &SeedSpec::for_sector(2, 1))?, &lat)?;
    let mut paths = vec![("horizontal".to_string(), x_horizontal(&lat)?)];
    paths.extend((0..lat.m()).map(|m| (format!("strip {m}"), x_strip_loop(&lat, m))));
    for (name, p) in &paths {
        println!(
            "{name:<10} direct {:+.9}  rotated {:+.9}",
            x_string_expectation(&lat, &st, p)?,
            x_string_via_rotation(&lat, &st, p)?
        );
    }
    Ok(())
}
