//! Torus assembly by gluing and the split of its output over the four
//! sectors.
//!
//! Run with: `cargo run --example torus_sectors`

use rkforge::coverings::{sector_of, x_strip_loop, z_circumferential, z_longitudinal, DimerCover};
use rkforge::probes::{x_string_expectation, z_string_expectation};
use rkforge::protocols::{run_lattice_state, torus_schedule};
use rkforge::{build_lattice, Closure, Orientation};
use std::collections::BTreeMap;

fn main() -> rkforge::Result<()> {
    for (o, n) in [(Orientation::YC, 1), (Orientation::XC, 2)] {
        let lat = build_lattice(o, n, 4, Closure::Torus)?;
        for a0 in 0..2 {
            let st = run_lattice_state(&torus_schedule(&lat, a0)?, &lat)?;
            let mut pops = BTreeMap::new();
            for (m, a) in st.iter() {
                let s = sector_of(&lat, &DimerCover::new(m.clone()))?;
                *pops.entry(format!("{s:?}")).or_insert(0.0) += a.norm_sqr() / st.norm_sq();
            }
            println!(
                "{o:?}-{} a0={a0}: <X_strip>={:.3} <Z_long>={:.3} <Z_circ>={:.3} {pops:?}",
                2 * n,
                x_string_expectation(&lat, &st, &x_strip_loop(&lat, 0))?,
                z_string_expectation(&st, &z_longitudinal(&lat)),
                z_string_expectation(&st, &z_circumferential(&lat, 0)),
            );
        }
    }
    Ok(())
}
