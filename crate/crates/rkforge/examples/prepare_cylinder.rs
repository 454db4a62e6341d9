//! Build a preparation schedule, run it, and compare with the enumerated
//! sector.
//!
//! Run with: `cargo run --example prepare_cylinder`

use rkforge::coverings::{enumerate_covers_with, Backend, BoundaryCondition, SectorLabel};
use rkforge::protocols::{check_schedule, cylinder_schedule, run_lattice_state, SeedSpec};
use rkforge::simstate::uniform_state;
use rkforge::{build_lattice, Closure, Orientation};

fn main() -> rkforge::Result<()> {
    let lat = build_lattice(Orientation::XC, 4, 2, Closure::OpenCylinder)?;
    let schedule = cylinder_schedule(&lat, &SeedSpec::for_sector(4, 1))?;
    check_schedule(&schedule)?;
    for layer in schedule.layers.iter().take(6) {
        println!("{:<16} {} gates", layer.name, layer.gates.len());
    }
    println!(
        "... {} layers, {} gates, sha256 {}",
        schedule.depth(),
        schedule.gate_count(),
        schedule.sha256()
    );
    let mut st = run_lattice_state(&schedule, &lat)?;
    st.normalize();
    let bc = BoundaryCondition::Sector(SectorLabel::Cylinder { parity: 1 });
    let covers = enumerate_covers_with(&lat, &bc, Backend::StripByStrip, usize::MAX)?;
    let mut want = uniform_state(&lat, covers.into_iter().map(|c| c.mask))?;
    want.normalize();
    println!(
        "support {}, overlap with enumeration {:.15}",
        st.support_len(),
        st.overlap(&want)?.norm()
    );
    Ok(())
}
