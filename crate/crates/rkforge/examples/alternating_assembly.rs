//! Sequential growth against alternating grow-and-glue assembly: same state,
//! depth independent of the cylinder length.
//!
//! Run with: `cargo run --example alternating_assembly`

use rkforge::protocols::{alternating_schedule, cylinder_schedule, run_lattice_state, SeedSpec};
use rkforge::{build_lattice, Closure, Orientation};

fn main() -> rkforge::Result<()> {
    for m in [3, 5, 7] {
        let lat = build_lattice(Orientation::YC, 1, m, Closure::OpenCylinder)?;
        let seq = cylinder_schedule(&lat, &SeedSpec::FixedParity(0))?;
        let alt = alternating_schedule(&lat, 0)?;
        let mut a = run_lattice_state(&seq, &lat)?;
        let mut b = run_lattice_state(&alt, &lat)?;
        a.normalize();
        b.normalize();
        println!(
            "M={m}: sequential depth {}, alternating depth {}, overlap {:.12}",
            seq.depth(),
            alt.depth(),
            a.overlap(&b)?.norm()
        );
    }
    Ok(())
}
