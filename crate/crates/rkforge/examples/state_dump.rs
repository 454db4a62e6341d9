//! Write a prepared state to the text dump format, read it back and sample
//! configurations.
//!
//! Run with: `cargo run --example state_dump`

use rkforge::protocols::{cylinder_schedule, run_lattice_state, SeedSpec};
use rkforge::simstate::{sample_frequency, SparseState};
use rkforge::{build_lattice, Closure, Orientation};

fn main() -> rkforge::Result<()> {
    let lat = build_lattice(Orientation::YC, 1, 3, Closure::OpenCylinder)?;
    let mut st = run_lattice_state(&cylinder_schedule(&lat, &SeedSpec::UniformAll)?, &lat)?;
    st.normalize();
    let text = st.dump();
    print!("{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    let (back, _) = SparseState::load(&text)?;
    println!("reloaded overlap {:.15}", back.overlap(&st)?.norm());
    let samples = st.sample_many(20_000, 42);
    let (first, a) = st.iter().next().expect("nonempty state");
    println!(
        "first mask: probability {:.4}, sampled {:.4}",
        a.norm_sqr(),
        sample_frequency(&samples, first)
    );
    Ok(())
}
