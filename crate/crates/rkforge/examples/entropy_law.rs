//! Entanglement entropy of the RK state across strip cuts, from the
//! expanded state and from the strip transfer matrices.
//!
//! Run with: `cargo run --example entropy_law`

use rkforge::coverings::SectorLabel;
use rkforge::mps::build_rk;
use rkforge::{build_lattice, Closure, Orientation};

fn main() -> rkforge::Result<()> {
    let ln2 = 2f64.ln();
    for n in 1..=5 {
        let lat = build_lattice(Orientation::YC, n, 4, Closure::OpenCylinder)?;
        let rk = build_rk(&lat, Some(SectorLabel::Cylinder { parity: 1 }))?;
        let s = rk.entropy(2)?;
        let expanded = if n <= 2 {
            let st = rk.expand(&lat)?;
            let left: Vec<usize> = (0..2).flat_map(|m| lat.strip_bonds(m)).collect();
            format!("{:.12}", st.entanglement_entropy(&left))
        } else {
            "-".into()
        };
        println!("N={n}: S/ln2 = {:.9} transfer, {expanded} expanded", s / ln2);
    }
    Ok(())
}
