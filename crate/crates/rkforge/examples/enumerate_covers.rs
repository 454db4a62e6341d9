//! Count dimer covers with both enumeration backends and split them by
//! topological sector.
//!
//! Run with: `cargo run --example enumerate_covers`

use rkforge::coverings::{enumerate_covers_with, sector_of, Backend, BoundaryCondition, EXHAUSTIVE_BOND_LIMIT};
use rkforge::{build_lattice, Closure, Orientation};
use std::collections::BTreeMap;

fn main() -> rkforge::Result<()> {
    let cases = [
        (Orientation::YC, 1, 4, Closure::OpenCylinder),
        (Orientation::YC, 2, 3, Closure::OpenCylinder),
        (Orientation::XC, 2, 3, Closure::OpenCylinder),
        (Orientation::YC, 1, 4, Closure::Torus),
        (Orientation::XC, 2, 2, Closure::Torus),
    ];
    for (o, n, m, c) in cases {
        let lat = build_lattice(o, n, m, c)?;
        let free = BoundaryCondition::Free;
        let fast = enumerate_covers_with(&lat, &free, Backend::StripByStrip, usize::MAX)?;
        let slow = enumerate_covers_with(&lat, &free, Backend::Exhaustive, EXHAUSTIVE_BOND_LIMIT)?;
        let mut sectors = BTreeMap::new();
        for cover in &fast {
            *sectors.entry(format!("{:?}", sector_of(&lat, cover)?)).or_insert(0) += 1;
        }
        println!(
            "{o:?}-{} M={m} {c:?}: {} covers (backends agree: {}) {sectors:?}",
            2 * n,
            fast.len(),
            fast == slow
        );
    }
    Ok(())
}
