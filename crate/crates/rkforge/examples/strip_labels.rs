//! Decode covers into per-strip `(L, R, u)` labels and rebuild them.
//!
//! Run with: `cargo run --example strip_labels`

use rkforge::coverings::{enumerate_covers, BoundaryCondition};
use rkforge::strips::{all_labels, assemble, decode_all};
use rkforge::{build_lattice, Closure, Orientation};

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn main() -> rkforge::Result<()> {
    for n in 1..=4 {
        println!("N={n}: {} strip labels", all_labels(n).len());
    }
    let lat = build_lattice(Orientation::YC, 2, 3, Closure::OpenCylinder)?;
    let covers = enumerate_covers(&lat, &BoundaryCondition::Free)?;
    for cover in covers.iter().step_by(covers.len() / 4) {
        let labels = decode_all(&lat, cover)?;
        let text: Vec<String> = labels
            .iter()
            .map(|l| format!("(L={} R={} u={})", bits(&l.l), bits(&l.r), l.u as u8))
            .collect();
        println!("{} -> {}", cover.to_hex(&lat), text.join(" "));
        assert_eq!(&assemble(&lat, &labels)?, cover);
    }
    Ok(())
}
