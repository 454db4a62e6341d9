//! Independent reference states shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rkforge::coverings::{enumerate_covers_with, left_pattern, Backend, BoundaryCondition, SectorLabel};
use rkforge::mps::hourglass_mps;
use rkforge::protocols::{cylinder_schedule, run_lattice_state, SeedSpec};
use rkforge::simstate::SparseState;
use rkforge::{build_lattice, Closure, Lattice, Mask, Orientation};
use std::collections::BTreeSet;

pub fn cylinder(o: Orientation, n: usize, m: usize) -> Lattice {
    build_lattice(o, n, m, Closure::OpenCylinder).unwrap()
}

/// Protocol output for a cylinder sector, normalized.
pub fn prepared(lat: &Lattice, parity: i8) -> SparseState {
    let s = cylinder_schedule(lat, &SeedSpec::for_sector(lat.n(), parity)).unwrap();
    let mut st = run_lattice_state(&s, lat).unwrap();
    st.normalize();
    st
}

/// `|<a|b>|` for normalized states.
pub fn overlap(a: &SparseState, b: &SparseState) -> f64 {
    a.overlap(b).unwrap().norm() / (a.norm_sq() * b.norm_sq()).sqrt()
}

/// Equal superposition of configurations given as bond sets.
pub fn from_configs(lat: &Lattice, configs: impl IntoIterator<Item = Vec<usize>>) -> SparseState {
    try_from_configs(lat, configs).unwrap()
}

/// As [`from_configs`], or `None` if some configuration breaks the blockade.
pub fn try_from_configs(lat: &Lattice, configs: impl IntoIterator<Item = Vec<usize>>) -> Option<SparseState> {
    let set: BTreeSet<Vec<usize>> = configs.into_iter().collect();
    let entries: Vec<(Mask, Complex64)> = set
        .into_iter()
        .map(|bonds| (Mask::from_bits(lat.num_bonds(), bonds), Complex64::new(1.0, 0.0)))
        .collect();
    let mut s = SparseState::from_amplitudes(lat, 0, entries).ok()?;
    s.normalize();
    Some(s)
}

/// Product over strips of resonating plaquettes on YC-2. Plaquette A holds one
/// of the two vertical bonds, plaquette B one of the two slanted pairs; the
/// strips alternate, starting with A when the left edge is untouched.
pub fn plaquette_state(lat: &Lattice, start_with_a: bool) -> SparseState {
    assert_eq!((lat.orientation(), lat.n()), (Orientation::YC, 1));
    let mut configs: Vec<Vec<usize>> = vec![vec![]];
    for m in 0..lat.m() as i64 {
        let a = (m % 2 == 0) == start_with_a;
        let choices: [Vec<usize>; 2] = if a {
            [vec![lat.bond(m, 1, 3)], vec![lat.bond(m, 2, 3)]]
        } else {
            [
                vec![lat.bond(m, 1, 1), lat.bond(m, 2, 1)],
                vec![lat.bond(m, 1, 2), lat.bond(m, 2, 2)],
            ]
        };
        configs = configs
            .into_iter()
            .flat_map(|c| choices.iter().map(move |ch| c.iter().chain(ch).copied().collect()))
            .collect();
    }
    from_configs(lat, configs)
}

/// Slot image under top/bottom reflection of a unit.
const REFLECT: [u8; 6] = [4, 3, 2, 1, 6, 5];

/// Bond-dimension-2 hourglass state on XC-4: units ordered along the
/// cylinder, alternating the two unit matrices starting with `first`, with
/// left boundary rows `left` summed and a free right boundary. Neighbouring units
/// meet with a top/bottom twist, so units carrying matrix `flipped` are read
/// in the vertically reflected frame. `None` if the contraction produces a
/// blockade violation.
pub fn hourglass_state(lat: &Lattice, first: usize, left: &[usize], flipped: usize) -> Option<SparseState> {
    assert_eq!((lat.orientation(), lat.n()), (Orientation::XC, 2));
    let h = hourglass_mps();
    let mats = [&h.m1, &h.m2];
    // units sorted by the x coordinate of their bottom edge
    let mut units: Vec<(i64, i64, i64)> = Vec::new();
    for m in 0..lat.m() as i64 {
        for n in 1..=2i64 {
            let [a, b] = lat.endpoints(lat.bond(m, n, 1));
            let x = lat.vertex_info(a).x.min(lat.vertex_info(b).x);
            units.push((x, m, n));
        }
    }
    units.sort_unstable();
    // (row index, bonds so far)
    let mut paths: Vec<(usize, Vec<usize>)> = left.iter().map(|&r| (r, vec![])).collect();
    for (k, &(_, m, n)) in units.iter().enumerate() {
        let which = (first + k) % 2;
        let mat = mats[which];
        let slot = |s: u8| if which == flipped { REFLECT[s as usize - 1] } else { s };
        let mut next = Vec::new();
        for (row, bonds) in &paths {
            for col in 0..mat.cols() {
                for slots in &mat.0[*row][col] {
                    let mut b = bonds.clone();
                    b.extend(slots.iter().map(|&s| lat.bond(m, n, slot(s))));
                    next.push((col, b));
                }
            }
        }
        paths = next;
    }
    try_from_configs(lat, paths.into_iter().map(|(_, b)| b))
}

/// Uniform superposition of enumerated covers in a cylinder sector.
pub fn enumerated_sector(lat: &Lattice, parity: i8) -> SparseState {
    let covers = enumerate_covers_with(
        lat,
        &BoundaryCondition::Sector(SectorLabel::Cylinder { parity }),
        Backend::StripByStrip,
        usize::MAX,
    )
    .unwrap();
    let entries: Vec<(Mask, Complex64)> = covers.into_iter().map(|c| (c.mask, Complex64::new(1.0, 0.0))).collect();
    let mut s = SparseState::from_amplitudes(lat, 0, entries).unwrap();
    s.normalize();
    s
}

/// Number of touched left-edge vertices of strip 0.
pub fn left_weight(lat: &Lattice, mask: &Mask) -> usize {
    left_pattern(lat, mask, 0).iter().filter(|&&b| b).count()
}

/// Support of a state as a sorted list of masks.
pub fn support(s: &SparseState) -> Vec<Mask> {
    s.iter().map(|(m, _)| m.clone()).collect()
}
