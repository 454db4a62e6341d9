//! Invariants of geometry, enumeration, strip labels, string operators and
//! the state container.

mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rkforge::coverings::{
    apply_x_string, enumerate_covers, enumerate_covers_with, hexagon_loops, is_valid, loop_winding, sector_of,
    x_strip_loop, z_circumferential, z_sign, Backend, BoundaryCondition, DimerCover, SectorLabel,
};
use rkforge::simstate::SparseState;
use rkforge::strips::{assemble, decode_all};
use rkforge::{build_lattice, Closure, Lattice, Mask, Orientation};

/// Lattices small enough for the exhaustive backend.
fn small_lattice() -> impl Strategy<Value = Lattice> {
    prop_oneof![
        (1usize..=2, 1usize..=3).prop_map(|(n, m)| (Orientation::YC, n, m, Closure::OpenCylinder)),
        (1usize..=3).prop_map(|m| (Orientation::XC, 2, m, Closure::OpenCylinder)),
        prop_oneof![Just(2usize), Just(4)].prop_map(|m| (Orientation::YC, 1, m, Closure::Torus)),
        Just((Orientation::XC, 2, 2, Closure::Torus)),
    ]
    .prop_map(|(o, n, m, c)| build_lattice(o, n, m, c).unwrap())
}

fn covers(lat: &Lattice) -> Vec<DimerCover> {
    enumerate_covers(lat, &BoundaryCondition::Free).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bond_addressing_round_trips(lat in small_lattice()) {
        prop_assert_eq!(lat.num_bonds(), 6 * lat.n() * lat.m());
        for b in 0..lat.num_bonds() {
            prop_assert_eq!(lat.bond_index(lat.bond_id(b)), Some(b));
            prop_assert!(lat.strip_bonds(lat.strip_of(b)).contains(&b));
            for &c in lat.blockade_neighbors(b) {
                prop_assert!(lat.blockaded(c, b));
                let [p, q] = lat.endpoints(b);
                prop_assert!(lat.endpoints(c).iter().any(|v| *v == p || *v == q));
            }
        }
    }

    #[test]
    fn backends_agree(lat in small_lattice()) {
        let a = covers(&lat);
        let b = enumerate_covers_with(&lat, &BoundaryCondition::Free, Backend::StripByStrip, usize::MAX).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|c| is_valid(&lat, c)));
    }

    #[test]
    fn sectors_partition_covers(lat in small_lattice()) {
        let all = covers(&lat);
        let labels: Vec<SectorLabel> = if lat.is_torus() {
            (0..2).flat_map(|mx| (0..2).map(move |my| SectorLabel::Torus { mx, my })).collect()
        } else {
            vec![SectorLabel::Cylinder { parity: 1 }, SectorLabel::Cylinder { parity: -1 }]
        };
        let mut total = 0;
        for l in labels {
            let part = enumerate_covers(&lat, &BoundaryCondition::Sector(l)).unwrap();
            prop_assert!(part.iter().all(|c| sector_of(&lat, c).unwrap() == l));
            total += part.len();
        }
        prop_assert_eq!(total, all.len());
    }

    #[test]
    fn strip_labels_reassemble(lat in small_lattice(), pick in any::<prop::sample::Index>()) {
        let all = covers(&lat);
        let c = &all[pick.index(all.len())];
        let labels = decode_all(&lat, c).unwrap();
        prop_assert_eq!(&assemble(&lat, &labels).unwrap(), c);
    }

    #[test]
    fn contractible_x_loops_keep_sector(lat in small_lattice(), pick in any::<prop::sample::Index>(), h in any::<prop::sample::Index>()) {
        let all = covers(&lat);
        let c = &all[pick.index(all.len())];
        let hexes: Vec<_> = hexagon_loops(&lat).into_iter().filter(|h| loop_winding(&lat, h) == (0, 0)).collect();
        prop_assume!(!hexes.is_empty());
        let x = apply_x_string(&lat, c, &hexes[h.index(hexes.len())]).unwrap();
        prop_assert!(is_valid(&lat, &x));
        prop_assert_eq!(sector_of(&lat, &x).unwrap(), sector_of(&lat, c).unwrap());
    }

    #[test]
    fn x_strip_loop_keeps_cover_valid(lat in small_lattice(), pick in any::<prop::sample::Index>()) {
        let all = covers(&lat);
        let c = &all[pick.index(all.len())];
        for m in 0..lat.m() {
            let x = apply_x_string(&lat, c, &x_strip_loop(&lat, m)).unwrap();
            prop_assert!(is_valid(&lat, &x));
            for j in 0..lat.m() {
                let z = z_circumferential(&lat, j);
                prop_assert_eq!(z_sign(&x.mask, &z), z_sign(&c.mask, &z));
            }
        }
    }

    #[test]
    fn strip_x_loops_flip_only_mx(lat in small_lattice(), pick in any::<prop::sample::Index>()) {
        prop_assume!(lat.is_torus());
        let all = covers(&lat);
        let c = &all[pick.index(all.len())];
        let SectorLabel::Torus { mx, my } = sector_of(&lat, c).unwrap() else { unreachable!() };
        for m in 0..lat.m() {
            let x = apply_x_string(&lat, c, &x_strip_loop(&lat, m)).unwrap();
            prop_assert_eq!(sector_of(&lat, &x).unwrap(), SectorLabel::Torus { mx: 1 - mx, my });
        }
    }

    #[test]
    fn dump_load_round_trips(lat in small_lattice(), amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..12)) {
        let all = covers(&lat);
        let entries: Vec<(Mask, Complex64)> = all
            .iter()
            .zip(&amps)
            .map(|(c, &(re, im))| (c.mask.clone(), Complex64::new(re, im)))
            .collect();
        let s = SparseState::from_amplitudes(&lat, 0, entries).unwrap();
        let (t, lat2) = SparseState::load(&s.dump()).unwrap();
        prop_assert_eq!(lat2.spec(), lat.spec());
        prop_assert_eq!(t.support_len(), s.support_len());
        for (m, a) in s.iter() {
            prop_assert!((t.get(m) - a).norm() < 1e-15);
        }
    }

    #[test]
    fn cylinder_protocol_is_uniform(
        (o, n, m) in prop_oneof![
            (1usize..=2, 1usize..=4).prop_map(|(n, m)| (Orientation::YC, n, m)),
            (2usize..=3).prop_map(|m| (Orientation::XC, 2, m)),
        ],
        parity in prop_oneof![Just(1i8), Just(-1i8)],
    ) {
        let lat = cylinder(o, n, m);
        let st = prepared(&lat, parity);
        prop_assert!((st.norm_sq() - 1.0).abs() < 1e-12);
        prop_assert!(st.is_real_nonnegative(1e-12));
        let (lo, hi) = st.magnitude_range();
        prop_assert!(hi - lo < 1e-12);
        let want = enumerated_sector(&lat, parity);
        prop_assert_eq!(support(&st), support(&want));
    }
}

#[test]
fn exhaustive_guard_rejects_large_lattices() {
    let lat = cylinder(Orientation::YC, 2, 4);
    assert!(enumerate_covers(&lat, &BoundaryCondition::Free).is_err());
    assert!(enumerate_covers_with(&lat, &BoundaryCondition::Free, Backend::StripByStrip, 0).is_ok());
}

#[test]
fn blockade_violations_are_rejected() {
    let lat = cylinder(Orientation::YC, 1, 2);
    let b = lat.blockade_neighbors(0)[0];
    let bad = Mask::from_bits(lat.num_bonds(), [0, b]);
    assert!(SparseState::from_amplitudes(&lat, 0, [(bad, Complex64::new(1.0, 0.0))]).is_err());
}
