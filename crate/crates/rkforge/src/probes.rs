//! String-operator measurements, basis rotation, anyon pairs and ancilla
//! interferometry.
//!
//! Probes that move dimers off a valid cover switch the state to the
//! triangle-only blockade, so defect configurations remain representable.

use crate::coverings::{x_string_image, z_loop_around, StringKind, StringPath};
use crate::error::{Result, RkError};
use crate::gates::{apply_in_place, rotation_area, GateApplication};
use crate::lattice::Lattice;
use crate::mask::Mask;
use crate::simstate::{Constraint, SparseState};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Anyon species.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    /// End of an open X-string; sits on a vertex.
    E,
    /// End of an open Z-string; sits beside the end bond it crosses.
    M,
}

/// Where an anyon sits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnyonLocation {
    Vertex(usize),
    Crossing(usize),
}

/// One member of a created anyon pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnyonRecord {
    pub species: Species,
    pub location: AnyonLocation,
    pub path: StringPath,
}

/// Machine-readable probe outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub probe: String,
    pub path: Vec<usize>,
    pub exact: f64,
    pub estimate: Option<f64>,
    pub shots: usize,
    pub seed: u64,
}

fn need_x(path: &StringPath) -> Result<()> {
    if path.kind != StringKind::X {
        return Err(RkError::InvalidRearrangement {
            reason: "expected an X-string".into(),
        });
    }
    Ok(())
}

fn sign(m: &Mask, bonds: &[usize]) -> f64 {
    if bonds.iter().filter(|&&b| m.get(b)).count() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exact `<Z_path>` from the amplitudes.
pub fn z_string_expectation(state: &SparseState, path: &StringPath) -> f64 {
    let n = state.norm_sq();
    state
        .iter()
        .map(|(m, a)| a.norm_sqr() * sign(m, &path.bonds))
        .sum::<f64>()
        / n
}

/// `<Z_path>` estimated from `shots` projective measurements.
pub fn z_string_sampled(state: &SparseState, path: &StringPath, shots: usize, seed: u64) -> f64 {
    let samples = state.sample_many(shots, seed);
    samples.iter().map(|m| sign(m, &path.bonds)).sum::<f64>() / shots as f64
}

/// Exact `<X_path>` for the real rearranging X-string.
pub fn x_string_expectation(lat: &Lattice, state: &SparseState, path: &StringPath) -> Result<f64> {
    need_x(path)?;
    crate::coverings::check_x_path(lat, path)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, a) in state.iter() {
        let img = x_string_image(lat, m, path)?;
        acc += state.get(&img).conj() * a;
    }
    Ok(acc.re / state.norm_sq())
}

/// Phase picked up by one X-segment under the rotation-defined operator:
/// `-i` when a dimer is created on the segment, `+i` when removed.
fn dressed_phase(lat: &Lattice, m: &Mask, edge: usize) -> Complex64 {
    let tri = lat.triangles()[lat.triangle_of(edge)];
    let occ = tri.bonds.iter().filter(|&&b| m.get(b)).count();
    match (occ, m.get(edge)) {
        (0, _) => Complex64::new(0.0, -1.0),
        (1, true) => Complex64::new(0.0, 1.0),
        _ => Complex64::new(1.0, 0.0),
    }
}

/// Exact `<X'_path>` where `X'` is the segment operator that the triangle
/// rotation maps the corner Z-operator onto. It equals the real X-string up
/// to a diagonal phase gauge on the path.
pub fn dressed_x_expectation(lat: &Lattice, state: &SparseState, path: &StringPath) -> Result<Complex64> {
    need_x(path)?;
    crate::coverings::check_x_path(lat, path)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, a) in state.iter() {
        let mut cur = m.clone();
        let mut phase = Complex64::new(1.0, 0.0);
        for &e in &path.bonds {
            phase *= dressed_phase(lat, &cur, e);
            crate::coverings::x_string_image(
                lat,
                &cur,
                &StringPath {
                    kind: StringKind::X,
                    bonds: vec![e],
                    closed: false,
                },
            )
            .map(|n| cur = n)?;
        }
        acc += state.get(&cur).conj() * a * phase;
    }
    Ok(acc / state.norm_sq())
}

/// Copy of the state under the triangle-only blockade.
pub fn with_triangle_blockade(lat: &Lattice, state: &SparseState) -> Result<SparseState> {
    let mut s = state.clone();
    if *s.constraint() != Constraint::TrianglesOnly {
        s.set_constraint(lat, Constraint::TrianglesOnly)?;
    }
    Ok(s)
}

/// Rotate each listed triangle with pulse area `4 pi / (3 sqrt 3)`.
pub fn triangle_rotation(lat: &Lattice, state: &SparseState, triangles: &[[usize; 3]]) -> Result<SparseState> {
    triangle_rotation_with(lat, state, triangles, rotation_area())
}

/// Rotate triangles with an arbitrary pulse area.
pub fn triangle_rotation_with(
    lat: &Lattice,
    state: &SparseState,
    triangles: &[[usize; 3]],
    angle: f64,
) -> Result<SparseState> {
    let mut s = with_triangle_blockade(lat, state)?;
    for t in triangles {
        let mut g = GateApplication::triangle_rotation(*t, angle);
        g.angle = Some(angle);
        apply_in_place(&mut s, &g)?;
    }
    Ok(s)
}

/// Triangles of an X path together with the corner Z-operator that the
/// rotation maps onto each segment.
pub fn rotation_plan(lat: &Lattice, path: &StringPath) -> (Vec<[usize; 3]>, StringPath) {
    let mut tris = Vec::new();
    let mut corner = Vec::new();
    for &e in &path.bonds {
        let t = lat.triangles()[lat.triangle_of(e)];
        tris.push(t.bonds);
        corner.extend(t.bonds.iter().copied().filter(|&b| b != e));
    }
    corner.sort_unstable();
    (tris, StringPath::z(corner, path.closed))
}

/// Measure an X-string by rotating its triangles and reading Z corners.
pub fn x_string_via_rotation(lat: &Lattice, state: &SparseState, path: &StringPath) -> Result<f64> {
    need_x(path)?;
    crate::coverings::check_x_path(lat, path)?;
    let (tris, z) = rotation_plan(lat, path);
    let rotated = triangle_rotation(lat, state, &tris)?;
    Ok(z_string_expectation(&rotated, &z))
}

/// Act with an open string and report the two anyons it leaves behind.
pub fn create_anyon_pair(
    lat: &Lattice,
    state: &SparseState,
    path: &StringPath,
) -> Result<(SparseState, [AnyonRecord; 2])> {
    if path.closed || path.bonds.is_empty() {
        return Err(RkError::InvalidRearrangement {
            reason: "anyon pairs need an open, non-empty string".into(),
        });
    }
    let mut s = with_triangle_blockade(lat, state)?;
    let mut out: BTreeMap<Mask, Complex64> = BTreeMap::new();
    let (species, ends) = match path.kind {
        StringKind::Z => {
            for (m, a) in s.iter() {
                out.insert(m.clone(), a * sign(m, &path.bonds));
            }
            let n = path.bonds.len();
            (
                Species::M,
                [
                    AnyonLocation::Crossing(path.bonds[0]),
                    AnyonLocation::Crossing(path.bonds[n - 1]),
                ],
            )
        }
        StringKind::X => {
            crate::coverings::check_x_path(lat, path)?;
            for (m, a) in s.iter() {
                let img = x_string_image(lat, m, path)?;
                if let Some((p, q)) = s.violation(&img) {
                    return Err(RkError::InvalidRearrangement {
                        reason: format!("bonds {p} and {q} would both be occupied in one triangle"),
                    });
                }
                *out.entry(img).or_default() += a;
            }
            let (a, b) = crate::coverings::x_endpoints(lat, path).expect("open path");
            (Species::E, [AnyonLocation::Vertex(a), AnyonLocation::Vertex(b)])
        }
    };
    s.set_amplitudes(out);
    let rec = |location| AnyonRecord {
        species,
        location,
        path: path.clone(),
    };
    let [l0, l1] = ends;
    Ok((s, [rec(l0), rec(l1)]))
}

/// Closed Z-loop around an even number of sites.
pub fn even_loop(lat: &Lattice, sites: &[usize]) -> Result<StringPath> {
    if sites.len() % 2 == 1 {
        return Err(RkError::OddLoop { sites: sites.len() });
    }
    for &v in sites {
        if v >= lat.num_vertices() {
            return Err(RkError::UnknownVertex(v));
        }
    }
    Ok(z_loop_around(lat, sites))
}

/// Result of an interferometry run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interferometry {
    /// Exact probability of reading the ancilla as 1.
    pub exact: f64,
    /// Fraction of sampled shots reading 1.
    pub estimate: f64,
    pub shots: usize,
    pub seed: u64,
    /// Phase `phi` recovered from the exact probability.
    pub phase: f64,
}

impl Interferometry {
    pub fn record(&self, path: &StringPath) -> ProbeRecord {
        ProbeRecord {
            probe: "semion".into(),
            path: path.bonds.clone(),
            exact: self.exact,
            estimate: Some(self.estimate),
            shots: self.shots,
            seed: self.seed,
        }
    }
}

/// Ancilla interferometry around the sites in `sites`: Hadamard on a fresh
/// ancilla, a Z-string along the loop active while the ancilla reads 0, a
/// second Hadamard, then measurement.
pub fn semion_interferometry(
    lat: &Lattice,
    state: &SparseState,
    sites: &[usize],
    shots: usize,
    seed: u64,
) -> Result<Interferometry> {
    let path = even_loop(lat, sites)?;
    let mut s = state.with_extra_ancillas(1);
    let anc = s.num_qubits() - 1;
    apply_in_place(&mut s, &GateApplication::h1c1t(vec![], anc))?;
    apply_in_place(&mut s, &GateApplication::cz_string(vec![anc], path.bonds.clone()))?;
    apply_in_place(&mut s, &GateApplication::h1c1t(vec![], anc).any_targets())?;
    let norm = s.norm_sq();
    let exact = s
        .iter()
        .filter(|(m, _)| m.get(anc))
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        / norm;
    let estimate = if shots == 0 {
        exact
    } else {
        let hits = s.sample_many(shots, seed).iter().filter(|m| m.get(anc)).count();
        hits as f64 / shots as f64
    };
    Ok(Interferometry {
        exact,
        estimate,
        shots,
        seed,
        phase: (1.0 - 2.0 * exact).clamp(-1.0, 1.0).acos(),
    })
}

/// A planted e-anyon pair with a loop of two sites enclosing exactly one end.
pub struct PlantedPair {
    pub state: SparseState,
    pub anyons: [AnyonRecord; 2],
    /// Sites inside the probe loop.
    pub enclosing: Vec<usize>,
    /// Sites inside a loop of the same size that encloses neither end.
    pub empty: Vec<usize>,
}

/// Plant an e-anyon pair with a single X-segment on a triangle away from
/// open boundaries.
pub fn plant_e_pair(lat: &Lattice, state: &SparseState) -> Result<PlantedPair> {
    let tri = lat
        .triangles()
        .iter()
        .find(|t| t.vertices.iter().all(|&v| !lat.is_exempt(v)))
        .copied()
        .ok_or_else(|| RkError::InvalidSize {
            reason: "no triangle away from the open edges".into(),
        })?;
    let edge = tri.bonds[0];
    let [a, b] = lat.endpoints(edge);
    let c = *tri.vertices.iter().find(|&&v| v != a && v != b).expect("third vertex");
    let path = StringPath {
        kind: StringKind::X,
        bonds: vec![edge],
        closed: false,
    };
    let (s, anyons) = create_anyon_pair(lat, state, &path)?;
    // a second pair of adjacent sites that avoids both anyons
    let far = lat
        .triangles()
        .iter()
        .find(|t| t.vertices.iter().all(|&v| v != a && v != b && !lat.is_exempt(v)))
        .map(|t| vec![t.vertices[0], t.vertices[1]])
        .unwrap_or_default();
    Ok(PlantedPair {
        state: s,
        anyons,
        enclosing: vec![a, c],
        empty: far,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverings::{hexagon_loops, z_circumferential};
    use crate::lattice::{build_lattice, Closure, Orientation};
    use crate::mps::build_rk;

    fn rk(lat: &Lattice) -> SparseState {
        build_rk(lat, None).unwrap().expand(lat).unwrap()
    }

    #[test]
    fn vertex_loops_have_parity_sign() {
        let lat = build_lattice(Orientation::YC, 2, 2, Closure::Torus).unwrap();
        let s = rk(&lat);
        let tri = lat.triangles()[0];
        let one = z_loop_around(&lat, &tri.vertices[..1]);
        let two = z_loop_around(&lat, &tri.vertices[..2]);
        assert!((z_string_expectation(&s, &one) + 1.0).abs() < 1e-12);
        assert!((z_string_expectation(&s, &two) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circumferential_mixture_averages_out() {
        let lat = build_lattice(Orientation::YC, 1, 2, Closure::OpenCylinder).unwrap();
        let s = rk(&lat);
        assert!(z_string_expectation(&s, &z_circumferential(&lat, 0)).abs() < 1e-12);
    }

    #[test]
    fn rotation_pipeline_matches_dressed_string() {
        let lat = build_lattice(Orientation::YC, 1, 2, Closure::OpenCylinder).unwrap();
        let s = rk(&lat);
        let x = crate::coverings::x_horizontal(&lat).unwrap();
        let piped = x_string_via_rotation(&lat, &s, &x).unwrap();
        let direct = dressed_x_expectation(&lat, &s, &x).unwrap();
        assert!((piped - direct.re).abs() < 1e-10 && direct.im.abs() < 1e-10);
    }

    #[test]
    fn semion_phase() {
        let lat = build_lattice(Orientation::YC, 2, 2, Closure::Torus).unwrap();
        let s = rk(&lat);
        let p = plant_e_pair(&lat, &s).unwrap();
        let on = semion_interferometry(&lat, &p.state, &p.enclosing, 0, 1).unwrap();
        let off = semion_interferometry(&lat, &s, &p.enclosing, 0, 1).unwrap();
        assert!((on.exact - 1.0).abs() < 1e-12 && off.exact.abs() < 1e-12);
        assert!(matches!(even_loop(&lat, &[0]), Err(RkError::OddLoop { sites: 1 })));
    }

    #[test]
    fn z_corner_flips_hexagon() {
        let lat = build_lattice(Orientation::YC, 2, 2, Closure::Torus).unwrap();
        let s = rk(&lat);
        let h = hexagon_loops(&lat).remove(0);
        let before = x_string_expectation(&lat, &s, &h).unwrap();
        let e = h.bonds[0];
        let [a, _] = lat.endpoints(e);
        let t = lat.triangles()[lat.triangle_of(e)];
        let corner: Vec<usize> = t
            .bonds
            .iter()
            .copied()
            .filter(|&b| lat.endpoints(b).contains(&a))
            .collect();
        let (m, _) = create_anyon_pair(&lat, &s, &StringPath::z(corner, false)).unwrap();
        let after = x_string_expectation(&lat, &m, &h).unwrap();
        assert!((before - 1.0).abs() < 1e-12 && (after + 1.0).abs() < 1e-12);
    }
}
