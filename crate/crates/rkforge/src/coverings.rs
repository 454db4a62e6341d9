//! Dimer coverings: validation, enumeration, string operators and sectors.
//!
//! A Z-string is stored as the set of bonds it crosses; its eigenvalue on a
//! cover is `(-1)^(occupied crossings)`. An X-string is stored as the
//! sequence of lattice edges it traverses. Each edge `e = ab` of triangle
//! `abc` acts on that triangle as the involution `empty <-> e`, `ac <-> bc`,
//! which toggles whether `a` and `b` are touched by the triangle.

use crate::error::{Result, RkError};
use crate::lattice::{Lattice, Orientation, Side, VertexKind};
use crate::mask::Mask;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Default bond-count guard for exhaustive enumeration.
pub const EXHAUSTIVE_BOND_LIMIT: usize = 40;

/// Dimer occupation over lattice bonds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DimerCover {
    pub mask: Mask,
}

impl DimerCover {
    pub fn new(mask: Mask) -> Self {
        DimerCover { mask }
    }
    pub fn empty(lat: &Lattice) -> Self {
        DimerCover {
            mask: Mask::zeros(lat.num_bonds()),
        }
    }
    pub fn from_bonds(lat: &Lattice, bonds: impl IntoIterator<Item = usize>) -> Self {
        DimerCover {
            mask: Mask::from_bits(lat.num_bonds(), bonds),
        }
    }
    pub fn has(&self, bond: usize) -> bool {
        self.mask.get(bond)
    }
    pub fn to_hex(&self, lat: &Lattice) -> String {
        self.mask.to_hex(lat.num_bonds())
    }
    pub fn from_hex(lat: &Lattice, s: &str) -> Result<Self> {
        Mask::from_hex(s, lat.num_bonds())
            .map(DimerCover::new)
            .ok_or_else(|| RkError::Parse(format!("bad cover hex {s:?}")))
    }
}

/// Number of occupied bonds touching vertex `v`.
pub fn touch_count(lat: &Lattice, mask: &Mask, v: usize) -> usize {
    lat.incidence()[v].iter().filter(|&&b| mask.get(b)).count()
}

/// Exactly-one-dimer rule at every non-exempt vertex; at most one at exempt tips.
pub fn is_valid(lat: &Lattice, cover: &DimerCover) -> bool {
    is_valid_mask(lat, &cover.mask)
}

pub fn is_valid_mask(lat: &Lattice, mask: &Mask) -> bool {
    (0..lat.num_vertices()).all(|v| {
        let c = touch_count(lat, mask, v);
        c == 1 || (c == 0 && lat.is_exempt(v))
    })
}

/// Vertices violating the dimer rule.
pub fn defects(lat: &Lattice, mask: &Mask) -> Vec<usize> {
    (0..lat.num_vertices())
        .filter(|&v| {
            let c = touch_count(lat, mask, v);
            !(c == 1 || (c == 0 && lat.is_exempt(v)))
        })
        .collect()
}

/// Topological sector label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectorLabel {
    /// Circumferential Z-loop eigenvalue at the first strip (`+1` or `-1`).
    Cylinder { parity: i8 },
    /// Torus labels `(m_x, m_y)`.
    Torus { mx: u8, my: u8 },
}

/// Touch pattern of strip `m` on its left boundary vertices (`L`).
pub fn left_pattern(lat: &Lattice, mask: &Mask, m: usize) -> Vec<bool> {
    side_pattern(lat, mask, m, Side::Left)
}

/// Touch pattern of strip `m` on its right boundary vertices (`R`).
pub fn right_pattern(lat: &Lattice, mask: &Mask, m: usize) -> Vec<bool> {
    side_pattern(lat, mask, m, Side::Right)
}

fn side_pattern(lat: &Lattice, mask: &Mask, m: usize, side: Side) -> Vec<bool> {
    let verts = match side {
        Side::Left => lat.left_vertices(m),
        Side::Right => lat.right_vertices(m),
    };
    let range = lat.strip_bonds(m);
    verts
        .iter()
        .map(|&v| lat.incidence()[v].iter().any(|&b| range.contains(&b) && mask.get(b)))
        .collect()
}

/// Anchor bit of strip `m`: its first cycle vertex is touched by the first
/// cycle triangle.
pub fn u_bit(lat: &Lattice, mask: &Mask, m: usize) -> bool {
    let t = lat.strip_cycle(m)[0];
    mask.get(t.bonds[0]) || mask.get(t.bonds[2])
}

/// Sector of a valid cover.
pub fn sector_of(lat: &Lattice, cover: &DimerCover) -> Result<SectorLabel> {
    if !is_valid(lat, cover) {
        return Err(RkError::InvalidCover);
    }
    Ok(sector_of_unchecked(lat, &cover.mask))
}

pub(crate) fn sector_of_unchecked(lat: &Lattice, mask: &Mask) -> SectorLabel {
    let l0 = left_pattern(lat, mask, 0).iter().filter(|&&b| b).count();
    if lat.is_torus() {
        SectorLabel::Torus {
            mx: (z_sign(mask, &z_longitudinal(lat)) == -1) as u8,
            my: (l0 % 2) as u8,
        }
    } else {
        SectorLabel::Cylinder {
            parity: if l0 % 2 == 0 { 1 } else { -1 },
        }
    }
}

/// Strip dimer counts `(left-touching, right-touching, interior)`.
pub fn strip_counts(lat: &Lattice, mask: &Mask, m: usize) -> (usize, usize, usize) {
    let (mut l, mut r, mut mid) = (0, 0, 0);
    for t in lat.strip_cycle(m) {
        for (k, &b) in t.bonds.iter().enumerate() {
            if !mask.get(b) {
                continue;
            }
            match (k, t.side) {
                (2, _) => mid += 1,
                (_, Side::Left) => l += 1,
                (_, Side::Right) => r += 1,
            }
        }
    }
    (l, r, mid)
}

/// Filter applied to enumerated covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    Free,
    /// Fixed left-edge touch pattern of strip 0.
    LeftPattern(Vec<bool>),
    Sector(SectorLabel),
}

/// Enumeration strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Vertex-driven backtracking over all bonds, guarded by a bond limit.
    Exhaustive,
    /// Strip-local configurations joined across shared boundary vertices.
    StripByStrip,
}

/// Enumerate with the exhaustive backend and the default guard.
pub fn enumerate_covers(lat: &Lattice, bc: &BoundaryCondition) -> Result<Vec<DimerCover>> {
    enumerate_covers_with(lat, bc, Backend::Exhaustive, EXHAUSTIVE_BOND_LIMIT)
}

/// Enumerate all valid covers satisfying `bc`, in ascending mask order.
pub fn enumerate_covers_with(
    lat: &Lattice,
    bc: &BoundaryCondition,
    backend: Backend,
    limit: usize,
) -> Result<Vec<DimerCover>> {
    let masks = match backend {
        Backend::Exhaustive => {
            if lat.num_bonds() > limit {
                return Err(RkError::TooLarge {
                    bonds: lat.num_bonds(),
                    limit,
                });
            }
            exhaustive(lat)
        }
        Backend::StripByStrip => strip_join(lat),
    };
    let mut out: Vec<DimerCover> = masks
        .into_iter()
        .filter(|m| match bc {
            BoundaryCondition::Free => true,
            BoundaryCondition::LeftPattern(l) => &left_pattern(lat, m, 0) == l,
            BoundaryCondition::Sector(s) => sector_of_unchecked(lat, m) == *s,
        })
        .map(DimerCover::new)
        .collect();
    out.sort();
    Ok(out)
}

fn exhaustive(lat: &Lattice) -> Vec<Mask> {
    let nv = lat.num_vertices();
    let mut covered = vec![0u8; nv];
    let mut mask = Mask::zeros(lat.num_bonds());
    let mut out = Vec::new();
    fn rec(lat: &Lattice, start: usize, covered: &mut [u8], mask: &mut Mask, out: &mut Vec<Mask>) {
        let Some(v) = (start..covered.len()).find(|&v| covered[v] == 0 && !lat.is_exempt(v)) else {
            out.push(mask.clone());
            return;
        };
        for &b in &lat.incidence()[v] {
            let [p, q] = lat.endpoints(b);
            let w = if p == v { q } else { p };
            if covered[w] != 0 {
                continue;
            }
            covered[v] = 1;
            covered[w] = 1;
            mask.set(b, true);
            rec(lat, v + 1, covered, mask, out);
            mask.set(b, false);
            covered[v] = 0;
            covered[w] = 0;
        }
    }
    rec(lat, 0, &mut covered, &mut mask, &mut out);
    out
}

/// Strip-local configurations: internal vertices covered once, each boundary
/// vertex at most once by this strip.
fn strip_local(lat: &Lattice, m: usize) -> Vec<(Mask, Vec<bool>, Vec<bool>)> {
    let bonds: Vec<usize> = lat.strip_bonds(m).collect();
    let internal: Vec<usize> = lat.strip_cycle(m).iter().map(|t| t.upper).collect();
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut used: HashMap<usize, bool> = HashMap::new();
    fn rec(
        lat: &Lattice,
        bonds: &[usize],
        internal: &[usize],
        k: usize,
        chosen: &mut Vec<usize>,
        used: &mut HashMap<usize, bool>,
        out: &mut Vec<Mask>,
    ) {
        if k == bonds.len() {
            if internal.iter().all(|v| used.get(v).copied().unwrap_or(false)) {
                out.push(Mask::from_bits(lat.num_bonds(), chosen.iter().copied()));
            }
            return;
        }
        rec(lat, bonds, internal, k + 1, chosen, used, out);
        let [p, q] = lat.endpoints(bonds[k]);
        if !used.get(&p).copied().unwrap_or(false) && !used.get(&q).copied().unwrap_or(false) {
            used.insert(p, true);
            used.insert(q, true);
            chosen.push(bonds[k]);
            rec(lat, bonds, internal, k + 1, chosen, used, out);
            chosen.pop();
            used.insert(p, false);
            used.insert(q, false);
        }
    }
    let mut masks = Vec::new();
    rec(lat, &bonds, &internal, 0, &mut chosen, &mut used, &mut masks);
    for mk in masks {
        let l = left_pattern(lat, &mk, m);
        let r = right_pattern(lat, &mk, m);
        out.push((mk, l, r));
    }
    out
}

fn strip_join(lat: &Lattice) -> Vec<Mask> {
    let m = lat.m();
    let locals: Vec<_> = (0..m).map(|s| strip_local(lat, s)).collect();
    let mut by_left: Vec<HashMap<Vec<bool>, Vec<usize>>> = Vec::new();
    for loc in &locals {
        let mut h: HashMap<Vec<bool>, Vec<usize>> = HashMap::new();
        for (i, (_, l, _)) in loc.iter().enumerate() {
            h.entry(l.clone()).or_default().push(i);
        }
        by_left.push(h);
    }
    let mut out = Vec::new();
    for (i0, (mk0, l0, r0)) in locals[0].iter().enumerate() {
        let _ = i0;
        let mut stack: Vec<(usize, Mask, Vec<bool>)> = vec![(1, mk0.clone(), r0.clone())];
        while let Some((s, acc, r)) = stack.pop() {
            if s == m {
                if lat.is_torus() {
                    let need = lat.wrapped_complement(&r);
                    if &need != l0 {
                        continue;
                    }
                }
                out.push(acc);
                continue;
            }
            let need: Vec<bool> = r.iter().map(|b| !b).collect();
            if let Some(cands) = by_left[s].get(&need) {
                for &c in cands {
                    let (mk, _, rr) = &locals[s][c];
                    let mut a = acc.clone();
                    a.or_assign(mk);
                    stack.push((s + 1, a, rr.clone()));
                }
            }
        }
    }
    out
}

/// Kind of string operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StringKind {
    Z,
    X,
}

/// String operator path. Z: crossed bonds. X: traversed edges in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringPath {
    pub kind: StringKind,
    pub bonds: Vec<usize>,
    pub closed: bool,
}

impl StringPath {
    pub fn z(bonds: Vec<usize>, closed: bool) -> Self {
        StringPath {
            kind: StringKind::Z,
            bonds,
            closed,
        }
    }
}

/// Z-loop enclosing a vertex set: crosses every bond with exactly one end inside.
pub fn z_loop_around(lat: &Lattice, verts: &[usize]) -> StringPath {
    let inside = |v: usize| verts.contains(&v);
    let bonds = (0..lat.num_bonds())
        .filter(|&b| {
            let [p, q] = lat.endpoints(b);
            inside(p) != inside(q)
        })
        .collect();
    StringPath::z(bonds, true)
}

/// Circumferential Z-loop cutting strip `m` off its left boundary vertices.
pub fn z_circumferential(lat: &Lattice, m: usize) -> StringPath {
    let range = lat.strip_bonds(m);
    let mut bonds: Vec<usize> = lat
        .left_vertices(m)
        .iter()
        .flat_map(|&v| lat.incidence()[v].iter().copied())
        .filter(|b| range.contains(b))
        .collect();
    bonds.sort_unstable();
    StringPath::z(bonds, true)
}

/// Z-loop along the strip direction: the bonds cut by a line running just
/// above the vertex row at height 0. Closed, and non-contractible, on a torus.
pub fn z_longitudinal(lat: &Lattice) -> StringPath {
    // heights in half rows, periodic with `p`
    let p = match lat.orientation() {
        Orientation::YC => 4 * lat.n() as i64,
        Orientation::XC => 2 * lat.n() as i64,
    };
    let height = |v: usize| {
        let info = lat.vertex_info(v);
        match info.kind {
            VertexKind::Tip | VertexKind::Center => 2 * info.y + 1,
            VertexKind::Middle | VertexKind::Column => 2 * info.y,
        }
    };
    let bonds = (0..lat.num_bonds())
        .filter(|&b| {
            let [u, v] = lat.endpoints(b);
            let (a, c) = (height(u), height(v));
            let d = (c - a).rem_euclid(p);
            // a half-period span only occurs for YC-2 verticals, stored bottom first
            let (lo, len) = if d <= p / 2 { (a, d) } else { (c, p - d) };
            (lo == 0 && len >= 1) || lo + len > p
        })
        .collect();
    StringPath::z(bonds, lat.is_torus())
}

/// Eigenvalue `(-1)^(occupied crossings)` of a closed Z-loop.
pub fn z_loop_eigenvalue(cover: &DimerCover, path: &StringPath) -> Result<i8> {
    if !path.closed {
        return Err(RkError::OpenPath);
    }
    Ok(z_sign(&cover.mask, path))
}

/// `(-1)^(occupied crossings)` for any Z path.
pub fn z_sign(mask: &Mask, path: &StringPath) -> i8 {
    let s = path.bonds.iter().filter(|&&b| mask.get(b)).count();
    if s % 2 == 0 {
        1
    } else {
        -1
    }
}

fn shared_vertex(lat: &Lattice, a: usize, b: usize) -> Option<usize> {
    let [p, q] = lat.endpoints(a);
    let [r, s] = lat.endpoints(b);
    [p, q].into_iter().find(|&v| v == r || v == s)
}

/// X-string from a vertex sequence. Consecutive sites must be adjacent and
/// every traversed triangle distinct. For a closed loop the last site is
/// joined back to the first.
pub fn x_from_sites(lat: &Lattice, sites: &[usize], closed: bool) -> Result<StringPath> {
    let bad = |reason: String| RkError::InvalidRearrangement { reason };
    if sites.len() < 2 {
        return Err(bad("an X-string needs at least two sites".into()));
    }
    let mut pairs: Vec<(usize, usize)> = sites.windows(2).map(|w| (w[0], w[1])).collect();
    if closed {
        pairs.push((sites[sites.len() - 1], sites[0]));
    }
    let mut bonds = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let e = lat.incidence()[a]
            .iter()
            .copied()
            .find(|&e| lat.endpoints(e).contains(&b))
            .ok_or_else(|| bad(format!("sites {a} and {b} are not adjacent")))?;
        bonds.push(e);
    }
    let path = StringPath {
        kind: StringKind::X,
        bonds,
        closed,
    };
    check_x_path(lat, &path)?;
    Ok(path)
}

/// Structural checks on an X path.
pub fn check_x_path(lat: &Lattice, path: &StringPath) -> Result<()> {
    let bad = |reason: String| RkError::InvalidRearrangement { reason };
    let mut tris: Vec<usize> = path.bonds.iter().map(|&b| lat.triangle_of(b)).collect();
    let n = path.bonds.len();
    for k in 1..n {
        if shared_vertex(lat, path.bonds[k - 1], path.bonds[k]).is_none() {
            return Err(bad(format!(
                "edges {} and {} are not contiguous",
                path.bonds[k - 1],
                path.bonds[k]
            )));
        }
    }
    if path.closed && n > 1 && shared_vertex(lat, path.bonds[n - 1], path.bonds[0]).is_none() {
        return Err(bad("closed X path does not return to its start".into()));
    }
    tris.sort_unstable();
    if tris.windows(2).any(|w| w[0] == w[1]) {
        return Err(bad("X path visits a triangle twice".into()));
    }
    Ok(())
}

/// End sites of an open X path.
pub fn x_endpoints(lat: &Lattice, path: &StringPath) -> Option<(usize, usize)> {
    if path.closed || path.bonds.is_empty() {
        return None;
    }
    let n = path.bonds.len();
    let first = lat.endpoints(path.bonds[0]);
    let last = lat.endpoints(path.bonds[n - 1]);
    if n == 1 {
        return Some((first[0], first[1]));
    }
    let s0 = shared_vertex(lat, path.bonds[0], path.bonds[1]).expect("contiguous");
    let s1 = shared_vertex(lat, path.bonds[n - 2], path.bonds[n - 1]).expect("contiguous");
    let a = if first[0] == s0 { first[1] } else { first[0] };
    let b = if last[0] == s1 { last[1] } else { last[0] };
    Some((a, b))
}

/// Image of a single X segment on one triangle's occupation.
pub(crate) fn x_segment(lat: &Lattice, mask: &mut Mask, edge: usize) -> Result<()> {
    let tri = lat.triangles()[lat.triangle_of(edge)];
    let occ: Vec<usize> = tri.bonds.iter().copied().filter(|&b| mask.get(b)).collect();
    if occ.len() > 1 {
        return Err(RkError::InvalidRearrangement {
            reason: format!("triangle of bond {edge} holds {} dimers", occ.len()),
        });
    }
    let partner = |b: usize| -> usize {
        // the other bond of the triangle that is not `edge`
        *tri.bonds
            .iter()
            .find(|&&c| c != edge && c != b)
            .expect("triangle has three bonds")
    };
    match occ.first() {
        None => mask.set(edge, true),
        Some(&b) if b == edge => mask.set(edge, false),
        Some(&b) => {
            mask.set(b, false);
            mask.set(partner(b), true);
        }
    }
    Ok(())
}

/// Apply an X path to a raw mask without validity checks on the result.
pub fn x_string_image(lat: &Lattice, mask: &Mask, path: &StringPath) -> Result<Mask> {
    let mut m = mask.clone();
    for &e in &path.bonds {
        x_segment(lat, &mut m, e)?;
    }
    Ok(m)
}

/// Apply an X-string to a valid cover; the result must again be valid.
pub fn apply_x_string(lat: &Lattice, cover: &DimerCover, path: &StringPath) -> Result<DimerCover> {
    if path.kind != StringKind::X {
        return Err(RkError::InvalidRearrangement {
            reason: "path is not an X-string".into(),
        });
    }
    check_x_path(lat, path)?;
    let m = x_string_image(lat, &cover.mask, path)?;
    if !is_valid_mask(lat, &m) {
        return Err(RkError::InvalidRearrangement {
            reason: format!("defects at vertices {:?}", defects(lat, &m)),
        });
    }
    Ok(DimerCover::new(m))
}

/// Longitudinal X-string from the left edge to the right edge, running
/// through the first left triangle of every strip. On a cylinder it changes
/// `|L_0|` by one and so swaps the two sectors; on a torus it closes.
pub fn x_horizontal(lat: &Lattice) -> Result<StringPath> {
    let mut sites = Vec::new();
    for m in 0..lat.m() {
        let cyc = lat.strip_cycle(m);
        let first_left = cyc.iter().find(|t| t.side == Side::Left).expect("left triangle");
        // enter strip m at a left vertex, cross to a middle vertex, leave by a right vertex
        let l = first_left.ext;
        let mid = match lat.orientation() {
            Orientation::YC => first_left.lower,
            Orientation::XC => first_left.upper,
        };
        let right_tri = cyc
            .iter()
            .find(|t| t.side == Side::Right && (t.upper == mid || t.lower == mid))
            .expect("right triangle at the middle vertex");
        if sites.last() != Some(&l) {
            sites.push(l);
        }
        sites.push(mid);
        sites.push(right_tri.ext);
    }
    if lat.is_torus() {
        sites.pop();
        return x_from_sites(lat, &sites, true);
    }
    x_from_sites(lat, &sites, false)
}

/// Closed X-loop around the internal cycle of strip `m`; it flips `u_m` and
/// keeps `L` and `R`.
pub fn x_strip_loop(lat: &Lattice, m: usize) -> StringPath {
    StringPath {
        kind: StringKind::X,
        bonds: lat.strip_cycle(m).iter().map(|t| t.bonds[2]).collect(),
        closed: true,
    }
}

/// Doubled embedding displacement from `endpoints(b)[0]` to `endpoints(b)[1]`.
pub fn bond_displacement(lat: &Lattice, b: usize) -> (i64, i64) {
    let id = lat.bond_id(b);
    match lat.orientation() {
        Orientation::YC => {
            let sx = if id.n.rem_euclid(2) == 1 { 1 } else { -1 };
            match id.i {
                1 => (sx, -1),
                2 => (sx, 1),
                _ => (0, 2),
            }
        }
        Orientation::XC => match id.i {
            1 | 4 => (2, 0),
            2 | 6 => (1, 1),
            _ => (1, -1),
        },
    }
}

/// Net doubled displacement around a closed X path.
pub fn loop_winding(lat: &Lattice, path: &StringPath) -> (i64, i64) {
    let sites = loop_sites(lat, path);
    let mut acc = (0, 0);
    for (&to, &b) in sites.iter().zip(&path.bonds) {
        let (dx, dy) = bond_displacement(lat, b);
        if lat.endpoints(b)[1] == to {
            acc = (acc.0 + dx, acc.1 + dy);
        } else {
            acc = (acc.0 - dx, acc.1 - dy);
        }
    }
    acc
}

/// Hexagonal plaquettes as closed six-edge X paths, one per plaquette.
pub fn hexagon_loops(lat: &Lattice) -> Vec<StringPath> {
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for start in 0..lat.num_bonds() {
        let mut path = vec![start];
        search_hex(lat, &mut path, &mut seen, &mut out);
    }
    out
}

fn search_hex(lat: &Lattice, path: &mut Vec<usize>, seen: &mut Vec<Vec<usize>>, out: &mut Vec<StringPath>) {
    let n = path.len();
    let last = path[n - 1];
    let [p, q] = lat.endpoints(last);
    let head = if n == 1 {
        q
    } else {
        let s = shared_vertex(lat, path[n - 2], last).expect("contiguous");
        if p == s {
            q
        } else {
            p
        }
    };
    if n == 6 {
        let first = lat.endpoints(path[0]);
        // the walk started at first[0] heading to first[1]
        if head != first[0] || lat.triangle_of(last) == lat.triangle_of(path[0]) {
            return;
        }
        let candidate = StringPath {
            kind: StringKind::X,
            bonds: path.clone(),
            closed: true,
        };
        let mut sites = loop_sites(lat, &candidate);
        sites.sort_unstable();
        sites.dedup();
        let mut key = path.clone();
        key.sort_unstable();
        if sites.len() == 6 && loop_winding(lat, &candidate) == (0, 0) && !seen.contains(&key) {
            seen.push(key);
            out.push(candidate);
        }
        return;
    }
    for &e in &lat.incidence()[head] {
        let t = lat.triangle_of(e);
        if path.iter().any(|&b| lat.triangle_of(b) == t) {
            continue;
        }
        path.push(e);
        search_hex(lat, path, seen, out);
        path.pop();
    }
}

fn loop_sites(lat: &Lattice, path: &StringPath) -> Vec<usize> {
    let n = path.bonds.len();
    (0..n)
        .map(|k| shared_vertex(lat, path.bonds[k], path.bonds[(k + 1) % n]).unwrap_or(usize::MAX))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Closure, Orientation};

    #[test]
    fn strip_counts_match() {
        for (o, n) in [(Orientation::YC, 2), (Orientation::XC, 2)] {
            let l = build_lattice(o, n, 1, Closure::OpenCylinder).unwrap();
            let c = enumerate_covers(&l, &BoundaryCondition::Free).unwrap();
            assert_eq!(c.len(), 1 << (2 * n));
        }
    }

    #[test]
    fn backends_agree() {
        for (o, n, m, cl) in [
            (Orientation::YC, 2, 2, Closure::OpenCylinder),
            (Orientation::XC, 2, 2, Closure::Torus),
            (Orientation::YC, 1, 4, Closure::Torus),
            (Orientation::YC, 2, 2, Closure::Torus),
        ] {
            let l = build_lattice(o, n, m, cl).unwrap();
            let a = enumerate_covers(&l, &BoundaryCondition::Free).unwrap();
            let b = enumerate_covers_with(&l, &BoundaryCondition::Free, Backend::StripByStrip, 0).unwrap();
            assert_eq!(a, b);
            assert!(!a.is_empty());
        }
    }

    #[test]
    fn hexagons_and_strings() {
        for (o, n, m) in [
            (Orientation::YC, 2, 2),
            (Orientation::XC, 2, 2),
            (Orientation::YC, 3, 2),
        ] {
            let lat = build_lattice(o, n, m, Closure::Torus).unwrap();
            let hex = hexagon_loops(&lat);
            assert_eq!(hex.len(), n * m, "{o:?}");
            let lat = build_lattice(o, n, 2 * m - 1, Closure::OpenCylinder).unwrap();
            let covers = enumerate_covers_with(&lat, &BoundaryCondition::Free, Backend::StripByStrip, 0).unwrap();
            let x = x_horizontal(&lat).unwrap();
            let hex = hexagon_loops(&lat);
            for c in covers.iter().take(20) {
                let s0 = sector_of(&lat, c).unwrap();
                let d = apply_x_string(&lat, c, &x).unwrap();
                assert_ne!(sector_of(&lat, &d).unwrap(), s0);
                for h in &hex {
                    let e = apply_x_string(&lat, c, h).unwrap();
                    assert_eq!(sector_of(&lat, &e).unwrap(), s0);
                }
                let e = apply_x_string(&lat, c, &x_strip_loop(&lat, 0)).unwrap();
                assert_ne!(u_bit(&lat, &e.mask, 0), u_bit(&lat, &c.mask, 0));
            }
        }
    }

    #[test]
    fn guard() {
        let l = build_lattice(Orientation::YC, 4, 2, Closure::OpenCylinder).unwrap();
        assert!(matches!(
            enumerate_covers(&l, &BoundaryCondition::Free),
            Err(RkError::TooLarge { .. })
        ));
    }
}
