//! Kagome cylinder and torus geometry.
//!
//! Bonds are addressed by `(m, n, i)`: strip `m`, unit `n` and slot `i`, with
//! flat indices assigned lexicographically. Vertices carry integer
//! coordinates so incidence is exact.
//!
//! YC-2N: strip `m` holds `2N` triangles. Triangle `n` spans the middle
//! vertices `(m, y)` and `(m, y+1)` with `y = (m + n - 1) mod 2N`. Odd `n`
//! point left, with tip shared with strip `m-1`; even `n` point right, with tip
//! shared with strip `m+1`. Slot 1 joins the tip to the upper middle vertex,
//! slot 2 the tip to the lower one and slot 3 is the vertical bond.
//!
//! XC-2N: strip `m` holds `N` hourglass units (`N` even). Even units sit in
//! the left half (`x0 = 2m`), odd units in the right half (`x0 = 2m + 1`), on
//! row `k = n mod N`. Corners are `lb = (x0, k)`, `rb = (x0+1, k)`,
//! `lt = (x0, k+1)`, `rt = (x0+1, k+1)` and the centre sits between them.
//! Slots: 1 `lb-rb`, 2 `lb-c`, 3 `lt-c`, 4 `lt-rt`, 5 `c-rb`, 6 `c-rt`.

use crate::error::{Result, RkError};
use crate::mask::Mask;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// Cylinder orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    YC,
    XC,
}

/// Boundary closure along the strip direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Closure {
    #[serde(rename = "open")]
    OpenCylinder,
    #[serde(rename = "torus")]
    Torus,
}

/// Serializable lattice parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub orientation: Orientation,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub closure: Closure,
}

/// Bond coordinate triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BondId {
    pub m: i64,
    pub n: i64,
    pub i: u8,
}

impl BondId {
    pub fn new(m: i64, n: i64, i: u8) -> Self {
        BondId { m, n, i }
    }
}

impl fmt::Display for BondId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.m, self.n, self.i)
    }
}

/// Vertex species by position in the embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexKind {
    /// YC triangle apex shared between neighbouring strips.
    Tip,
    /// YC vertex on the middle line of a strip.
    Middle,
    /// XC vertex on an integer column.
    Column,
    /// XC hourglass centre.
    Center,
}

/// Integer coordinates of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexInfo {
    pub kind: VertexKind,
    pub x: i64,
    pub y: i64,
}

/// Which strip boundary a triangle's external vertex lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// One triangle of a strip, oriented along the strip's internal cycle.
///
/// `upper` is shared with the previous triangle of the cycle and `lower` with
/// the next one. `bonds` lists `[ext-upper, ext-lower, upper-lower]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripTriangle {
    pub strip: usize,
    pub ext: usize,
    pub upper: usize,
    pub lower: usize,
    pub bonds: [usize; 3],
    pub side: Side,
}

/// A lattice triangle by its three bonds and three vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub bonds: [usize; 3],
    pub vertices: [usize; 3],
}

/// Immutable kagome geometry.
#[derive(Clone, Debug)]
pub struct Lattice {
    spec: LatticeSpec,
    bonds: Vec<BondId>,
    endpoints: Vec<[usize; 2]>,
    vertices: Vec<VertexInfo>,
    incidence: Vec<Vec<usize>>,
    blockade: Vec<Vec<usize>>,
    bond_triangle: Vec<usize>,
    triangles: Vec<Triangle>,
    strip_cycles: Vec<Vec<StripTriangle>>,
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
}

/// `(strip, bonds, vertices, external vertex, side)` collected during construction.
type RawTriangle = (usize, [usize; 3], [usize; 3], usize, Side);

struct Builder {
    index: HashMap<VertexInfo, usize>,
    vertices: Vec<VertexInfo>,
}

impl Builder {
    fn vertex(&mut self, v: VertexInfo) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(v);
        self.index.insert(v, i);
        i
    }
}

/// Build a lattice; see the module docs for conventions.
pub fn build_lattice(orientation: Orientation, n: usize, m: usize, closure: Closure) -> Result<Lattice> {
    Lattice::new(LatticeSpec {
        orientation,
        n,
        m,
        closure,
    })
}

impl Lattice {
    /// Build from a spec.
    pub fn new(spec: LatticeSpec) -> Result<Lattice> {
        let LatticeSpec {
            orientation,
            n,
            m,
            closure,
        } = spec;
        if n < 1 || m < 1 {
            return Err(RkError::InvalidSize {
                reason: format!("N={n} and M={m} must both be at least 1"),
            });
        }
        if orientation == Orientation::XC && n % 2 == 1 {
            return Err(RkError::InvalidSize {
                reason: format!("XC needs an even number of hourglass units per strip, got N={n}"),
            });
        }
        if closure == Closure::Torus && m % 2 == 1 {
            return Err(RkError::TorusOddLength { m });
        }
        let mut b = Builder {
            index: HashMap::new(),
            vertices: Vec::new(),
        };
        let mut bonds = Vec::with_capacity(6 * n * m);
        let mut endpoints = Vec::with_capacity(6 * n * m);
        let mut tri_list: Vec<RawTriangle> = Vec::new();
        let torus = closure == Closure::Torus;
        let (mi, ni) = (m as i64, n as i64);
        match orientation {
            Orientation::YC => {
                let h = 2 * ni;
                let tip = |b: &mut Builder, x: i64, y: i64| {
                    let x = if torus { x.rem_euclid(mi) } else { x };
                    b.vertex(VertexInfo {
                        kind: VertexKind::Tip,
                        x,
                        y: y.rem_euclid(h),
                    })
                };
                let mid = |b: &mut Builder, x: i64, y: i64| {
                    b.vertex(VertexInfo {
                        kind: VertexKind::Middle,
                        x,
                        y: y.rem_euclid(h),
                    })
                };
                for s in 0..mi {
                    for t in 1..=h {
                        let y = s + t - 1;
                        let up = mid(&mut b, s, y);
                        let lo = mid(&mut b, s, y + 1);
                        let (apex, side) = if t % 2 == 1 {
                            (tip(&mut b, s, y), Side::Left)
                        } else {
                            (tip(&mut b, s + 1, y), Side::Right)
                        };
                        let base = bonds.len();
                        for (slot, ends) in [(1u8, [apex, up]), (2, [apex, lo]), (3, [up, lo])] {
                            bonds.push(BondId::new(s, t, slot));
                            endpoints.push(ends);
                        }
                        tri_list.push((s as usize, [base, base + 1, base + 2], [apex, up, lo], apex, side));
                    }
                }
            }
            Orientation::XC => {
                let col = |b: &mut Builder, x: i64, y: i64| {
                    let x = if torus { x.rem_euclid(2 * mi) } else { x };
                    b.vertex(VertexInfo {
                        kind: VertexKind::Column,
                        x,
                        y: y.rem_euclid(ni),
                    })
                };
                for s in 0..mi {
                    for u in 1..=ni {
                        let k = u % ni;
                        let left_half = u % 2 == 0;
                        let x0 = if left_half { 2 * s } else { 2 * s + 1 };
                        let lb = col(&mut b, x0, k);
                        let rb = col(&mut b, x0 + 1, k);
                        let lt = col(&mut b, x0, k + 1);
                        let rt = col(&mut b, x0 + 1, k + 1);
                        let c = b.vertex(VertexInfo {
                            kind: VertexKind::Center,
                            x: x0,
                            y: k,
                        });
                        let base = bonds.len();
                        let ends = [[lb, rb], [lb, c], [lt, c], [lt, rt], [c, rb], [c, rt]];
                        for (slot, e) in ends.iter().enumerate() {
                            bonds.push(BondId::new(s, u, slot as u8 + 1));
                            endpoints.push(*e);
                        }
                        // bottom triangle: bonds 1,2,5; top triangle: bonds 4,3,6
                        let (bot_ext, top_ext, side) = if left_half {
                            (lb, lt, Side::Left)
                        } else {
                            (rb, rt, Side::Right)
                        };
                        tri_list.push((s as usize, [base, base + 1, base + 4], [lb, rb, c], bot_ext, side));
                        tri_list.push((s as usize, [base + 3, base + 2, base + 5], [lt, rt, c], top_ext, side));
                    }
                }
            }
        }
        let nv = b.vertices.len();
        let mut incidence = vec![Vec::new(); nv];
        for (bi, e) in endpoints.iter().enumerate() {
            incidence[e[0]].push(bi);
            incidence[e[1]].push(bi);
        }
        let nb = bonds.len();
        let mut blockade = vec![Vec::new(); nb];
        for inc in &incidence {
            for &a in inc {
                for &c in inc {
                    if a != c && !blockade[a].contains(&c) {
                        blockade[a].push(c);
                    }
                }
            }
        }
        for nbrs in &mut blockade {
            nbrs.sort_unstable();
        }
        let mut bond_triangle = vec![usize::MAX; nb];
        let mut triangles = Vec::with_capacity(tri_list.len());
        for (ti, (_, tb, tv, _, _)) in tri_list.iter().enumerate() {
            for &bb in tb {
                bond_triangle[bb] = ti;
            }
            triangles.push(Triangle {
                bonds: *tb,
                vertices: *tv,
            });
        }
        let mut lat = Lattice {
            spec,
            bonds,
            endpoints,
            vertices: b.vertices,
            incidence,
            blockade,
            bond_triangle,
            triangles,
            strip_cycles: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
        };
        lat.build_strip_cycles(&tri_list);
        Ok(lat)
    }

    fn build_strip_cycles(&mut self, tri_list: &[RawTriangle]) {
        let (n, m) = (self.spec.n as i64, self.spec.m);
        for s in 0..m {
            let local: Vec<_> = tri_list.iter().filter(|t| t.0 == s).collect();
            let internal = |t: &(usize, [usize; 3], [usize; 3], usize, Side)| -> [usize; 2] {
                let mut out = [0; 2];
                let mut k = 0;
                for &v in &t.2 {
                    if v != t.3 {
                        out[k] = v;
                        k += 1;
                    }
                }
                out
            };
            // starting vertex and triangle of the cycle
            let (v0, t0) = match self.spec.orientation {
                Orientation::YC => {
                    let t = local[0];
                    (internal(t)[0], 0usize)
                }
                Orientation::XC => {
                    let v0 = self
                        .find_vertex(VertexInfo {
                            kind: VertexKind::Column,
                            x: 2 * s as i64 + 1,
                            y: 0,
                        })
                        .expect("middle column vertex");
                    // left unit on row 0 is unit N; its bottom triangle is listed first
                    let idx = ((n - 1) * 2) as usize;
                    debug_assert!(internal(local[idx]).contains(&v0));
                    (v0, idx)
                }
            };
            let mut cycle = Vec::with_capacity(local.len());
            let mut used = vec![false; local.len()];
            let (mut v, mut ti) = (v0, t0);
            for _ in 0..local.len() {
                used[ti] = true;
                let t = local[ti];
                let [a, c] = internal(t);
                let lower = if a == v { c } else { a };
                let bond_between = |p: usize, q: usize| -> usize {
                    *t.1.iter()
                        .find(|&&bb| {
                            let e = self.endpoints[bb];
                            (e[0] == p && e[1] == q) || (e[0] == q && e[1] == p)
                        })
                        .expect("triangle bond")
                };
                cycle.push(StripTriangle {
                    strip: s,
                    ext: t.3,
                    upper: v,
                    lower,
                    bonds: [bond_between(t.3, v), bond_between(t.3, lower), bond_between(v, lower)],
                    side: t.4,
                });
                v = lower;
                if let Some(next) = (0..local.len()).find(|&j| !used[j] && internal(local[j]).contains(&v)) {
                    ti = next;
                }
            }
            debug_assert_eq!(v, v0);
            self.strip_cycles.push(cycle);
            let (l, r) = match self.spec.orientation {
                Orientation::YC => {
                    let l: Vec<usize> = local.iter().step_by(2).map(|t| t.3).collect();
                    let r: Vec<usize> = local.iter().skip(1).step_by(2).map(|t| t.3).collect();
                    (l, r)
                }
                Orientation::XC => {
                    let colv = |x: i64, y: i64| {
                        let x = if self.spec.closure == Closure::Torus {
                            x.rem_euclid(2 * m as i64)
                        } else {
                            x
                        };
                        self.find_vertex(VertexInfo {
                            kind: VertexKind::Column,
                            x,
                            y,
                        })
                        .expect("column vertex")
                    };
                    let l = (0..n).map(|y| colv(2 * s as i64, y)).collect();
                    let r = (0..n).map(|y| colv(2 * s as i64 + 2, y)).collect();
                    (l, r)
                }
            };
            self.left.push(l);
            self.right.push(r);
        }
    }

    fn find_vertex(&self, v: VertexInfo) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }
    pub fn orientation(&self) -> Orientation {
        self.spec.orientation
    }
    /// Half width `N`.
    pub fn n(&self) -> usize {
        self.spec.n
    }
    /// Number of strips `M`.
    pub fn m(&self) -> usize {
        self.spec.m
    }
    pub fn closure(&self) -> Closure {
        self.spec.closure
    }
    pub fn is_torus(&self) -> bool {
        self.spec.closure == Closure::Torus
    }
    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    /// Bonds per strip (`6N`).
    pub fn bonds_per_strip(&self) -> usize {
        6 * self.spec.n
    }
    /// Units per strip: `2N` triangles (YC) or `N` hourglasses (XC).
    pub fn units_per_strip(&self) -> usize {
        match self.spec.orientation {
            Orientation::YC => 2 * self.spec.n,
            Orientation::XC => self.spec.n,
        }
    }
    pub fn slots(&self) -> usize {
        match self.spec.orientation {
            Orientation::YC => 3,
            Orientation::XC => 6,
        }
    }

    /// Flat index of `(m, n, i)`, wrapping `n` periodically. On a torus the
    /// strip index wraps too; on a cylinder out-of-range strips give `None`.
    pub fn bond_index(&self, id: BondId) -> Option<usize> {
        let units = self.units_per_strip() as i64;
        let slots = self.slots() as i64;
        if id.i < 1 || id.i as i64 > slots {
            return None;
        }
        let m = self.spec.m as i64;
        let s = if self.is_torus() {
            id.m.rem_euclid(m)
        } else if (0..m).contains(&id.m) {
            id.m
        } else {
            return None;
        };
        let u = (id.n - 1).rem_euclid(units);
        Some(((s * units + u) * slots + (id.i as i64 - 1)) as usize)
    }

    /// Like [`Lattice::bond_index`] but panics on out-of-range strips.
    pub fn bond(&self, m: i64, n: i64, i: u8) -> usize {
        self.bond_index(BondId::new(m, n, i))
            .unwrap_or_else(|| panic!("bond ({m},{n},{i}) outside lattice"))
    }

    pub fn bond_id(&self, idx: usize) -> BondId {
        self.bonds[idx]
    }
    pub fn bond_ids(&self) -> &[BondId] {
        &self.bonds
    }
    pub fn endpoints(&self, bond: usize) -> [usize; 2] {
        self.endpoints[bond]
    }
    pub fn vertex_info(&self, v: usize) -> VertexInfo {
        self.vertices[v]
    }
    pub fn vertex_of(&self, info: VertexInfo) -> Option<usize> {
        self.find_vertex(info)
    }

    /// Bonds incident on vertex `v`.
    pub fn vertex_bonds(&self, v: usize) -> Result<&[usize]> {
        self.incidence
            .get(v)
            .map(|x| x.as_slice())
            .ok_or(RkError::UnknownVertex(v))
    }

    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    /// Bonds sharing a vertex with `bond`.
    pub fn blockade_neighbors(&self, bond: usize) -> &[usize] {
        &self.blockade[bond]
    }

    pub fn blockaded(&self, a: usize, b: usize) -> bool {
        self.blockade[a].binary_search(&b).is_ok()
    }

    /// Open-cylinder boundary tips, which may be touched by zero or one dimer.
    pub fn is_exempt(&self, v: usize) -> bool {
        if self.is_torus() {
            return false;
        }
        let info = self.vertices[v];
        match info.kind {
            VertexKind::Tip => info.x == 0 || info.x == self.spec.m as i64,
            VertexKind::Column => info.x == 0 || info.x == 2 * self.spec.m as i64,
            _ => false,
        }
    }

    /// Triangle containing `bond`.
    pub fn triangle_of(&self, bond: usize) -> usize {
        self.bond_triangle[bond]
    }
    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Strip triangles in cycle order starting from the anchoring triangle.
    pub fn strip_cycle(&self, m: usize) -> &[StripTriangle] {
        &self.strip_cycles[m]
    }

    /// Left boundary vertices of strip `m`, indexed like `L`.
    pub fn left_vertices(&self, m: usize) -> &[usize] {
        &self.left[m]
    }
    /// Left pattern of strip 0 forced by the right pattern `r` of the last
    /// strip on a torus. YC tori shift the edge index by `M` rows.
    pub fn wrapped_complement(&self, r: &[bool]) -> Vec<bool> {
        let right = &self.right[self.spec.m - 1];
        let left = &self.left[0];
        let mut out = vec![false; r.len()];
        for (j, &b) in r.iter().enumerate() {
            let k = left.iter().position(|&v| v == right[j]).expect("torus edges coincide");
            out[k] = !b;
        }
        out
    }
    /// Right boundary vertices of strip `m`, indexed like `R`.
    pub fn right_vertices(&self, m: usize) -> &[usize] {
        &self.right[m]
    }

    /// Flat bond range of strip `m`.
    pub fn strip_bonds(&self, m: usize) -> std::ops::Range<usize> {
        let w = self.bonds_per_strip();
        m * w..(m + 1) * w
    }

    /// Strip index owning a bond.
    pub fn strip_of(&self, bond: usize) -> usize {
        bond / self.bonds_per_strip()
    }

    /// Mask of all bonds touching vertex `v`.
    pub fn vertex_mask(&self, v: usize) -> Mask {
        Mask::from_bits(self.num_bonds(), self.incidence[v].iter().copied())
    }

    /// Bond table as CSV rows `flat_index,m,n,i`.
    pub fn bond_table_csv(&self) -> String {
        let mut s = String::from("flat_index,m,n,i\n");
        for (k, b) in self.bonds.iter().enumerate() {
            s.push_str(&format!("{k},{},{},{}\n", b.m, b.n, b.i));
        }
        s
    }

    /// Spec as JSON.
    pub fn spec_json(&self) -> String {
        serde_json::to_string(&self.spec).expect("spec serializes")
    }
}

impl LatticeSpec {
    pub fn from_json(s: &str) -> Result<LatticeSpec> {
        serde_json::from_str(s).map_err(|e| RkError::Parse(e.to_string()))
    }
}
