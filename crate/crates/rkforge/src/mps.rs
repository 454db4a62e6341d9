//! Strip matrix-product form of the equal-weight dimer superposition.
//!
//! Each strip carries an integer tensor `A[u][L][R]`, equal to 1 when
//! `parity(L) = parity(R)` and 0 otherwise. Neighbouring strips contract
//! through the complement rule `L_{j+1} = !R_j`. Counts stay integral until a
//! final normalization.

use crate::coverings::SectorLabel;
use crate::error::{Result, RkError};
use crate::lattice::{Closure, Lattice, LatticeSpec, Orientation};
use crate::mask::Mask;
use crate::simstate::SparseState;
use crate::strips::{encode, StripLabel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

fn pattern(n: usize, x: usize) -> Vec<bool> {
    (0..n).map(|j| x >> j & 1 == 1).collect()
}

fn parity(x: usize) -> usize {
    x.count_ones() as usize % 2
}

/// Integer strip tensor of width `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripTensor {
    pub n: usize,
}

impl StripTensor {
    /// Entry `A[u][L][R]` with edge patterns as bitmasks.
    pub fn entry(&self, _u: bool, l: usize, r: usize) -> u8 {
        (parity(l) == parity(r)) as u8
    }
    /// Nonzero entries in label form.
    pub fn support(&self) -> Vec<StripLabel> {
        let mut out = Vec::new();
        for l in 0..1usize << self.n {
            for r in 0..1usize << self.n {
                for u in [false, true] {
                    if self.entry(u, l, r) == 1 {
                        out.push(StripLabel::new(pattern(self.n, l), pattern(self.n, r), u));
                    }
                }
            }
        }
        out
    }
}

/// Matrix-product description of the equal-weight state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RkState {
    pub lattice: LatticeSpec,
    pub sector: Option<SectorLabel>,
    /// Amplitude weight of each left-edge pattern of the first strip.
    pub boundary: Vec<f64>,
    pub tensors: Vec<StripTensor>,
}

/// Build the state for a lattice, optionally restricted to a sector.
pub fn build_rk(lat: &Lattice, sector: Option<SectorLabel>) -> Result<RkState> {
    let n = lat.n();
    match (sector, lat.closure()) {
        (Some(SectorLabel::Cylinder { parity }), Closure::OpenCylinder) if parity.abs() != 1 => {
            return Err(RkError::InvalidSector {
                reason: format!("cylinder parity must be +1 or -1, got {parity}"),
            })
        }
        (Some(SectorLabel::Torus { mx, my }), Closure::Torus) if mx > 1 || my > 1 => {
            return Err(RkError::InvalidSector {
                reason: format!("torus labels must be bits, got ({mx},{my})"),
            })
        }
        (Some(SectorLabel::Cylinder { .. }), Closure::Torus)
        | (Some(SectorLabel::Torus { .. }), Closure::OpenCylinder) => {
            return Err(RkError::InvalidSector {
                reason: "sector kind does not match the lattice closure".into(),
            })
        }
        _ => {}
    }
    let want = match sector {
        Some(SectorLabel::Cylinder { parity }) => Some(if parity == 1 { 0 } else { 1 }),
        Some(SectorLabel::Torus { my, .. }) => Some(my as usize),
        None => None,
    };
    let boundary = (0..1usize << n)
        .map(|l| match want {
            Some(p) if parity(l) != p => 0.0,
            _ => 1.0,
        })
        .collect();
    Ok(RkState {
        lattice: lat.spec(),
        sector,
        boundary,
        tensors: vec![StripTensor { n }; lat.m()],
    })
}

/// One strip of a partial chain: `(l, r, u)` as bit patterns.
type Link = (usize, usize, bool);

impl RkState {
    pub fn n(&self) -> usize {
        self.lattice.n
    }
    pub fn m(&self) -> usize {
        self.lattice.m
    }

    /// Replace the left-edge weights; fails on a zero vector.
    pub fn with_boundary(mut self, weights: Vec<f64>) -> Result<Self> {
        let norm: f64 = weights.iter().map(|w| w * w).sum();
        if weights.len() != 1 << self.n() || norm <= 0.0 {
            return Err(RkError::BadAmplitudes { norm_sq: norm });
        }
        self.boundary = weights;
        Ok(self)
    }

    fn mx_filter(&self) -> Option<usize> {
        match self.sector {
            Some(SectorLabel::Torus { mx, .. }) => Some(mx as usize),
            _ => None,
        }
    }

    /// Every strip-label chain with nonzero weight, with its boundary weight.
    pub fn chains(&self) -> Vec<(Vec<StripLabel>, f64)> {
        let n = self.n();
        let m = self.m();
        let torus = self.lattice.closure == Closure::Torus;
        let mut out = Vec::new();
        let full = (1usize << n) - 1;
        let lat = Lattice::new(self.lattice).expect("spec was validated");
        let zlong = crate::coverings::z_longitudinal(&lat);
        // strip-0 left pattern forced by each right pattern of the last strip
        let wrap: Vec<usize> = if torus {
            (0..=full)
                .map(|r| {
                    lat.wrapped_complement(&pattern(n, r))
                        .iter()
                        .enumerate()
                        .map(|(j, &b)| (b as usize) << j)
                        .sum()
                })
                .collect()
        } else {
            Vec::new()
        };
        let mut stack: Vec<(Vec<Link>, f64)> = Vec::new();
        for l0 in 0..=full {
            let w = self.boundary[l0];
            if w == 0.0 {
                continue;
            }
            stack.push((vec![], w));
            while let Some((chain, w)) = stack.pop() {
                let k = chain.len();
                if k == m {
                    if torus && wrap[chain[m - 1].1] != l0 {
                        continue;
                    }
                    let labels: Vec<StripLabel> = chain
                        .iter()
                        .map(|&(l, r, u)| StripLabel::new(pattern(n, l), pattern(n, r), u))
                        .collect();
                    if let Some(mx) = self.mx_filter() {
                        let mut mask = Mask::zeros(lat.num_bonds());
                        for (k, lab) in labels.iter().enumerate() {
                            mask.or_assign(&encode(&lat, k, lab).expect("chain labels are consistent"));
                        }
                        if (crate::coverings::z_sign(&mask, &zlong) == -1) as usize != mx {
                            continue;
                        }
                    }
                    out.push((labels, w));
                    continue;
                }
                let l = if k == 0 { l0 } else { !chain[k - 1].1 & full };
                for r in (0..=full).rev() {
                    for u in [true, false] {
                        if self.tensors[k].entry(u, l, r) == 1 {
                            let mut c = chain.clone();
                            c.push((l, r, u));
                            stack.push((c, w));
                        }
                    }
                }
            }
        }
        out
    }

    /// Number of covers with nonzero weight, by transfer-matrix contraction.
    pub fn count(&self) -> u128 {
        if self.lattice.closure == Closure::Torus || self.mx_filter().is_some() {
            return self.chains().len() as u128;
        }
        let n = self.n();
        let full = (1usize << n) - 1;
        let mut v: Vec<u128> = self.boundary.iter().map(|&w| (w != 0.0) as u128).collect();
        for k in 0..self.m() {
            let mut next = vec![0u128; 1 << n];
            for (l, &c) in v.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for r in 0..=full {
                    let a = self.tensors[k].entry(false, l, r) as u128 + self.tensors[k].entry(true, l, r) as u128;
                    next[!r & full] += c * a;
                }
            }
            v = next;
        }
        v.iter().sum()
    }

    /// Normalized amplitude of a cover: constant on the support, 0 elsewhere.
    pub fn amplitude(&self, lat: &Lattice, mask: &Mask) -> f64 {
        if !crate::coverings::is_valid_mask(lat, mask) {
            return 0.0;
        }
        let Ok(labels) = crate::strips::decode_all(lat, &crate::coverings::DimerCover::new(mask.clone())) else {
            return 0.0;
        };
        let l0 = labels[0]
            .l
            .iter()
            .enumerate()
            .map(|(j, &b)| (b as usize) << j)
            .sum::<usize>();
        let w = self.boundary[l0];
        if w == 0.0 {
            return 0.0;
        }
        if let Some(mx) = self.mx_filter() {
            let zlong = crate::coverings::z_longitudinal(lat);
            if (crate::coverings::z_sign(mask, &zlong) == -1) as usize != mx {
                return 0.0;
            }
        }
        w / self.norm()
    }

    fn norm(&self) -> f64 {
        self.chains().iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Explicit state over lattice bonds.
    pub fn expand(&self, lat: &Lattice) -> Result<SparseState> {
        if lat.spec() != self.lattice {
            return Err(RkError::LatticeMismatch);
        }
        let mut entries = Vec::new();
        for (labels, w) in self.chains() {
            let mut mask = Mask::zeros(lat.num_bonds());
            for (m, lab) in labels.iter().enumerate() {
                mask.or_assign(&encode(lat, m, lab)?);
            }
            entries.push((mask, Complex64::new(w, 0.0)));
        }
        SparseState::from_amplitudes(lat, 0, entries)
    }

    /// Schmidt weights across the cut between strips `cut-1` and `cut`,
    /// indexed by the shared edge pattern.
    pub fn schmidt_weights(&self, cut: usize) -> Result<Vec<f64>> {
        let m = self.m();
        if cut == 0 || cut >= m {
            return Err(RkError::EdgeCut { cut, m });
        }
        if self.lattice.closure == Closure::Torus {
            return Err(RkError::InvalidSector {
                reason: "bipartite entropy is defined here for open cylinders".into(),
            });
        }
        let n = self.n();
        let full = (1usize << n) - 1;
        // left weights: squared boundary weight summed over configurations with a given L
        let mut left: Vec<f64> = self.boundary.iter().map(|w| w * w).collect();
        for k in 0..cut {
            let mut next = vec![0.0; 1 << n];
            for (l, &c) in left.iter().enumerate() {
                for r in 0..=full {
                    let a = (self.tensors[k].entry(false, l, r) + self.tensors[k].entry(true, l, r)) as f64;
                    next[!r & full] += c * a;
                }
            }
            left = next;
        }
        let mut right = vec![1.0; 1 << n];
        for k in (cut..m).rev() {
            let mut prev = vec![0.0; 1 << n];
            for (l, p) in prev.iter_mut().enumerate() {
                for r in 0..=full {
                    let a = (self.tensors[k].entry(false, l, r) + self.tensors[k].entry(true, l, r)) as f64;
                    *p += a * right[!r & full];
                }
            }
            right = prev;
        }
        let w: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a * b).collect();
        let z: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / z).collect())
    }

    /// Entanglement entropy (nats) across the cut before strip `cut`.
    pub fn entropy(&self, cut: usize) -> Result<f64> {
        Ok(self
            .schmidt_weights(cut)?
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum())
    }

    /// Metadata as JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }

    /// Branching diagram of the chain; see [`Diagram`].
    pub fn to_diagram(&self) -> Diagram {
        let n = self.n();
        let full = (1usize << n) - 1;
        let m = self.m();
        let mut nodes = Vec::new();
        let mut arrows = Vec::new();
        let mut layer: Vec<usize> = Vec::new();
        for (l, &w) in self.boundary.iter().enumerate() {
            if w != 0.0 {
                layer.push(nodes.len());
                nodes.push(DiagramNode {
                    position: 0,
                    pattern: l,
                });
            }
        }
        for k in 0..m {
            let mut next: Vec<usize> = Vec::new();
            for &from in &layer {
                let l = nodes[from].pattern;
                for r in 0..=full {
                    for u in [false, true] {
                        if self.tensors[k].entry(u, l, r) == 0 {
                            continue;
                        }
                        let target = if k + 1 == m { r } else { !r & full };
                        let to = match next.iter().find(|&&i| nodes[i].pattern == target) {
                            Some(&i) => i,
                            None => {
                                nodes.push(DiagramNode {
                                    position: k + 1,
                                    pattern: target,
                                });
                                next.push(nodes.len() - 1);
                                nodes.len() - 1
                            }
                        };
                        arrows.push(DiagramArrow {
                            from,
                            to,
                            label: StripLabel::new(pattern(n, l), pattern(n, r), u),
                        });
                    }
                }
            }
            layer = next;
        }
        Diagram { nodes, arrows }
    }
}

/// Node of a matrix product diagram: the edge pattern entering strip
/// `position` (the final layer holds the right edge of the last strip).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramNode {
    pub position: usize,
    pub pattern: usize,
}

/// Arrow labelled by the strip configuration it places.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramArrow {
    pub from: usize,
    pub to: usize,
    pub label: StripLabel,
}

/// Matrix product diagram: every source-to-sink path is one basis cover.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagram {
    pub nodes: Vec<DiagramNode>,
    pub arrows: Vec<DiagramArrow>,
}

impl Diagram {
    /// Number of source-to-sink paths.
    pub fn path_count(&self) -> u128 {
        let mut ways = vec![0u128; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if n.position == 0 {
                ways[i] = 1;
            }
        }
        let last = self.nodes.iter().map(|n| n.position).max().unwrap_or(0);
        for p in 0..last {
            for a in &self.arrows {
                if self.nodes[a.from].position == p {
                    ways[a.to] += ways[a.from];
                }
            }
        }
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.position == last)
            .map(|(i, _)| ways[i])
            .sum()
    }

    /// Outgoing arrow count of each node that has successors.
    pub fn fan_outs(&self) -> Vec<usize> {
        let mut f = vec![0; self.nodes.len()];
        for a in &self.arrows {
            f[a.from] += 1;
        }
        f.into_iter().filter(|&x| x > 0).collect()
    }
}

/// A symbolic matrix entry: a sum of terms, each a set of occupied slots.
pub type SymEntry = Vec<Vec<u8>>;

/// Small symbolic matrix over slot sets; products take unions of slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymMatrix(pub Vec<Vec<SymEntry>>);

impl SymMatrix {
    pub fn rows(&self) -> usize {
        self.0.len()
    }
    pub fn cols(&self) -> usize {
        self.0.first().map_or(0, |r| r.len())
    }

    /// Matrix product with union of slot sets.
    pub fn mul(&self, other: &SymMatrix) -> SymMatrix {
        let mut out = vec![vec![SymEntry::new(); other.cols()]; self.rows()];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..self.cols() {
                    for a in &self.0[i][k] {
                        for b in &other.0[k][j] {
                            let mut t: Vec<u8> = a.iter().chain(b).copied().collect();
                            t.sort_unstable();
                            cell.push(t);
                        }
                    }
                }
                cell.sort();
            }
        }
        SymMatrix(out)
    }

    /// Nonzero entries per row.
    pub fn fan_outs(&self) -> Vec<usize> {
        self.0
            .iter()
            .map(|r| r.iter().filter(|e| !e.is_empty()).count())
            .collect()
    }
}

/// Hourglass unit matrices and their two-stage factorizations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HourglassMps {
    /// Unit matrix for an odd-length left edge pattern.
    pub m1: SymMatrix,
    /// Unit matrix for the complementary unit.
    pub m2: SymMatrix,
    /// `m1 = m1_factors.0 * m1_factors.1`.
    pub m1_factors: (SymMatrix, SymMatrix),
    /// `m2 = m2_factors.0 * m2_factors.1`.
    pub m2_factors: (SymMatrix, SymMatrix),
}

fn e(slots: &[u8]) -> SymEntry {
    vec![slots.to_vec()]
}

fn z() -> SymEntry {
    SymEntry::new()
}

/// Bond-dimension-2 matrices of one hourglass unit (slots as in the lattice
/// module), with the factorization that the growth gates follow.
pub fn hourglass_mps() -> HourglassMps {
    let m1 = SymMatrix(vec![vec![e(&[4, 5]), e(&[3])], vec![e(&[1, 6]), e(&[2])]]);
    let m2 = SymMatrix(vec![vec![e(&[5]), e(&[6])], vec![e(&[1, 3]), e(&[2, 4])]]);
    let (sa, sb, sc, sd, se, sf, sg) = (e(&[]), e(&[4]), e(&[3]), e(&[2]), e(&[1]), e(&[2, 4]), e(&[1, 3]));
    let (ca, cb, cc) = (e(&[]), e(&[6]), e(&[5]));
    let p1 = SymMatrix(vec![vec![sb, sc, z()], vec![z(), sd, se]]);
    let q1 = SymMatrix(vec![
        vec![cc.clone(), z()],
        vec![z(), ca.clone()],
        vec![cb.clone(), z()],
    ]);
    let p2 = SymMatrix(vec![vec![sa, z(), z()], vec![z(), sg, sf]]);
    let q2 = SymMatrix(vec![vec![cc, cb], vec![ca.clone(), z()], vec![z(), ca]]);
    HourglassMps {
        m1,
        m2,
        m1_factors: (p1, q1),
        m2_factors: (p2, q2),
    }
}

/// Whether an orientation's strips admit the hourglass factorization.
pub fn has_hourglass_form(o: Orientation) -> bool {
    o == Orientation::XC
}
