//! Sparse statevector over blockade-respecting occupation masks.
//!
//! Qubits `0..num_bonds` are lattice bonds; any further qubits are ancillas
//! with no standing blockade relations. The active constraint decides which
//! bond pairs may not be excited together.

use crate::error::{Result, RkError};
use crate::lattice::{Lattice, LatticeSpec};
use crate::mask::Mask;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Amplitudes below this magnitude are dropped after each gate.
pub const PRUNE_EPS: f64 = 1e-14;

/// Which excitation pairs are forbidden on stored masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// Bonds sharing a vertex block each other.
    Lattice,
    /// Only bonds of the same triangle block each other.
    TrianglesOnly,
    /// Explicit pair list.
    Custom(Vec<(usize, usize)>),
}

/// Sparse state; see the module docs.
#[derive(Clone, Debug)]
pub struct SparseState {
    spec: LatticeSpec,
    nbonds: usize,
    nqubits: usize,
    constraint: Constraint,
    neighbors: Arc<Vec<Vec<usize>>>,
    amps: BTreeMap<Mask, Complex64>,
}

fn neighbor_table(lat: &Lattice, nqubits: usize, c: &Constraint) -> Vec<Vec<usize>> {
    let mut t = vec![Vec::new(); nqubits];
    match c {
        Constraint::Lattice => {
            for (b, row) in t.iter_mut().enumerate().take(lat.num_bonds()) {
                *row = lat.blockade_neighbors(b).to_vec();
            }
        }
        Constraint::TrianglesOnly => {
            for tri in lat.triangles() {
                for &a in &tri.bonds {
                    for &b in &tri.bonds {
                        if a != b {
                            t[a].push(b);
                        }
                    }
                }
            }
        }
        Constraint::Custom(pairs) => {
            for &(a, b) in pairs {
                if a < nqubits && b < nqubits {
                    t[a].push(b);
                    t[b].push(a);
                }
            }
        }
    }
    for row in &mut t {
        row.sort_unstable();
        row.dedup();
    }
    t
}

#[derive(Serialize, Deserialize)]
struct DumpHeader {
    lattice: LatticeSpec,
    qubits: usize,
    norm: f64,
    support: usize,
}

impl SparseState {
    /// All qubits in the ground state.
    pub fn vacuum(lat: &Lattice) -> Self {
        Self::vacuum_with_ancillas(lat, 0)
    }

    /// Ground state with `ancillas` extra qubits appended.
    pub fn vacuum_with_ancillas(lat: &Lattice, ancillas: usize) -> Self {
        let nqubits = lat.num_bonds() + ancillas;
        let mut amps = BTreeMap::new();
        amps.insert(Mask::zeros(nqubits), Complex64::new(1.0, 0.0));
        SparseState {
            spec: lat.spec(),
            nbonds: lat.num_bonds(),
            nqubits,
            constraint: Constraint::Lattice,
            neighbors: Arc::new(neighbor_table(lat, nqubits, &Constraint::Lattice)),
            amps,
        }
    }

    /// State from explicit amplitudes, normalized; masks must respect the
    /// lattice blockade.
    pub fn from_amplitudes(
        lat: &Lattice,
        ancillas: usize,
        entries: impl IntoIterator<Item = (Mask, Complex64)>,
    ) -> Result<Self> {
        let mut s = Self::vacuum_with_ancillas(lat, ancillas);
        s.amps.clear();
        for (m, a) in entries {
            let m = m.resized(s.nqubits);
            if let Some((p, q)) = s.violation(&m) {
                return Err(RkError::BlockadeViolation { a: p, b: q });
            }
            *s.amps.entry(m).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        s.prune(PRUNE_EPS);
        let n = s.norm_sq();
        if n <= 0.0 || !n.is_finite() {
            return Err(RkError::BadAmplitudes { norm_sq: n });
        }
        s.normalize();
        Ok(s)
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }
    pub fn num_bonds(&self) -> usize {
        self.nbonds
    }
    pub fn num_qubits(&self) -> usize {
        self.nqubits
    }
    pub fn num_ancillas(&self) -> usize {
        self.nqubits - self.nbonds
    }
    /// Qubit index of ancilla `k`.
    pub fn ancilla(&self, k: usize) -> usize {
        self.nbonds + k
    }
    pub fn support_len(&self) -> usize {
        self.amps.len()
    }
    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    /// Switch the active constraint; fails if a stored mask violates it.
    pub fn set_constraint(&mut self, lat: &Lattice, c: Constraint) -> Result<()> {
        let table = neighbor_table(lat, self.nqubits, &c);
        let old = std::mem::replace(&mut self.neighbors, Arc::new(table));
        if let Some((a, b)) = self.amps.keys().find_map(|m| self.violation(m)) {
            self.neighbors = old;
            return Err(RkError::BlockadeViolation { a, b });
        }
        self.constraint = c;
        Ok(())
    }

    /// Blockaded partners of qubit `q` under the active constraint.
    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    /// First violated blockade pair of a mask, if any.
    pub fn violation(&self, m: &Mask) -> Option<(usize, usize)> {
        for a in m.ones() {
            if a >= self.nqubits {
                break;
            }
            for &b in &self.neighbors[a] {
                if b > a && m.get(b) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mask, &Complex64)> {
        self.amps.iter()
    }
    pub fn get(&self, m: &Mask) -> Complex64 {
        self.amps.get(m).copied().unwrap_or_default()
    }
    pub fn amplitudes(&self) -> &BTreeMap<Mask, Complex64> {
        &self.amps
    }

    /// Replace the amplitude map; callers guarantee constraint validity.
    pub(crate) fn set_amplitudes(&mut self, amps: BTreeMap<Mask, Complex64>) {
        self.amps = amps;
        self.prune(PRUNE_EPS);
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            for a in self.amps.values_mut() {
                *a /= n;
            }
        }
    }

    /// Drop amplitudes with magnitude below `eps`.
    pub fn prune(&mut self, eps: f64) {
        self.amps.retain(|_, a| a.norm() >= eps);
    }

    fn compatible(&self, other: &SparseState) -> Result<()> {
        if self.spec != other.spec || self.nqubits != other.nqubits {
            return Err(RkError::LatticeMismatch);
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &SparseState) -> Result<Complex64> {
        self.compatible(other)?;
        let (small, large, conj_small) = if self.amps.len() <= other.amps.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, a) in &small.amps {
            if let Some(b) = large.amps.get(m) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    /// True when every amplitude is real and nonnegative within `tol`.
    pub fn is_real_nonnegative(&self, tol: f64) -> bool {
        self.amps.values().all(|a| a.im.abs() <= tol && a.re >= -tol)
    }

    /// Largest and smallest nonzero amplitude magnitudes.
    pub fn magnitude_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for a in self.amps.values() {
            lo = lo.min(a.norm());
            hi = hi.max(a.norm());
        }
        (lo, hi)
    }

    /// Probability that every ancilla reads 0.
    pub fn ancillas_ground_probability(&self) -> f64 {
        self.amps
            .iter()
            .filter(|(m, _)| (self.nbonds..self.nqubits).all(|q| !m.get(q)))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Project onto all-ground ancillas and drop them. Returns the state and
    /// the probability of that outcome.
    pub fn discard_ancillas(&self, lat: &Lattice) -> Result<(SparseState, f64)> {
        let p = self.ancillas_ground_probability();
        if p <= 0.0 {
            return Err(RkError::BadAmplitudes { norm_sq: p });
        }
        let entries: Vec<_> = self
            .amps
            .iter()
            .filter(|(m, _)| (self.nbonds..self.nqubits).all(|q| !m.get(q)))
            .map(|(m, a)| (m.resized(self.nbonds), *a))
            .collect();
        let mut s = SparseState::from_amplitudes(lat, 0, entries)?;
        if self.constraint != Constraint::Lattice {
            s.set_constraint(lat, self.constraint.clone())?;
        }
        Ok((s, p))
    }

    /// Copy with `extra` ground-state ancillas appended.
    pub fn with_extra_ancillas(&self, extra: usize) -> SparseState {
        let nq = self.nqubits + extra;
        let mut nb = (*self.neighbors).clone();
        nb.resize(nq, Vec::new());
        SparseState {
            spec: self.spec,
            nbonds: self.nbonds,
            nqubits: nq,
            constraint: self.constraint.clone(),
            neighbors: Arc::new(nb),
            amps: self.amps.iter().map(|(m, a)| (m.resized(nq), *a)).collect(),
        }
    }

    /// Von Neumann entropy (nats) of the reduced state on `subset`.
    pub fn entanglement_entropy(&self, subset: &[usize]) -> f64 {
        let inside = Mask::from_bits(self.nqubits, subset.iter().copied());
        let mut rows: HashMap<Mask, usize> = HashMap::new();
        let mut cols: HashMap<Mask, usize> = HashMap::new();
        let mut entries = Vec::with_capacity(self.amps.len());
        for (m, a) in &self.amps {
            let r = m.and(&inside);
            let mut c = m.clone();
            c.clear_bits(&inside);
            let nr = rows.len();
            let ri = *rows.entry(r).or_insert(nr);
            let nc = cols.len();
            let ci = *cols.entry(c).or_insert(nc);
            entries.push((ri, ci, *a));
        }
        let mut mat = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
        for (r, c, a) in entries {
            mat[(r, c)] += a;
        }
        let norm = self.norm_sq();
        let sv = mat.singular_values();
        sv.iter()
            .map(|s| s * s / norm)
            .filter(|&p| p > 1e-16)
            .map(|p| -p * p.ln())
            .sum()
    }

    /// Born probability of each support mask, in mask order.
    pub fn probabilities(&self) -> Vec<(Mask, f64)> {
        let n = self.norm_sq();
        self.amps.iter().map(|(m, a)| (m.clone(), a.norm_sqr() / n)).collect()
    }

    /// One projective measurement of every qubit.
    pub fn project_and_sample(&self, seed: u64) -> Mask {
        self.sample_many(1, seed).pop().expect("one sample")
    }

    /// `shots` independent measurements from a seeded stream.
    pub fn sample_many(&self, shots: usize, seed: u64) -> Vec<Mask> {
        let probs = self.probabilities();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for (_, p) in &probs {
            acc += p;
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..shots)
            .map(|_| {
                let x: f64 = rng.gen::<f64>() * acc;
                let i = cdf.partition_point(|&c| c <= x).min(probs.len() - 1);
                probs[i].0.clone()
            })
            .collect()
    }

    /// Header line then one `hexmask re im` line per support mask.
    pub fn dump(&self) -> String {
        let header = DumpHeader {
            lattice: self.spec,
            qubits: self.nqubits,
            norm: self.norm_sq().sqrt(),
            support: self.amps.len(),
        };
        let mut s = serde_json::to_string(&header).expect("header serializes");
        s.push('\n');
        for (m, a) in &self.amps {
            s.push_str(&format!("{} {:e} {:e}\n", m.to_hex(self.nqubits), a.re, a.im));
        }
        s
    }

    /// Parse the output of [`SparseState::dump`].
    pub fn load(text: &str) -> Result<(SparseState, Lattice)> {
        let mut lines = text.lines();
        let head = lines.next().ok_or_else(|| RkError::Parse("empty state dump".into()))?;
        let header: DumpHeader =
            serde_json::from_str(head).map_err(|e| RkError::Parse(format!("state header: {e}")))?;
        let lat = Lattice::new(header.lattice)?;
        if header.qubits < lat.num_bonds() {
            return Err(RkError::Parse("qubit count below bond count".into()));
        }
        let mut entries = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(RkError::Parse(format!("bad state line {line:?}")));
            }
            let m = Mask::from_hex(parts[0], header.qubits)
                .ok_or_else(|| RkError::Parse(format!("bad mask {:?}", parts[0])))?;
            let re: f64 = parts[1]
                .parse()
                .map_err(|_| RkError::Parse(format!("bad re {:?}", parts[1])))?;
            let im: f64 = parts[2]
                .parse()
                .map_err(|_| RkError::Parse(format!("bad im {:?}", parts[2])))?;
            entries.push((m, Complex64::new(re, im)));
        }
        if entries.len() != header.support {
            return Err(RkError::Parse(format!(
                "header announces {} entries, found {}",
                header.support,
                entries.len()
            )));
        }
        let s = SparseState::from_amplitudes(&lat, header.qubits - lat.num_bonds(), entries)?;
        Ok((s, lat))
    }
}

/// Uniform superposition over the given masks.
pub fn uniform_state(lat: &Lattice, masks: impl IntoIterator<Item = Mask>) -> Result<SparseState> {
    SparseState::from_amplitudes(lat, 0, masks.into_iter().map(|m| (m, Complex64::new(1.0, 0.0))))
}

/// Fraction of samples equal to `target`.
pub fn sample_frequency(samples: &[Mask], target: &Mask) -> f64 {
    samples.iter().filter(|m| *m == target).count() as f64 / samples.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Closure, Orientation};

    fn lat() -> Lattice {
        build_lattice(Orientation::YC, 1, 2, Closure::OpenCylinder).unwrap()
    }

    #[test]
    fn vacuum_basics() {
        let l = lat();
        let v = SparseState::vacuum(&l);
        assert_eq!(v.support_len(), 1);
        assert!((v.norm_sq() - 1.0).abs() < 1e-15);
        assert!((v.overlap(&v).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_entropy_and_sampling() {
        let l = lat();
        let a = 0usize;
        let b = (1..12).find(|&b| !l.blockaded(a, b)).unwrap();
        let s = SparseState::from_amplitudes(
            &l,
            0,
            [
                (Mask::from_bits(12, [a]), Complex64::new(1.0, 0.0)),
                (Mask::from_bits(12, [b]), Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        assert!((s.entanglement_entropy(&[a]) - 2f64.ln()).abs() < 1e-12);
        let shots = s.sample_many(100_000, 7);
        let f = sample_frequency(&shots, &Mask::from_bits(12, [a]));
        assert!((f - 0.5).abs() < 0.01);
    }

    #[test]
    fn blockade_rejected_and_dump_round_trip() {
        let l = lat();
        let bad = SparseState::from_amplitudes(&l, 0, [(Mask::from_bits(12, [0, 1]), Complex64::new(1.0, 0.0))]);
        assert!(matches!(bad, Err(RkError::BlockadeViolation { .. })));
        let s = SparseState::from_amplitudes(
            &l,
            1,
            [
                (Mask::from_bits(13, [0, 12]), Complex64::new(0.6, 0.0)),
                (Mask::from_bits(13, [4]), Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let (t, _) = SparseState::load(&s.dump()).unwrap();
        assert!((t.overlap(&s).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}
