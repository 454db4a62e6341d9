//! Layered gate schedules for growing, seeding and gluing strips.
//!
//! A schedule is plain data: an ordered list of layers, each a set of gates
//! that touch disjoint targets and never control one another. Ancillas are
//! extra qubits after the lattice bonds. Strip 0 of a cylinder (or any strip
//! whose left neighbour is still empty) reads every boundary control as
//! `0_c`, so unseeded growth there touches every left vertex.

use crate::error::{Result, RkError};
use crate::gates::{apply_layer, GateApplication};
use crate::lattice::{Lattice, LatticeSpec, Orientation};
use crate::mask::Mask;
use crate::simstate::SparseState;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Gates executed together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub gates: Vec<GateApplication>,
}

/// Explicit amplitudes loaded into a set of ground-state ancillas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AncillaInit {
    pub qubits: Vec<usize>,
    /// Amplitude of each register value; bit `k` is `qubits[k]`.
    pub amplitudes: Vec<f64>,
}

/// Serializable gate schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub lattice: LatticeSpec,
    pub ancillas: usize,
    #[serde(default)]
    pub ancilla_init: Vec<AncillaInit>,
    pub layers: Vec<Layer>,
}

impl GateSchedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }
    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.gates.len()).sum()
    }
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| RkError::Parse(e.to_string()))
    }
    /// Hex SHA-256 of the compact JSON form.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schedule serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Boundary preparation of one strip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeedSpec {
    /// Touch exactly the left vertices with `l_j = 1`.
    FixedPattern(Vec<bool>),
    /// Every left pattern with equal weight.
    UniformAll,
    /// Given amplitude for each left pattern (bit `j` is `l_{j+1}`).
    AncillaSuperposition(Vec<f64>),
    /// Equal weight on patterns with `|L| = N + a0 (mod 2)`.
    FixedParity(u8),
}

impl SeedSpec {
    /// Seed whose patterns all give cylinder sector `parity`.
    pub fn for_sector(n: usize, parity: i8) -> SeedSpec {
        let weight_parity = if parity == 1 { 0 } else { 1 };
        SeedSpec::FixedParity(((weight_parity + n) % 2) as u8)
    }
}

/// Incremental schedule construction with growth bookkeeping.
pub struct ScheduleBuilder<'a> {
    lat: &'a Lattice,
    grown: Vec<bool>,
    seeded: Vec<bool>,
    ancillas: usize,
    ancilla_init: Vec<AncillaInit>,
    layers: Vec<Layer>,
}

fn layer(name: impl Into<String>, gates: Vec<GateApplication>) -> Layer {
    Layer {
        name: name.into(),
        gates,
    }
}

impl<'a> ScheduleBuilder<'a> {
    pub fn new(lat: &'a Lattice) -> Self {
        ScheduleBuilder {
            lat,
            grown: vec![false; lat.m()],
            seeded: vec![false; lat.m()],
            ancillas: 0,
            ancilla_init: Vec::new(),
            layers: Vec::new(),
        }
    }

    fn alloc(&mut self, k: usize) -> Vec<usize> {
        let base = self.lat.num_bonds() + self.ancillas;
        self.ancillas += k;
        (base..base + k).collect()
    }

    fn b(&self, m: i64, n: i64, i: u8) -> usize {
        self.lat.bond(m, n, i)
    }

    fn check_strip(&self, m: usize) -> Result<()> {
        if m >= self.lat.m() {
            return Err(RkError::InvalidSize {
                reason: format!("strip {m} outside a lattice of {} strips", self.lat.m()),
            });
        }
        Ok(())
    }

    fn group(&mut self, parallel: Vec<Vec<Layer>>) {
        // merge per-strip layer lists so equal positions share a layer
        let depth = parallel.iter().map(|v| v.len()).max().unwrap_or(0);
        for k in 0..depth {
            let mut names = Vec::new();
            let mut gates = Vec::new();
            for v in &parallel {
                if let Some(l) = v.get(k) {
                    names.push(l.name.clone());
                    gates.extend(l.gates.iter().cloned());
                }
            }
            names.dedup();
            self.layers.push(layer(names.join(" | "), gates));
        }
    }

    /// Seed the left edge of strip `m`.
    pub fn seed(&mut self, m: usize, spec: &SeedSpec) -> Result<()> {
        let ls = self.seed_layers(m, spec)?;
        self.layers.extend(ls);
        Ok(())
    }

    fn seed_layers(&mut self, m: usize, spec: &SeedSpec) -> Result<Vec<Layer>> {
        self.check_strip(m)?;
        let n = self.lat.n();
        if let SeedSpec::FixedPattern(l) = spec {
            if l.len() != n {
                return Err(RkError::LengthMismatch {
                    left: l.len(),
                    right: n,
                });
            }
        }
        if let SeedSpec::AncillaSuperposition(a) = spec {
            let norm: f64 = a.iter().map(|x| x * x).sum();
            if a.len() != 1 << n || (norm - 1.0).abs() > 1e-9 {
                return Err(RkError::BadAmplitudes { norm_sq: norm });
            }
        }
        if let SeedSpec::FixedParity(a0) = spec {
            if *a0 > 1 {
                return Err(RkError::InvalidSector {
                    reason: format!("parity seed bit must be 0 or 1, got {a0}"),
                });
            }
        }
        self.seeded[m] = true;
        match self.lat.orientation() {
            Orientation::YC => self.seed_yc(m, spec),
            Orientation::XC => self.seed_xc(m, spec),
        }
    }

    fn slants(&self, m: i64, j: usize) -> (usize, usize) {
        let n = 2 * j as i64 + 1;
        (self.b(m, n, 1), self.b(m, n, 2))
    }

    fn seed_yc(&mut self, m: usize, spec: &SeedSpec) -> Result<Vec<Layer>> {
        let n = self.lat.n();
        let mi = m as i64;
        let mut out = Vec::new();
        match spec {
            SeedSpec::FixedPattern(l) => {
                let gates = (0..n)
                    .filter(|&j| l[j])
                    .map(|j| {
                        let (a, b) = self.slants(mi, j);
                        GateApplication::psi(a, b)
                    })
                    .collect();
                out.push(layer(format!("seed pattern s{m}"), gates));
            }
            SeedSpec::UniformAll => {
                let gates = (0..n)
                    .map(|j| {
                        let (a, b) = self.slants(mi, j);
                        GateApplication::sqrt_psi(a, b)
                    })
                    .collect();
                out.push(layer(format!("seed uniform s{m}"), gates));
            }
            SeedSpec::AncillaSuperposition(amps) => {
                let anc = self.alloc(n);
                // ancilla j excited means left vertex j stays empty
                let full = (1usize << n) - 1;
                let mut reg = vec![0.0; 1 << n];
                for (p, &a) in amps.iter().enumerate() {
                    reg[!p & full] = a;
                }
                self.ancilla_init.push(AncillaInit {
                    qubits: anc.clone(),
                    amplitudes: reg,
                });
                let fill = (0..n)
                    .map(|j| {
                        let (a, b) = self.slants(mi, j);
                        GateApplication::u1c2t(vec![anc[j]], a, b)
                    })
                    .collect();
                out.push(layer(format!("seed ancilla fill s{m}"), fill));
                let erase = (0..n)
                    .map(|j| {
                        let (a, b) = self.slants(mi, j);
                        GateApplication::x1c1t(vec![a, b], anc[j]).any_targets()
                    })
                    .collect();
                out.push(layer(format!("seed ancilla erase s{m}"), erase));
            }
            SeedSpec::FixedParity(a0) => {
                let a = self.alloc(1)[0];
                if *a0 == 1 {
                    out.push(layer(
                        format!("seed parity flip s{m}"),
                        vec![GateApplication::x1c1t(vec![], a)],
                    ));
                }
                for j in 0..n - 1 {
                    let (p, q) = self.slants(mi, j);
                    out.push(layer(
                        format!("seed flying ancilla s{m} t{}", 2 * j + 1),
                        vec![GateApplication::xpsi(a, p, q)],
                    ));
                }
                let (p, q) = self.slants(mi, n - 1);
                out.push(layer(
                    format!("seed parity close s{m}"),
                    vec![GateApplication::u1c2t(vec![a], p, q)],
                ));
                out.push(layer(
                    format!("seed parity erase s{m}"),
                    vec![GateApplication::x1c1t(vec![p, q], a).any_targets()],
                ));
            }
        }
        Ok(out)
    }

    /// Left units of strip `m` with their two left vertices' bond groups.
    fn xc_left_units(&self) -> Vec<(i64, usize, usize)> {
        // (unit n, index of lb in L, index of lt in L)
        let n = self.lat.n() as i64;
        (1..=n)
            .filter(|u| u % 2 == 0)
            .map(|u| {
                let k = u % n;
                (u, k as usize, ((k + 1) % n) as usize)
            })
            .collect()
    }

    fn seed_xc(&mut self, m: usize, spec: &SeedSpec) -> Result<Vec<Layer>> {
        let n = self.lat.n();
        let mi = m as i64;
        let units = self.xc_left_units();
        let mut out = Vec::new();
        let u2c4t = |s: &Self, u: i64, c1: Vec<usize>, c2: Vec<usize>| {
            GateApplication::u2c4t(c1, c2, [s.b(mi, u, 1), s.b(mi, u, 2), s.b(mi, u, 3), s.b(mi, u, 4)])
        };
        match spec {
            SeedSpec::FixedPattern(l) => {
                let mut gates = Vec::new();
                for &(u, lb, lt) in &units {
                    match (l[lb], l[lt]) {
                        (true, true) => gates.push(u2c4t(self, u, vec![], vec![])),
                        (true, false) => gates.push(GateApplication::psi(self.b(mi, u, 1), self.b(mi, u, 2))),
                        (false, true) => gates.push(GateApplication::psi(self.b(mi, u, 3), self.b(mi, u, 4))),
                        (false, false) => {}
                    }
                }
                out.push(layer(format!("seed pattern s{m}"), gates));
            }
            SeedSpec::UniformAll | SeedSpec::FixedParity(_) | SeedSpec::AncillaSuperposition(_) => {
                let anc = self.alloc(n);
                match spec {
                    SeedSpec::UniformAll => {
                        out.push(layer(
                            format!("seed ancilla hadamards s{m}"),
                            anc.iter().map(|&a| GateApplication::h1c1t(vec![], a)).collect(),
                        ));
                    }
                    SeedSpec::FixedParity(a0) => {
                        // sum of ancilla bits must equal a0; zero-controlled flips add N-1 offsets
                        let last = anc[n - 1];
                        out.push(layer(
                            format!("seed ancilla hadamards s{m}"),
                            anc[..n - 1]
                                .iter()
                                .map(|&a| GateApplication::h1c1t(vec![], a))
                                .collect(),
                        ));
                        if (*a0 as usize + n - 1) % 2 == 1 {
                            out.push(layer(
                                format!("seed parity flip s{m}"),
                                vec![GateApplication::x1c1t(vec![], last)],
                            ));
                        }
                        for &a in &anc[..n - 1] {
                            out.push(layer(
                                format!("seed parity chain s{m}"),
                                vec![GateApplication::x1c1t(vec![a], last).any_targets()],
                            ));
                        }
                    }
                    SeedSpec::AncillaSuperposition(amps) => {
                        let full = (1usize << n) - 1;
                        let mut reg = vec![0.0; 1 << n];
                        for (p, &a) in amps.iter().enumerate() {
                            reg[!p & full] = a;
                        }
                        self.ancilla_init.push(AncillaInit {
                            qubits: anc.clone(),
                            amplitudes: reg,
                        });
                    }
                    SeedSpec::FixedPattern(_) => unreachable!(),
                }
                let fill = units
                    .iter()
                    .map(|&(u, lb, lt)| u2c4t(self, u, vec![anc[lb]], vec![anc[lt]]))
                    .collect();
                out.push(layer(format!("seed ancilla fill s{m}"), fill));
                let mut erase = Vec::new();
                for &(u, lb, lt) in &units {
                    erase.push(GateApplication::x1c1t(vec![self.b(mi, u, 1), self.b(mi, u, 2)], anc[lb]).any_targets());
                    erase.push(GateApplication::x1c1t(vec![self.b(mi, u, 3), self.b(mi, u, 4)], anc[lt]).any_targets());
                }
                out.push(layer(format!("seed ancilla erase s{m}"), erase));
            }
        }
        Ok(out)
    }

    /// Growth layers of strip `m`; the first layer is dropped when seeded.
    pub fn grow(&mut self, m: usize) -> Result<()> {
        let ls = self.grow_layers(m)?;
        self.layers.extend(ls);
        Ok(())
    }

    fn grow_layers(&mut self, m: usize) -> Result<Vec<Layer>> {
        self.check_strip(m)?;
        if m > 0 && !self.seeded[m] && !self.grown[m - 1] {
            return Err(RkError::NotGrown { strip: m - 1 });
        }
        let mut ls = match self.lat.orientation() {
            Orientation::YC => schedule_yc_growth(self.lat, m),
            Orientation::XC => schedule_xc_growth(self.lat, m),
        };
        if self.seeded[m] {
            ls.remove(0);
        }
        self.grown[m] = true;
        Ok(ls)
    }

    /// Glue strip `m` between its prepared neighbours.
    pub fn glue(&mut self, m: usize) -> Result<()> {
        let ls = self.glue_layers(m)?;
        self.layers.extend(ls);
        Ok(())
    }

    fn glue_layers(&mut self, m: usize) -> Result<Vec<Layer>> {
        self.check_strip(m)?;
        let total = self.lat.m();
        let left = if m == 0 {
            self.lat.is_torus().then_some(total - 1)
        } else {
            Some(m - 1)
        };
        let right = if m + 1 == total {
            self.lat.is_torus().then_some(0)
        } else {
            Some(m + 1)
        };
        for s in [left, right] {
            match s {
                Some(s) if self.grown[s] => {}
                Some(s) => return Err(RkError::NotGrown { strip: s }),
                None => {
                    return Err(RkError::NotGrown {
                        strip: if m == 0 { total } else { m + 1 },
                    })
                }
            }
        }
        self.grown[m] = true;
        Ok(schedule_glue(self.lat, m))
    }

    /// Several independent strip operations run side by side.
    pub fn parallel(&mut self, ops: &[(usize, StripOp)]) -> Result<()> {
        let mut lists = Vec::new();
        for (m, op) in ops {
            let mut v = Vec::new();
            match op {
                StripOp::Seed(spec) => v.extend(self.seed_layers(*m, spec)?),
                StripOp::SeedAndGrow(spec) => {
                    v.extend(self.seed_layers(*m, spec)?);
                    v.extend(self.grow_layers(*m)?);
                }
                StripOp::Grow => v.extend(self.grow_layers(*m)?),
                StripOp::Glue => v.extend(self.glue_layers(*m)?),
            }
            lists.push(v);
        }
        self.group(lists);
        Ok(())
    }

    pub fn finish(self) -> GateSchedule {
        GateSchedule {
            lattice: self.lat.spec(),
            ancillas: self.ancillas,
            ancilla_init: self.ancilla_init,
            layers: self.layers,
        }
    }
}

/// Strip-level operation for [`ScheduleBuilder::parallel`].
#[derive(Clone, Debug, PartialEq)]
pub enum StripOp {
    Seed(SeedSpec),
    SeedAndGrow(SeedSpec),
    Grow,
    Glue,
}

/// Four YC growth layers of strip `m` (unit indices periodic).
pub fn schedule_yc_growth(lat: &Lattice, m: usize) -> Vec<Layer> {
    let mi = m as i64;
    let h = 2 * lat.n() as i64;
    let get = |s: i64, n: i64, i: u8| lat.bond_index(crate::lattice::BondId::new(s, n, i));
    let b = |s: i64, n: i64, i: u8| lat.bond(s, n, i);
    let odd: Vec<i64> = (1..=h).filter(|n| n % 2 == 1).collect();
    let even: Vec<i64> = (1..=h).filter(|n| n % 2 == 0).collect();
    let l1 = odd
        .iter()
        .map(|&n| {
            let c: Vec<usize> = [get(mi - 1, n + 1, 1), get(mi - 1, n + 1, 2)]
                .into_iter()
                .flatten()
                .collect();
            GateApplication::u1c2t(c, b(mi, n, 1), b(mi, n, 2))
        })
        .collect();
    let l2 = odd
        .iter()
        .map(|&n| GateApplication::h1c1t(vec![b(mi, n, 1), b(mi, n, 2)], b(mi, n, 3)))
        .collect();
    let l3 = even
        .iter()
        .map(|&n| {
            GateApplication::x1c1t(
                vec![b(mi, n - 1, 2), b(mi, n - 1, 3), b(mi, n + 1, 3), b(mi, n + 1, 1)],
                b(mi, n, 3),
            )
        })
        .collect();
    let l4 = even
        .iter()
        .map(|&n| {
            GateApplication::x2c2t(
                vec![b(mi, n - 1, 2), b(mi, n - 1, 3), b(mi, n, 3)],
                vec![b(mi, n + 1, 1), b(mi, n + 1, 3), b(mi, n, 3)],
                b(mi, n, 1),
                b(mi, n, 2),
            )
        })
        .collect();
    vec![
        layer(format!("yc s{m} step1"), l1),
        layer(format!("yc s{m} step2"), l2),
        layer(format!("yc s{m} step3"), l3),
        layer(format!("yc s{m} step4"), l4),
    ]
}

/// Four XC growth layers of strip `m`: left units, then right units.
pub fn schedule_xc_growth(lat: &Lattice, m: usize) -> Vec<Layer> {
    let mi = m as i64;
    let n = lat.n() as i64;
    let get = |s: i64, u: i64, i: u8| lat.bond_index(crate::lattice::BondId::new(s, u, i));
    let b = |s: i64, u: i64, i: u8| lat.bond(s, u, i);
    let half = |parity: i64, cs: i64| -> (Vec<GateApplication>, Vec<GateApplication>) {
        let units: Vec<i64> = (1..=n).filter(|u| u % 2 == parity).collect();
        let fill = units
            .iter()
            .map(|&u| {
                let c1: Vec<usize> = [get(cs, u - 1, 4), get(cs, u - 1, 6)].into_iter().flatten().collect();
                let c2: Vec<usize> = [get(cs, u + 1, 1), get(cs, u + 1, 5)].into_iter().flatten().collect();
                GateApplication::u2c4t(c1, c2, [b(mi, u, 1), b(mi, u, 2), b(mi, u, 3), b(mi, u, 4)])
            })
            .collect();
        let centre = units
            .iter()
            .map(|&u| {
                GateApplication::h2c2t(
                    vec![b(mi, u, 1), b(mi, u, 2), b(mi, u, 3)],
                    vec![b(mi, u, 2), b(mi, u, 3), b(mi, u, 4)],
                    b(mi, u, 5),
                    b(mi, u, 6),
                )
            })
            .collect();
        (fill, centre)
    };
    let (l1, l2) = half(0, mi - 1);
    let (l3, l4) = half(1, mi);
    vec![
        layer(format!("xc s{m} step1"), l1),
        layer(format!("xc s{m} step2"), l2),
        layer(format!("xc s{m} step3"), l3),
        layer(format!("xc s{m} step4"), l4),
    ]
}

/// Glue layers for strip `m`: a seeded first triangle, then a controlled-X
/// cascade around the strip's cycle. Depth `6N - 1`.
pub fn schedule_glue(lat: &Lattice, m: usize) -> Vec<Layer> {
    let cyc = lat.strip_cycle(m);
    let range = lat.strip_bonds(m);
    let t0 = cyc[0];
    let outside: Vec<usize> = lat.incidence()[t0.ext]
        .iter()
        .copied()
        .filter(|b| !range.contains(b))
        .collect();
    let mut out = vec![
        layer(
            format!("glue s{m} open"),
            vec![GateApplication::u1c2t(outside, t0.bonds[0], t0.bonds[1])],
        ),
        layer(
            format!("glue s{m} centre"),
            vec![GateApplication::h1c1t(vec![t0.bonds[0], t0.bonds[1]], t0.bonds[2])],
        ),
    ];
    for (k, t) in cyc.iter().enumerate().skip(1) {
        for &bond in &[t.bonds[0], t.bonds[2], t.bonds[1]] {
            out.push(layer(
                format!("glue s{m} t{k}"),
                vec![GateApplication::x1c1t(lat.blockade_neighbors(bond).to_vec(), bond)],
            ));
        }
    }
    out
}

/// Seed strip 0 and grow every strip in order.
pub fn cylinder_schedule(lat: &Lattice, seed: &SeedSpec) -> Result<GateSchedule> {
    let mut b = ScheduleBuilder::new(lat);
    b.seed(0, seed)?;
    for m in 0..lat.m() {
        b.grow(m)?;
    }
    Ok(b.finish())
}

/// Torus: a cylinder of `M - 1` strips with a parity seed, closed by gluing
/// the last strip. `m_y = (N + a0) mod 2`; `m_x` ends in an equal superposition.
pub fn torus_schedule(lat: &Lattice, a0: u8) -> Result<GateSchedule> {
    if !lat.is_torus() {
        return Err(RkError::InvalidSize {
            reason: "torus schedule needs a torus lattice".into(),
        });
    }
    let mut b = ScheduleBuilder::new(lat);
    b.seed(0, &SeedSpec::FixedParity(a0))?;
    for m in 0..lat.m() - 1 {
        b.grow(m)?;
    }
    b.glue(lat.m() - 1)?;
    Ok(b.finish())
}

/// Alternating assembly on an open cylinder with odd `M`: even strips are
/// seeded and grown side by side, then every gap strip is glued at once.
pub fn alternating_schedule(lat: &Lattice, a0: u8) -> Result<GateSchedule> {
    if lat.is_torus() || lat.m().is_multiple_of(2) {
        return Err(RkError::InvalidSize {
            reason: format!(
                "alternating assembly needs an open cylinder with odd M, got M={}",
                lat.m()
            ),
        });
    }
    let mut b = ScheduleBuilder::new(lat);
    let even: Vec<(usize, StripOp)> = (0..lat.m())
        .step_by(2)
        .map(|m| (m, StripOp::SeedAndGrow(SeedSpec::FixedParity(a0))))
        .collect();
    b.parallel(&even)?;
    let gaps: Vec<(usize, StripOp)> = (1..lat.m()).step_by(2).map(|m| (m, StripOp::Glue)).collect();
    b.parallel(&gaps)?;
    Ok(b.finish())
}

/// Conflicts inside a layer: shared targets, or a target controlling another gate.
pub fn layer_conflicts(l: &Layer) -> Vec<String> {
    let mut out = Vec::new();
    for (i, g) in l.gates.iter().enumerate() {
        for (j, h) in l.gates.iter().enumerate() {
            if i == j {
                continue;
            }
            if i < j && g.targets.iter().any(|t| h.targets.contains(t)) {
                out.push(format!("gates {i} and {j} share a target"));
            }
            if g.targets.iter().any(|t| h.controls.iter().flatten().any(|c| c == t)) {
                out.push(format!("a target of gate {i} controls gate {j}"));
            }
        }
    }
    out
}

/// Static safety check of every layer.
pub fn check_schedule(s: &GateSchedule) -> Result<()> {
    for (k, l) in s.layers.iter().enumerate() {
        if let Some(c) = layer_conflicts(l).first() {
            return Err(RkError::GeometryMismatch {
                reason: format!("layer {k} ({}): {c}", l.name),
            });
        }
    }
    Ok(())
}

fn load_ancillas(state: &mut SparseState, init: &AncillaInit) -> Result<()> {
    let mut out: BTreeMap<Mask, Complex64> = BTreeMap::new();
    for (m, a) in state.iter() {
        if let Some(&q) = init.qubits.iter().find(|&&q| m.get(q)) {
            return Err(RkError::TargetNotGround { qubit: q });
        }
        for (x, &w) in init.amplitudes.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut o = m.clone();
            for (k, &q) in init.qubits.iter().enumerate() {
                if x >> k & 1 == 1 {
                    o.set(q, true);
                }
            }
            *out.entry(o).or_default() += a * w;
        }
    }
    state.set_amplitudes(out);
    Ok(())
}

/// Run a schedule from the vacuum with the schedule's ancillas.
pub fn run(schedule: &GateSchedule, lat: &Lattice) -> Result<SparseState> {
    run_from(schedule, lat, SparseState::vacuum_with_ancillas(lat, schedule.ancillas))
}

/// Run a schedule on a given initial state.
pub fn run_from(schedule: &GateSchedule, lat: &Lattice, mut state: SparseState) -> Result<SparseState> {
    if schedule.lattice != lat.spec() || state.spec() != lat.spec() {
        return Err(RkError::LatticeMismatch);
    }
    if state.num_ancillas() < schedule.ancillas {
        return Err(RkError::MissingAncilla);
    }
    for init in &schedule.ancilla_init {
        load_ancillas(&mut state, init)?;
    }
    for (k, l) in schedule.layers.iter().enumerate() {
        for (gi, g) in l.gates.iter().enumerate() {
            apply_layer(&mut state, std::slice::from_ref(g)).map_err(|e| RkError::InLayer {
                layer: k,
                gate: gi,
                source: Box::new(e),
            })?;
        }
    }
    Ok(state)
}

/// Run and drop the ancillas, which must all end in the ground state.
pub fn run_lattice_state(schedule: &GateSchedule, lat: &Lattice) -> Result<SparseState> {
    let s = run(schedule, lat)?;
    let (out, p) = s.discard_ancillas(lat)?;
    if (p - 1.0).abs() > 1e-9 {
        return Err(RkError::BadAmplitudes { norm_sq: p });
    }
    Ok(out)
}

/// Glue gap strip `m` into an existing state and check every result is a
/// valid cover; mismatched neighbour parities surface as `ParityClash`.
pub fn glue(lat: &Lattice, state: &SparseState, m: usize) -> Result<SparseState> {
    let sched = GateSchedule {
        lattice: lat.spec(),
        ancillas: 0,
        ancilla_init: Vec::new(),
        layers: schedule_glue(lat, m),
    };
    let out = run_from(&sched, lat, state.clone())?;
    for (mask, _) in out.iter() {
        let lattice_part = mask.resized(lat.num_bonds());
        let bad = lat.strip_cycle(m).iter().any(|t| {
            crate::coverings::touch_count(lat, &lattice_part, t.upper) != 1
                || (!lat.is_exempt(t.ext) && crate::coverings::touch_count(lat, &lattice_part, t.ext) != 1)
        });
        if bad {
            return Err(RkError::ParityClash { strip: m });
        }
    }
    Ok(out)
}
