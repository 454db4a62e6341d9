//! Blockade-controlled logical gates and their zero-controlled circuits.
//!
//! A control group reads `0_c` when none of its qubits is excited. Each gate
//! kind fixes, per control reading, the image `v` of the all-ground target
//! register. The gate acts as the real reflection exchanging the ground
//! vector with `v`, which reproduces the truth tables on ground targets and
//! gives a unitary everywhere else (a full X or H for single targets).

use crate::error::{Result, RkError};
use crate::mask::Mask;
use crate::simstate::SparseState;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

/// Pulse area of the basis-change rotation on one triangle.
pub fn rotation_area() -> f64 {
    4.0 * std::f64::consts::PI / (3.0 * 3f64.sqrt())
}

/// Logical gate kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H1c1t,
    X1c1t,
    U1c2t,
    X2c2t,
    H2c2t,
    U2c4t,
    Psi,
    SqrtPsi,
    XPsi,
    CZString,
    TriangleRotation,
}

impl GateKind {
    /// Required target count; `None` for path-length gates.
    pub fn arity(self) -> Option<usize> {
        use GateKind::*;
        match self {
            H1c1t | X1c1t => Some(1),
            U1c2t | X2c2t | H2c2t | Psi | SqrtPsi => Some(2),
            U2c4t => Some(4),
            XPsi | TriangleRotation => Some(3),
            CZString => None,
        }
    }

    /// Number of independent control groups the truth table distinguishes.
    pub fn control_groups(self) -> usize {
        use GateKind::*;
        match self {
            X2c2t | H2c2t | U2c4t => 2,
            _ => 1,
        }
    }

    /// The six gates used by the growth protocols.
    pub fn protocol_gates() -> [GateKind; 6] {
        use GateKind::*;
        [H1c1t, X1c1t, U1c2t, X2c2t, H2c2t, U2c4t]
    }

    /// Parse a gate name; aliases follow the CLI spelling.
    pub fn parse(s: &str) -> Option<GateKind> {
        use GateKind::*;
        Some(match s {
            "U1c1tH" | "H1c1t" => H1c1t,
            "U1c1tX" | "X1c1t" => X1c1t,
            "U1c2t" => U1c2t,
            "U2c2tX" | "X2c2t" => X2c2t,
            "U2c2tH" | "H2c2t" => H2c2t,
            "U2c4t" => U2c4t,
            "Psi" => Psi,
            "SqrtPsi" => SqrtPsi,
            "XPsi" => XPsi,
            "CZString" => CZString,
            "TriangleRotation" => TriangleRotation,
            _ => return None,
        })
    }
}

/// One gate placed on concrete qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateApplication {
    pub kind: GateKind,
    /// Control groups as qubit lists.
    pub controls: Vec<Vec<usize>>,
    /// Ordered targets.
    pub targets: Vec<usize>,
    /// Target pairs blockaded only while this gate runs.
    #[serde(default)]
    pub extra_blockades: Vec<(usize, usize)>,
    /// Require targets to start in the ground state.
    #[serde(default = "yes")]
    pub ground_targets: bool,
    /// Pulse area for [`GateKind::TriangleRotation`].
    #[serde(default)]
    pub angle: Option<f64>,
}

fn yes() -> bool {
    true
}

impl GateApplication {
    pub fn new(kind: GateKind, controls: Vec<Vec<usize>>, targets: Vec<usize>) -> Self {
        let mut controls: Vec<Vec<usize>> = controls
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g.dedup();
                g
            })
            .collect();
        if kind.control_groups() == 1 {
            controls.retain(|g| !g.is_empty());
        }
        GateApplication {
            kind,
            controls,
            targets,
            extra_blockades: Vec::new(),
            ground_targets: true,
            angle: None,
        }
    }
    pub fn h1c1t(control: Vec<usize>, t: usize) -> Self {
        Self::new(GateKind::H1c1t, vec![control], vec![t])
    }
    pub fn x1c1t(control: Vec<usize>, t: usize) -> Self {
        Self::new(GateKind::X1c1t, vec![control], vec![t])
    }
    pub fn u1c2t(control: Vec<usize>, t1: usize, t2: usize) -> Self {
        Self::new(GateKind::U1c2t, vec![control], vec![t1, t2])
    }
    pub fn x2c2t(c1: Vec<usize>, c2: Vec<usize>, t1: usize, t2: usize) -> Self {
        Self::new(GateKind::X2c2t, vec![c1, c2], vec![t1, t2])
    }
    pub fn h2c2t(c1: Vec<usize>, c2: Vec<usize>, t1: usize, t2: usize) -> Self {
        Self::new(GateKind::H2c2t, vec![c1, c2], vec![t1, t2])
    }
    /// Four-target gate with its standing target blockades `t1-t4`, `t2-t3`.
    pub fn u2c4t(c1: Vec<usize>, c2: Vec<usize>, t: [usize; 4]) -> Self {
        let mut g = Self::new(GateKind::U2c4t, vec![c1, c2], t.to_vec());
        g.extra_blockades = vec![(t[0], t[3]), (t[1], t[2])];
        g
    }
    pub fn psi(t1: usize, t2: usize) -> Self {
        Self::new(GateKind::Psi, vec![], vec![t1, t2])
    }
    pub fn sqrt_psi(t1: usize, t2: usize) -> Self {
        Self::new(GateKind::SqrtPsi, vec![], vec![t1, t2])
    }
    /// Flying-ancilla gate on `[ancilla, d1, d2]`.
    pub fn xpsi(anc: usize, d1: usize, d2: usize) -> Self {
        Self::new(GateKind::XPsi, vec![], vec![anc, d1, d2])
    }
    /// Phase `(-1)^(excited targets)` when the control group reads `0_c`.
    pub fn cz_string(control: Vec<usize>, bonds: Vec<usize>) -> Self {
        let mut g = Self::new(GateKind::CZString, vec![control], bonds);
        g.ground_targets = false;
        g
    }
    pub fn triangle_rotation(bonds: [usize; 3], angle: f64) -> Self {
        let mut g = Self::new(GateKind::TriangleRotation, vec![], bonds.to_vec());
        g.ground_targets = false;
        g.angle = Some(angle);
        g
    }
    /// Same gate without the ground-target requirement.
    pub fn any_targets(mut self) -> Self {
        self.ground_targets = false;
        self
    }

    /// Every qubit the gate reads or writes.
    pub fn support(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .targets
            .iter()
            .chain(self.controls.iter().flatten())
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn check_shape(&self, nqubits: usize) -> Result<()> {
        let bad = |reason: String| Err(RkError::GeometryMismatch { reason });
        if let Some(a) = self.kind.arity() {
            if self.targets.len() != a {
                return bad(format!("{:?} needs {a} targets, got {}", self.kind, self.targets.len()));
            }
        }
        let groups = self.kind.control_groups();
        if groups == 2 && self.controls.len() != 2 {
            return bad(format!("{:?} needs two control groups", self.kind));
        }
        let mut t = self.targets.clone();
        t.sort_unstable();
        t.dedup();
        if t.len() != self.targets.len() {
            return bad("repeated target".into());
        }
        for &q in self.targets.iter().chain(self.controls.iter().flatten()) {
            if q >= nqubits {
                return bad(format!("qubit {q} outside a register of {nqubits}"));
            }
        }
        if self.controls.iter().flatten().any(|c| self.targets.contains(c)) {
            return bad("control overlaps a target".into());
        }
        Ok(())
    }
}

/// Image of the ground target register for a control reading
/// (`true` = `1_c`), as sparse local amplitudes. Local bit `k` is target `k`.
pub fn ground_image(kind: GateKind, ctrl: &[bool]) -> Vec<(usize, f64)> {
    use GateKind::*;
    let any = ctrl.iter().any(|&c| c);
    let c1 = ctrl.first().copied().unwrap_or(false);
    let c2 = ctrl.get(1).copied().unwrap_or(false);
    let h = FRAC_1_SQRT_2;
    match kind {
        H1c1t if !any => vec![(0, h), (1, h)],
        X1c1t if !any => vec![(1, 1.0)],
        U1c2t | Psi if !any => vec![(0b01, h), (0b10, h)],
        SqrtPsi if !any => vec![(0, h), (0b01, 0.5), (0b10, 0.5)],
        X2c2t => match (c1, c2) {
            (true, false) => vec![(0b10, 1.0)],
            (false, true) => vec![(0b01, 1.0)],
            _ => vec![(0, 1.0)],
        },
        H2c2t => match (c1, c2) {
            (false, false) => vec![(0b01, h), (0b10, h)],
            (true, false) => vec![(0b10, 1.0)],
            (false, true) => vec![(0b01, 1.0)],
            (true, true) => vec![(0, 1.0)],
        },
        // bits: t1 = 1, t2 = 2, t3 = 4, t4 = 8
        U2c4t => match (c1, c2) {
            (false, false) => vec![(0b0101, h), (0b1010, h)],
            (true, false) => vec![(0b0100, h), (0b1000, h)],
            (false, true) => vec![(0b0001, h), (0b0010, h)],
            (true, true) => vec![(0, 1.0)],
        },
        _ => vec![(0, 1.0)],
    }
}

/// Column `x` of the reflection exchanging the ground vector with `v`.
fn reflect_column(v: &[(usize, f64)], x: usize) -> Vec<(usize, f64)> {
    // w = (e0 - v) / |e0 - v|, R = I - 2 w w^T
    let mut w: Vec<(usize, f64)> = vec![(0, 1.0)];
    for &(k, a) in v {
        match w.iter_mut().find(|(j, _)| *j == k) {
            Some(e) => e.1 -= a,
            None => w.push((k, -a)),
        }
    }
    let n2: f64 = w.iter().map(|(_, a)| a * a).sum();
    if n2 < 1e-24 {
        return vec![(x, 1.0)];
    }
    let wx = w.iter().find(|(j, _)| *j == x).map_or(0.0, |e| e.1);
    let mut out = vec![(x, 1.0)];
    if wx != 0.0 {
        for &(k, a) in &w {
            let c = -2.0 * a * wx / n2;
            match out.iter_mut().find(|(j, _)| *j == k) {
                Some(e) => e.1 += c,
                None => out.push((k, c)),
            }
        }
    }
    out.retain(|(_, a)| a.abs() > 1e-15);
    out
}

/// Local action on the target register for one control reading and input.
pub fn local_column(kind: GateKind, ctrl: &[bool], x: usize, angle: f64) -> Vec<(usize, Complex64)> {
    match kind {
        GateKind::TriangleRotation => rotation_column(x, angle),
        GateKind::CZString => {
            let s = if ctrl.iter().any(|&c| c) || x.count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            vec![(x, Complex64::new(s, 0.0))]
        }
        GateKind::XPsi => {
            // sqrt-Psi on the pair, then X on the ancilla while the pair is empty
            let mut out: Vec<(usize, Complex64)> = Vec::new();
            let anc = x & 1;
            let pair = x >> 1;
            for (p, a) in local_column(GateKind::SqrtPsi, ctrl, pair, 0.0) {
                let y = if p == 0 && !ctrl.iter().any(|&c| c) {
                    (p << 1) | (anc ^ 1)
                } else {
                    (p << 1) | anc
                };
                out.push((y, a));
            }
            out
        }
        _ => reflect_column(&ground_image(kind, ctrl), x)
            .into_iter()
            .map(|(k, a)| (k, Complex64::new(a, 0.0)))
            .collect(),
    }
}

/// Column of `exp(-i angle G)` on one triangle, `G` the blockade-projected
/// sum of `sigma_x / 2`. Inputs with two excitations are left alone.
fn rotation_column(x: usize, angle: f64) -> Vec<(usize, Complex64)> {
    let alpha = 3f64.sqrt() * angle / 2.0;
    let (c, s) = (alpha.cos(), alpha.sin());
    let r3 = 1.0 / 3f64.sqrt();
    let mi = Complex64::new(0.0, -s);
    match x {
        0 => vec![(0, Complex64::new(c, 0.0)), (1, mi * r3), (2, mi * r3), (4, mi * r3)],
        1 | 2 | 4 => {
            // e_k = r3 s + (orthogonal part); only the s component rotates
            let mut out = vec![(0, mi * r3)];
            for k in [1usize, 2, 4] {
                let delta = if k == x { 1.0 } else { 0.0 };
                out.push((k, Complex64::new(delta + (c - 1.0) / 3.0, 0.0)));
            }
            out
        }
        _ => vec![(x, Complex64::new(1.0, 0.0))],
    }
}

fn check_triangle(state: &SparseState, t: &[usize]) -> Result<()> {
    for i in 0..3 {
        for j in i + 1..3 {
            if !state.neighbors(t[i]).contains(&t[j]) {
                return Err(RkError::BadTriangle([t[0], t[1], t[2]]));
            }
        }
    }
    Ok(())
}

/// Apply one gate.
pub fn apply(state: &SparseState, g: &GateApplication) -> Result<SparseState> {
    let mut s = state.clone();
    apply_in_place(&mut s, g)?;
    Ok(s)
}

const PAR_THRESHOLD: usize = 4096;

/// Apply one gate, replacing the state.
pub fn apply_in_place(state: &mut SparseState, g: &GateApplication) -> Result<()> {
    g.check_shape(state.num_qubits())?;
    if g.kind == GateKind::TriangleRotation {
        check_triangle(state, &g.targets)?;
    }
    let nq = state.num_qubits();
    let clear = Mask::from_bits(nq, g.targets.iter().copied());
    let groups: Vec<Mask> = g
        .controls
        .iter()
        .map(|c| Mask::from_bits(nq, c.iter().copied()))
        .collect();
    let angle = g.angle.unwrap_or_else(rotation_area);
    let ground_checked: Vec<usize> = match g.kind {
        GateKind::XPsi => g.targets[1..].to_vec(),
        _ => g.targets.clone(),
    };
    let entries: Vec<(&Mask, &Complex64)> = state.iter().collect();
    let local = |(m, a): &(&Mask, &Complex64)| -> Result<Vec<(Mask, Complex64)>> {
        let ctrl: Vec<bool> = groups.iter().map(|gm| m.intersects(gm)).collect();
        let x = g
            .targets
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &t)| acc | ((m.get(t) as usize) << k));
        if g.ground_targets {
            if let Some(&q) = ground_checked.iter().find(|&&q| m.get(q)) {
                return Err(RkError::TargetNotGround { qubit: q });
            }
        }
        let mut rest = (*m).clone();
        rest.clear_bits(&clear);
        let mut out = Vec::new();
        for (y, c) in local_column(g.kind, &ctrl, x, angle) {
            let mut o = rest.clone();
            for (k, &t) in g.targets.iter().enumerate() {
                if y >> k & 1 == 1 {
                    o.set(t, true);
                }
            }
            if y != x {
                for (k, &t) in g.targets.iter().enumerate() {
                    if y >> k & 1 == 0 {
                        continue;
                    }
                    if let Some(&b) = state.neighbors(t).iter().find(|&&b| o.get(b)) {
                        return Err(RkError::BlockadeViolation {
                            a: t.min(b),
                            b: t.max(b),
                        });
                    }
                }
                if let Some(&(p, q)) = g.extra_blockades.iter().find(|&&(p, q)| o.get(p) && o.get(q)) {
                    return Err(RkError::BlockadeViolation { a: p, b: q });
                }
            }
            out.push((o, **a * c));
        }
        Ok(out)
    };
    let contributions: Vec<Vec<(Mask, Complex64)>> = if entries.len() >= PAR_THRESHOLD {
        entries.par_iter().map(local).collect::<Result<_>>()?
    } else {
        entries.iter().map(local).collect::<Result<_>>()?
    };
    let mut out: BTreeMap<Mask, Complex64> = BTreeMap::new();
    for (m, a) in contributions.into_iter().flatten() {
        *out.entry(m).or_default() += a;
    }
    state.set_amplitudes(out);
    Ok(())
}

/// Apply a layer of gates in order.
pub fn apply_layer(state: &mut SparseState, layer: &[GateApplication]) -> Result<()> {
    for g in layer {
        apply_in_place(state, g)?;
    }
    Ok(())
}

/// Zero-controlled X or H primitive on a local register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Primitive {
    /// `X`, `H`, `CX`, `CH`, `CCX`, `CCH`, `C3X`, ...
    pub op: String,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
    pub polarity: String,
}

impl Primitive {
    fn new(h: bool, controls: &[usize], target: usize) -> Self {
        let base = if h { "H" } else { "X" };
        let op = match controls.len() {
            0 => base.to_string(),
            1 => format!("C{base}"),
            2 => format!("CC{base}"),
            k => format!("C{k}{base}"),
        };
        Primitive {
            op,
            controls: controls.to_vec(),
            targets: vec![target],
            polarity: "zero".into(),
        }
    }
    /// Whether the base operation is a Hadamard.
    pub fn is_h(&self) -> bool {
        self.op.ends_with('H')
    }
}

/// Zero-controlled circuit on a local register of `width` qubits: one qubit
/// per control group followed by the targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub width: usize,
    pub ops: Vec<Primitive>,
}

impl Circuit {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.ops).expect("circuit serializes")
    }

    /// Dense real statevector evolution on the local register.
    pub fn run(&self, input: usize) -> Vec<f64> {
        let dim = 1usize << self.width;
        let mut psi = vec![0.0; dim];
        psi[input] = 1.0;
        for p in &self.ops {
            let t = p.targets[0];
            let mut next = vec![0.0; dim];
            for (x, &a) in psi.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let fire = p.controls.iter().all(|&c| x >> c & 1 == 0);
                if !fire {
                    next[x] += a;
                } else if p.is_h() {
                    let b = x >> t & 1;
                    let x0 = x & !(1 << t);
                    let x1 = x | (1 << t);
                    next[x0] += a * FRAC_1_SQRT_2;
                    next[x1] += a * FRAC_1_SQRT_2 * if b == 1 { -1.0 } else { 1.0 };
                } else {
                    next[x ^ (1 << t)] += a;
                }
            }
            psi = next;
        }
        psi
    }
}

/// Zero-controlled circuit for one of the six protocol gates.
pub fn decompose(kind: GateKind) -> Option<Circuit> {
    use GateKind::*;
    let p = Primitive::new;
    let (width, ops) = match kind {
        // register: c, t
        H1c1t => (2, vec![p(true, &[0], 1)]),
        X1c1t => (2, vec![p(false, &[0], 1)]),
        // register: c, t1, t2
        U1c2t => (3, vec![p(true, &[0], 1), p(false, &[0, 1], 2)]),
        // register: c1, c2, t1, t2
        X2c2t => (4, vec![p(false, &[0], 2), p(false, &[1], 3)]),
        H2c2t => (4, vec![p(true, &[0, 1], 2), p(false, &[0], 2), p(false, &[1, 2], 3)]),
        // register: c1, c2, t1, t2, t3, t4
        U2c4t => (
            6,
            vec![
                p(true, &[0], 2),
                p(false, &[0, 2], 3),
                p(false, &[0, 1, 3], 4),
                p(false, &[0, 1, 2], 5),
                p(true, &[1, 2, 3], 4),
                p(false, &[1, 2, 3, 4], 5),
            ],
        ),
        _ => return None,
    };
    Some(Circuit { width, ops })
}

/// Local register width and control-group count of a protocol gate.
fn register(kind: GateKind) -> (usize, usize) {
    let groups = kind.control_groups();
    (groups, groups + kind.arity().unwrap_or(0))
}

/// Control readings that occur with ground targets. Both groups of the
/// two-target X gate read `0_c` only where its two targets could not both be
/// filled, so that reading never arises.
pub fn reachable_controls(kind: GateKind) -> Vec<usize> {
    let groups = kind.control_groups();
    (0..1usize << groups)
        .filter(|&c| !(kind == GateKind::X2c2t && c == 0))
        .collect()
}

/// Compare a circuit with the gate's truth table on every reachable local
/// input (reachable control readings, ground targets).
pub fn verify_circuit(kind: GateKind, circuit: &Circuit) -> bool {
    let (groups, width) = register(kind);
    if circuit.width != width {
        return false;
    }
    for c in reachable_controls(kind) {
        let ctrl: Vec<bool> = (0..groups).map(|k| c >> k & 1 == 1).collect();
        let got = circuit.run(c);
        let mut want = vec![0.0; 1 << width];
        for (y, a) in local_column(kind, &ctrl, 0, 0.0) {
            want[c | (y << groups)] += a.re;
        }
        if got.iter().zip(&want).any(|(a, b)| (a - b).abs() > 1e-12) {
            return false;
        }
    }
    true
}

/// [`verify_circuit`] on the stored decomposition.
pub fn verify_decomposition(kind: GateKind) -> bool {
    decompose(kind).is_some_and(|c| verify_circuit(kind, &c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompositions_and_mutations() {
        for k in GateKind::protocol_gates() {
            let c = decompose(k).unwrap();
            assert!(verify_decomposition(k), "{k:?}");
            for drop in 0..c.ops.len() {
                let mut m = c.clone();
                m.ops.remove(drop);
                assert!(!verify_circuit(k, &m), "{k:?} without op {drop}");
            }
        }
    }

    #[test]
    fn reflections_are_involutions() {
        for k in [
            GateKind::H1c1t,
            GateKind::U1c2t,
            GateKind::H2c2t,
            GateKind::U2c4t,
            GateKind::SqrtPsi,
        ] {
            let t = k.arity().unwrap();
            for c in 0..4usize {
                let ctrl = [c & 1 == 1, c & 2 == 2];
                for x in 0..1usize << t {
                    let mut acc = vec![Complex64::new(0.0, 0.0); 1 << t];
                    for (y, a) in local_column(k, &ctrl, x, 0.0) {
                        let norm: f64 = local_column(k, &ctrl, y, 0.0).iter().map(|(_, b)| b.norm_sqr()).sum();
                        assert!((norm - 1.0).abs() < 1e-12);
                        for (z, b) in local_column(k, &ctrl, y, 0.0) {
                            acc[z] += a * b;
                        }
                    }
                    if k != GateKind::SqrtPsi {
                        for (z, v) in acc.iter().enumerate() {
                            let want = if z == x { 1.0 } else { 0.0 };
                            assert!((v.re - want).abs() < 1e-12 && v.im.abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_period_three() {
        let th = rotation_area();
        for x in [0usize, 1, 2, 4] {
            let mut v = vec![Complex64::new(0.0, 0.0); 8];
            v[x] = Complex64::new(1.0, 0.0);
            for _ in 0..3 {
                let mut n = vec![Complex64::new(0.0, 0.0); 8];
                for (i, a) in v.iter().enumerate() {
                    if a.norm() > 0.0 {
                        for (j, b) in rotation_column(i, th) {
                            n[j] += a * b;
                        }
                    }
                }
                v = n;
            }
            assert!((v[x].norm() - 1.0).abs() < 1e-10);
        }
    }
}
