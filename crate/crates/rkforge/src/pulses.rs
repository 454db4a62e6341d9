//! Pulse-level checks of the gates on small atom clusters.
//!
//! Clusters evolve under `H = sum Omega_a / 2 sigma^x_a P - sum Delta_a n_a`
//! with the infinite-blockade projector `P`: an atom can only flip while
//! every blockaded partner is in the ground state. The basis is every
//! configuration of the cluster; the flip rule preserves the number of
//! excited blockaded pairs, so a configuration free of such pairs never
//! leaks into one that has them. Each gate realization is a list of steps,
//! each step a rearranged blockade graph plus a pulse schedule.

use crate::error::{Result, RkError};
use crate::gates::{ground_image, local_column, reachable_controls, rotation_area, GateKind};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// Acceptance threshold for non-adiabatic realizations.
pub const NONADIABATIC_THRESHOLD: f64 = 0.999;
/// Acceptance threshold for adiabatic sweeps.
pub const ADIABATIC_THRESHOLD: f64 = 0.99;
/// Largest supported cluster.
pub const MAX_ATOMS: usize = 8;

/// Linear ramp over one segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub start: f64,
    pub end: f64,
}

impl Ramp {
    pub const ZERO: Ramp = Ramp { start: 0.0, end: 0.0 };
    pub fn constant(v: f64) -> Ramp {
        Ramp { start: v, end: v }
    }
    pub fn linear(start: f64, end: f64) -> Ramp {
        Ramp { start, end }
    }
    fn at(&self, s: f64) -> f64 {
        self.start + (self.end - self.start) * s
    }
    fn is_zero(&self) -> bool {
        self.start == 0.0 && self.end == 0.0
    }
}

/// Piece of a schedule with per-atom linear `Omega` and `Delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub omega: Vec<Ramp>,
    pub delta: Vec<Ramp>,
}

/// Piecewise-linear drive of a cluster with a fixed blockade graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub atoms: usize,
    pub blockade: Vec<(usize, usize)>,
    pub segments: Vec<Segment>,
}

/// One breakpoint of an atom's drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t: f64,
    pub omega: f64,
    pub delta: f64,
}

impl PulseSchedule {
    pub fn new(atoms: usize, blockade: Vec<(usize, usize)>) -> Self {
        PulseSchedule {
            atoms,
            blockade,
            segments: Vec::new(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Add a segment with the given ramps on `driven` atoms; others idle.
    pub fn push(&mut self, duration: f64, driven: &[usize], omega: Ramp, delta: Ramp) {
        let mut seg = Segment {
            duration,
            omega: vec![Ramp::ZERO; self.atoms],
            delta: vec![Ramp::ZERO; self.atoms],
        };
        for &a in driven {
            seg.omega[a] = omega;
            seg.delta[a] = delta;
        }
        self.segments.push(seg);
    }

    /// Square Rabi pulse of area `omega0 * duration` on `driven`.
    pub fn push_rabi(&mut self, driven: &[usize], omega0: f64, duration: f64) {
        self.push(duration, driven, Ramp::constant(omega0), Ramp::ZERO);
    }

    /// Detuning pulse with `int Delta dt = area` on one atom.
    pub fn push_detuning(&mut self, atom: usize, area: f64, rate: f64) {
        if area == 0.0 {
            return;
        }
        self.push(area / rate, &[atom], Ramp::ZERO, Ramp::constant(rate));
    }

    /// Breakpoints of every atom's drive, in time order.
    pub fn breakpoints(&self) -> Vec<Vec<Breakpoint>> {
        let mut out = vec![Vec::new(); self.atoms];
        let mut t = 0.0;
        for seg in &self.segments {
            for (a, pts) in out.iter_mut().enumerate() {
                pts.push(Breakpoint {
                    t,
                    omega: seg.omega[a].start,
                    delta: seg.delta[a].start,
                });
                pts.push(Breakpoint {
                    t: t + seg.duration,
                    omega: seg.omega[a].end,
                    delta: seg.delta[a].end,
                });
            }
            t += seg.duration;
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.breakpoints()).expect("breakpoints serialize")
    }

    fn check(&self) -> Result<()> {
        let bad = |reason: String| RkError::GeometryMismatch { reason };
        if self.atoms == 0 || self.atoms > MAX_ATOMS {
            return Err(bad(format!("clusters hold 1..={MAX_ATOMS} atoms, got {}", self.atoms)));
        }
        if let Some(&(a, b)) = self
            .blockade
            .iter()
            .find(|&&(a, b)| a >= self.atoms || b >= self.atoms || a == b)
        {
            return Err(bad(format!("bad blockade pair ({a},{b})")));
        }
        for s in &self.segments {
            let finite = s
                .omega
                .iter()
                .chain(&s.delta)
                .all(|r| r.start.is_finite() && r.end.is_finite());
            if s.omega.len() != self.atoms
                || s.delta.len() != self.atoms
                || !finite
                || s.duration.is_nan()
                || s.duration < 0.0
            {
                return Err(bad("malformed segment".into()));
            }
        }
        Ok(())
    }

    fn neighbor_masks(&self) -> Vec<usize> {
        let mut nb = vec![0usize; self.atoms];
        for &(a, b) in &self.blockade {
            nb[a] |= 1 << b;
            nb[b] |= 1 << a;
        }
        nb
    }

    /// Weight on configurations with an excited blockaded pair.
    pub fn forbidden_population(&self, psi: &[Complex64]) -> f64 {
        psi.iter()
            .enumerate()
            .filter(|(x, _)| self.blockade.iter().any(|&(a, b)| x >> a & 1 == 1 && x >> b & 1 == 1))
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }
}

/// Adaptive step-size control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

struct Rhs<'a> {
    seg: &'a Segment,
    nb: &'a [usize],
}

impl Rhs<'_> {
    /// `-i H(s) psi` with `s` the fractional position in the segment.
    fn eval(&self, s: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let n = self.nb.len();
        let omega: Vec<f64> = self.seg.omega.iter().map(|r| r.at(s)).collect();
        let delta: Vec<f64> = self.seg.delta.iter().map(|r| r.at(s)).collect();
        for (x, o) in out.iter_mut().enumerate() {
            let mut d = 0.0;
            for (a, &da) in delta.iter().enumerate() {
                if x >> a & 1 == 1 {
                    d -= da;
                }
            }
            let mut acc = psi[x] * d;
            for a in 0..n {
                if omega[a] != 0.0 && x & self.nb[a] == 0 {
                    acc += psi[x ^ (1 << a)] * (omega[a] / 2.0);
                }
            }
            *o = Complex64::new(acc.im, -acc.re);
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn integrate_segment(seg: &Segment, nb: &[usize], psi: &mut [Complex64], t0: f64, tol: Tolerance) -> Result<()> {
    let dim = psi.len();
    let t_end = seg.duration;
    if t_end == 0.0 {
        return Ok(());
    }
    if seg.omega.iter().all(Ramp::is_zero) {
        // diagonal: exact phases
        for (x, c) in psi.iter_mut().enumerate() {
            let mut area = 0.0;
            for (a, r) in seg.delta.iter().enumerate() {
                if x >> a & 1 == 1 {
                    area += (r.start + r.end) / 2.0 * t_end;
                }
            }
            *c *= Complex64::from_polar(1.0, area);
        }
        return Ok(());
    }
    let rhs = Rhs { seg, nb };
    let scale: f64 = seg
        .omega
        .iter()
        .chain(&seg.delta)
        .map(|r| r.start.abs().max(r.end.abs()))
        .fold(1e-3, f64::max);
    let mut h = (0.1 / scale).min(t_end);
    let mut t = 0.0;
    let mut k = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
    let mut steps = 0;
    rhs.eval(0.0, psi, &mut k[0]);
    while t < t_end {
        steps += 1;
        if steps > tol.max_steps || h < 1e-14 * t_end.max(1.0) {
            return Err(RkError::StepFailure { t: t0 + t });
        }
        let hh = h.min(t_end - t);
        for st in 1..7 {
            for i in 0..dim {
                let mut acc = psi[i];
                for j in 0..st {
                    if A[st][j] != 0.0 {
                        acc += k[j][i] * (hh * A[st][j]);
                    }
                }
                tmp[i] = acc;
            }
            let (lo, hi) = k.split_at_mut(st);
            let _ = lo;
            rhs.eval((t + C[st] * hh) / t_end, &tmp, &mut hi[0]);
        }
        // k[6] was evaluated at the fifth-order solution, which is tmp
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut e = Complex64::new(0.0, 0.0);
            for j in 0..7 {
                e += k[j][i] * (hh * (B5[j] - B4[j]));
            }
            let sc = tol.atol + tol.rtol * psi[i].norm().max(tmp[i].norm());
            err = err.max(e.norm() / sc);
        }
        if err <= 1.0 {
            t += hh;
            psi.copy_from_slice(&tmp);
            let last = k[6].clone();
            k[0] = last;
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = hh * fac;
    }
    Ok(())
}

/// Evolve a cluster state through a schedule.
pub fn integrate(schedule: &PulseSchedule, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    integrate_with(schedule, psi, Tolerance::default())
}

/// [`integrate`] with explicit tolerances.
pub fn integrate_with(schedule: &PulseSchedule, psi: &[Complex64], tol: Tolerance) -> Result<Vec<Complex64>> {
    schedule.check()?;
    if psi.len() != 1 << schedule.atoms {
        return Err(RkError::GeometryMismatch {
            reason: format!("state has {} entries for {} atoms", psi.len(), schedule.atoms),
        });
    }
    let nb = schedule.neighbor_masks();
    let mut v = psi.to_vec();
    let mut t0 = 0.0;
    for seg in &schedule.segments {
        integrate_segment(seg, &nb, &mut v, t0, tol)?;
        t0 += seg.duration;
    }
    Ok(v)
}

/// Basis vector of a cluster configuration.
pub fn basis(atoms: usize, x: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << atoms];
    v[x] = Complex64::new(1.0, 0.0);
    v
}

/// Sweep shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepKind {
    /// `Omega = Omega0 sin(pi s)`, `Delta = -Delta0 cos(pi s)`: `|0> -> |1>`.
    X,
    /// `Omega = -Omega0 sin(pi s / 2)`, `Delta = -Delta0 cos(pi s / 2)`:
    /// `|0> -> (|0> + |1>) / sqrt 2` up to phase.
    H,
}

/// Piecewise-linear pieces per sweep.
pub const SWEEP_PIECES: usize = 48;

fn push_sweep(s: &mut PulseSchedule, kind: SweepKind, driven: &[usize], omega0: f64, delta0: f64, t: f64) {
    let at = |s: f64| match kind {
        SweepKind::X => (omega0 * (PI * s).sin().powi(2), -delta0 * (PI * s).cos()),
        SweepKind::H => (
            -omega0 * (FRAC_PI_2 * s).sin().powi(2),
            -delta0 * (FRAC_PI_2 * s).cos().powi(2),
        ),
    };
    let dt = t / SWEEP_PIECES as f64;
    for i in 0..SWEEP_PIECES {
        let (o0, d0) = at(i as f64 / SWEEP_PIECES as f64);
        let (o1, d1) = at((i + 1) as f64 / SWEEP_PIECES as f64);
        s.push(dt, driven, Ramp::linear(o0, o1), Ramp::linear(d0, d1));
    }
}

/// Single-atom sweep of total duration `t`.
pub fn adiabatic_sweep(kind: SweepKind, omega0: f64, delta0: f64, t: f64) -> PulseSchedule {
    let mut s = PulseSchedule::new(1, vec![]);
    push_sweep(&mut s, kind, &[0], omega0, delta0, t);
    s
}

/// Infidelity of a single-atom sweep from `|0>`: for X the weight left off
/// `|1>`, for H one minus the overlap with `(|0>+|1>)/sqrt 2`.
pub fn sweep_infidelity(kind: SweepKind, omega0: f64, delta0: f64, t: f64) -> Result<f64> {
    let out = integrate(&adiabatic_sweep(kind, omega0, delta0, t), &basis(1, 0))?;
    Ok(match kind {
        SweepKind::X => 1.0 - out[1].norm_sqr(),
        SweepKind::H => 1.0 - ((out[0] + out[1]) / SQRT_2).norm_sqr(),
    })
}

/// Infidelity at each duration of a ladder.
pub fn sweep_ladder(kind: SweepKind, omega0: f64, delta0: f64, ts: &[f64]) -> Result<Vec<(f64, f64)>> {
    ts.iter()
        .map(|&t| Ok((t, sweep_infidelity(kind, omega0, delta0, t)?)))
        .collect()
}

/// Logical pulse applied to the driven atoms of a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Drive {
    /// Area `pi` per atom.
    X,
    /// Area `pi / 2`.
    H,
    /// Two blockaded atoms, `int sqrt2 Omega dt = pi`.
    Psi,
    /// Two blockaded atoms, `int sqrt2 Omega dt = pi / 2`.
    SqrtPsi,
    /// Three mutually blockaded atoms, area `4 pi / (3 sqrt 3)`.
    Rotation,
}

impl Drive {
    fn area(self) -> f64 {
        match self {
            Drive::X => PI,
            Drive::H => FRAC_PI_2,
            Drive::Psi => PI / SQRT_2,
            Drive::SqrtPsi => FRAC_PI_2 / SQRT_2,
            Drive::Rotation => rotation_area(),
        }
    }
    fn sweep(self) -> SweepKind {
        match self {
            Drive::H | Drive::SqrtPsi => SweepKind::H,
            _ => SweepKind::X,
        }
    }
}

/// One arrangement and drive of a realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub name: String,
    pub drive: Drive,
    pub driven: Vec<usize>,
    pub blockade: Vec<(usize, usize)>,
}

/// Atom layout of a gate: controls grouped as in the gate, then the steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub kind: GateKind,
    pub atoms: usize,
    pub controls: Vec<Vec<usize>>,
    pub targets: Vec<usize>,
    /// Blockade among atoms as they sit in the lattice.
    pub base: Vec<(usize, usize)>,
    pub plan: Vec<StepPlan>,
}

fn pairs_all(atoms: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &a) in atoms.iter().enumerate() {
        for &b in &atoms[i + 1..] {
            out.push((a, b));
        }
    }
    out
}

fn pairs_between(xs: &[usize], ys: &[usize]) -> Vec<(usize, usize)> {
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
}

fn step(name: &str, drive: Drive, driven: &[usize], blockade: Vec<Vec<(usize, usize)>>) -> StepPlan {
    let mut b: Vec<(usize, usize)> = blockade
        .into_iter()
        .flatten()
        .map(|(a, c)| (a.min(c), a.max(c)))
        .collect();
    b.sort_unstable();
    b.dedup();
    StepPlan {
        name: name.into(),
        drive,
        driven: driven.to_vec(),
        blockade: b,
    }
}

/// Cluster layout of a gate kind; `None` for gates without a pulse model.
pub fn cluster(kind: GateKind) -> Option<Cluster> {
    use GateKind::*;
    let c = |atoms, controls: Vec<Vec<usize>>, targets: Vec<usize>, base: Vec<Vec<(usize, usize)>>, plan| {
        let mut b: Vec<(usize, usize)> = base.into_iter().flatten().collect();
        b.sort_unstable();
        b.dedup();
        Some(Cluster {
            kind,
            atoms,
            controls,
            targets,
            base: b,
            plan,
        })
    };
    match kind {
        H1c1t => {
            let base = vec![pairs_all(&[0, 1, 2])];
            let s = step("H pulse", Drive::H, &[2], base.clone());
            c(3, vec![vec![0, 1]], vec![2], base, vec![s])
        }
        X1c1t => {
            let base = vec![vec![(0, 1), (2, 3)], pairs_between(&[0, 1, 2, 3], &[4])];
            let s = step("X pulse", Drive::X, &[4], base.clone());
            c(5, vec![vec![0, 1, 2, 3]], vec![4], base, vec![s])
        }
        U1c2t => {
            let base = vec![vec![(0, 1), (2, 3)], pairs_between(&[0, 1], &[2, 3])];
            let s = step("Psi pulse", Drive::Psi, &[2, 3], base.clone());
            c(4, vec![vec![0, 1]], vec![2, 3], base, vec![s])
        }
        X2c2t => {
            let base = vec![
                pairs_all(&[0, 1, 2]),
                pairs_all(&[2, 3, 4]),
                pairs_between(&[0, 1, 2], &[5]),
                pairs_between(&[2, 3, 4], &[6]),
                vec![(5, 6)],
            ];
            let s = step("X pulses", Drive::X, &[5, 6], base.clone());
            c(7, vec![vec![0, 1, 2], vec![2, 3, 4]], vec![5, 6], base, vec![s])
        }
        H2c2t => {
            // k1..k4 = 0..3 (lb-rb, lb-c, lt-c, lt-rt), t1 = c-rb, t2 = c-rt
            let base = vec![
                vec![(0, 1), (1, 2), (2, 3)],
                pairs_between(&[0, 1, 2], &[4]),
                pairs_between(&[1, 2, 3], &[5]),
                vec![(4, 5)],
            ];
            let plan = vec![
                step(
                    "H on t1",
                    Drive::H,
                    &[4],
                    vec![vec![(0, 1), (1, 2), (2, 3)], pairs_between(&[0, 1, 2, 3], &[4])],
                ),
                step(
                    "X on t1",
                    Drive::X,
                    &[4],
                    vec![vec![(0, 1), (1, 2), (2, 3)], pairs_between(&[0, 1, 2], &[4])],
                ),
                step(
                    "X on t2",
                    Drive::X,
                    &[5],
                    vec![vec![(0, 1), (1, 2), (2, 3)], pairs_between(&[1, 2, 3, 4], &[5])],
                ),
            ];
            c(6, vec![vec![0, 1, 2], vec![1, 2, 3]], vec![4, 5], base, plan)
        }
        U2c4t => {
            // c1 atoms 0,1; c2 atoms 2,3; targets 4..7
            let ctrl = vec![(0, 1), (2, 3)];
            let base = vec![
                ctrl.clone(),
                pairs_between(&[0, 1], &[4, 5]),
                pairs_between(&[2, 3], &[6, 7]),
                vec![(4, 5), (6, 7), (5, 6), (4, 7)],
            ];
            let plan = vec![
                step(
                    "Psi on t1 t2",
                    Drive::Psi,
                    &[4, 5],
                    vec![ctrl.clone(), pairs_between(&[0, 1], &[4, 5]), vec![(4, 5)]],
                ),
                step(
                    "X on t3 t4",
                    Drive::X,
                    &[6, 7],
                    vec![
                        ctrl.clone(),
                        pairs_between(&[0, 1, 2, 3], &[6, 7]),
                        vec![(4, 7), (5, 6), (6, 7)],
                    ],
                ),
                step(
                    "Psi on t3 t4",
                    Drive::Psi,
                    &[6, 7],
                    vec![ctrl, pairs_between(&[2, 3, 4, 5], &[6, 7]), vec![(6, 7)]],
                ),
            ];
            c(8, vec![vec![0, 1], vec![2, 3]], vec![4, 5, 6, 7], base, plan)
        }
        Psi | SqrtPsi => {
            let d = if kind == Psi { Drive::Psi } else { Drive::SqrtPsi };
            let base = vec![vec![(0, 1)]];
            let s = step("pair pulse", d, &[0, 1], base.clone());
            c(2, vec![], vec![0, 1], base, vec![s])
        }
        XPsi => {
            let base = vec![vec![(1, 2)]];
            let plan = vec![
                step("sqrt-Psi on pair", Drive::SqrtPsi, &[1, 2], vec![vec![(1, 2)]]),
                step("X on ancilla", Drive::X, &[0], vec![vec![(0, 1), (0, 2), (1, 2)]]),
            ];
            c(3, vec![], vec![0, 1, 2], base, plan)
        }
        TriangleRotation => {
            let base = vec![pairs_all(&[0, 1, 2])];
            let s = step("rotation pulse", Drive::Rotation, &[0, 1, 2], base.clone());
            c(3, vec![], vec![0, 1, 2], base, vec![s])
        }
        CZString => None,
    }
}

impl Cluster {
    /// Inputs the gate sees in a protocol: blockade-consistent control
    /// configurations with reachable readings, targets in their allowed states.
    pub fn inputs(&self) -> Vec<usize> {
        let ctrl_atoms: Vec<usize> = {
            let mut v: Vec<usize> = self.controls.iter().flatten().copied().collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let reach = reachable_controls(self.kind);
        let mut out = Vec::new();
        let target_states: Vec<usize> = match self.kind {
            GateKind::XPsi => vec![0, 1 << self.targets[0]],
            GateKind::TriangleRotation => vec![0, 1, 2, 4],
            _ => vec![0],
        };
        for sub in 0..1usize << ctrl_atoms.len() {
            let x: usize = ctrl_atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| sub >> i & 1 == 1)
                .map(|(_, &a)| 1 << a)
                .sum();
            if self.base.iter().any(|&(a, b)| x >> a & 1 == 1 && x >> b & 1 == 1) {
                continue;
            }
            let reading = self.reading(x);
            if !self.controls.is_empty() && !reach.contains(&reading) {
                continue;
            }
            for &t in &target_states {
                out.push(x | t);
            }
        }
        out
    }

    fn reading(&self, x: usize) -> usize {
        self.controls
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|&a| x >> a & 1 == 1))
            .map(|(i, _)| 1 << i)
            .sum()
    }

    /// Logical image of a basis input.
    pub fn logical(&self, x: usize) -> Vec<Complex64> {
        let ctrl: Vec<bool> = (0..self.controls.len())
            .map(|i| self.reading(x) >> i & 1 == 1)
            .collect();
        let local = self
            .targets
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &t)| acc | ((x >> t & 1) << k));
        let tmask: usize = self.targets.iter().map(|&t| 1 << t).sum();
        let rest = x & !tmask;
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << self.atoms];
        let col = if self.kind == GateKind::TriangleRotation || self.kind == GateKind::XPsi {
            local_column(self.kind, &ctrl, local, rotation_area())
        } else if local == 0 {
            ground_image(self.kind, &ctrl)
                .into_iter()
                .map(|(k, a)| (k, Complex64::new(a, 0.0)))
                .collect()
        } else {
            local_column(self.kind, &ctrl, local, 0.0)
        };
        for (y, a) in col {
            let full = self
                .targets
                .iter()
                .enumerate()
                .fold(rest, |acc, (k, &t)| acc | ((y >> k & 1) << t));
            v[full] += a;
        }
        v
    }
}

/// Pulse realization mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Adiabatic,
    Nonadiabatic,
}

/// One step of a realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationStep {
    pub name: String,
    pub schedule: PulseSchedule,
}

/// Pulse-level implementation of a gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRealization {
    pub kind: GateKind,
    pub mode: Mode,
    pub cluster: Cluster,
    pub steps: Vec<RealizationStep>,
    /// Detuning areas appended after each step, per driven atom.
    pub corrections: Vec<Vec<f64>>,
}

impl GateRealization {
    /// Copy with every Rabi segment's duration scaled by `f`.
    pub fn scaled(&self, f: f64) -> GateRealization {
        let mut r = self.clone();
        for st in &mut r.steps {
            for seg in &mut st.schedule.segments {
                if !seg.omega.iter().all(Ramp::is_zero) {
                    seg.duration *= f;
                }
            }
        }
        r
    }
}

const OMEGA0: f64 = 1.0;
const CORRECTIONS: [f64; 4] = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];

fn drive_schedule(cl: &Cluster, st: &StepPlan) -> PulseSchedule {
    let mut s = PulseSchedule::new(cl.atoms, st.blockade.clone());
    s.push_rabi(&st.driven, OMEGA0, st.drive.area() / OMEGA0);
    s
}

type Sparse = Vec<(usize, Complex64)>;

fn prune(v: &[Complex64]) -> Sparse {
    v.iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 1e-18)
        .map(|(i, &c)| (i, c))
        .collect()
}

struct StepCache {
    schedule: PulseSchedule,
    cols: HashMap<usize, Sparse>,
}

impl StepCache {
    fn apply(&mut self, v: &Sparse) -> Result<Sparse> {
        let atoms = self.schedule.atoms;
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << atoms];
        for &(x, a) in v {
            if !self.cols.contains_key(&x) {
                let col = prune(&integrate(&self.schedule, &basis(atoms, x))?);
                self.cols.insert(x, col);
            }
            for &(y, c) in &self.cols[&x] {
                out[y] += a * c;
            }
        }
        Ok(prune(&out))
    }
}

fn coherent_score(overlaps: &[Complex64]) -> f64 {
    let tot: Complex64 = overlaps.iter().sum();
    let ph = if tot.norm() > 0.0 {
        tot / tot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    overlaps
        .iter()
        .map(|o| (o * ph.conj()).re.max(0.0).powi(2))
        .fold(f64::INFINITY, f64::min)
}

fn dense(atoms: usize, v: &Sparse) -> Vec<Complex64> {
    let mut d = vec![Complex64::new(0.0, 0.0); 1 << atoms];
    for &(i, c) in v {
        d[i] = c;
    }
    d
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Non-adiabatic realization: square pulses per step, each followed by
/// detuning corrections on the driven atoms. Correction areas are chosen
/// from multiples of `pi / 2` to maximize the coherent fidelity.
pub fn nonadiabatic(kind: GateKind) -> Result<GateRealization> {
    let cl = cluster(kind).ok_or_else(|| RkError::GeometryMismatch {
        reason: format!("{kind:?} has no pulse realization"),
    })?;
    let mut caches: Vec<StepCache> = cl
        .plan
        .iter()
        .map(|st| StepCache {
            schedule: drive_schedule(&cl, st),
            cols: HashMap::new(),
        })
        .collect();
    let inputs = cl.inputs();
    let targets: Vec<Vec<Complex64>> = inputs.iter().map(|&x| cl.logical(x)).collect();
    let searchable: Vec<bool> = cl.plan.iter().map(|st| st.drive != Drive::Rotation).collect();
    let slots: Vec<(usize, usize)> = cl
        .plan
        .iter()
        .enumerate()
        .filter(|(i, _)| searchable[*i])
        .flat_map(|(i, st)| st.driven.iter().map(move |&a| (i, a)))
        .collect();
    let combos = 4usize.pow(slots.len() as u32);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for combo in 0..combos {
        let area = |i: usize, a: usize| -> f64 {
            slots
                .iter()
                .position(|&s| s == (i, a))
                .map_or(0.0, |p| CORRECTIONS[combo / 4usize.pow(p as u32) % 4])
        };
        let mut overlaps = Vec::with_capacity(inputs.len());
        for (k, &x) in inputs.iter().enumerate() {
            let mut v: Sparse = vec![(x, Complex64::new(1.0, 0.0))];
            for (i, st) in cl.plan.iter().enumerate() {
                v = caches[i].apply(&v)?;
                for (y, c) in v.iter_mut() {
                    let phase: f64 = st
                        .driven
                        .iter()
                        .filter(|&&a| *y >> a & 1 == 1)
                        .map(|&a| area(i, a))
                        .sum();
                    *c *= Complex64::from_polar(1.0, phase);
                }
            }
            overlaps.push(inner(&targets[k], &dense(cl.atoms, &v)));
        }
        let score = coherent_score(&overlaps);
        if score > best.0 + 1e-12 {
            best = (score, combo);
        }
    }
    let combo = best.1;
    let mut steps = Vec::new();
    let mut corrections = Vec::new();
    for (i, st) in cl.plan.iter().enumerate() {
        let mut s = drive_schedule(&cl, st);
        let mut cs = Vec::new();
        for &a in &st.driven {
            let ar = slots
                .iter()
                .position(|&s| s == (i, a))
                .map_or(0.0, |p| CORRECTIONS[combo / 4usize.pow(p as u32) % 4]);
            s.push_detuning(a, ar, OMEGA0);
            cs.push(ar);
        }
        corrections.push(cs);
        steps.push(RealizationStep {
            name: st.name.clone(),
            schedule: s,
        });
    }
    Ok(GateRealization {
        kind,
        mode: Mode::Nonadiabatic,
        cluster: cl,
        steps,
        corrections,
    })
}

/// Adiabatic realization: every step's drive replaced by a sweep of total
/// duration `t`. Phases are left as they fall.
pub fn adiabatic(kind: GateKind, omega0: f64, delta0: f64, t: f64) -> Result<GateRealization> {
    let cl = cluster(kind).ok_or_else(|| RkError::GeometryMismatch {
        reason: format!("{kind:?} has no pulse realization"),
    })?;
    if cl.plan.iter().any(|st| st.drive == Drive::Rotation) {
        return Err(RkError::GeometryMismatch {
            reason: "the triangle rotation is a resonant pulse only".into(),
        });
    }
    let steps = cl
        .plan
        .iter()
        .map(|st| {
            let mut s = PulseSchedule::new(cl.atoms, st.blockade.clone());
            push_sweep(&mut s, st.drive.sweep(), &st.driven, omega0, delta0, t);
            RealizationStep {
                name: st.name.clone(),
                schedule: s,
            }
        })
        .collect();
    let corrections = cl.plan.iter().map(|st| vec![0.0; st.driven.len()]).collect();
    Ok(GateRealization {
        kind,
        mode: Mode::Adiabatic,
        cluster: cl,
        steps,
        corrections,
    })
}

/// Per-input outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputFidelity {
    /// Cluster configuration, atom 0 first.
    pub input: String,
    pub overlap_re: f64,
    pub overlap_im: f64,
    /// `|<logical|pulsed>|^2`.
    pub fidelity: f64,
    /// `arg <logical|pulsed>`.
    pub phase: f64,
    /// Phase of each logical branch relative to its target amplitude.
    pub branch_phases: Vec<(String, f64)>,
}

/// Fidelity summary of a realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub gate: GateKind,
    pub mode: Mode,
    /// Minimum over inputs of the squared real overlap after removing one
    /// global phase: sensitive to relative phases between inputs.
    pub coherent: f64,
    /// Minimum over inputs of `|<logical|pulsed>|^2`.
    pub population: f64,
    /// Minimum over inputs of `(sum_b |logical_b| |pulsed_b|)^2`: blind to
    /// every branch phase, the figure of merit for uncorrected sweeps.
    pub branch_population: f64,
    /// Largest weight gained by any step on configurations its blockade forbids.
    pub forbidden: f64,
    pub inputs: Vec<InputFidelity>,
}

/// Header of the fidelity CSV.
pub const CSV_HEADER: &str = "gate,step,input,fidelity,phase\n";

impl FidelityReport {
    /// Header plus [`FidelityReport::csv_rows`] with step `all`.
    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}{}", self.csv_rows("all"))
    }

    /// One row per input, then the coherent and branch summaries.
    pub fn csv_rows(&self, step: &str) -> String {
        let mut s = String::new();
        for r in &self.inputs {
            s.push_str(&format!(
                "{:?},{step},{},{:.12},{:.12}\n",
                self.gate, r.input, r.fidelity, r.phase
            ));
        }
        s.push_str(&format!("{:?},{step},coherent,{:.12},0\n", self.gate, self.coherent));
        s.push_str(&format!(
            "{:?},{step},branch,{:.12},0\n",
            self.gate, self.branch_population
        ));
        s
    }
}

fn label(atoms: usize, x: usize) -> String {
    (0..atoms).map(|a| if x >> a & 1 == 1 { '1' } else { '0' }).collect()
}

/// Integrate every reachable input of `logical` through the realization and
/// compare with the logical gate.
pub fn fidelity(r: &GateRealization, logical: GateKind) -> Result<FidelityReport> {
    fidelity_with(r, logical, Tolerance::default())
}

/// [`fidelity`] with explicit integrator tolerances.
pub fn fidelity_with(r: &GateRealization, logical: GateKind, tol: Tolerance) -> Result<FidelityReport> {
    let have = &r.cluster;
    let cl = cluster(logical).ok_or_else(|| RkError::GeometryMismatch {
        reason: format!("{logical:?} has no local register"),
    })?;
    if (cl.atoms, &cl.controls, &cl.targets) != (have.atoms, &have.controls, &have.targets)
        || r.steps.iter().any(|s| s.schedule.atoms != cl.atoms)
    {
        return Err(RkError::GeometryMismatch {
            reason: format!(
                "cluster of {:?} does not match the local register of {logical:?}",
                r.kind
            ),
        });
    }
    let results: Vec<Result<(InputFidelity, Complex64, f64, f64)>> = cl
        .inputs()
        .into_par_iter()
        .map(|x| {
            let mut v = basis(cl.atoms, x);
            let mut forbidden: f64 = 0.0;
            for st in &r.steps {
                let before = st.schedule.forbidden_population(&v);
                v = integrate_with(&st.schedule, &v, tol)?;
                forbidden = forbidden.max(st.schedule.forbidden_population(&v) - before);
            }
            let want = cl.logical(x);
            let o = inner(&want, &v);
            let blind: f64 = want.iter().zip(&v).map(|(a, b)| a.norm() * b.norm()).sum();
            let branch_phases = want
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm() > 1e-12)
                .map(|(y, c)| (label(cl.atoms, y), (v[y] / c).arg()))
                .collect();
            let row = InputFidelity {
                input: label(cl.atoms, x),
                overlap_re: o.re,
                overlap_im: o.im,
                fidelity: o.norm_sqr(),
                phase: o.arg(),
                branch_phases,
            };
            Ok((row, o, blind * blind, forbidden))
        })
        .collect();
    let mut rows = Vec::new();
    let mut overlaps = Vec::new();
    let mut forbidden: f64 = 0.0;
    let mut branch_population = f64::INFINITY;
    for res in results {
        let (row, o, b, f) = res?;
        rows.push(row);
        overlaps.push(o);
        branch_population = branch_population.min(b);
        forbidden = forbidden.max(f);
    }
    Ok(FidelityReport {
        gate: logical,
        mode: r.mode,
        coherent: coherent_score(&overlaps),
        population: rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min),
        branch_population,
        forbidden,
        inputs: rows,
    })
}

/// Fidelity of the adiabatic realization at each sweep duration.
pub fn adiabatic_ladder(kind: GateKind, omega0: f64, delta0: f64, ts: &[f64]) -> Result<Vec<(f64, FidelityReport)>> {
    ts.par_iter()
        .map(|&t| Ok((t, fidelity(&adiabatic(kind, omega0, delta0, t)?, kind)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabi_pi_pulse() {
        let mut s = PulseSchedule::new(1, vec![]);
        s.push_rabi(&[0], 1.0, PI);
        let out = integrate(&s, &basis(1, 0)).unwrap();
        assert!(out[0].norm() < 1e-9 && (out[1] - Complex64::new(0.0, -1.0)).norm() < 1e-9);
        s.push_detuning(0, FRAC_PI_2, 1.0);
        let out = integrate(&s, &basis(1, 0)).unwrap();
        assert!((out[1] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn pair_pulse_makes_bell_state() {
        let mut s = PulseSchedule::new(2, vec![(0, 1)]);
        s.push_rabi(&[0, 1], 1.0, PI / SQRT_2);
        let out = integrate(&s, &basis(2, 0)).unwrap();
        assert!((out[1].norm_sqr() - 0.5).abs() < 1e-9 && (out[2].norm_sqr() - 0.5).abs() < 1e-9);
        assert_eq!(out[3], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn simple_gates_reach_threshold() {
        for k in [
            GateKind::H1c1t,
            GateKind::U1c2t,
            GateKind::Psi,
            GateKind::XPsi,
            GateKind::TriangleRotation,
        ] {
            let r = nonadiabatic(k).unwrap();
            let f = fidelity(&r, k).unwrap();
            assert!(f.coherent >= NONADIABATIC_THRESHOLD, "{k:?} {}", f.coherent);
            assert!(f.forbidden.abs() < 1e-12);
        }
    }

    #[test]
    fn halved_area_fails() {
        let r = nonadiabatic(GateKind::U1c2t).unwrap().scaled(0.5);
        assert!(fidelity(&r, GateKind::U1c2t).unwrap().coherent < 0.9);
    }
    #[test]
    fn tolerance_halving_and_norm() {
        let s = adiabatic_sweep(SweepKind::X, 1.0, 2.0, 20.0);
        let a = integrate(&s, &basis(1, 0)).unwrap();
        let tight = Tolerance {
            rtol: 5e-13,
            atol: 5e-15,
            ..Tolerance::default()
        };
        let b = integrate_with(&s, &basis(1, 0), tight).unwrap();
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-11, "{diff}");
        let norm: f64 = a.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10, "{norm}");
    }

    #[test]
    fn blockaded_sweep_stays_put() {
        let mut s = PulseSchedule::new(2, vec![(0, 1)]);
        push_sweep(&mut s, SweepKind::X, &[1], 1.0, 2.0, 50.0);
        let out = integrate(&s, &basis(2, 1)).unwrap();
        assert!((out[1].norm_sqr() - 1.0).abs() < 1e-10 && out[3].norm() == 0.0);
    }

    #[test]
    fn sweeps_converge() {
        for kind in [SweepKind::X, SweepKind::H] {
            let ladder = sweep_ladder(kind, 1.0, 2.0, &[5.0, 10.0, 20.0, 40.0]).unwrap();
            assert!(
                ladder.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-6),
                "{kind:?} {ladder:?}"
            );
            assert!(sweep_infidelity(kind, 1.0, 2.0, 50.0).unwrap() <= 0.01);
        }
    }

    #[test]
    fn register_mismatch() {
        let r = nonadiabatic(GateKind::U1c2t).unwrap();
        assert!(matches!(
            fidelity(&r, GateKind::U2c4t),
            Err(RkError::GeometryMismatch { .. })
        ));
        assert!(matches!(
            nonadiabatic(GateKind::CZString),
            Err(RkError::GeometryMismatch { .. })
        ));
    }

    #[test]
    fn breakpoints_json() {
        let s = adiabatic_sweep(SweepKind::H, 1.0, 2.0, 10.0);
        let pts: Vec<Vec<Breakpoint>> = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(pts[0].len(), 2 * SWEEP_PIECES);
        assert!((pts[0].last().unwrap().t - 10.0).abs() < 1e-12);
    }
}
