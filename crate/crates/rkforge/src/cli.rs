//! Command-line front end: `prepare`, `probe` and `pulsecheck`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error. Errors are
//! printed to stderr as one JSON object. `RKFORGE_THREADS` caps the worker
//! pool.

use crate::coverings::{
    enumerate_covers_with, left_pattern, sector_of, x_horizontal, x_strip_loop, z_circumferential, z_longitudinal,
    Backend, BoundaryCondition, DimerCover, SectorLabel, EXHAUSTIVE_BOND_LIMIT,
};
use crate::error::RkError;
use crate::gates::GateKind;
use crate::lattice::{build_lattice, Closure, Lattice, LatticeSpec, Orientation};
use crate::mps::build_rk;
use crate::probes::{
    plant_e_pair, semion_interferometry, x_string_expectation, x_string_via_rotation, z_string_expectation,
    z_string_sampled, ProbeRecord,
};
use crate::protocols::{alternating_schedule, cylinder_schedule, run_lattice_state, torus_schedule, SeedSpec};
use crate::pulses::{
    adiabatic, adiabatic_ladder, fidelity, nonadiabatic, sweep_ladder, SweepKind, ADIABATIC_THRESHOLD, CSV_HEADER,
    NONADIABATIC_THRESHOLD,
};
use crate::simstate::SparseState;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Largest allowed deviation of a verified overlap from 1.
pub const OVERLAP_TOLERANCE: f64 = 1e-9;
/// Durations used by `--T-ladder`.
pub const T_LADDER: [f64; 4] = [5.0, 10.0, 20.0, 40.0];

#[derive(Parser, Debug)]
#[command(name = "rkforge", version, about = "Prepare and check kagome dimer RK states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a lattice, run the preparation schedule and write the state.
    Prepare(PrepareArgs),
    /// Run a string-operator or interferometry probe on a state dump.
    Probe(ProbeArgs),
    /// Integrate pulse realizations of a gate and report fidelities.
    Pulsecheck(PulseArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    #[value(name = "YC")]
    Yc,
    #[value(name = "XC")]
    Xc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClosureArg {
    Open,
    Torus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeedVariant {
    FixedPattern,
    UniformAll,
    AncillaSuperposition,
    FixedParity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Assembly {
    Sequential,
    Alternating,
}

#[derive(clap::Args, Debug)]
pub struct PrepareArgs {
    #[arg(long, value_enum)]
    pub orientation: OrientationArg,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long, value_enum, default_value = "open")]
    pub closure: ClosureArg,
    #[arg(long = "seed-variant", value_enum, default_value = "fixed-parity")]
    pub seed_variant: SeedVariant,
    /// Cylinder: `+1` or `-1`. Torus: the `m_y` bit.
    #[arg(long, allow_hyphen_values = true)]
    pub sector: Option<String>,
    /// Left touch pattern for `fixed-pattern`, one `0`/`1` per left vertex.
    #[arg(long)]
    pub pattern: Option<String>,
    /// Comma-separated amplitudes for `ancilla-superposition`, `2^N` values.
    #[arg(long)]
    pub amplitudes: Option<String>,
    #[arg(long, value_enum, default_value = "sequential")]
    pub assembly: Assembly,
    /// Compare with the enumerated and matrix-product oracles.
    #[arg(long)]
    pub verify: bool,
    /// Lift the bond-count guard on exhaustive verification.
    #[arg(long = "allow-large")]
    pub allow_large: bool,
    /// Output directory for `state.txt`, `schedule.json` and `report.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    ZScan,
    XRotation,
    Semion,
}

#[derive(clap::Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_enum)]
    pub probe: ProbeKind,
    #[arg(long, default_value_t = 10_000)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON result here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PulseMode {
    Nonadiabatic,
    Adiabatic,
}

#[derive(clap::Args, Debug)]
pub struct PulseArgs {
    /// Gate name, or `Xsweep` / `Hsweep` for single-atom sweeps.
    #[arg(long)]
    pub gate: String,
    #[arg(long, value_enum, default_value = "nonadiabatic")]
    pub mode: PulseMode,
    /// Also run the sweep durations 5, 10, 20 and 40.
    #[arg(long = "T-ladder")]
    pub t_ladder: bool,
    #[arg(long = "T", default_value_t = 50.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega0: f64,
    #[arg(long, default_value_t = 2.0)]
    pub delta0: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the pulse breakpoints of every step as JSON.
    #[arg(long = "schedule-out")]
    pub schedule_out: Option<PathBuf>,
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Module(RkError),
    Verification(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Module(e) if is_runtime(e) => 1,
            _ => 2,
        }
    }

    fn to_json(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Module(e) => ("module", e.to_string()),
            CliError::Verification(m) => ("verification", m.clone()),
            CliError::Io(m) => ("io", m.clone()),
        };
        json!({ "error": kind, "message": msg, "exit_code": self.exit_code() }).to_string()
    }
}

fn is_runtime(e: &RkError) -> bool {
    matches!(
        e,
        RkError::StepFailure { .. }
            | RkError::BlockadeViolation { .. }
            | RkError::TargetNotGround { .. }
            | RkError::InLayer { .. }
            | RkError::BadAmplitudes { .. }
            | RkError::ParityClash { .. }
    )
}

impl From<RkError> for CliError {
    fn from(e: RkError) -> Self {
        CliError::Module(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse arguments, run, print errors, and return the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{}", e.to_json());
        return e.exit_code();
    }
    let res = match cli.command {
        Command::Prepare(a) => cmd_prepare(&a).map(|r| println!("{}", r.to_json())),
        Command::Probe(a) => cmd_probe(&a).map(|r| println!("{r}")),
        Command::Pulsecheck(a) => cmd_pulsecheck(&a).map(|csv| {
            if a.out.is_none() {
                print!("{csv}");
            }
        }),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("RKFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RKFORGE_THREADS must be a positive integer, got {v:?}")))?;
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Output of `prepare`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub config: BTreeMap<String, serde_json::Value>,
    pub lattice: LatticeSpec,
    pub bonds: usize,
    pub schedule_depth: usize,
    pub gate_count: usize,
    pub schedule_sha256: String,
    pub support: usize,
    /// `|<oracle|state>|` against the enumerated covers.
    pub overlap: Option<f64>,
    /// Same against the expanded matrix-product state.
    pub mps_overlap: Option<f64>,
    pub amplitudes_real_nonnegative: bool,
    /// `(cut, S)` with the cut before strip `cut`; cylinders only.
    pub entropy_profile: Vec<(usize, f64)>,
    pub sector_populations: BTreeMap<String, f64>,
    /// The only field that changes between identical runs.
    pub timestamp: Timestamp,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub elapsed_ms: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn sector_name(s: SectorLabel) -> String {
    match s {
        SectorLabel::Cylinder { parity } => format!("parity={parity:+}"),
        SectorLabel::Torus { mx, my } => format!("mx={mx},my={my}"),
    }
}

fn parse_bits(s: &str, n: usize) -> CliResult<Vec<bool>> {
    let bits: Option<Vec<bool>> = s
        .chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect();
    bits.filter(|b| b.len() == n)
        .ok_or_else(|| CliError::Usage(format!("--pattern needs {n} characters of 0/1, got {s:?}")))
}

fn pattern_index(bits: &[bool]) -> usize {
    bits.iter().enumerate().map(|(j, &b)| (b as usize) << j).sum()
}

/// Seed spec and the left-edge weight it produces for every pattern.
fn seed_for(a: &PrepareArgs, lat: &Lattice) -> CliResult<(SeedSpec, Vec<f64>)> {
    let n = lat.n();
    let torus = lat.is_torus();
    let sector: Option<u8> = match a.sector.as_deref() {
        None => None,
        Some(s) if torus => Some(match s.trim() {
            "0" => 0,
            "1" => 1,
            _ => {
                return Err(CliError::Usage(format!(
                    "torus --sector is the m_y bit 0 or 1, got {s:?}"
                )))
            }
        }),
        Some(s) => Some(match s.trim() {
            "+1" | "1" => 0,
            "-1" => 1,
            _ => return Err(CliError::Usage(format!("cylinder --sector is +1 or -1, got {s:?}"))),
        }),
    };
    // `sector` is the required parity of |L_0|
    let weights_by_parity = |p: Option<u8>| {
        (0..1usize << n)
            .map(|l| p.map_or(1.0, |p| ((l.count_ones() % 2) as u8 == p) as u8 as f64))
            .collect::<Vec<_>>()
    };
    if torus && a.seed_variant != SeedVariant::FixedParity {
        return Err(CliError::Usage("torus assembly uses the fixed-parity seed".into()));
    }
    if a.pattern.is_some() && a.seed_variant != SeedVariant::FixedPattern {
        return Err(CliError::Usage("--pattern only applies to fixed-pattern".into()));
    }
    if a.amplitudes.is_some() && a.seed_variant != SeedVariant::AncillaSuperposition {
        return Err(CliError::Usage(
            "--amplitudes only applies to ancilla-superposition".into(),
        ));
    }
    Ok(match a.seed_variant {
        SeedVariant::FixedParity => {
            let p = sector.unwrap_or(0);
            let a0 = ((p as usize + n) % 2) as u8;
            (SeedSpec::FixedParity(a0), weights_by_parity(Some(p)))
        }
        SeedVariant::UniformAll => {
            if sector.is_some() {
                return Err(CliError::Usage("uniform-all covers both sectors; drop --sector".into()));
            }
            (SeedSpec::UniformAll, weights_by_parity(None))
        }
        SeedVariant::FixedPattern => {
            let bits = match &a.pattern {
                Some(s) => parse_bits(s, n)?,
                None => vec![false; n],
            };
            let p = (bits.iter().filter(|&&b| b).count() % 2) as u8;
            if sector.is_some_and(|s| s != p) {
                return Err(CliError::Usage("--pattern lies in the other sector".into()));
            }
            let mut w = vec![0.0; 1 << n];
            w[pattern_index(&bits)] = 1.0;
            (SeedSpec::FixedPattern(bits), w)
        }
        SeedVariant::AncillaSuperposition => {
            let w: Vec<f64> = match &a.amplitudes {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| CliError::Usage(format!("bad --amplitudes {s:?}")))?,
                None => weights_by_parity(sector),
            };
            if w.len() != 1 << n {
                return Err(CliError::Usage(format!("--amplitudes needs {} values", 1 << n)));
            }
            if let Some(p) = sector {
                if w.iter()
                    .enumerate()
                    .any(|(l, &x)| x != 0.0 && (l.count_ones() % 2) as u8 != p)
                {
                    return Err(CliError::Usage("--amplitudes has weight outside --sector".into()));
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm.is_nan() || norm <= 0.0 || w.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Usage("--amplitudes must be finite and not all zero".into()));
            }
            let w: Vec<f64> = w.iter().map(|x| x / norm).collect();
            (SeedSpec::AncillaSuperposition(w.clone()), w)
        }
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `prepare`: build, run, optionally verify, and write outputs.
pub fn cmd_prepare(a: &PrepareArgs) -> CliResult<RunReport> {
    let start = Instant::now();
    let orientation = match a.orientation {
        OrientationArg::Yc => Orientation::YC,
        OrientationArg::Xc => Orientation::XC,
    };
    let closure = match a.closure {
        ClosureArg::Open => Closure::OpenCylinder,
        ClosureArg::Torus => Closure::Torus,
    };
    let lat = build_lattice(orientation, a.n, a.m, closure)?;
    let (seed, weights) = seed_for(a, &lat)?;
    if a.verify && lat.num_bonds() > EXHAUSTIVE_BOND_LIMIT && !a.allow_large {
        return Err(CliError::Usage(format!(
            "{} bonds exceed the verification guard of {EXHAUSTIVE_BOND_LIMIT}; pass --allow-large",
            lat.num_bonds()
        )));
    }
    let schedule = match (a.assembly, &seed) {
        (Assembly::Sequential, _) if lat.is_torus() => match seed {
            SeedSpec::FixedParity(a0) => torus_schedule(&lat, a0)?,
            _ => unreachable!("torus seeds are checked in seed_for"),
        },
        (Assembly::Sequential, _) => cylinder_schedule(&lat, &seed)?,
        (Assembly::Alternating, SeedSpec::FixedParity(a0)) if !lat.is_torus() => alternating_schedule(&lat, *a0)?,
        (Assembly::Alternating, _) => {
            return Err(CliError::Usage(
                "alternating assembly needs an open cylinder and fixed-parity".into(),
            ))
        }
    };
    let mut state = run_lattice_state(&schedule, &lat)?;
    state.normalize();

    let (overlap, mps_overlap) = if a.verify {
        let covers = enumerate_covers_with(&lat, &BoundaryCondition::Free, Backend::StripByStrip, usize::MAX)?;
        let entries: Vec<_> = covers
            .iter()
            .filter_map(|c| {
                let w = weights[pattern_index(&left_pattern(&lat, &c.mask, 0))];
                (w != 0.0).then(|| (c.mask.clone(), num_complex::Complex64::new(w, 0.0)))
            })
            .collect();
        let mut oracle = SparseState::from_amplitudes(&lat, 0, entries)?;
        oracle.normalize();
        let ov = oracle.overlap(&state)?.norm();
        let mut mps = build_rk(&lat, None)?.with_boundary(weights.clone())?.expand(&lat)?;
        mps.normalize();
        let mov = mps.overlap(&state)?.norm();
        (Some(ov), Some(mov))
    } else {
        (None, None)
    };

    let entropy_profile = if lat.is_torus() {
        Vec::new()
    } else {
        (1..lat.m())
            .map(|cut| {
                let subset: Vec<usize> = (0..cut).flat_map(|m| lat.strip_bonds(m)).collect();
                (cut, state.entanglement_entropy(&subset))
            })
            .collect()
    };
    let mut sector_populations = BTreeMap::new();
    for (m, amp) in state.iter() {
        let s = sector_of(&lat, &DimerCover::new(m.clone()))?;
        *sector_populations.entry(sector_name(s)).or_insert(0.0) += amp.norm_sqr();
    }

    let mut config = BTreeMap::new();
    config.insert("orientation".into(), json!(format!("{orientation:?}")));
    config.insert("N".into(), json!(a.n));
    config.insert("M".into(), json!(a.m));
    config.insert("closure".into(), json!(format!("{:?}", a.closure).to_lowercase()));
    config.insert("seed_variant".into(), json!(format!("{:?}", a.seed_variant)));
    config.insert("seed".into(), serde_json::to_value(&seed).expect("seed serializes"));
    config.insert("sector".into(), json!(a.sector));
    config.insert("assembly".into(), json!(format!("{:?}", a.assembly)));
    config.insert("verify".into(), json!(a.verify));

    let report = RunReport {
        config,
        lattice: lat.spec(),
        bonds: lat.num_bonds(),
        schedule_depth: schedule.depth(),
        gate_count: schedule.gate_count(),
        schedule_sha256: schedule.sha256(),
        support: state.support_len(),
        overlap,
        mps_overlap,
        amplitudes_real_nonnegative: state.is_real_nonnegative(1e-12),
        entropy_profile,
        sector_populations,
        timestamp: Timestamp {
            unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    };
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::Io(format!("{}: {e}", a.out.display())))?;
    write(&a.out.join("state.txt"), &state.dump())?;
    write(&a.out.join("schedule.json"), &schedule.to_json())?;
    write(&a.out.join("report.json"), &report.to_json())?;
    for (name, v) in [("overlap", overlap), ("mps_overlap", mps_overlap)] {
        if let Some(v) = v {
            if (v - 1.0).abs() > OVERLAP_TOLERANCE {
                return Err(CliError::Verification(format!("{name} {v} differs from 1")));
            }
        }
    }
    Ok(report)
}

/// `probe`: load a state dump and run one probe family.
pub fn cmd_probe(a: &ProbeArgs) -> CliResult<String> {
    let text = std::fs::read_to_string(&a.state)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.state.display())))?;
    let (state, lat) = SparseState::load(&text)?;
    let mut records: Vec<ProbeRecord> = Vec::new();
    let mut failure = None;
    match a.probe {
        ProbeKind::ZScan => {
            let mut paths: Vec<(String, _)> = (0..lat.m())
                .map(|m| (format!("z-circumferential-{m}"), z_circumferential(&lat, m)))
                .collect();
            if lat.is_torus() {
                paths.push(("z-longitudinal".into(), z_longitudinal(&lat)));
            }
            for (k, (name, p)) in paths.iter().enumerate() {
                records.push(ProbeRecord {
                    probe: name.clone(),
                    path: p.bonds.clone(),
                    exact: z_string_expectation(&state, p),
                    estimate: (a.shots > 0)
                        .then(|| z_string_sampled(&state, p, a.shots, a.seed.wrapping_add(k as u64))),
                    shots: a.shots,
                    seed: a.seed.wrapping_add(k as u64),
                });
            }
        }
        ProbeKind::XRotation => {
            let mut paths: Vec<(String, _)> = (0..lat.m())
                .map(|m| (format!("x-strip-{m}"), x_strip_loop(&lat, m)))
                .collect();
            paths.push(("x-horizontal".into(), x_horizontal(&lat)?));
            for (name, p) in &paths {
                records.push(ProbeRecord {
                    probe: name.clone(),
                    path: p.bonds.clone(),
                    exact: x_string_expectation(&lat, &state, p)?,
                    estimate: Some(x_string_via_rotation(&lat, &state, p)?),
                    shots: 0,
                    seed: a.seed,
                });
            }
        }
        ProbeKind::Semion => {
            let planted = plant_e_pair(&lat, &state)?;
            for (name, sites, want) in [
                ("semion-enclosing", &planted.enclosing, 1.0),
                ("semion-empty", &planted.empty, 0.0),
            ] {
                if sites.is_empty() {
                    continue;
                }
                let r = semion_interferometry(&lat, &planted.state, sites, a.shots, a.seed)?;
                let path = crate::probes::even_loop(&lat, sites)?;
                let mut rec = r.record(&path);
                rec.probe = name.into();
                if (r.exact - want).abs() > 1e-9 {
                    failure = Some(format!("{name}: P(1) = {} instead of {want}", r.exact));
                }
                records.push(rec);
            }
        }
    }
    let out = serde_json::to_string_pretty(&json!({
        "lattice": lat.spec(),
        "probe": format!("{:?}", a.probe),
        "records": records,
    }))
    .expect("probe output serializes");
    if let Some(p) = &a.out {
        write(p, &out)?;
    }
    if let Some(f) = failure {
        println!("{out}");
        return Err(CliError::Verification(f));
    }
    Ok(out)
}

/// `pulsecheck`: integrate a gate's realization and return the CSV.
pub fn cmd_pulsecheck(a: &PulseArgs) -> CliResult<String> {
    if !(a.t > 0.0 && a.omega0 > 0.0 && a.delta0 > 0.0) {
        return Err(CliError::Usage("--T, --omega0 and --delta0 must be positive".into()));
    }
    let mut ts: Vec<f64> = if a.t_ladder { T_LADDER.to_vec() } else { Vec::new() };
    ts.push(a.t);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut csv = String::from(CSV_HEADER);
    let mut problems = Vec::new();
    let sweep = match a.gate.as_str() {
        "Xsweep" => Some(SweepKind::X),
        "Hsweep" => Some(SweepKind::H),
        _ => None,
    };
    let mut breakpoints = Vec::new();
    if let Some(kind) = sweep {
        let ladder = sweep_ladder(kind, a.omega0, a.delta0, &ts)?;
        for (t, inf) in &ladder {
            csv.push_str(&format!("{},T={t},0,{:.12},0\n", a.gate, 1.0 - inf));
        }
        check_ladder(&ladder, &mut problems);
        breakpoints.push(json!({ "step": a.gate, "atoms": crate::pulses::adiabatic_sweep(kind, a.omega0, a.delta0, a.t).breakpoints() }));
    } else {
        let kind = GateKind::parse(&a.gate).ok_or_else(|| CliError::Usage(format!("unknown gate {:?}", a.gate)))?;
        match a.mode {
            PulseMode::Nonadiabatic => {
                let r = nonadiabatic(kind)?;
                let f = fidelity(&r, kind)?;
                csv.push_str(&f.csv_rows("all"));
                if f.coherent < NONADIABATIC_THRESHOLD {
                    problems.push(format!(
                        "coherent fidelity {} below {NONADIABATIC_THRESHOLD}",
                        f.coherent
                    ));
                }
                for st in &r.steps {
                    breakpoints.push(json!({ "step": st.name, "atoms": st.schedule.breakpoints() }));
                }
            }
            PulseMode::Adiabatic => {
                let reports = adiabatic_ladder(kind, a.omega0, a.delta0, &ts)?;
                for (t, f) in &reports {
                    csv.push_str(&f.csv_rows(&format!("T={t}")));
                }
                let ladder: Vec<(f64, f64)> = reports.iter().map(|(t, f)| (*t, 1.0 - f.population)).collect();
                check_ladder(&ladder, &mut problems);
                for st in adiabatic(kind, a.omega0, a.delta0, a.t)?.steps {
                    breakpoints.push(json!({ "step": st.name, "atoms": st.schedule.breakpoints() }));
                }
            }
        }
    }
    if let Some(p) = &a.out {
        write(p, &csv)?;
    }
    if let Some(p) = &a.schedule_out {
        write(
            p,
            &serde_json::to_string_pretty(&breakpoints).expect("breakpoints serialize"),
        )?;
    }
    if !problems.is_empty() {
        if a.out.is_none() {
            print!("{csv}");
        }
        return Err(CliError::Verification(problems.join("; ")));
    }
    Ok(csv)
}

/// Infidelity must not grow along the ladder and must meet the threshold at
/// the longest duration.
fn check_ladder(ladder: &[(f64, f64)], problems: &mut Vec<String>) {
    if ladder.windows(2).any(|w| w[1].1 > w[0].1 + 1e-6) {
        problems.push(format!("infidelity is not monotone: {ladder:?}"));
    }
    if let Some(&(t, inf)) = ladder.last() {
        if 1.0 - inf < ADIABATIC_THRESHOLD {
            problems.push(format!("fidelity {} at T={t} below {ADIABATIC_THRESHOLD}", 1.0 - inf));
        }
    }
}
