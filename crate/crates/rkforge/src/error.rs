//! Crate-wide error type.

use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RkError {
    #[error("torus closure needs an even number of strips, got M={m}")]
    TorusOddLength { m: usize },
    #[error("invalid lattice size: {reason}")]
    InvalidSize { reason: String },
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("lattice has {bonds} bonds, above the exhaustive guard of {limit}")]
    TooLarge { bonds: usize, limit: usize },
    #[error("Z-loop eigenvalue needs a closed path")]
    OpenPath,
    #[error("X-string rearrangement leaves an invalid cover: {reason}")]
    InvalidRearrangement { reason: String },
    #[error("cover is not a valid dimer covering")]
    InvalidCover,
    #[error("parity mismatch: |L|={l} and |R|={r} differ in parity")]
    ParityMismatch { l: usize, r: usize },
    #[error("strip configuration is not valid: {reason}")]
    InvalidStrip { reason: String },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("sector label does not fit this geometry: {reason}")]
    InvalidSector { reason: String },
    #[error("cut at {cut} leaves no strip on one side (M={m})")]
    EdgeCut { cut: usize, m: usize },
    #[error("states live on different registers")]
    LatticeMismatch,
    #[error("target qubit {qubit} is not in its ground state")]
    TargetNotGround { qubit: usize },
    #[error("output configuration violates blockade between qubits {a} and {b}")]
    BlockadeViolation { a: usize, b: usize },
    #[error("strip {strip} has no grown or seeded predecessor")]
    NotGrown { strip: usize },
    #[error("boundary amplitudes are not normalized (norm^2 = {norm_sq})")]
    BadAmplitudes { norm_sq: f64 },
    #[error("seed variant needs ancilla qubits that the schedule does not provide")]
    MissingAncilla,
    #[error("neighbouring strips have incompatible parities for gluing strip {strip}")]
    ParityClash { strip: usize },
    #[error("bonds {0:?} are not a mutually blockaded triangle")]
    BadTriangle([usize; 3]),
    #[error("loop encloses an odd number of sites ({sites})")]
    OddLoop { sites: usize },
    #[error("integrator could not reach tolerance at t={t}")]
    StepFailure { t: f64 },
    #[error("realization cluster does not match the gate register: {reason}")]
    GeometryMismatch { reason: String },
    #[error("gate {gate} in layer {layer} failed: {source}")]
    InLayer {
        layer: usize,
        gate: usize,
        source: Box<RkError>,
    },
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, RkError>;
