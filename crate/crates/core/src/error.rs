use alloc::string::String;
use core::fmt;
use num_bigint::BigInt;
use num_complex::Complex64;

/// Errors reported by the library. Every variant names the offending input.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An operation that needs at least one coefficient got an empty spectrum.
    EmptySupport,
    /// The requested grid would not fit in memory.
    GridTooLarge { points: BigInt },
    /// A generic precondition failure with a human-readable reason.
    Invalid(String),
    /// Two sequences that must have equal length do not.
    LengthMismatch { left: usize, right: usize },
    /// `n_{k+1} / n_k < 3` at the given 1-based index.
    Lacunarity { index: usize },
    /// A Riesz amplitude outside `[-1, 1]`.
    Amplitude { index: usize, value: f64 },
    /// The eps sequence does not decay fast enough at the given 1-based index.
    EpsDecay { index: usize },
    /// `eps_k * 2^((n_k + 3) / 2)` violates its bound at the given 1-based index.
    EpsBound { index: usize, value: f64 },
    /// A sequence was shorter than required.
    TooShort { needed: usize, available: usize },
    /// A witness sign was requested at a frequency whose coefficient is zero.
    ZeroSign { freq: BigInt },
    /// Value clusters closer than twice the tolerance.
    Ambiguous { first: Complex64, second: Complex64 },
    /// Snapping tolerance is not below half the minimal gap.
    SnapTolerance { eps: f64, half_gap: f64 },
    /// A hypothesis of a theorem-driven routine fails on the input.
    Hypothesis(String),
    /// The support has fewer than `d` elements.
    SupportTooSmall { size: usize, d: usize },
    /// A value left the representable range; `log2_hint` is the symbolic size.
    Precision { stage: String, log2_hint: String },
    /// The Cantor construction could not thread the summability condition.
    NoThreading { index: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySupport => write!(f, "empty support"),
            Error::GridTooLarge { points } => write!(f, "grid of {points} points is too large"),
            Error::Invalid(msg) => write!(f, "{msg}"),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::Lacunarity { index } => {
                write!(f, "lacunarity n_(k+1)/n_k >= 3 violated at k = {index}")
            }
            Error::Amplitude { index, value } => {
                write!(f, "amplitude a_{index} = {value} outside [-1, 1]")
            }
            Error::EpsDecay { index } => write!(f, "eps sequence decays too slowly at index {index}"),
            Error::EpsBound { index, value } => {
                write!(f, "eps_k * 2^((n_k+3)/2) = {value} out of range at k = {index}")
            }
            Error::TooShort { needed, available } => {
                write!(f, "sequence too short: need {needed}, have {available}")
            }
            Error::ZeroSign { freq } => write!(f, "zero coefficient where a sign is required at {freq}"),
            Error::Ambiguous { first, second } => {
                write!(f, "value clusters {first} and {second} are ambiguous")
            }
            Error::SnapTolerance { eps, half_gap } => {
                write!(f, "tolerance {eps} is not below half the gap {half_gap}")
            }
            Error::Hypothesis(msg) => write!(f, "hypothesis violated: {msg}"),
            Error::SupportTooSmall { size, d } => write!(f, "support of size {size} is smaller than d = {d}"),
            Error::Precision { stage, log2_hint } => {
                write!(f, "precision exhausted at {stage} (log2 magnitude {log2_hint})")
            }
            Error::NoThreading { index } => write!(f, "cannot place a point in ball {index}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
