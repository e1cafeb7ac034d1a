use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why an input cannot support the requested construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `1 − |f|` sits below the floor everywhere.
    Inner,
    /// `E_η(f)` is empty at grid resolution.
    EmptySublevel,
    /// The floor ladder does not show a convergent `∫ log(1 − |f|)`.
    DivergentLogIntegral,
    /// The constraint kernel is trivial in the probed polynomial space.
    EmptyKernel,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Degeneracy::Inner => "f is numerically inner",
            Degeneracy::EmptySublevel => "the sublevel set E_eta(f) is empty",
            Degeneracy::DivergentLogIntegral => {
                "log(1 - |f|) does not look integrable; f is likely extreme"
            }
            Degeneracy::EmptyKernel => "constraint kernel is trivial on the probe space",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("frequency {freq} outside grid range [{lo}, {hi})")]
    FrequencyRange { freq: i64, lo: i64, hi: i64 },
    #[error("degenerate input: {0}")]
    Degenerate(Degeneracy),
    #[error("conditioning failure: {0}")]
    Conditioning(String),
    #[error("serialization failed: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
