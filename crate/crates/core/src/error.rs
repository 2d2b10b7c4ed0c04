use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Branch loci a chart or loop has to stay away from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Locus {
    /// A tail coordinate vanishes: ramification of the covering map.
    CoveringBranch,
    /// A tail coordinate of the driving ball automorphism vanishes.
    ImageBranch,
}

impl std::fmt::Display for Locus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Locus::CoveringBranch => write!(f, "covering branch locus {{z_i = 0}}"),
            Locus::ImageBranch => write!(f, "pulled-back branch locus {{ftilde_i(pi(z)) = 0}}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("chart invalid: hits the {locus} at tail index {index} ({detail})")]
    ChartInvalid {
        locus: Locus,
        index: usize,
        detail: String,
    },

    #[error("loop point {point} hits the {locus} at tail index {index}")]
    LocusHit {
        locus: Locus,
        index: usize,
        point: usize,
    },

    #[error("loop resolution too coarse: argument jump {jump:.3} rad at step {step}")]
    Resolution { step: usize, jump: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
