use thiserror::Error;

/// A word over the alphabet `{1, ..., N}`, reported 1-based in messages.
pub type WordLetters = Vec<usize>;

fn word_suffix(word: &Option<WordLetters>) -> String {
    match word {
        Some(w) => {
            let letters: Vec<String> = w.iter().map(|i| (i + 1).to_string()).collect();
            format!(" (word {})", letters.join(""))
        }
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exterior power degree {k} is out of range for dimension {dim}")]
    WedgeDegreeOutOfRange { k: usize, dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no certified simple dominant real eigenvalue{}: {reason}", word_suffix(.word))]
    DominanceUnverified { word: Option<WordLetters>, reason: String },

    #[error("degenerate product{}: leading eigenvalue enclosure contains zero", word_suffix(.word))]
    DegenerateProduct { word: Option<WordLetters> },

    #[error("no sign pattern makes every exterior power entrywise positive at degree {degree}")]
    NoPositiveSignPattern { degree: usize },

    #[error("no root found: {detail}")]
    NoRootFound { detail: String },

    #[error("pressure approximation does not straddle 1 on [{lower}, {upper}]: {detail}")]
    BracketFailed {
        lower: String,
        upper: String,
        detail: String,
    },

    #[error("secant iteration failed to converge after {iterations} steps")]
    SecantDiverged { iterations: usize },

    #[error("precision escalation exceeded the cap of {cap} bits")]
    PrecisionInsufficient { cap: u32 },

    #[error("matrix {index} is singular")]
    SingularMatrix { index: usize },

    #[error("power iteration stalled after {iterations} iterations")]
    PowerIterationStalled { iterations: usize },

    #[error("determinant oracle limited to order {max}, requested {requested}")]
    OrderTooLarge { requested: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Variant name, stable across releases, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::WedgeDegreeOutOfRange { .. } => "WedgeDegreeOutOfRange",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DominanceUnverified { .. } => "DominanceUnverified",
            Error::DegenerateProduct { .. } => "DegenerateProduct",
            Error::NoPositiveSignPattern { .. } => "NoPositiveSignPattern",
            Error::NoRootFound { .. } => "NoRootFound",
            Error::BracketFailed { .. } => "BracketFailed",
            Error::SecantDiverged { .. } => "SecantDiverged",
            Error::PrecisionInsufficient { .. } => "PrecisionInsufficient",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::PowerIterationStalled { .. } => "PowerIterationStalled",
            Error::OrderTooLarge { .. } => "OrderTooLarge",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// Attaches the offending word to eigenvalue errors raised deep inside a trace sum.
    pub fn with_word(self, letters: &[usize]) -> Self {
        match self {
            Error::DominanceUnverified { reason, .. } => Error::DominanceUnverified {
                word: Some(letters.to_vec()),
                reason,
            },
            Error::DegenerateProduct { .. } => Error::DegenerateProduct {
                word: Some(letters.to_vec()),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
