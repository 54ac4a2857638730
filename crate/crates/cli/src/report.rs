//! Machine-readable results of one command invocation.

use affinity_core::bigreal::{to_fixed, to_scientific};
use affinity_core::certify::{BracketResult, Certificate};
use affinity_core::Error;
use serde::{Deserialize, Serialize};

/// Digits printed for rigorous approximations.
pub const VALUE_DIGITS: usize = 40;
/// Decimal places printed for discretized estimates.
pub const DISCRETE_DIGITS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub k: usize,
    pub kind: String,
    pub verified: bool,
    pub details: Vec<String>,
}

impl From<&Certificate> for CertificateRecord {
    fn from(c: &Certificate) -> Self {
        Self {
            k: c.k,
            kind: c.kind.to_string(),
            verified: c.is_verified(),
            details: c.details.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketRecord {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_k: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_k_plus_1: Option<String>,
    pub bracket_holds: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sign_pattern: Vec<i32>,
    pub lower_is_exact: bool,
    pub upper_is_exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BracketRecord {
    pub fn from_result(k: usize, result: &Result<BracketResult, Error>) -> Self {
        match result {
            Ok(b) => Self {
                k,
                rho_k: Some(to_scientific(&b.rho_k, VALUE_DIGITS)),
                rho_k_plus_1: Some(to_scientific(&b.rho_k_plus_1, VALUE_DIGITS)),
                bracket_holds: b.bracket_holds,
                sign_pattern: b.sign_pattern.clone(),
                lower_is_exact: b.lower_is_exact,
                upper_is_exact: b.upper_is_exact,
                error: None,
            },
            Err(e) => Self {
                k,
                rho_k: None,
                rho_k_plus_1: None,
                bracket_holds: false,
                sign_pattern: Vec::new(),
                lower_is_exact: false,
                upper_is_exact: false,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveRowRecord {
    pub n: usize,
    /// `"ok"` or the error kind, e.g. `"NoRootFound"`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_digits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secant_iterations: Option<usize>,
    #[serde(default)]
    pub bisected: bool,
    pub elapsed_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSection {
    pub k: usize,
    pub precision_bits: u32,
    pub tolerance: String,
    pub reduction_mode: String,
    pub rows: Vec<SolveRowRecord>,
}

impl SolveSection {
    pub fn from_report(report: &affinity_core::solver::SolveReport) -> Self {
        let rows = report
            .rows
            .iter()
            .map(|row| match &row.outcome {
                Ok(r) => SolveRowRecord {
                    n: row.n,
                    status: "ok".into(),
                    value: Some(to_fixed(&r.s_n, VALUE_DIGITS)),
                    stable_digits: row.stable_digits,
                    secant_iterations: Some(r.secant_iterations),
                    bisected: r.bisected,
                    elapsed_seconds: r.elapsed.as_secs_f64(),
                    error: None,
                },
                Err(e) => SolveRowRecord {
                    n: row.n,
                    status: e.kind().into(),
                    value: None,
                    stable_digits: None,
                    secant_iterations: None,
                    bisected: false,
                    elapsed_seconds: 0.0,
                    error: Some(e.to_string()),
                },
            })
            .collect();
        Self {
            k: report.k,
            precision_bits: report.precision_bits,
            tolerance: to_scientific(&report.tolerance, 6),
            reduction_mode: report.reduction_mode.as_str().into(),
            rows,
        }
    }

    pub fn value(&self, n: usize) -> Option<&str> {
        self.rows.iter().find(|r| r.n == n).and_then(|r| r.value.as_deref())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizeRow {
    pub mesh_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_digits: Option<usize>,
    pub elapsed_seconds: f64,
    pub non_rigorous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizeSection {
    pub non_rigorous: bool,
    pub rows: Vec<DiscretizeRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSection {
    pub s: String,
    pub k: usize,
    pub precision_bits: u32,
    pub reduction_mode: String,
    /// `t_1, ..., t_n`.
    pub traces: Vec<String>,
    /// `a_0, ..., a_n`.
    pub coefficients: Vec<String>,
    pub precision_limited: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    pub library_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_name: Option<String>,
    pub exit_code: i32,
    /// Set when any value in the document lacks a rigorous justification.
    pub non_rigorous: bool,
    /// Whether the hypotheses were certified; absent for commands that do not
    /// need them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub brackets: Vec<BracketRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretize: Option<DiscretizeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_table: Option<TraceSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_seconds: f64,
}

impl ReportDocument {
    pub fn new(command: &str, config_name: Option<String>) -> Self {
        Self {
            command: command.into(),
            library_version: env!("CARGO_PKG_VERSION").into(),
            config_name,
            exit_code: 0,
            non_rigorous: false,
            certified: None,
            contraction: None,
            certificates: Vec::new(),
            brackets: Vec::new(),
            solve: None,
            discretize: None,
            trace_table: None,
            notes: Vec::new(),
            error: None,
            wall_seconds: 0.0,
        }
    }

    pub fn fail(&mut self, error: &Error) {
        self.exit_code = exit_code(error);
        self.error = Some(format!("{}: {error}", error.kind()));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATION: i32 = 2;
pub const EXIT_NO_ROOT: i32 = 3;
pub const EXIT_PRECISION: i32 = 4;
pub const EXIT_INPUT: i32 = 5;

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::DominanceUnverified { .. } | Error::DegenerateProduct { .. } => EXIT_CERTIFICATION,
        Error::NoRootFound { .. }
        | Error::BracketFailed { .. }
        | Error::NoPositiveSignPattern { .. }
        | Error::SecantDiverged { .. }
        | Error::PowerIterationStalled { .. } => EXIT_NO_ROOT,
        Error::PrecisionInsufficient { .. } => EXIT_PRECISION,
        Error::WedgeDegreeOutOfRange { .. }
        | Error::DimensionMismatch(_)
        | Error::SingularMatrix { .. }
        | Error::OrderTooLarge { .. }
        | Error::InvalidInput(_) => EXIT_INPUT,
    }
}
