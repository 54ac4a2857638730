//! The five subcommands, each producing a [`ReportDocument`].

use std::time::Instant;

use affinity_core::bigreal::{self, to_scientific};
use affinity_core::certify::{
    bracket_dimension_with, check_contraction, check_eventual_positivity, check_multicone, BracketResult, Certificate,
};
use affinity_core::discretize::{solve_dimension_discretized, DEFAULT_DIMENSION_TOLERANCE};
use affinity_core::fredholm::coefficients;
use affinity_core::linalg::RationalMatrix;
use affinity_core::solver::{solve_report_with, SolveOptions};
use affinity_core::traces::{default_precision, trace_table};
use affinity_core::{Error, Result};

use crate::config::ProblemConfig;
use crate::report::{
    BracketRecord, CertificateRecord, DiscretizeRow, DiscretizeSection, ReportDocument, SolveSection, TraceSection,
    DISCRETE_DIGITS, EXIT_CERTIFICATION, EXIT_NO_ROOT, VALUE_DIGITS,
};

/// Precision used for brackets and certificates.
const CHECK_PRECISION: u32 = 256;
/// Largest mesh of the default discretization ladder.
pub const DEFAULT_MESH: usize = 1 << 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Certify,
    Bracket,
    Solve,
    Discretize,
    TraceTable,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Bracket => "bracket",
            Command::Solve => "solve",
            Command::Discretize => "discretize",
            Command::TraceTable => "trace-table",
        }
    }
}

/// Command-line overrides of the config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub precision: Option<u32>,
    pub tol: Option<String>,
    pub no_certify: bool,
    pub s: Option<String>,
    pub mesh: Option<usize>,
}

struct Problem<'a> {
    config: &'a ProblemConfig,
    matrices: Vec<RationalMatrix>,
    overrides: &'a Overrides,
}

impl Problem<'_> {
    fn k(&self) -> Option<usize> {
        self.overrides.k.or(self.config.k)
    }

    fn n_max(&self) -> usize {
        self.overrides.n.unwrap_or(self.config.n_max)
    }

    fn bracket(&self, k: usize) -> Result<BracketResult> {
        bracket_dimension_with(&self.matrices, k, self.config.sign_pattern.as_deref(), CHECK_PRECISION)
    }

    /// The first `k` whose bracket holds, with every bracket tried on the way.
    fn auto_bracket(&self, doc: &mut ReportDocument) -> Option<usize> {
        for k in 0..self.config.dimension {
            let result = self.bracket(k);
            doc.brackets.push(BracketRecord::from_result(k, &result));
            if matches!(result, Ok(ref b) if b.bracket_holds) {
                return Some(k);
            }
        }
        None
    }

    /// `k` from the overrides or config, else from the bracket search.
    fn resolve_k(&self, doc: &mut ReportDocument) -> Result<usize> {
        match self.k() {
            Some(k) if k >= self.config.dimension => Err(Error::InvalidInput(format!(
                "k = {k} must be below the dimension {}",
                self.config.dimension
            ))),
            Some(k) => {
                doc.brackets.push(BracketRecord::from_result(k, &self.bracket(k)));
                Ok(k)
            }
            None => self.auto_bracket(doc).ok_or_else(|| Error::BracketFailed {
                lower: "k = 0".into(),
                upper: format!("k = {}", self.config.dimension - 1),
                detail: "no k brackets the dimension; pass --k to choose one".into(),
            }),
        }
    }

    /// Certificates for degree `degree`: the user multicone first, then
    /// eventual positivity.
    fn certify_degree(&self, degree: usize) -> Result<Vec<Certificate>> {
        let mut out = Vec::new();
        for mc in self.config.multicones.iter().filter(|m| m.k == degree) {
            let cert = check_multicone(&self.matrices, degree, &self.config.build_multicone(mc)?)?;
            let done = cert.is_verified();
            out.push(cert);
            if done {
                return Ok(out);
            }
        }
        out.push(check_eventual_positivity(
            &self.matrices,
            degree,
            self.config.certify_depth.max(1),
        )?);
        Ok(out)
    }

    /// Certifies degrees `k` and `k+1` and the contraction; returns whether
    /// both degrees have a verified certificate.
    fn certify(&self, k: usize, doc: &mut ReportDocument) -> Result<bool> {
        let norm = self.config.norm_matrix()?;
        let contracts = check_contraction(&self.matrices, norm.as_ref())?;
        doc.contraction = Some(contracts);
        if !contracts {
            doc.notes
                .push("contraction not verified in the chosen norm; this check is only sufficient".into());
        }
        let mut all = true;
        for degree in [k, k + 1] {
            let certs = self.certify_degree(degree)?;
            all &= certs.iter().any(Certificate::is_verified);
            doc.certificates.extend(certs.iter().map(CertificateRecord::from));
        }
        doc.certified = Some(all);
        Ok(all)
    }
}

/// Runs `command` and returns the report; the exit code is stored in it.
pub fn run(command: Command, config: &ProblemConfig, overrides: &Overrides) -> ReportDocument {
    let start = Instant::now();
    let mut doc = ReportDocument::new(command.name(), config.name.clone());
    let outcome = config.parsed_matrices().and_then(|matrices| {
        let problem = Problem {
            config,
            matrices,
            overrides,
        };
        match command {
            Command::Certify => cmd_certify(&problem, &mut doc),
            Command::Bracket => cmd_bracket(&problem, &mut doc),
            Command::Solve => cmd_solve(&problem, &mut doc),
            Command::Discretize => cmd_discretize(&problem, &mut doc),
            Command::TraceTable => cmd_trace_table(&problem, &mut doc),
        }
    });
    if let Err(e) = outcome {
        doc.fail(&e);
    }
    doc.wall_seconds = start.elapsed().as_secs_f64();
    doc
}

fn cmd_certify(p: &Problem, doc: &mut ReportDocument) -> Result<()> {
    let k = p.resolve_k(doc)?;
    if !p.certify(k, doc)? {
        doc.exit_code = EXIT_CERTIFICATION;
        doc.error = Some(format!("multipositivity of degrees {k} and {} not certified", k + 1));
    }
    Ok(())
}

fn cmd_bracket(p: &Problem, doc: &mut ReportDocument) -> Result<()> {
    let holding: Vec<usize> = (0..p.config.dimension)
        .filter(|&k| {
            let result = p.bracket(k);
            doc.brackets.push(BracketRecord::from_result(k, &result));
            matches!(result, Ok(ref b) if b.bracket_holds)
        })
        .collect();
    if holding.is_empty() {
        doc.exit_code = EXIT_NO_ROOT;
        doc.error = Some("no k brackets the affinity dimension in (k, k+1)".into());
    }
    Ok(())
}

fn cmd_solve(p: &Problem, doc: &mut ReportDocument) -> Result<()> {
    let k = p.resolve_k(doc)?;
    if p.overrides.no_certify {
        doc.non_rigorous = true;
        doc.notes
            .push("run with --no-certify: the hypotheses were not checked and the values carry no guarantee".into());
    } else if !p.certify(k, doc)? {
        doc.exit_code = EXIT_CERTIFICATION;
        doc.error = Some(format!(
            "multipositivity of degrees {k} and {} not certified; use --no-certify to run anyway",
            k + 1
        ));
        return Ok(());
    }
    let precision = p.overrides.precision.or(p.config.precision_bits);
    let tol_text = p.overrides.tol.clone().or_else(|| p.config.tolerance.clone());
    let tolerance = tol_text
        .map(|t| bigreal::parse(&t, precision.unwrap_or(256).max(256)))
        .transpose()?;
    let options = SolveOptions {
        precision,
        tolerance,
        mode: p.config.mode()?,
        ..SolveOptions::default()
    };
    let report = solve_report_with(&p.matrices, k, 1..=p.n_max(), &options)?;
    let section = SolveSection::from_report(&report);
    let omitted: Vec<String> = section
        .rows
        .iter()
        .filter(|r| r.status != "ok")
        .map(|r| format!("n = {} ({})", r.n, r.status))
        .collect();
    if !omitted.is_empty() {
        doc.notes.push(format!(
            "no root of the approximate pressure equation in ({k}, {}) for {}; rows omitted",
            k + 1,
            omitted.join(", ")
        ));
    }
    if section.rows.iter().all(|r| r.status != "ok") {
        doc.exit_code = EXIT_NO_ROOT;
        doc.error = Some(format!("no n up to {} produced an approximation", p.n_max()));
    }
    doc.solve = Some(section);
    Ok(())
}

fn cmd_discretize(p: &Problem, doc: &mut ReportDocument) -> Result<()> {
    doc.non_rigorous = true;
    affinity_core::discretize::planar_tuple(&p.matrices)?;
    let top = p.overrides.mesh.or(p.config.mesh_size).unwrap_or(DEFAULT_MESH);
    if top < 2 || !top.is_power_of_two() {
        return Err(Error::InvalidInput("mesh size must be a power of two ≥ 2".into()));
    }
    let mut rows: Vec<DiscretizeRow> = Vec::new();
    let mut previous: Option<String> = None;
    let mut size = 2;
    while size <= top {
        let start = Instant::now();
        let row = match solve_dimension_discretized(&p.matrices, size, DEFAULT_DIMENSION_TOLERANCE) {
            Ok(est) => {
                let text = format!("{:.*}", DISCRETE_DIGITS, est.s);
                let stable = previous.as_ref().map(|q| bigreal::shared_digits(q, &text));
                previous = Some(text);
                DiscretizeRow {
                    mesh_size: size,
                    value: Some(est.s),
                    stable_digits: stable,
                    elapsed_seconds: start.elapsed().as_secs_f64(),
                    non_rigorous: true,
                    error: None,
                }
            }
            Err(e) => DiscretizeRow {
                mesh_size: size,
                value: None,
                stable_digits: None,
                elapsed_seconds: start.elapsed().as_secs_f64(),
                non_rigorous: true,
                error: Some(format!("{}: {e}", e.kind())),
            },
        };
        rows.push(row);
        size *= 2;
    }
    if rows.iter().all(|r| r.value.is_none()) {
        doc.exit_code = EXIT_NO_ROOT;
        doc.error = Some("no mesh size produced an estimate".into());
    }
    doc.notes
        .push("NON-RIGOROUS: discretized transfer operator estimates carry no error bound".into());
    doc.discretize = Some(DiscretizeSection {
        non_rigorous: true,
        rows,
    });
    Ok(())
}

fn cmd_trace_table(p: &Problem, doc: &mut ReportDocument) -> Result<()> {
    let s_text = p
        .overrides
        .s
        .clone()
        .ok_or_else(|| Error::InvalidInput("trace-table needs --s".into()))?;
    let k = p.resolve_k(doc)?;
    let n = p.n_max();
    if n == 0 {
        return Err(Error::InvalidInput("--n must be at least 1".into()));
    }
    let prec = p
        .overrides
        .precision
        .or(p.config.precision_bits)
        .unwrap_or_else(|| default_precision(&p.matrices, n));
    let s = bigreal::parse(&s_text, prec)?;
    let table = trace_table(&p.matrices, k, &s, n, prec, p.config.mode()?)?;
    let series = coefficients(&table);
    doc.trace_table = Some(TraceSection {
        s: s_text,
        k,
        precision_bits: table.precision_bits,
        reduction_mode: table.reduction_mode.as_str().into(),
        traces: table.values.iter().map(|t| to_scientific(t, VALUE_DIGITS)).collect(),
        coefficients: series.coeffs.iter().map(|a| to_scientific(a, VALUE_DIGITS)).collect(),
        precision_limited: series.precision_limited.clone(),
    });
    Ok(())
}
