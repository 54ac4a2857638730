//! Smallest positive roots of the truncated determinant, the pressure
//! approximation `P_n(s) = 1/r_n(s)`, and the secant solve of `P_n(s) = 1`.

use std::time::{Duration, Instant};

use rug::ops::Pow;
use rug::Float;

use crate::bigreal::{self, BigReal};
use crate::certify::{BracketResult, Certificate};
use crate::error::{Error, Result};
use crate::fredholm::{coefficients, CoefficientSeries};
use crate::linalg::RationalMatrix;
use crate::traces::{default_precision, ReductionMode, TraceEngine, DEFAULT_PRECISION_CAP, DEFAULT_PRODUCT_BIT_BUDGET};

/// Maximum number of secant steps.
pub const MAX_SECANT_ITERATIONS: usize = 64;
/// Bisection steps allowed once the secant safeguard has fired.
const MAX_BISECTION_ITERATIONS: usize = 400;
/// Interval pieces examined by the root search before giving up.
const MAX_SEARCH_PIECES: usize = 200_000;
/// Digits used when comparing consecutive rows of a report.
pub const REPORT_DIGITS: usize = 40;

#[derive(Clone, Debug)]
pub struct PressureApprox {
    pub s: BigReal,
    pub n: usize,
    pub r_n: BigReal,
    /// `1 / r_n`.
    pub p_n: BigReal,
    /// Some coefficient lost more than a quarter of the precision to cancellation.
    pub precision_limited: bool,
}

/// Taylor coefficients of `p` at `x`: `p(x + t) = Σ c_j t^j`.
fn taylor_shift(coeffs: &[BigReal], x: &Float, prec: u32) -> Vec<Float> {
    let mut c: Vec<Float> = coeffs.iter().map(|v| Float::with_val(prec, v)).collect();
    let n = c.len();
    // repeated synthetic division by (t - x)
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let carry = Float::with_val(prec, &c[j + 1] * x);
            c[j] += carry;
        }
    }
    c
}

/// `p(x)` together with `Σ_{j≥1} |c_j| h^j`, which bounds `|p(y) - p(x)|`
/// for `y ∈ [x, x+h]`.
fn eval_with_variation(coeffs: &[BigReal], x: &Float, h: &Float, prec: u32) -> (Float, Float) {
    let c = taylor_shift(coeffs, x, prec);
    let mut var = Float::new(prec);
    for cj in c.iter().skip(1).rev() {
        var *= h;
        var += Float::with_val(prec, cj.abs_ref());
    }
    var *= h;
    (c[0].clone(), var)
}

fn eval_poly(coeffs: &[BigReal], x: &Float, prec: u32) -> Float {
    let mut value = Float::new(prec);
    for c in coeffs.iter().rev() {
        value *= x;
        value += c;
    }
    value
}

fn eval_derivative(coeffs: &[BigReal], x: &Float, prec: u32) -> Float {
    let mut value = Float::new(prec);
    for (i, c) in coeffs.iter().enumerate().skip(1).rev() {
        value *= x;
        value += Float::with_val(prec, c * i as u32);
    }
    value
}

fn short(x: &Float) -> String {
    format!("{:.12e}", x.to_f64())
}

fn sign(x: &Float) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_sign_negative() {
        -1
    } else {
        1
    }
}

/// Smallest positive real root of `p(x) = Σ a_i x^i`, located by an exclusion
/// search from the Cauchy lower bound upwards and then polished.
///
/// An interval `[x, x+h]` is discarded once `|p(x)|` exceeds the variation
/// bound of [`eval_with_variation`]; intervals that cannot be discarded are
/// split, left half first, so the first sign change found is the first one.
/// Roots where `p` touches zero without changing sign are not reported.
pub fn smallest_positive_root(series: &CoefficientSeries, prec: u32) -> Result<BigReal> {
    let mut coeffs: Vec<BigReal> = series.coeffs.iter().map(|c| Float::with_val(prec, c)).collect();
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    let degree = coeffs.len() - 1;
    let a0 = Float::with_val(prec, coeffs[0].abs_ref());
    if degree == 0 || a0.is_zero() {
        return Err(Error::NoRootFound {
            detail: "constant truncated determinant or vanishing constant term".into(),
        });
    }
    let lead = Float::with_val(prec, coeffs[degree].abs_ref());
    let mut max_low = Float::new(prec);
    let mut max_high = Float::new(prec);
    for c in &coeffs[1..] {
        let r = Float::with_val(prec, c.abs_ref()) / &a0;
        if r > max_low {
            max_low = r;
        }
    }
    for c in &coeffs[..degree] {
        let r = Float::with_val(prec, c.abs_ref()) / &lead;
        if r > max_high {
            max_high = r;
        }
    }
    let lower = Float::with_val(prec, 1) / (max_low + 1u32);
    let upper = max_high + 1u32;

    let sign0 = sign(&coeffs[0]);
    let bracket = first_sign_change(&coeffs, &lower, &upper, sign0, prec)?;
    let (a, b) = bracket.ok_or_else(|| Error::NoRootFound {
        detail: format!("truncated determinant has no positive root up to {}", short(&upper)),
    })?;
    Ok(polish(&coeffs, a, b, sign0, prec))
}

fn first_sign_change(
    coeffs: &[BigReal],
    lower: &Float,
    upper: &Float,
    sign0: i32,
    prec: u32,
) -> Result<Option<(Float, Float)>> {
    // pieces still to examine, leftmost on top
    let mut stack = vec![(lower.clone(), upper.clone())];
    let rel_width = Float::with_val(64, Float::i_exp(1, -48));
    let mut pieces = 0;
    while let Some((a, b)) = stack.pop() {
        pieces += 1;
        if pieces > MAX_SEARCH_PIECES {
            return Err(Error::NoRootFound {
                detail: format!("root search budget exhausted near {}", short(&a)),
            });
        }
        let h = Float::with_val(prec, &b - &a);
        let (pa, var) = eval_with_variation(coeffs, &a, &h, prec);
        let sa = sign(&pa);
        if sa != 0 && sa != sign0 {
            // the left end already lies past a crossing; cannot happen when
            // pieces are processed in order, but guard against rounding
            return Ok(Some((a.clone(), a)));
        }
        if sa == sign0 && Float::with_val(prec, pa.abs_ref()) > var {
            continue;
        }
        if sa == 0 {
            return Ok(Some((a.clone(), a)));
        }
        let width_limit = Float::with_val(prec, &b * &rel_width);
        if h <= width_limit {
            let pb = eval_poly(coeffs, &b, prec);
            if sign(&pb) != sign0 {
                return Ok(Some((a, b)));
            }
            // touching or an unresolved pair; move on
            continue;
        }
        let mid = if b > Float::with_val(prec, &a * 4u32) {
            Float::with_val(prec, &a * &b).sqrt()
        } else {
            Float::with_val(prec, &a + &b) / 2u32
        };
        stack.push((mid.clone(), b));
        stack.push((a, mid));
    }
    Ok(None)
}

/// Refines a sign-change bracket by bisection, then Newton steps kept inside it.
fn polish(coeffs: &[BigReal], a: Float, b: Float, sign0: i32, prec: u32) -> Float {
    let mut lo = a;
    let mut hi = b;
    if lo == hi {
        return lo;
    }
    for _ in 0..64 {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        let pm = eval_poly(coeffs, &mid, prec);
        match sign(&pm) {
            0 => return mid,
            sg if sg == sign0 => lo = mid,
            _ => hi = mid,
        }
    }
    let mut x = Float::with_val(prec, &lo + &hi) / 2u32;
    let stop = Float::with_val(64, Float::i_exp(1, -(prec as i32) + 8));
    for _ in 0..64 {
        let px = eval_poly(coeffs, &x, prec);
        if px.is_zero() {
            break;
        }
        let dpx = eval_derivative(coeffs, &x, prec);
        if dpx.is_zero() {
            break;
        }
        let step = Float::with_val(prec, &px / &dpx);
        let next = Float::with_val(prec, &x - &step);
        if next < lo || next > hi {
            break;
        }
        let small = Float::with_val(prec, step.abs_ref()) <= Float::with_val(prec, &x * &stop);
        x = next;
        if small {
            break;
        }
    }
    x
}

/// Evaluates `P_n(s)` from a prepared trace engine.
pub fn pressure_from_engine(engine: &TraceEngine, s: &BigReal, n: usize) -> Result<PressureApprox> {
    let prec = engine.precision();
    let table = engine.table(s, n);
    let series = coefficients(&table);
    let r_n = smallest_positive_root(&series, prec)?;
    let p_n = Float::with_val(prec, 1) / &r_n;
    Ok(PressureApprox {
        s: Float::with_val(prec, s),
        n,
        r_n,
        p_n,
        precision_limited: series.precision_limited.iter().any(|&f| f),
    })
}

/// `P_n(s) = 1 / r_n(s)` at a single `s`.
pub fn pressure_approx(
    matrices: &[RationalMatrix],
    k: usize,
    s: &BigReal,
    n: usize,
    prec: u32,
) -> Result<PressureApprox> {
    let engine =
        TraceEngine::with_precision_check(matrices, k, n, prec, ReductionMode::Necklace, DEFAULT_PRECISION_CAP)?;
    pressure_from_engine(&engine, s, n)
}

/// Outcome of one secant solve.
#[derive(Clone, Debug)]
pub struct SecantOutcome {
    pub s_n: BigReal,
    /// Pressure evaluations beyond the two starting points.
    pub iterations: usize,
    /// The bisection safeguard was used.
    pub bisected: bool,
}

/// Solves `P_n(s) = 1` on `[k, k+1]` with a cached engine.
pub fn solve_with_engine(engine: &TraceEngine, n: usize, tol: &BigReal) -> Result<SecantOutcome> {
    let prec = engine.precision();
    let k = engine.k();
    let lo = Float::with_val(prec, k as u32);
    let hi = Float::with_val(prec, k as u32 + 1);
    let f = |s: &Float| -> Result<Float> { Ok(pressure_from_engine(engine, s, n)?.p_n - 1u32) };

    let f_hi = f(&hi)?;
    let f_lo = f(&lo)?;
    if !(f_lo > 0 && f_hi < 0) {
        return Err(Error::BracketFailed {
            lower: format!("P_{n}({k}) - 1 = {}", short(&f_lo)),
            upper: format!("P_{n}({}) - 1 = {}", k + 1, short(&f_hi)),
            detail: "expected P_n(k) > 1 > P_n(k+1)".into(),
        });
    }

    let window_lo = Float::with_val(prec, &lo - 0.5f64);
    let window_hi = Float::with_val(prec, &hi + 0.5f64);
    // s_1 = k+1, s_2 = k
    let (mut s_prev, mut f_prev) = (hi.clone(), f_hi.clone());
    let (mut s_cur, mut f_cur) = (lo.clone(), f_lo.clone());
    let mut iterations = 0;
    while iterations < MAX_SECANT_ITERATIONS {
        let denom = Float::with_val(prec, &f_cur - &f_prev);
        if denom.is_zero() {
            if f_cur.is_zero() {
                return Ok(SecantOutcome {
                    s_n: s_cur,
                    iterations,
                    bisected: false,
                });
            }
            break;
        }
        let step = Float::with_val(prec, &f_cur * Float::with_val(prec, &s_cur - &s_prev)) / &denom;
        let s_next = Float::with_val(prec, &s_cur - &step);
        iterations += 1;
        if s_next < window_lo || s_next > window_hi {
            break;
        }
        if Float::with_val(prec, step.abs_ref()) < *tol {
            return Ok(SecantOutcome {
                s_n: s_next,
                iterations,
                bisected: false,
            });
        }
        let f_next = match f(&s_next) {
            Ok(v) => v,
            Err(_) => break,
        };
        s_prev = std::mem::replace(&mut s_cur, s_next);
        f_prev = std::mem::replace(&mut f_cur, f_next);
    }

    // safeguard: bisection on the verified bracket
    let (mut a, mut b) = (lo, hi);
    for step in 0..MAX_BISECTION_ITERATIONS {
        let mid = Float::with_val(prec, &a + &b) / 2u32;
        if Float::with_val(prec, &b - &a) < *tol {
            return Ok(SecantOutcome {
                s_n: mid,
                iterations: iterations + step,
                bisected: true,
            });
        }
        let fm = f(&mid)?;
        if fm.is_zero() {
            return Ok(SecantOutcome {
                s_n: mid,
                iterations: iterations + step + 1,
                bisected: true,
            });
        }
        if fm > 0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(Error::SecantDiverged {
        iterations: iterations + MAX_BISECTION_ITERATIONS,
    })
}

/// The dimension approximation `s_n`.
pub fn solve_dimension(matrices: &[RationalMatrix], k: usize, n: usize, tol: &BigReal, prec: u32) -> Result<BigReal> {
    let engine =
        TraceEngine::with_precision_check(matrices, k, n, prec, ReductionMode::Necklace, DEFAULT_PRECISION_CAP)?;
    Ok(solve_with_engine(&engine, n, tol)?.s_n)
}

/// Default secant tolerance `10^-40`.
pub fn default_tolerance(prec: u32) -> BigReal {
    Float::with_val(prec, 10u32).pow(-40i32)
}

#[derive(Clone, Debug)]
pub struct SolvedRow {
    pub s_n: BigReal,
    pub secant_iterations: usize,
    pub bisected: bool,
    /// Time to extend the trace cache to length `n` plus the solve itself.
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SolveRow {
    pub n: usize,
    pub outcome: std::result::Result<SolvedRow, Error>,
    /// Leading digits shared with the previous successful row.
    pub stable_digits: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub k: usize,
    pub rows: Vec<SolveRow>,
    pub precision_bits: u32,
    pub reduction_mode: ReductionMode,
    /// Tolerance passed to the secant iteration.
    pub tolerance: BigReal,
    /// Hypothesis checks the caller relied on; empty when run unchecked.
    pub certificates: Vec<Certificate>,
    pub bracket: Option<BracketResult>,
}

impl SolveReport {
    /// Rows that produced an approximation.
    pub fn solved(&self) -> impl Iterator<Item = (usize, &SolvedRow)> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|o| (r.n, o)))
    }

    pub fn value(&self, n: usize) -> Option<&BigReal> {
        self.solved().find(|(m, _)| *m == n).map(|(_, o)| &o.s_n)
    }
}

/// Options for [`solve_report_with`].
#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Working precision; `None` selects [`default_precision`].
    pub precision: Option<u32>,
    pub tolerance: Option<BigReal>,
    pub mode: ReductionMode,
    pub precision_cap: u32,
    pub product_bit_budget: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            precision: None,
            tolerance: None,
            mode: ReductionMode::Necklace,
            precision_cap: DEFAULT_PRECISION_CAP,
            product_bit_budget: DEFAULT_PRODUCT_BIT_BUDGET,
        }
    }
}

/// Runs [`solve_with_engine`] for every `n` in `n_range`, sharing one
/// incrementally extended trace cache.
pub fn solve_report(
    matrices: &[RationalMatrix],
    k: usize,
    n_range: std::ops::RangeInclusive<usize>,
    tol: &BigReal,
    prec: u32,
) -> Result<SolveReport> {
    let options = SolveOptions {
        precision: Some(prec),
        tolerance: Some(tol.clone()),
        ..SolveOptions::default()
    };
    solve_report_with(matrices, k, n_range, &options)
}

/// A table row whose approximate pressure does not cross 1 on `[k, k+1]`
/// has no root there either; such rows are reported as [`Error::NoRootFound`].
fn no_root_in_interval(e: Error) -> Error {
    match e {
        Error::BracketFailed { lower, upper, .. } => Error::NoRootFound {
            detail: format!("the approximate pressure does not cross 1 ({lower}, {upper})"),
        },
        other => other,
    }
}

pub fn solve_report_with(
    matrices: &[RationalMatrix],
    k: usize,
    n_range: std::ops::RangeInclusive<usize>,
    options: &SolveOptions,
) -> Result<SolveReport> {
    let n_lo = *n_range.start();
    let n_hi = *n_range.end();
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::InvalidInput(format!("invalid range of n: {n_lo}..={n_hi}")));
    }
    let mut prec = options.precision.unwrap_or_else(|| default_precision(matrices, n_hi));
    loop {
        if prec > options.precision_cap {
            return Err(Error::PrecisionInsufficient {
                cap: options.precision_cap,
            });
        }
        let tol = options
            .tolerance
            .as_ref()
            .map(|t| Float::with_val(prec, t))
            .unwrap_or_else(|| default_tolerance(prec));
        let mut engine = TraceEngine::empty(matrices, k, prec, options.mode, options.product_bit_budget)?;
        let mut rows = Vec::new();
        let mut previous: Option<String> = None;
        for n in 1..=n_hi {
            let start = Instant::now();
            engine.extend_to(n)?;
            if n < n_lo {
                continue;
            }
            let outcome = solve_with_engine(&engine, n, &tol)
                .map_err(no_root_in_interval)
                .map(|o| SolvedRow {
                    s_n: o.s_n,
                    secant_iterations: o.iterations,
                    bisected: o.bisected,
                    elapsed: start.elapsed(),
                });
            let stable_digits = match &outcome {
                Ok(row) => {
                    let text = bigreal::to_fixed(&row.s_n, REPORT_DIGITS);
                    let shared = previous.as_ref().map(|p| bigreal::shared_digits(p, &text));
                    previous = Some(text);
                    shared
                }
                Err(_) => None,
            };
            rows.push(SolveRow {
                n,
                outcome,
                stable_digits,
            });
        }
        if engine.precision_is_sufficient(options.precision_cap)? {
            return Ok(SolveReport {
                k,
                rows,
                precision_bits: prec,
                reduction_mode: options.mode,
                tolerance: tol,
                certificates: Vec::new(),
                bracket: None,
            });
        }
        prec *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64], prec: u32) -> CoefficientSeries {
        CoefficientSeries {
            s: Float::with_val(prec, 1),
            coeffs: values.iter().map(|&v| Float::with_val(prec, v)).collect(),
            precision_bits: prec,
            k: 1,
            reduction_mode: ReductionMode::Necklace,
            max_partial: vec![Float::new(prec); values.len()],
            precision_limited: vec![false; values.len()],
        }
    }

    fn m(rows: &[&[&str]]) -> RationalMatrix {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        RationalMatrix::parse(&rows).unwrap()
    }

    #[test]
    fn linear_and_quadratic_roots() {
        let r = smallest_positive_root(&series(&[1.0, -1.0], 128), 128).unwrap();
        assert!((r.to_f64() - 1.0).abs() < 1e-30);
        let r = smallest_positive_root(&series(&[1.0, -3.0, 2.0], 128), 128).unwrap();
        assert!((Float::with_val(128, &r - 0.5f64)).abs() < 1e-35);
    }

    #[test]
    fn no_positive_root() {
        assert!(matches!(
            smallest_positive_root(&series(&[1.0, 1.0], 128), 128),
            Err(Error::NoRootFound { .. })
        ));
        // 1 + x^2 has only complex roots
        assert!(matches!(
            smallest_positive_root(&series(&[1.0, 0.0, 1.0], 128), 128),
            Err(Error::NoRootFound { .. })
        ));
        assert!(smallest_positive_root(&series(&[1.0], 64), 64).is_err());
    }

    #[test]
    fn skips_touching_root_and_finds_later_crossing() {
        // (1 - x)^2 (1 - x/4) = 1 - 9/4 x + 3/2 x^2 - 1/4 x^3, exactly representable
        let r = smallest_positive_root(&series(&[1.0, -2.25, 1.5, -0.25], 200), 200).unwrap();
        assert!((r.to_f64() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn close_roots_pick_the_smaller() {
        // (1 - x/0.999)(1 - x/1.001) has roots 0.999 and 1.001
        let a = 1.0 / 0.999;
        let b = 1.0 / 1.001;
        let r = smallest_positive_root(&series(&[1.0, -(a + b), a * b], 200), 200).unwrap();
        assert!((r.to_f64() - 0.999).abs() < 1e-12);
    }

    #[test]
    fn tiny_leading_coefficient() {
        // root near 1/2 with a negligible top coefficient (huge Cauchy bound)
        let r = smallest_positive_root(&series(&[1.0, -2.0, 0.0, 1e-40], 256), 256).unwrap();
        assert!((r.to_f64() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_scalar_pressure() {
        // N = 1, d = 2, A = diag(a, b) with a > b > 0: e^{P(s)} = a^{2-s} (ab)^{s-1}
        // for s in [1, 2]; the determinant is Π_j (1 - z e^{P} (b/a)^j), so the
        // truncation error decays like (b/a)^{n(n+1)/2}
        let a = m(&[&["1/2", "0"], &["0", "1/5"]]);
        let s = Float::with_val(256, 1.5);
        let approx = pressure_approx(&[a], 1, &s, 10, 256).unwrap();
        let expected = 0.5f64.powf(0.5) * (0.1f64).powf(0.5);
        assert!((approx.p_n.to_f64() - expected).abs() < 1e-14);
    }

    #[test]
    fn bracket_failure_is_reported() {
        // a single contraction has pressure below 1 at s = k
        let a = m(&[&["1/4", "0"], &["0", "1/8"]]);
        let engine = TraceEngine::new(&[a], 1, 3, 128, ReductionMode::Necklace).unwrap();
        let tol = default_tolerance(128);
        assert!(matches!(
            solve_with_engine(&engine, 3, &tol),
            Err(Error::BracketFailed { .. })
        ));
    }
}
