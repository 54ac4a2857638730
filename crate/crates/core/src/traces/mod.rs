//! The traces `t_n(s)` built from leading eigenvalue data of word products.
//!
//! For a word `i` of length `n` write `B = A_i^∧k`, `C = A_i^∧(k+1)`,
//! `m = C(d,k)` and `m' = C(d,k+1)`. Its contribution to `t_n(s)` is
//!
//! ```text
//! λ₁(B)^(m-1) λ₁(C)^(m'-1) ρ(B)^(k+1-s) ρ(C)^(s-k) / (p'_B(λ₁(B)) p'_C(λ₁(C)))
//! ```
//!
//! Everything except the two real powers is independent of `s`, so
//! [`TraceEngine`] stores per class `base = λ₁(B)^(m-1) λ₁(C)^(m'-1) ρ(B)^(k+1)
//! ρ(C)^(-k) / (p'_B p'_C)` and `ln(ρ(C)/ρ(B))`, and evaluates a term as
//! `base · exp(s · ln(ρ(C)/ρ(B)))`.

pub mod necklace;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

pub use necklace::{enumerate_necklaces, enumerate_words, NecklaceClass, Word};

use crate::bigreal::BigReal;
use crate::error::{Error, Result};
use crate::linalg::{binomial, leading_eigen, wedge_power, LeadingEigen, RationalMatrix, ScaledIntegerMatrix};

/// Largest bit length allowed for exact product entries before they are
/// rounded to dyadic rationals.
pub const DEFAULT_PRODUCT_BIT_BUDGET: u32 = 4096;
/// Upper limit for automatic precision escalation.
pub const DEFAULT_PRECISION_CAP: u32 = 16384;

/// How the sum over words of a given length is organised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReductionMode {
    /// One term per word.
    Full,
    /// One term per cyclic class, weighted by the class size.
    Necklace,
}

impl ReductionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReductionMode::Full => "full",
            ReductionMode::Necklace => "necklace",
        }
    }
}

/// `t_1(s), ..., t_{n_max}(s)` at a fixed `s`.
#[derive(Clone, Debug)]
pub struct TraceTable {
    pub s: BigReal,
    pub k: usize,
    pub n_max: usize,
    /// `values[n - 1] = t_n(s)`.
    pub values: Vec<BigReal>,
    pub precision_bits: u32,
    pub reduction_mode: ReductionMode,
}

impl TraceTable {
    /// `t_n(s)` for `1 <= n <= n_max`.
    pub fn get(&self, n: usize) -> &BigReal {
        &self.values[n - 1]
    }

    /// The table restricted to `t_1, ..., t_n`.
    pub fn truncated(&self, n: usize) -> TraceTable {
        TraceTable {
            s: self.s.clone(),
            k: self.k,
            n_max: n,
            values: self.values[..n].to_vec(),
            precision_bits: self.precision_bits,
            reduction_mode: self.reduction_mode,
        }
    }
}

/// Checks that `matrices` is a nonempty tuple of equal-size square matrices
/// and that `0 <= k < d`; returns `d`.
pub fn validate_tuple(matrices: &[RationalMatrix], k: usize) -> Result<usize> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidInput("at least one matrix is required".into()))?;
    let d = first.dim();
    if let Some((i, m)) = matrices.iter().enumerate().find(|(_, m)| m.dim() != d) {
        return Err(Error::DimensionMismatch(format!(
            "matrix {} has dimension {} but matrix 1 has dimension {d}",
            i + 1,
            m.dim()
        )));
    }
    if k >= d {
        return Err(Error::WedgeDegreeOutOfRange { k: k + 1, dim: d });
    }
    Ok(d)
}

/// Default working precision
/// `max(256, 64 + ⌈8 n_max log₂(1 + max ‖A_i‖)⌉)`, capped.
pub fn default_precision(matrices: &[RationalMatrix], n_max: usize) -> u32 {
    let norm = matrices
        .iter()
        .map(|m| m.operator_norm_estimate())
        .fold(0.0_f64, f64::max);
    let extra = (8.0 * n_max as f64 * (1.0 + norm).log2()).ceil() as u32;
    (64 + extra).clamp(256, DEFAULT_PRECISION_CAP)
}

/// Exact product `A_{i_n} ... A_{i_1}` of (already wedged) generators.
fn word_product(gens: &[ScaledIntegerMatrix], word: &Word, budget: u32) -> RationalMatrix {
    let dim = gens[0].dim();
    let mut acc = ScaledIntegerMatrix::identity(dim);
    for &letter in &word.letters {
        acc = acc.left_mul(&gens[letter]);
        if acc.max_bits() > budget {
            acc = ScaledIntegerMatrix::from_rational(&acc.to_rational().round_to_dyadic(budget));
        }
    }
    acc.to_rational()
}

/// Generators at levels `k` and `k+1`, in integer-scaled form.
struct WedgedGenerators {
    d: usize,
    k: usize,
    lower: Vec<ScaledIntegerMatrix>,
    upper: Vec<ScaledIntegerMatrix>,
}

impl WedgedGenerators {
    fn new(matrices: &[RationalMatrix], k: usize) -> Result<Self> {
        let d = validate_tuple(matrices, k)?;
        let level = |j: usize| -> Result<Vec<ScaledIntegerMatrix>> {
            matrices
                .iter()
                .map(|a| wedge_power(a, j).map(|w| ScaledIntegerMatrix::from_rational(&w)))
                .collect()
        };
        Ok(Self {
            d,
            k,
            lower: level(k)?,
            upper: level(k + 1)?,
        })
    }

    fn eigen_pair(&self, word: &Word, prec: u32, budget: u32) -> Result<(LeadingEigen, LeadingEigen)> {
        let lower =
            leading_eigen(&word_product(&self.lower, word, budget), prec).map_err(|e| e.with_word(&word.letters))?;
        let upper =
            leading_eigen(&word_product(&self.upper, word, budget), prec).map_err(|e| e.with_word(&word.letters))?;
        Ok((lower, upper))
    }
}

/// The `s`-independent factor and the exponent rate of one term.
#[derive(Clone, Debug)]
struct CachedTerm {
    weight: u32,
    base: BigReal,
    log_ratio: BigReal,
}

impl CachedTerm {
    fn new(weight: usize, lower: &LeadingEigen, upper: &LeadingEigen, d: usize, k: usize, prec: u32) -> Self {
        let ml = binomial(d, k) as u32 - 1;
        let mu = binomial(d, k + 1) as u32 - 1;
        let mut base = Float::with_val(prec, (&lower.lambda1).pow(ml));
        base *= Float::with_val(prec, (&upper.lambda1).pow(mu));
        base *= Float::with_val(prec, (&lower.rho).pow(k as u32 + 1));
        base /= Float::with_val(prec, (&upper.rho).pow(k as u32));
        base /= &lower.p_prime_at_lambda1;
        base /= &upper.p_prime_at_lambda1;
        let log_ratio = Float::with_val(prec, upper.rho.ln_ref()) - Float::with_val(prec, lower.rho.ln_ref());
        Self {
            weight: weight as u32,
            base,
            log_ratio,
        }
    }

    fn eval(&self, s: &BigReal, prec: u32) -> BigReal {
        let exponent = Float::with_val(prec, s * &self.log_ratio);
        let mut v = exponent.exp();
        v *= &self.base;
        v *= self.weight;
        v
    }
}

/// Precomputed eigen data for every word class of length `1..=n_max`, from
/// which trace tables at any `s` are assembled cheaply.
pub struct TraceEngine {
    gens: WedgedGenerators,
    alphabet: usize,
    k: usize,
    prec: u32,
    mode: ReductionMode,
    budget: u32,
    /// `levels[n - 1]` holds the classes of length `n` in lexicographic order.
    levels: Vec<Vec<CachedTerm>>,
}

impl TraceEngine {
    /// Builds the cache at working precision `prec` with the default product bit budget.
    pub fn new(matrices: &[RationalMatrix], k: usize, n_max: usize, prec: u32, mode: ReductionMode) -> Result<Self> {
        Self::with_budget(matrices, k, n_max, prec, mode, DEFAULT_PRODUCT_BIT_BUDGET)
    }

    pub fn with_budget(
        matrices: &[RationalMatrix],
        k: usize,
        n_max: usize,
        prec: u32,
        mode: ReductionMode,
        budget: u32,
    ) -> Result<Self> {
        let mut engine = Self::empty(matrices, k, prec, mode, budget)?;
        engine.extend_to(n_max)?;
        Ok(engine)
    }

    /// An engine with no cached lengths yet; see [`TraceEngine::extend_to`].
    pub fn empty(matrices: &[RationalMatrix], k: usize, prec: u32, mode: ReductionMode, budget: u32) -> Result<Self> {
        Ok(Self {
            gens: WedgedGenerators::new(matrices, k)?,
            alphabet: matrices.len(),
            k,
            prec,
            mode,
            budget,
            levels: Vec::new(),
        })
    }

    /// Builds the cache after confirming that doubling the precision leaves
    /// the two highest traces unchanged to relative accuracy `2^(-prec/4)`,
    /// doubling the working precision until that holds or `cap` is exceeded.
    pub fn with_precision_check(
        matrices: &[RationalMatrix],
        k: usize,
        n_max: usize,
        prec: u32,
        mode: ReductionMode,
        cap: u32,
    ) -> Result<Self> {
        let mut prec = prec;
        loop {
            if prec > cap {
                return Err(Error::PrecisionInsufficient { cap });
            }
            let engine = Self::new(matrices, k, n_max, prec, mode)?;
            if engine.precision_is_sufficient(cap)? {
                return Ok(engine);
            }
            prec *= 2;
        }
    }

    /// Caches every length up to `n_max`.
    pub fn extend_to(&mut self, n_max: usize) -> Result<()> {
        while self.levels.len() < n_max {
            let n = self.levels.len() + 1;
            let level = self.build_level(n, self.prec)?;
            self.levels.push(level);
        }
        Ok(())
    }

    fn build_level(&self, n: usize, prec: u32) -> Result<Vec<CachedTerm>> {
        let items: Vec<(Word, usize)> = match self.mode {
            ReductionMode::Full => enumerate_words(self.alphabet, n).into_iter().map(|w| (w, 1)).collect(),
            ReductionMode::Necklace => enumerate_necklaces(self.alphabet, n)
                .into_iter()
                .map(|c| (c.representative, c.class_size))
                .collect(),
        };
        let gens = &self.gens;
        let budget = self.budget;
        let terms: Vec<Result<CachedTerm>> = items
            .par_iter()
            .map(|(word, weight)| {
                let (lower, upper) = gens.eigen_pair(word, prec, budget)?;
                Ok(CachedTerm::new(*weight, &lower, &upper, gens.d, gens.k, prec))
            })
            .collect();
        terms.into_iter().collect()
    }

    /// Recomputes the two highest cached traces at twice the precision and
    /// compares them with the cached values at `s = k + 1/2`. Returns `true`
    /// when they agree to relative accuracy `2^(-prec/4)`, or when doubling
    /// would exceed `cap`.
    pub fn precision_is_sufficient(&self, cap: u32) -> Result<bool> {
        let doubled = self.prec * 2;
        let n_max = self.n_max();
        if doubled > cap || n_max == 0 {
            return Ok(true);
        }
        let s = Float::with_val(self.prec, self.k as f64 + 0.5);
        let tolerance = Float::with_val(64, Float::i_exp(1, -(self.prec as i32) / 4));
        for n in n_max.saturating_sub(1).max(1)..=n_max {
            let level = self.build_level(n, doubled)?;
            let mut reference = Float::new(doubled);
            for t in &level {
                reference += t.eval(&s, doubled);
            }
            let value = self.trace(n, &s);
            let diff = Float::with_val(doubled, &reference - &value).abs();
            let scale = Float::with_val(doubled, reference.abs_ref());
            let agrees = if scale.is_zero() {
                diff.is_zero()
            } else {
                diff / scale <= tolerance
            };
            if !agrees {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn mode(&self) -> ReductionMode {
        self.mode
    }

    /// Number of cached terms of length `n`.
    pub fn class_count(&self, n: usize) -> usize {
        self.levels[n - 1].len()
    }

    /// `t_n(s)`, summed in the fixed class order.
    pub fn trace(&self, n: usize, s: &BigReal) -> BigReal {
        let s = Float::with_val(self.prec, s);
        let terms: Vec<BigReal> = self.levels[n - 1].par_iter().map(|t| t.eval(&s, self.prec)).collect();
        let mut acc = Float::new(self.prec);
        for t in &terms {
            acc += t;
        }
        acc
    }

    /// `t_1(s), ..., t_n(s)`.
    pub fn table(&self, s: &BigReal, n: usize) -> TraceTable {
        assert!(
            n <= self.n_max(),
            "requested n = {n} beyond the cached n_max = {}",
            self.n_max()
        );
        let values = (1..=n).map(|m| self.trace(m, s)).collect();
        TraceTable {
            s: Float::with_val(self.prec, s),
            k: self.k,
            n_max: n,
            values,
            precision_bits: self.prec,
            reduction_mode: self.mode,
        }
    }
}

/// Contribution of a single word to `t_n(s)`, computed directly from the formula.
pub fn trace_term(word: &Word, matrices: &[RationalMatrix], k: usize, s: &BigReal, prec: u32) -> Result<BigReal> {
    let gens = WedgedGenerators::new(matrices, k)?;
    let (lower, upper) = gens.eigen_pair(word, prec, DEFAULT_PRODUCT_BIT_BUDGET)?;
    let d = gens.d;
    let ml = binomial(d, k) as u32 - 1;
    let mu = binomial(d, k + 1) as u32 - 1;
    let s = Float::with_val(prec, s);
    let e_lower = Float::with_val(prec, (k + 1) as u32) - &s;
    let e_upper = Float::with_val(prec, &s - k as u32);
    let mut v = Float::with_val(prec, (&lower.lambda1).pow(ml));
    v *= Float::with_val(prec, (&upper.lambda1).pow(mu));
    v *= Float::with_val(prec, (&lower.rho).pow(&e_lower));
    v *= Float::with_val(prec, (&upper.rho).pow(&e_upper));
    v /= Float::with_val(prec, &lower.p_prime_at_lambda1 * &upper.p_prime_at_lambda1);
    Ok(v)
}

/// `t_1(s), ..., t_{n_max}(s)` at working precision `prec`, escalated
/// automatically (see [`TraceEngine::with_precision_check`]).
pub fn trace_table(
    matrices: &[RationalMatrix],
    k: usize,
    s: &BigReal,
    n_max: usize,
    prec: u32,
    mode: ReductionMode,
) -> Result<TraceTable> {
    let engine = TraceEngine::with_precision_check(matrices, k, n_max, prec, mode, DEFAULT_PRECISION_CAP)?;
    Ok(engine.table(s, n_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn m(rows: &[&[&str]]) -> RationalMatrix {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        RationalMatrix::parse(&rows).unwrap()
    }

    fn example1() -> Vec<RationalMatrix> {
        vec![
            m(&[&["-4/7", "5/7"], &["0", "1/7"]]),
            m(&[&["1/7", "0"], &["-5/7", "-4/7"]]),
        ]
    }

    fn example2() -> Vec<RationalMatrix> {
        vec![
            m(&[&["1/3", "1/9"], &["1/2", "1/2"]]),
            m(&[&["-1/2", "-1/3"], &["-1/3", "-1/2"]]),
            m(&[&["1/2", "1/2"], &["1/9", "1/3"]]),
        ]
    }

    fn rel_close(a: &Float, b: &Float, bits: i32) -> bool {
        let diff = Float::with_val(a.prec(), a - b).abs();
        let scale = Float::with_val(a.prec(), b.abs_ref()).max(&Float::with_val(a.prec(), 1e-300));
        diff / scale < Float::with_val(64, Float::i_exp(1, -bits))
    }

    /// The planar `k = 1` term `λ₁ ρ^(2-s) |det|^(s-1) / (λ₁ - λ₂)` from the quadratic formula.
    fn planar_term_f64(a: [[f64; 2]; 2], s: f64) -> f64 {
        let tr = a[0][0] + a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let disc = (tr * tr - 4.0 * det).sqrt();
        let l1 = if tr >= 0.0 {
            (tr + disc) / 2.0
        } else {
            (tr - disc) / 2.0
        };
        let l2 = det / l1;
        l1 * l1.abs().powf(2.0 - s) * det.abs().powf(s - 1.0) / (l1 - l2)
    }

    #[test]
    fn planar_term_matches_closed_form() {
        let mats = example1();
        let s = Float::with_val(128, 1.5);
        let t = trace_term(&Word::new(vec![0]), &mats, 1, &s, 128).unwrap();
        let expected = planar_term_f64([[-4.0 / 7.0, 5.0 / 7.0], [0.0, 1.0 / 7.0]], 1.5);
        assert!((t.to_f64() - expected).abs() < 1e-14 * expected.abs());
    }

    #[test]
    fn planar_term_positive_lambda_form() {
        // ρ^{4-s} |det|^{s-1} / (ρ² - det) for λ₁ > 0
        let a = m(&[&["2/5", "1/5"], &["1/5", "1/5"]]);
        let rho = (Float::with_val(256, 5).sqrt() + 3u32) / 10u32;
        let det = Float::with_val(256, Rational::from((1, 25)));
        for s_val in [1.0, 1.3, 2.0] {
            let s = Float::with_val(256, s_val);
            let t = trace_term(&Word::new(vec![0]), std::slice::from_ref(&a), 1, &s, 256).unwrap();
            let num = Float::with_val(256, (&rho).pow(Float::with_val(256, 4 - &s)))
                * Float::with_val(256, (&det).pow(Float::with_val(256, &s - 1u32)));
            let den = Float::with_val(256, rho.square_ref()) - &det;
            assert!(rel_close(&t, &(num / den), 240), "s = {s_val}");
        }
    }

    #[test]
    fn term_is_invariant_under_sign_flip() {
        let a = m(&[&["2/5", "1/5"], &["1/5", "1/5"]]);
        let s = Float::with_val(200, 1.25);
        let w = Word::new(vec![0, 0, 0]);
        let pos = trace_term(&w, std::slice::from_ref(&a), 1, &s, 200).unwrap();
        let neg = trace_term(&w, &[-&a], 1, &s, 200).unwrap();
        assert!(rel_close(&pos, &neg, 190));
    }

    #[test]
    fn engine_matches_direct_terms() {
        let mats = example2();
        let s = Float::with_val(200, 1.5);
        let engine = TraceEngine::new(&mats, 1, 3, 200, ReductionMode::Full).unwrap();
        for n in 1..=3 {
            let mut direct = Float::new(200);
            for w in enumerate_words(3, n) {
                direct += trace_term(&w, &mats, 1, &s, 200).unwrap();
            }
            assert!(rel_close(&engine.trace(n, &s), &direct, 180), "n = {n}");
        }
        // t_1 is the hand sum of three planar closed forms
        let rows = [
            [[1.0 / 3.0, 1.0 / 9.0], [0.5, 0.5]],
            [[-0.5, -1.0 / 3.0], [-1.0 / 3.0, -0.5]],
            [[0.5, 0.5], [1.0 / 9.0, 1.0 / 3.0]],
        ];
        let hand: f64 = rows.iter().map(|a| planar_term_f64(*a, 1.5)).sum();
        assert!((engine.trace(1, &s).to_f64() - hand).abs() < 1e-14);
    }

    #[test]
    fn necklace_and_full_modes_agree() {
        let mats = example1();
        let s = Float::with_val(256, 1.1156);
        let full = TraceEngine::new(&mats, 1, 6, 256, ReductionMode::Full).unwrap();
        let neck = TraceEngine::new(&mats, 1, 6, 256, ReductionMode::Necklace).unwrap();
        for n in 1..=6 {
            assert!(rel_close(&full.trace(n, &s), &neck.trace(n, &s), 128), "n = {n}");
        }
        assert!(neck.class_count(6) < full.class_count(6));
    }

    #[test]
    fn single_matrix_traces_are_single_terms() {
        let a = m(&[&["1/2", "1/4"], &["1/4", "1/3"]]);
        let s = Float::with_val(128, 1.7);
        let table = trace_table(std::slice::from_ref(&a), 1, &s, 4, 128, ReductionMode::Necklace).unwrap();
        for n in 1..=4 {
            let direct = trace_term(&Word::new(vec![0; n]), std::slice::from_ref(&a), 1, &s, 128).unwrap();
            assert!(rel_close(table.get(n), &direct, 120));
        }
    }

    #[test]
    fn level_zero_reduces_to_single_exterior_power() {
        // k = 0: λ₁(A)^{d-1} ρ(A)^s / p'_A(λ₁)
        let a = m(&[&["2/5", "1/5"], &["1/5", "1/5"]]);
        let s = Float::with_val(200, 0.4);
        let t = trace_term(&Word::new(vec![0]), std::slice::from_ref(&a), 0, &s, 200).unwrap();
        let le = leading_eigen(&a, 200).unwrap();
        let expected =
            Float::with_val(200, &le.lambda1) * Float::with_val(200, (&le.rho).pow(&s)) / &le.p_prime_at_lambda1;
        assert!(rel_close(&t, &expected, 190));
    }

    #[test]
    fn dominance_failure_names_the_word() {
        let rot = m(&[&["0", "-1/2"], &["1/2", "0"]]);
        let err = trace_term(&Word::new(vec![0, 0]), &[rot], 0, &Float::with_val(64, 0.5), 64).unwrap_err();
        match err {
            Error::DominanceUnverified { word, .. } | Error::DegenerateProduct { word } => {
                assert_eq!(word, Some(vec![0, 0]))
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn invalid_tuples_are_rejected() {
        let a = RationalMatrix::identity(2);
        let b = RationalMatrix::identity(3);
        assert!(matches!(
            validate_tuple(&[a.clone(), b], 0),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(validate_tuple(std::slice::from_ref(&a), 2).is_err());
        assert!(validate_tuple(&[], 0).is_err());
        assert_eq!(validate_tuple(&[a], 1).unwrap(), 2);
    }

    #[test]
    fn default_precision_policy() {
        assert_eq!(default_precision(&example1(), 4), 256);
        let big = vec![m(&[&["100", "0"], &["0", "1"]])];
        let p = default_precision(&big, 40);
        assert_eq!(p, 64 + (8.0 * 40.0 * 101f64.log2()).ceil() as u32);
        assert_eq!(default_precision(&big, 10_000), DEFAULT_PRECISION_CAP);
    }

    #[test]
    fn tiny_bit_budget_still_tracks_exact_traces() {
        let mats = example2();
        let s = Float::with_val(200, 1.4);
        let exact = TraceEngine::new(&mats, 1, 5, 200, ReductionMode::Necklace).unwrap();
        let rounded = TraceEngine::with_budget(&mats, 1, 5, 200, ReductionMode::Necklace, 96).unwrap();
        for n in 1..=5 {
            assert!(rel_close(&exact.trace(n, &s), &rounded.trace(n, &s), 80));
        }
    }
}
