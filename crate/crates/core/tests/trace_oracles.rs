mod common;

use affinity_core::fredholm::{coefficients, coefficients_by_determinant};
use affinity_core::linalg::{singular_values, RationalMatrix};
use affinity_core::solver::{pressure_from_engine, smallest_positive_root};
use affinity_core::traces::{enumerate_words, trace_term, ReductionMode, TraceEngine};
use affinity_core::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;

const PREC: u32 = 256;

fn rel_diff(a: &Float, b: &Float) -> Float {
    let scale = Float::with_val(PREC, a.abs_ref()).max(&Float::with_val(PREC, b.abs_ref()));
    let diff = Float::with_val(PREC, a - b).abs();
    if scale.is_zero() {
        diff
    } else {
        diff / scale
    }
}

fn half_precision() -> Float {
    Float::with_val(64, Float::i_exp(1, -(PREC as i32) / 2))
}

fn positive_matrix(rng: &mut ChaCha8Rng, dim: usize) -> RationalMatrix {
    let entries = (0..dim * dim)
        .map(|_| Rational::from((rng.gen_range(1..=9i64), rng.gen_range(2..=12i64))))
        .collect();
    RationalMatrix::new(dim, entries).unwrap()
}

/// Twenty random tuples of positive matrices: planar ones at `k = 1` need a
/// nonzero determinant, the 3×3 ones are used at `k = 0`.
fn random_tuples() -> Vec<(Vec<RationalMatrix>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    while out.len() < 20 {
        let planar = out.len() % 2 == 0;
        let dim = if planar { 2 } else { 3 };
        let count = rng.gen_range(2..=3);
        let tuple: Vec<RationalMatrix> = (0..count).map(|_| positive_matrix(&mut rng, dim)).collect();
        if planar && tuple.iter().any(|a| a.determinant() == 0) {
            continue;
        }
        out.push((tuple, if planar { 1 } else { 0 }));
    }
    out
}

#[test]
fn necklace_and_full_modes_agree_on_random_positive_tuples() {
    for (tuple, k) in random_tuples() {
        let n_max = if tuple.len() == 3 { 5 } else { 6 };
        let full = TraceEngine::new(&tuple, k, n_max, PREC, ReductionMode::Full).unwrap();
        let neck = TraceEngine::new(&tuple, k, n_max, PREC, ReductionMode::Necklace).unwrap();
        let s = Float::with_val(PREC, k as f64 + 0.37);
        for n in 1..=n_max {
            let (a, b) = (full.trace(n, &s), neck.trace(n, &s));
            assert!(rel_diff(&a, &b) < half_precision(), "n = {n}: {a} vs {b}");
        }
    }
}

#[test]
fn necklace_and_full_modes_agree_on_fixtures() {
    for (name, tuple, k) in common::fixtures() {
        let full = TraceEngine::new(&tuple, k, 6, PREC, ReductionMode::Full).unwrap();
        let neck = TraceEngine::new(&tuple, k, 6, PREC, ReductionMode::Necklace).unwrap();
        let s = Float::with_val(PREC, 1.1156);
        for n in 1..=6 {
            assert!(
                rel_diff(&full.trace(n, &s), &neck.trace(n, &s)) < half_precision(),
                "{name} n = {n}"
            );
        }
    }
}

#[test]
fn reversing_the_product_convention_leaves_traces_unchanged() {
    // The word products of the transposed tuple are the transposes of the
    // reversed-word products of the original tuple.
    for (name, tuple, k) in common::fixtures() {
        let transposed: Vec<RationalMatrix> = tuple.iter().map(|a| a.transpose()).collect();
        let a = TraceEngine::new(&tuple, k, 5, PREC, ReductionMode::Full).unwrap();
        let b = TraceEngine::new(&transposed, k, 5, PREC, ReductionMode::Full).unwrap();
        let s = Float::with_val(PREC, 1.5);
        for n in 1..=5 {
            assert!(
                rel_diff(&a.trace(n, &s), &b.trace(n, &s)) < half_precision(),
                "{name} n = {n}"
            );
        }
    }
    let tuple = common::example2();
    let s = Float::with_val(PREC, 1.3);
    for w in enumerate_words(3, 4) {
        let forward = trace_term(&w, &tuple, 1, &s, PREC).unwrap();
        let transposed: Vec<RationalMatrix> = tuple.iter().map(|a| a.transpose()).collect();
        let backward = trace_term(&w.reversed(), &transposed, 1, &s, PREC).unwrap();
        assert!(rel_diff(&forward, &backward) < half_precision(), "word {w}");
    }
}

#[test]
fn traces_are_sums_of_word_terms() {
    let tuple = common::example2();
    let s = Float::with_val(PREC, 1.5);
    let engine = TraceEngine::new(&tuple, 1, 3, PREC, ReductionMode::Necklace).unwrap();
    for n in 1..=3 {
        let mut direct = Float::with_val(PREC, 0);
        for w in enumerate_words(3, n) {
            direct += trace_term(&w, &tuple, 1, &s, PREC).unwrap();
        }
        assert!(rel_diff(&direct, &engine.trace(n, &s)) < half_precision(), "n = {n}");
    }
}

#[test]
fn recursion_matches_determinant_on_fixtures() {
    for (name, tuple, k) in common::fixtures() {
        let engine = TraceEngine::new(&tuple, k, 6, PREC, ReductionMode::Necklace).unwrap();
        for s in [1.0, 1.25, 1.5, 2.0] {
            let table = engine.table(&Float::with_val(PREC, s), 6);
            let series = coefficients(&table);
            for n in 0..=6 {
                let det = coefficients_by_determinant(&table, n).unwrap();
                let a = &series.coeffs[n];
                let diff = Float::with_val(PREC, &det - a).abs();
                let tol = Float::with_val(PREC, a.abs_ref()).max(&series.max_partial[n]) * half_precision();
                assert!(diff <= tol, "{name} s = {s} n = {n}: {det} vs {a}");
            }
        }
    }
}

#[test]
fn coefficients_decay_on_example1() {
    let engine = TraceEngine::new(&common::example1(), 1, 12, PREC, ReductionMode::Necklace).unwrap();
    let series = coefficients(&engine.table(&Float::with_val(PREC, 1.1), 12));
    let logs: Vec<f64> = series.coeffs.iter().map(|a| a.clone().abs().ln().to_f64()).collect();
    for n in 4..12 {
        assert!(logs[n + 1] < logs[n], "|a_n| not decreasing at n = {n}");
    }
    // Faster than any geometric rate: |a_n|^{1/n} keeps shrinking.
    for n in 4..12 {
        assert!(
            logs[n + 1] / ((n + 1) as f64) < logs[n] / (n as f64),
            "|a_n|^(1/n) not decreasing at n = {n}"
        );
    }
}

/// `φ^s` from singular values sorted in decreasing order.
fn phi_from_sigma(sigma: &[f64], s: f64) -> f64 {
    let whole = s.floor() as usize;
    let frac = s - whole as f64;
    let mut acc: f64 = sigma.iter().take(whole).product();
    if frac > 0.0 {
        acc *= sigma[whole].powf(frac);
    }
    acc
}

/// `(Σ_{|i|=m} φ^s(A_i))^{1/m}` for `m = 1..=m_max`, one row per `s`,
/// computed from exact products.
fn partition_bounds(tuple: &[RationalMatrix], s_values: &[f64], m_max: usize) -> Vec<Vec<f64>> {
    let mut level: Vec<RationalMatrix> = tuple.to_vec();
    let mut bounds = vec![Vec::new(); s_values.len()];
    for m in 1..=m_max {
        let sigmas: Vec<Vec<f64>> = level
            .par_iter()
            .map(|p| singular_values(p, 96).iter().map(Float::to_f64).collect())
            .collect();
        for (row, &s) in bounds.iter_mut().zip(s_values) {
            let sum: f64 = sigmas.iter().map(|sigma| phi_from_sigma(sigma, s)).sum();
            row.push(sum.powf(1.0 / m as f64));
        }
        if m < m_max {
            level = level
                .par_iter()
                .flat_map_iter(|p| tuple.iter().map(move |a| a * p))
                .collect();
        }
    }
    bounds
}

#[test]
fn pressure_approximations_respect_the_partition_sum_bound() {
    let n = 10;
    let s_values = [1.0, 1.25, 1.5, 1.75, 2.0];
    for (name, tuple, k) in common::fixtures() {
        let engine = TraceEngine::new(&tuple, k, n, PREC, ReductionMode::Necklace).unwrap();
        let m_max = if tuple.len() == 3 { 8 } else { 10 };
        let bounds = partition_bounds(&tuple, &s_values, m_max);
        for (row, &s) in bounds.iter().zip(&s_values) {
            let p = pressure_from_engine(&engine, &Float::with_val(PREC, s), n)
                .unwrap()
                .p_n
                .to_f64();
            for (m, bound) in row.iter().enumerate() {
                assert!(p <= bound + 1e-6, "{name} s = {s} m = {}: P_n = {p} > {bound}", m + 1);
            }
        }
    }
}

#[test]
fn pressure_at_the_end_points_of_example1() {
    let engine = TraceEngine::new(&common::example1(), 1, 8, PREC, ReductionMode::Necklace).unwrap();
    let at_two = pressure_from_engine(&engine, &Float::with_val(PREC, 2), 6).unwrap().p_n;
    assert!((at_two.to_f64() - 8.0 / 49.0).abs() < 1e-6, "P_6(2) = {at_two}");
    let at_one = pressure_from_engine(&engine, &Float::with_val(PREC, 1), 6).unwrap().p_n;
    // At s = 1 only the spectral bounds are available: the signed sum from
    // below and the entrywise absolute sum from above.
    // Σ|A_i| is the all-5/7 matrix, whose spectral radius is 10/7.
    let upper = 10.0 / 7.0;
    let p1 = at_one.to_f64();
    assert!(
        p1 >= 50f64.sqrt() / 7.0 - 1e-9 && p1 <= upper + 1e-9,
        "P_6(1) = {at_one}"
    );
}

#[test]
fn pressure_is_decreasing_and_convex_at_large_n() {
    for (name, tuple, k) in common::fixtures() {
        let n = if name == "example3" { 8 } else { 6 };
        let engine = TraceEngine::new(&tuple, k, n, PREC, ReductionMode::Necklace).unwrap();
        let values: Vec<f64> = (0..9)
            .map(|i| {
                let s = Float::with_val(PREC, k as f64 + i as f64 / 8.0);
                pressure_from_engine(&engine, &s, n).unwrap().p_n.to_f64()
            })
            .collect();
        for i in 0..8 {
            assert!(values[i + 1] < values[i], "{name}: not decreasing at grid point {i}");
        }
        for i in 1..8 {
            assert!(
                values[i + 1] - 2.0 * values[i] + values[i - 1] > 0.0,
                "{name}: not convex at grid point {i}"
            );
        }
    }
}

#[test]
fn root_is_the_first_sign_change() {
    let engine = TraceEngine::new(&common::example1(), 1, 10, PREC, ReductionMode::Necklace).unwrap();
    let series = coefficients(&engine.table(&Float::with_val(PREC, 1.2), 10));
    let r = smallest_positive_root(&series, PREC).unwrap();
    let eval = |x: &Float| {
        let mut acc = Float::with_val(PREC, 0);
        for a in series.coeffs.iter().rev() {
            acc = acc * x + a;
        }
        acc
    };
    assert!(eval(&r).abs() < 1e-60);
    for i in 1..200 {
        let x = Float::with_val(PREC, &r * i) / 200u32;
        assert!(eval(&x) > 0, "sign change before the root at {x}");
    }
}
