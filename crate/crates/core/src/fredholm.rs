//! Coefficients `a_n(s)` of the truncated Fredholm determinant.

use rug::Float;

use crate::bigreal::BigReal;
use crate::error::{Error, Result};
use crate::traces::{ReductionMode, TraceTable};

/// Largest order accepted by [`coefficients_by_determinant`].
pub const DETERMINANT_ORACLE_MAX: usize = 8;

#[derive(Clone, Debug)]
pub struct CoefficientSeries {
    pub s: BigReal,
    /// `coeffs[n] = a_n(s)`, with `a_0 = 1`.
    pub coeffs: Vec<BigReal>,
    pub precision_bits: u32,
    pub k: usize,
    pub reduction_mode: ReductionMode,
    /// Largest `|t_m a_{n-m}| / n` seen while forming `a_n`.
    pub max_partial: Vec<BigReal>,
    /// `a_n` lost more than a quarter of the working precision to cancellation.
    pub precision_limited: Vec<bool>,
}

impl CoefficientSeries {
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The series restricted to `a_0, ..., a_n`.
    pub fn truncated(&self, n: usize) -> CoefficientSeries {
        CoefficientSeries {
            s: self.s.clone(),
            coeffs: self.coeffs[..=n].to_vec(),
            precision_bits: self.precision_bits,
            k: self.k,
            reduction_mode: self.reduction_mode,
            max_partial: self.max_partial[..=n].to_vec(),
            precision_limited: self.precision_limited[..=n].to_vec(),
        }
    }
}

/// `a_0, ..., a_{n_max}` from `n a_n = -Σ_{m=1}^{n} t_m a_{n-m}`.
pub fn coefficients(traces: &TraceTable) -> CoefficientSeries {
    let prec = traces.precision_bits;
    let n_max = traces.n_max;
    let threshold = Float::with_val(64, Float::i_exp(1, (prec / 4) as i32));
    let mut coeffs = Vec::with_capacity(n_max + 1);
    let mut max_partial = Vec::with_capacity(n_max + 1);
    let mut limited = Vec::with_capacity(n_max + 1);
    coeffs.push(Float::with_val(prec, 1));
    max_partial.push(Float::with_val(prec, 1));
    limited.push(false);
    for n in 1..=n_max {
        let mut acc = Float::new(prec);
        let mut biggest = Float::new(prec);
        for m in 1..=n {
            let term = Float::with_val(prec, traces.get(m) * &coeffs[n - m]);
            let size = Float::with_val(prec, term.abs_ref());
            if size > biggest {
                biggest = size;
            }
            acc += &term;
        }
        let a_n = -acc / n as u32;
        biggest /= n as u32;
        let flagged = if a_n.is_zero() {
            !biggest.is_zero()
        } else {
            Float::with_val(prec, &biggest / Float::with_val(prec, a_n.abs_ref())) > threshold
        };
        coeffs.push(a_n);
        max_partial.push(biggest);
        limited.push(flagged);
    }
    CoefficientSeries {
        s: traces.s.clone(),
        coeffs,
        precision_bits: prec,
        k: traces.k,
        reduction_mode: traces.reduction_mode,
        max_partial,
        precision_limited: limited,
    }
}

/// `a_n = (-1)^n / n! · det M_n`, where `M_n` has `t_{i-j+1}` on and below the
/// diagonal and `n - i` on the superdiagonal of row `i` (1-based).
pub fn coefficients_by_determinant(traces: &TraceTable, n: usize) -> Result<BigReal> {
    if n > DETERMINANT_ORACLE_MAX {
        return Err(Error::OrderTooLarge {
            requested: n,
            max: DETERMINANT_ORACLE_MAX,
        });
    }
    if n > traces.n_max {
        return Err(Error::InvalidInput(format!(
            "order {n} exceeds the {} available traces",
            traces.n_max
        )));
    }
    let prec = traces.precision_bits;
    if n == 0 {
        return Ok(Float::with_val(prec, 1));
    }
    let mut rows: Vec<Vec<Float>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j <= i {
                        Float::with_val(prec, traces.get(i - j + 1))
                    } else if j == i + 1 {
                        Float::with_val(prec, (n - i - 1) as u32)
                    } else {
                        Float::new(prec)
                    }
                })
                .collect()
        })
        .collect();
    let det = determinant(&mut rows, prec);
    let mut factorial = Float::with_val(prec, 1);
    for i in 2..=n {
        factorial *= i as u32;
    }
    let value = det / factorial;
    Ok(if n % 2 == 1 { -value } else { value })
}

/// Gaussian elimination with partial pivoting.
fn determinant(rows: &mut [Vec<Float>], prec: u32) -> Float {
    let n = rows.len();
    let mut det = Float::with_val(prec, 1);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| {
                rows[a][col]
                    .clone()
                    .abs()
                    .partial_cmp(&rows[b][col].clone().abs())
                    .expect("finite entries")
            })
            .expect("nonempty range");
        if rows[pivot][col].is_zero() {
            return Float::new(prec);
        }
        if pivot != col {
            rows.swap(pivot, col);
            det = -det;
        }
        det *= &rows[col][col];
        let (upper, lower) = rows.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = Float::with_val(prec, &row[col] / &pivot_row[col]);
            for (x, p) in row[col..n].iter_mut().zip(&pivot_row[col..n]) {
                *x -= Float::with_val(prec, &factor * p);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn table(values: &[f64], prec: u32) -> TraceTable {
        TraceTable {
            s: Float::with_val(prec, 1.5),
            k: 1,
            n_max: values.len(),
            values: values.iter().map(|&v| Float::with_val(prec, v)).collect(),
            precision_bits: prec,
            reduction_mode: ReductionMode::Necklace,
        }
    }

    fn close(a: &Float, b: f64) -> bool {
        (a.to_f64() - b).abs() <= 1e-13 * b.abs().max(1.0)
    }

    #[test]
    fn low_order_closed_forms() {
        let (t1, t2, t3) = (0.7, 0.45, 0.3);
        let series = coefficients(&table(&[t1, t2, t3], 128));
        assert_eq!(series.coeffs[0], 1);
        assert!(close(&series.coeffs[1], -t1));
        assert!(close(&series.coeffs[2], (t1 * t1 - t2) / 2.0));
        assert!(close(
            &series.coeffs[3],
            -(t1 * t1 * t1 - 3.0 * t1 * t2 + 2.0 * t3) / 6.0
        ));
    }

    #[test]
    fn determinant_matches_closed_forms() {
        let (t1, t2) = (0.7, 0.45);
        let tt = table(&[t1, t2], 128);
        assert!(close(&coefficients_by_determinant(&tt, 1).unwrap(), -t1));
        assert!(close(
            &coefficients_by_determinant(&tt, 2).unwrap(),
            (t1 * t1 - t2) / 2.0
        ));
        assert_eq!(coefficients_by_determinant(&tt, 0).unwrap(), 1);
    }

    #[test]
    fn single_eigenvalue_gives_binomial_series() {
        // t_n = x^n for one eigenvalue x: det(1 - zL) = 1 - xz
        let x: f64 = 0.6;
        let mut tt = table(&[0.0; 6], 200);
        let xf = Float::with_val(200, 3) / 5u32;
        for n in 1..=6 {
            tt.values[n - 1] = Float::with_val(200, (&xf).pow(n as u32));
        }
        let series = coefficients(&tt);
        assert!(close(&series.coeffs[1], -x));
        for n in 2..=6 {
            assert!(series.coeffs[n].clone().abs() < 1e-50, "a_{n} should vanish");
        }
        assert!(series.precision_limited[3]);
    }

    #[test]
    fn recursion_agrees_with_determinant_up_to_eight() {
        let values = [1.3, -0.4, 2.2, 0.9, -1.7, 0.25, 3.1, -0.8];
        let tt = table(&values, 256);
        let series = coefficients(&tt);
        for n in 1..=8 {
            let det = coefficients_by_determinant(&tt, n).unwrap();
            let diff = Float::with_val(256, &det - &series.coeffs[n]).abs();
            assert!(diff < 1e-60, "n = {n}");
        }
        assert!(matches!(
            coefficients_by_determinant(&tt, 9),
            Err(Error::OrderTooLarge { requested: 9, max: 8 })
        ));
    }

    #[test]
    fn truncation_keeps_prefix() {
        let series = coefficients(&table(&[0.5, 0.2, 0.1, 0.05], 128));
        let short = series.truncated(2);
        assert_eq!(short.n_max(), 2);
        assert_eq!(short.coeffs[2], series.coeffs[2]);
    }
}
