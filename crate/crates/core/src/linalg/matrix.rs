use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Parses an exact rational literal: integers, `p/q`, or finite decimals
/// such as `-0.125` or `2.5e-3`. The Unicode minus sign is accepted.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let cleaned = text.trim().replace('\u{2212}', "-");
    if cleaned.is_empty() {
        return Err(Error::InvalidInput("empty rational literal".into()));
    }
    if let Some((num, den)) = cleaned.split_once('/') {
        let n = parse_rational(num)?;
        let d = parse_rational(den)?;
        if d == 0 {
            return Err(Error::InvalidInput(format!("zero denominator in '{text}'")));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match cleaned.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = cleaned[pos + 1..]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad exponent in '{text}'")))?;
            (&cleaned[..pos], exp)
        }
        None => (cleaned.as_str(), 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits == "-" || digits == "+" || digits.is_empty() {
        return Err(Error::InvalidInput(format!("bad rational literal '{text}'")));
    } else {
        digits
    };
    let numer = Integer::from_str_radix(&digits, 10)
        .map_err(|_| Error::InvalidInput(format!("bad rational literal '{text}'")))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = Integer::from(10);
    let value = if scale >= 0 {
        Rational::from(numer * ten.pow(scale as u32))
    } else {
        Rational::from((numer, ten.pow((-scale) as u32)))
    };
    Ok(value)
}

/// Exact square matrix over the rationals, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    dim: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(dim: usize, entries: Vec<Rational>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("matrix rows must form a square".into()));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    /// Builds a matrix from rational literals, e.g. `[["-4/7", "5/7"], ["0", "1/7"]]`.
    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|row| row.iter().map(|e| parse_rational(e.as_ref())).collect())
            .collect::<Result<Vec<Vec<Rational>>>>()?;
        Self::from_rows(parsed)
    }

    /// Integer entries divided by a common denominator.
    pub fn from_integers(dim: usize, numerators: &[Integer], denominator: &Integer) -> Result<Self> {
        if *denominator == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let entries = numerators
            .iter()
            .map(|n| Rational::from((n.clone(), denominator.clone())))
            .collect();
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Rational::from(1);
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Rational::new(); dim * dim],
        }
    }

    pub fn scalar(value: Rational) -> Self {
        Self {
            dim: 1,
            entries: vec![value],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j].clone();
            }
        }
        out
    }

    pub fn trace(&self) -> Rational {
        let mut t = Rational::new();
        for i in 0..self.dim {
            t += &self.entries[i * self.dim + i];
        }
        t
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| Rational::from(e * factor)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| *e == 0)
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.dim, "vector length must match matrix dimension");
        (0..self.dim)
            .map(|i| {
                let mut acc = Rational::new();
                for (a, x) in self.row(i).iter().zip(v) {
                    acc += Rational::from(a * x);
                }
                acc
            })
            .collect()
    }

    /// Exact determinant by fraction-carrying Gaussian elimination.
    pub fn determinant(&self) -> Rational {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut det = Rational::from(1);
        for col in 0..d {
            let Some(pivot) = (col..d).find(|&r| a[r * d + col] != 0) else {
                return Rational::new();
            };
            if pivot != col {
                for j in 0..d {
                    a.swap(pivot * d + j, col * d + j);
                }
                det = -det;
            }
            let p = a[col * d + col].clone();
            det *= &p;
            for r in col + 1..d {
                if a[r * d + col] == 0 {
                    continue;
                }
                let factor = Rational::from(&a[r * d + col] / &p);
                for j in col..d {
                    let delta = Rational::from(&factor * &a[col * d + j]);
                    a[r * d + j] -= delta;
                }
            }
        }
        det
    }

    /// Bit length of the largest numerator or denominator among the entries.
    pub fn max_entry_bits(&self) -> u32 {
        self.entries
            .iter()
            .map(|e| e.numer().significant_bits().max(e.denom().significant_bits()))
            .max()
            .unwrap_or(0)
    }

    /// Replaces every entry by its nearest dyadic rational with `bits` significant bits.
    pub fn round_to_dyadic(&self, bits: u32) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|e| {
                    rug::Float::with_val(bits, e)
                        .to_rational()
                        .expect("finite rational rounds to finite float")
                })
                .collect(),
        }
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|e| e.to_f64()).collect())
            .collect()
    }

    /// Least common denominator and the integer matrix `self * lcd`.
    pub fn to_integer_scaled(&self) -> (Vec<Integer>, Integer) {
        let mut lcd = Integer::from(1);
        for e in &self.entries {
            lcd.lcm_mut(e.denom());
        }
        let nums = self
            .entries
            .iter()
            .map(|e| e.numer() * Integer::from(&lcd / e.denom()))
            .collect();
        (nums, lcd)
    }

    /// Rough Euclidean operator norm estimate in double precision.
    pub fn operator_norm_estimate(&self) -> f64 {
        let rows = self.to_f64_rows();
        let d = self.dim;
        // power iteration on A^T A
        let mut v = vec![1.0 / (d as f64).sqrt(); d];
        let mut norm = 0.0;
        for _ in 0..200 {
            let av: Vec<f64> = (0..d).map(|i| (0..d).map(|j| rows[i][j] * v[j]).sum()).collect();
            let atav: Vec<f64> = (0..d).map(|j| (0..d).map(|i| rows[i][j] * av[i]).sum()).collect();
            let n2: f64 = atav.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n2 == 0.0 {
                return 0.0;
            }
            let next = n2.sqrt();
            v = atav.iter().map(|x| x / n2).collect();
            if (next - norm).abs() <= 1e-15 * next {
                return next;
            }
            norm = next;
        }
        norm
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions must agree");
        let d = self.dim;
        let mut out = RationalMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = &self.entries[i * d + k];
                if *a == 0 {
                    continue;
                }
                for j in 0..d {
                    let b = &rhs.entries[k * d + j];
                    if *b != 0 {
                        out.entries[i * d + j] += Rational::from(a * b);
                    }
                }
            }
        }
        out
    }
}

impl Add for &RationalMatrix {
    type Output = RationalMatrix;

    fn add(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions must agree");
        RationalMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| Rational::from(a + b))
                .collect(),
        }
    }
}

impl Sub for &RationalMatrix {
    type Output = RationalMatrix;

    fn sub(self, rhs: &RationalMatrix) -> RationalMatrix {
        self + &(-rhs)
    }
}

impl Neg for &RationalMatrix {
    type Output = RationalMatrix;

    fn neg(self) -> RationalMatrix {
        RationalMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| Rational::from(-e)).collect(),
        }
    }
}

/// Integer matrix with a common positive denominator; products stay in
/// integers, which is much cheaper than canonicalising rationals at every step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledIntegerMatrix {
    dim: usize,
    numerators: Vec<Integer>,
    denominator: Integer,
}

impl ScaledIntegerMatrix {
    pub fn from_rational(m: &RationalMatrix) -> Self {
        let (numerators, denominator) = m.to_integer_scaled();
        Self {
            dim: m.dim(),
            numerators,
            denominator,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut numerators = vec![Integer::new(); dim * dim];
        for i in 0..dim {
            numerators[i * dim + i] = Integer::from(1);
        }
        Self {
            dim,
            numerators,
            denominator: Integer::from(1),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `lhs * self`, i.e. left multiplication.
    pub fn left_mul(&self, lhs: &ScaledIntegerMatrix) -> Self {
        let d = self.dim;
        let mut numerators = vec![Integer::new(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = &lhs.numerators[i * d + k];
                if *a == 0 {
                    continue;
                }
                for j in 0..d {
                    numerators[i * d + j] += a * &self.numerators[k * d + j];
                }
            }
        }
        Self {
            dim: d,
            numerators,
            denominator: Integer::from(&lhs.denominator * &self.denominator),
        }
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix::from_integers(self.dim, &self.numerators, &self.denominator).expect("denominator is positive")
    }

    pub fn max_bits(&self) -> u32 {
        self.numerators
            .iter()
            .map(|n| n.significant_bits())
            .max()
            .unwrap_or(0)
            .max(self.denominator.significant_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[&str]]) -> RationalMatrix {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        RationalMatrix::parse(&rows).unwrap()
    }

    #[test]
    fn parses_exact_literals() {
        assert_eq!(parse_rational("-4/7").unwrap(), Rational::from((-4, 7)));
        assert_eq!(parse_rational("\u{2212}4/7").unwrap(), Rational::from((-4, 7)));
        assert_eq!(parse_rational("0.125").unwrap(), Rational::from((1, 8)));
        assert_eq!(parse_rational("2.5e-3").unwrap(), Rational::from((1, 400)));
        assert_eq!(parse_rational("12").unwrap(), Rational::from(12));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn one_third_is_not_rounded() {
        let a = parse_rational("1/3").unwrap();
        assert_eq!(Rational::from(&a * 3), 1);
    }

    #[test]
    fn determinant_and_product() {
        let a = m(&[&["-4/7", "5/7"], &["0", "1/7"]]);
        assert_eq!(a.determinant(), Rational::from((-4, 49)));
        let b = m(&[&["1/7", "0"], &["-5/7", "-4/7"]]);
        let ab = &a * &b;
        assert_eq!(ab.determinant(), Rational::from((16, 2401)));
        assert_eq!(m(&[&["1", "2"], &["2", "4"]]).determinant(), 0);
    }

    #[test]
    fn scaled_products_match_rational_products() {
        let a = m(&[&["1/3", "1/9"], &["1/2", "1/2"]]);
        let b = m(&[&["-1/2", "-1/3"], &["-1/3", "-1/2"]]);
        let sa = ScaledIntegerMatrix::from_rational(&a);
        let sb = ScaledIntegerMatrix::from_rational(&b);
        assert_eq!(sb.left_mul(&sa).to_rational(), &a * &b);
    }

    #[test]
    fn rejects_non_square() {
        assert!(RationalMatrix::new(2, vec![Rational::new(); 3]).is_err());
        assert!(RationalMatrix::parse(&[vec!["1", "2"]]).is_err());
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let d = m(&[&["1/2", "0"], &["0", "1/4"]]);
        assert!((d.operator_norm_estimate() - 0.5).abs() < 1e-12);
    }
}
