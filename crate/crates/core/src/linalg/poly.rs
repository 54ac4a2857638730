use std::fmt;

use rug::{Complex, Float, Rational};

use super::matrix::RationalMatrix;

/// Univariate polynomial with exact rational coefficients, constant term first.
/// Trailing zero coefficients are trimmed, so the zero polynomial has no
/// coefficients and every other polynomial has a nonzero leading coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalPolynomial {
    coeffs: Vec<Rational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_float(&self, x: &Float) -> Float {
        let mut acc = Float::new(x.prec());
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_complex(&self, z: &Complex) -> Complex {
        let mut acc = Complex::new(z.prec());
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }

    /// Exact evaluation at a complex rational `re + i·im`.
    pub fn eval_complex_exact(&self, re: &Rational, im: &Rational) -> (Rational, Rational) {
        let mut pr = Rational::new();
        let mut pi = Rational::new();
        for c in self.coeffs.iter().rev() {
            let nr = Rational::from(&pr * re) - Rational::from(&pi * im) + c;
            let ni = Rational::from(&pr * im) + Rational::from(&pi * re);
            pr = nr;
            pi = ni;
        }
        (pr, pi)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u32))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(lc) => {
                let lc = lc.clone();
                Self::new(self.coeffs.iter().map(|c| Rational::from(c / &lc)).collect())
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        Self::new(out)
    }

    /// Euclidean division; panics on division by the zero polynomial.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let lc = divisor.leading().expect("division by zero polynomial").clone();
        let dd = divisor.degree();
        let mut rem = self.coeffs.clone();
        if rem.len() < divisor.coeffs.len() {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rational::new(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = Rational::from(&rem[i + dd] / &lc);
            if c != 0 {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= Rational::from(&c * d);
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Multiplicity of the root at zero, together with `self / x^m`.
    pub fn deflate_zero_roots(&self) -> (usize, Self) {
        let m = self.coeffs.iter().take_while(|c| **c == 0).count();
        if self.is_zero() {
            return (0, Self::zero());
        }
        (m, Self::new(self.coeffs[m..].to_vec()))
    }

    /// Yun's square-free decomposition: `self = lc · Π f_i^i` with each `f_i`
    /// monic, square-free and pairwise coprime. Returns the nonconstant
    /// factors paired with their multiplicity.
    pub fn squarefree_factors(&self) -> Vec<(Self, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let mut a = f.gcd(&df);
        let mut b = f.div_rem(&a).0;
        let mut c = df.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree() > 0 {
            a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rational::new(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        Self::new(out)
    }
}

impl fmt::Debug for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Characteristic polynomial `det(xI - B)` by the Faddeev–LeVerrier recursion
/// in exact rational arithmetic.
pub fn char_poly(b: &RationalMatrix) -> RationalPolynomial {
    let n = b.dim();
    let mut coeffs = vec![Rational::new(); n + 1];
    coeffs[n] = Rational::from(1);
    let mut m = RationalMatrix::zeros(n);
    for k in 1..=n {
        // M_k = B M_{k-1} + c_{n-k+1} I
        let mut next = b * &m;
        for i in 0..n {
            let v = Rational::from(next.get(i, i) + &coeffs[n - k + 1]);
            next.set(i, i, v);
        }
        let bm = b * &next;
        coeffs[n - k] = -bm.trace() / Rational::from(k as u32);
        m = next;
    }
    RationalPolynomial::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[&str]]) -> RationalMatrix {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        RationalMatrix::parse(&rows).unwrap()
    }

    #[test]
    fn char_poly_small_cases() {
        let a = m(&[&["5/3"]]);
        assert_eq!(
            char_poly(&a),
            RationalPolynomial::new(vec![Rational::from((-5, 3)), Rational::from(1)])
        );
        assert_eq!(
            char_poly(&RationalMatrix::identity(2)),
            RationalPolynomial::from_i64(&[1, -2, 1])
        );
        let ex1 = m(&[&["-4/7", "5/7"], &["0", "1/7"]]);
        assert_eq!(
            char_poly(&ex1),
            RationalPolynomial::new(vec![
                Rational::from((-4, 49)),
                Rational::from((3, 7)),
                Rational::from(1)
            ])
        );
    }

    #[test]
    fn division_and_gcd() {
        // (x-1)(x-2) and (x-1)(x+3)
        let p = RationalPolynomial::from_i64(&[2, -3, 1]);
        let q = RationalPolynomial::from_i64(&[-3, 2, 1]);
        assert_eq!(p.gcd(&q), RationalPolynomial::from_i64(&[-1, 1]));
        let (quo, rem) = p.div_rem(&RationalPolynomial::from_i64(&[-1, 1]));
        assert_eq!(quo, RationalPolynomial::from_i64(&[-2, 1]));
        assert!(rem.is_zero());
    }

    #[test]
    fn squarefree_decomposition() {
        // (x-1)^2 (x+2)^3 x
        let base = RationalPolynomial::from_i64(&[-1, 1]);
        let other = RationalPolynomial::from_i64(&[2, 1]);
        let x = RationalPolynomial::from_i64(&[0, 1]);
        let p = base
            .mul(&base)
            .mul(&other)
            .mul(&other)
            .mul(&other)
            .mul(&x)
            .mul(&RationalPolynomial::from_i64(&[3]));
        let factors = p.squarefree_factors();
        assert_eq!(factors, vec![(x.clone(), 1), (base.clone(), 2), (other.clone(), 3)]);
    }

    #[test]
    fn zero_root_deflation() {
        let p = RationalPolynomial::from_i64(&[0, 0, 3, 1]);
        let (m0, q) = p.deflate_zero_roots();
        assert_eq!(m0, 2);
        assert_eq!(q, RationalPolynomial::from_i64(&[3, 1]));
    }

    #[test]
    fn exact_complex_evaluation() {
        // x^2 + 1 at i
        let p = RationalPolynomial::from_i64(&[1, 0, 1]);
        let (re, im) = p.eval_complex_exact(&Rational::new(), &Rational::from(1));
        assert_eq!(re, 0);
        assert_eq!(im, 0);
    }
}
