//! Root isolation for exact rational polynomials.
//!
//! Approximations come from the Aberth–Ehrlich iteration run first at 64 bits
//! and then at the working precision. They are certified with the
//! Weierstrass-correction inclusion theorem: for a degree-`n` polynomial with
//! distinct approximations `z_i` and corrections
//! `W_i = f(z_i) / (lc · Π_{j≠i} (z_i - z_j))`, the discs `D(z_i, n|W_i|)`
//! cover every root, and a connected component made of `m` discs holds
//! exactly `m` roots counted with multiplicity. `f(z_i)` and the products are
//! evaluated in exact rational arithmetic on the dyadic centres, so the radii
//! are genuine upper bounds.

use rug::float::Round;
use rug::ops::{AddAssignRound, SubAssignRound};
use rug::{Assign, Complex, Float, Rational};

use super::poly::RationalPolynomial;
use crate::bigreal;

const RADIUS_PREC: u32 = 64;
const MAX_ABERTH_STEPS: usize = 200;

/// A disc in the complex plane known to contain a root.
#[derive(Clone, Debug)]
pub struct RootEnclosure {
    pub re: Float,
    pub im: Float,
    /// Upper bound on the distance from the centre to the enclosed root.
    pub radius: Float,
}

impl RootEnclosure {
    fn center_exact(&self) -> (Rational, Rational) {
        (
            self.re.to_rational().expect("finite centre"),
            self.im.to_rational().expect("finite centre"),
        )
    }

    pub fn is_real_center(&self) -> bool {
        self.im.is_zero()
    }

    fn modulus_sq_exact(&self) -> Rational {
        let (re, im) = self.center_exact();
        Rational::from(re.square_ref()) + Rational::from(im.square_ref())
    }

    /// Modulus of the centre, rounded to nearest at `prec` bits.
    pub fn center_modulus(&self, prec: u32) -> Float {
        let m2 = Float::with_val(prec, &self.modulus_sq_exact());
        m2.sqrt()
    }

    /// Upper bound on the modulus of any point in the disc.
    pub fn modulus_upper(&self, prec: u32) -> Float {
        let mut m = bigreal::upper_bound(&self.modulus_sq_exact(), prec);
        m.sqrt_round(Round::Up);
        let mut out = Float::with_val(prec, &m);
        out.add_assign_round(&self.radius, Round::Up);
        out
    }

    /// Lower bound on the modulus of any point in the disc (may be negative).
    pub fn modulus_lower(&self, prec: u32) -> Float {
        let mut m = bigreal::lower_bound(&self.modulus_sq_exact(), prec);
        m.sqrt_round(Round::Down);
        let mut out = Float::with_val(prec, &m);
        out.sub_assign_round(&self.radius, Round::Down);
        out
    }

    /// True when the two discs are certainly disjoint.
    pub fn disjoint_from(&self, other: &RootEnclosure) -> bool {
        let (ar, ai) = self.center_exact();
        let (br, bi) = other.center_exact();
        let dr = ar - br;
        let di = ai - bi;
        let dist2 = Rational::from(dr.square_ref()) + Rational::from(di.square_ref());
        let mut sum = Float::with_val(RADIUS_PREC + 8, &self.radius);
        sum.add_assign_round(&other.radius, Round::Up);
        sum.square_round(Round::Up);
        let sum2 = sum.to_rational().expect("finite radius");
        dist2 > sum2
    }
}

/// Groups enclosures into connected components of overlapping discs.
pub fn overlap_components(discs: &[RootEnclosure]) -> Vec<Vec<usize>> {
    let n = discs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut j = i;
        while parent[j] != r {
            let next = parent[j];
            parent[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if !discs[i].disjoint_from(&discs[j]) {
                let a = find(&mut parent, i);
                let b = find(&mut parent, j);
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_index: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_index[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_index[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

fn initial_guesses(f: &RationalPolynomial, prec: u32) -> Vec<Complex> {
    let n = f.degree();
    let coeffs = f.coeffs();
    let a0 = Float::with_val(64, &coeffs[0]).abs();
    let an = Float::with_val(64, &coeffs[n]).abs();
    let radius = if a0.is_zero() {
        Float::with_val(64, 1)
    } else {
        let lr: Float = (a0.ln() - an.ln()) / n as u32;
        lr.exp()
    };
    let tau = Float::with_val(64, rug::float::Constant::Pi) * 2u32;
    (0..n)
        .map(|j| {
            let theta = Float::with_val(64, &tau * j as u32) / n as u32 + 0.4f64;
            let (s, c) = theta.sin_cos(Float::new(64));
            Complex::with_val(
                prec,
                (Float::with_val(64, &radius * &c), Float::with_val(64, &radius * &s)),
            )
        })
        .collect()
}

/// Runs Aberth–Ehrlich steps in place until corrections fall below
/// `2^-(prec - 12)` relative or the step budget is exhausted.
fn aberth(f: &RationalPolynomial, z: &mut [Complex], prec: u32) {
    let n = z.len();
    if n == 0 {
        return;
    }
    let df = f.derivative();
    let threshold = Float::with_val(32, Float::i_exp(1, -(prec as i32 - 12)));
    for _ in 0..MAX_ABERTH_STEPS {
        let mut worst = Float::new(32);
        for i in 0..n {
            let p = f.eval_complex(&z[i]);
            if p.is_zero() {
                continue;
            }
            let dp = df.eval_complex(&z[i]);
            let mut sum = Complex::new(prec);
            for j in 0..n {
                if j != i {
                    let diff = Complex::with_val(prec, &z[i] - &z[j]);
                    if !diff.is_zero() {
                        sum += diff.recip();
                    }
                }
            }
            let w = if dp.is_zero() {
                // stationary point: nudge off it
                Complex::with_val(
                    prec,
                    (Float::i_exp(1, -(prec as i32 / 2)), Float::i_exp(1, -(prec as i32 / 2))),
                )
            } else {
                let ratio = Complex::with_val(prec, &p / &dp);
                let denom = Complex::with_val(prec, 1) - Complex::with_val(prec, &ratio * &sum);
                if denom.is_zero() {
                    ratio
                } else {
                    ratio / denom
                }
            };
            let mag = Float::with_val(32, w.abs_ref());
            let zmag = Float::with_val(32, z[i].abs_ref());
            let rel = if zmag.is_zero() { mag } else { mag / zmag };
            if rel > worst {
                worst = rel;
            }
            z[i] -= w;
        }
        if !worst.is_finite() {
            break;
        }
        if worst <= threshold {
            break;
        }
    }
}

/// Approximates and certifies the roots of a square-free polynomial of
/// degree at least one. The returned discs are centred on dyadic rationals.
/// Approximations whose imaginary part is negligible are snapped onto the
/// real axis; for a real polynomial a disc that is centred on the axis and
/// isolated from all others therefore encloses a real root.
pub fn isolate_roots(f: &RationalPolynomial, prec: u32) -> Vec<RootEnclosure> {
    let n = f.degree();
    if n == 0 {
        return Vec::new();
    }
    let mut z: Vec<Complex> = if n == 1 {
        let root = -Rational::from(&f.coeffs()[0] / &f.coeffs()[1]);
        vec![Complex::with_val(prec, (Float::with_val(prec, &root), 0))]
    } else {
        let mut z = initial_guesses(f, 64);
        aberth(f, &mut z, 64);
        let mut z: Vec<Complex> = z.into_iter().map(|c| Complex::with_val(prec, c)).collect();
        if prec > 64 {
            aberth(f, &mut z, prec);
        }
        z
    };

    let snap = Float::with_val(32, Float::i_exp(1, -(prec as i32 / 2)));
    for c in z.iter_mut() {
        let im = Float::with_val(32, c.imag().abs_ref());
        let m = Float::with_val(32, c.abs_ref());
        if im <= Float::with_val(32, &m * &snap) {
            c.mut_imag().assign(0);
        }
    }

    certify(f, &z)
}

fn certify(f: &RationalPolynomial, z: &[Complex]) -> Vec<RootEnclosure> {
    let n = f.degree();
    let lc = f.leading().expect("nonzero polynomial").clone();
    let lc2 = Rational::from(lc.square_ref());
    let centers: Vec<(Rational, Rational)> = z
        .iter()
        .map(|c| {
            (
                c.real().to_rational().unwrap_or_default(),
                c.imag().to_rational().unwrap_or_default(),
            )
        })
        .collect();
    let n2 = Rational::from((n * n) as u64);
    centers
        .iter()
        .enumerate()
        .map(|(i, (re, im))| {
            let (fr, fi) = f.eval_complex_exact(re, im);
            let num = Rational::from(fr.square_ref()) + Rational::from(fi.square_ref());
            let mut den = lc2.clone();
            for (j, (rj, ij)) in centers.iter().enumerate() {
                if j == i {
                    continue;
                }
                let dr = Rational::from(re - rj);
                let di = Rational::from(im - ij);
                den *= Rational::from(dr.square_ref()) + Rational::from(di.square_ref());
            }
            let radius = if num == 0 {
                Float::new(RADIUS_PREC)
            } else if den == 0 {
                Float::with_val(RADIUS_PREC, rug::float::Special::Infinity)
            } else {
                let r2 = num * &n2 / den;
                let mut r = bigreal::upper_bound(&r2, RADIUS_PREC);
                r.sqrt_round(Round::Up);
                r
            };
            RootEnclosure {
                re: Float::with_val(z[i].prec().0, re),
                im: Float::with_val(z[i].prec().0, im),
                radius,
            }
        })
        .collect()
}
