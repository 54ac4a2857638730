//! Certified eigenvalue data for rational matrices.

use rug::float::Round;
use rug::ops::{Pow, SubAssignRound};
use rug::{Float, Rational};

use super::matrix::RationalMatrix;
use super::poly::{char_poly, RationalPolynomial};
use super::roots::{isolate_roots, overlap_components, RootEnclosure};
use crate::bigreal::BigReal;
use crate::error::{Error, Result};

/// Guard bits carried above the requested precision during root finding.
const GUARD_BITS: u32 = 64;
/// Precision doublings attempted before an uncertified eigenvalue is reported.
const ESCALATIONS: u32 = 2;

/// Leading eigenvalue data of a matrix with a simple dominant real eigenvalue.
#[derive(Clone, Debug)]
pub struct LeadingEigen {
    /// The dominant eigenvalue, with sign.
    pub lambda1: BigReal,
    /// `|lambda1|`, the spectral radius.
    pub rho: BigReal,
    /// Certified lower bound on `|λ₁| - max_{j≥2} |λ_j|`.
    pub dominance_gap: BigReal,
    /// Derivative of the characteristic polynomial at `lambda1`.
    pub p_prime_at_lambda1: BigReal,
}

/// An eigenvalue enclosure together with its algebraic multiplicity.
#[derive(Clone, Debug)]
pub struct Eigenvalue {
    pub enclosure: RootEnclosure,
    pub multiplicity: usize,
}

enum Attempt {
    Done(LeadingEigen),
    Escalate(Error),
}

/// Certifies the simple dominant real eigenvalue of `b`.
///
/// Fails with [`Error::DominanceUnverified`] when the eigenvalue of maximal
/// modulus is repeated, non-real, or tied in modulus with another one, and
/// with [`Error::DegenerateProduct`] when its enclosure cannot be separated
/// from zero.
pub fn leading_eigen(b: &RationalMatrix, prec: u32) -> Result<LeadingEigen> {
    if b.dim() == 1 {
        let value = b.get(0, 0);
        if *value == 0 {
            return Err(Error::DegenerateProduct { word: None });
        }
        let lambda1 = Float::with_val(prec, value);
        let rho = Float::with_val(prec, lambda1.abs_ref());
        return Ok(LeadingEigen {
            dominance_gap: rho.clone(),
            lambda1,
            rho,
            p_prime_at_lambda1: Float::with_val(prec, 1),
        });
    }
    let p = char_poly(b);
    let (zero_mult, q) = p.deflate_zero_roots();
    if q.degree() == 0 {
        return Err(Error::DegenerateProduct { word: None });
    }
    if q.degree() == 2 {
        return quadratic_leading(&q, zero_mult, prec);
    }
    let mut last = Error::DominanceUnverified {
        word: None,
        reason: "uncertified".into(),
    };
    for attempt in 0..=ESCALATIONS {
        let working = (prec << attempt) + GUARD_BITS;
        match general_leading(&p, &q, working, prec)? {
            Attempt::Done(le) => return Ok(le),
            Attempt::Escalate(e) => last = e,
        }
    }
    Err(last)
}

/// Closed form for a deflated characteristic polynomial `x^2 + bx + c`,
/// certified exactly through the sign of the discriminant.
fn quadratic_leading(q: &RationalPolynomial, zero_mult: usize, prec: u32) -> Result<LeadingEigen> {
    let c = &q.coeffs()[0];
    let b = &q.coeffs()[1];
    let disc = Rational::from(b.square_ref()) - Rational::from(c * 4u32);
    if disc < 0 {
        return Err(Error::DominanceUnverified {
            word: None,
            reason: "leading eigenvalues form a complex conjugate pair".into(),
        });
    }
    if disc == 0 {
        return Err(Error::DominanceUnverified {
            word: None,
            reason: "leading eigenvalue is repeated".into(),
        });
    }
    if *b == 0 {
        return Err(Error::DominanceUnverified {
            word: None,
            reason: "two real eigenvalues of equal modulus".into(),
        });
    }
    let wp = prec + GUARD_BITS;
    let sq = Float::with_val(wp, &disc).sqrt();
    // λ₁ carries the sign of -b, so -b and ±√disc add without cancellation
    let sign_positive = *b < 0;
    let minus_b = Float::with_val(wp, -Rational::from(b));
    let lambda1 = if sign_positive {
        (minus_b + &sq) / 2u32
    } else {
        (minus_b - &sq) / 2u32
    };
    let lambda2 = Float::with_val(wp, c) / &lambda1;
    let rho = Float::with_val(wp, lambda1.abs_ref());
    let gap = Float::with_val(wp, &rho - Float::with_val(wp, lambda2.abs_ref()));
    // q'(λ₁) = λ₁ - λ₂ = ±√disc; the deflated factor contributes λ₁^m
    let mut p_prime = if sign_positive { sq } else { -sq };
    if zero_mult > 0 {
        p_prime *= Float::with_val(wp, (&lambda1).pow(zero_mult as u32));
    }
    Ok(LeadingEigen {
        lambda1: Float::with_val(prec, &lambda1),
        rho: Float::with_val(prec, &rho),
        dominance_gap: Float::with_val(prec, &gap),
        p_prime_at_lambda1: Float::with_val(prec, &p_prime),
    })
}

fn factor_enclosures(q: &RationalPolynomial, working: u32) -> Vec<(Vec<RootEnclosure>, usize)> {
    q.squarefree_factors()
        .into_iter()
        .map(|(f, mult)| (isolate_roots(&f, working), mult))
        .collect()
}

fn general_leading(p: &RationalPolynomial, q: &RationalPolynomial, working: u32, prec: u32) -> Result<Attempt> {
    let factors = factor_enclosures(q, working);

    // locate the enclosure with the largest centre modulus
    let mut best: Option<(usize, usize, Float)> = None;
    for (fi, (discs, _)) in factors.iter().enumerate() {
        for (di, d) in discs.iter().enumerate() {
            let m = d.center_modulus(working);
            if best.as_ref().is_none_or(|(_, _, bm)| m > *bm) {
                best = Some((fi, di, m));
            }
        }
    }
    let (fi, di, center_mod) = best.expect("nonconstant polynomial has roots");
    let (discs, mult) = &factors[fi];
    let cand = &discs[di];

    if *mult > 1 {
        return Err(Error::DominanceUnverified {
            word: None,
            reason: format!("leading eigenvalue has multiplicity {mult}"),
        });
    }
    if !cand.is_real_center() {
        let im = Float::with_val(64, cand.im.abs_ref());
        let reason = "leading eigenvalue is not real".to_string();
        if im > cand.radius {
            return Err(Error::DominanceUnverified { word: None, reason });
        }
        return Ok(Attempt::Escalate(Error::DominanceUnverified { word: None, reason }));
    }
    let comps = overlap_components(discs);
    if comps.iter().any(|c| c.contains(&di) && c.len() > 1) {
        return Ok(Attempt::Escalate(Error::DominanceUnverified {
            word: None,
            reason: "leading eigenvalue enclosure overlaps another".into(),
        }));
    }
    let half_mod = Float::with_val(64, &center_mod / 2u32);
    if cand.radius > half_mod {
        return Ok(Attempt::Escalate(Error::DegenerateProduct { word: None }));
    }

    let mut others_max = Float::new(working);
    for (fj, (ds, _)) in factors.iter().enumerate() {
        for (dj, d) in ds.iter().enumerate() {
            if fj == fi && dj == di {
                continue;
            }
            let up = d.modulus_upper(working);
            if up > others_max {
                others_max = up;
            }
        }
    }
    let lower = cand.modulus_lower(working);
    let mut gap = lower;
    gap.sub_assign_round(&others_max, Round::Down);
    if gap <= 0 {
        return Ok(Attempt::Escalate(Error::DominanceUnverified {
            word: None,
            reason: "no certified modulus gap below the leading eigenvalue".into(),
        }));
    }

    let center = cand.re.to_rational().expect("finite centre");
    let p_prime = p.derivative().eval(&center);
    if p_prime == 0 {
        return Ok(Attempt::Escalate(Error::DominanceUnverified {
            word: None,
            reason: "characteristic polynomial derivative vanishes".into(),
        }));
    }
    let lambda1 = Float::with_val(prec, &center);
    let rho = Float::with_val(prec, lambda1.abs_ref());
    Ok(Attempt::Done(LeadingEigen {
        lambda1,
        rho,
        dominance_gap: Float::with_val(prec, &gap),
        p_prime_at_lambda1: Float::with_val(prec, &p_prime),
    }))
}

/// All eigenvalues with algebraic multiplicity, zero included.
pub fn eigenvalues(b: &RationalMatrix, prec: u32) -> Vec<Eigenvalue> {
    let p = char_poly(b);
    let (zero_mult, q) = p.deflate_zero_roots();
    let mut out = Vec::new();
    if zero_mult > 0 {
        out.push(Eigenvalue {
            enclosure: RootEnclosure {
                re: Float::new(prec),
                im: Float::new(prec),
                radius: Float::new(64),
            },
            multiplicity: zero_mult,
        });
    }
    for (discs, mult) in factor_enclosures(&q, prec + GUARD_BITS) {
        for d in discs {
            out.push(Eigenvalue {
                enclosure: d,
                multiplicity: mult,
            });
        }
    }
    out
}

/// Maximum modulus over all eigenvalues.
pub fn spectral_radius(b: &RationalMatrix, prec: u32) -> BigReal {
    if b.dim() == 1 {
        return Float::with_val(prec, b.get(0, 0)).abs();
    }
    eigenvalues(b, prec)
        .iter()
        .map(|e| e.enclosure.center_modulus(prec))
        .fold(Float::new(prec), |acc, m| if m > acc { m } else { acc })
}

/// Singular values in decreasing order, as square roots of the eigenvalues of `AᵀA`.
pub fn singular_values(a: &RationalMatrix, prec: u32) -> Vec<BigReal> {
    let gram = &a.transpose() * a;
    let mut values: Vec<BigReal> = Vec::with_capacity(a.dim());
    for e in eigenvalues(&gram, prec) {
        let re = Float::with_val(prec, &e.enclosure.re);
        let clamped = if re < 0 { Float::new(prec) } else { re };
        let sigma = clamped.sqrt();
        for _ in 0..e.multiplicity {
            values.push(sigma.clone());
        }
    }
    values.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    values
}

/// Singular value function `φ^s(A)`.
pub fn phi_s(a: &RationalMatrix, s: &BigReal) -> Result<BigReal> {
    if *s < 0 {
        return Err(Error::InvalidInput("φ^s requires s ≥ 0".into()));
    }
    let prec = s.prec();
    let d = a.dim();
    if *s >= d as u32 {
        let det = Float::with_val(prec, a.determinant()).abs();
        return Ok(det.pow(Float::with_val(prec, s / d as u32)));
    }
    let sigma = singular_values(a, prec);
    let floor = Float::with_val(prec, s.floor_ref());
    let whole = floor.to_u32_saturating().unwrap_or(0) as usize;
    let frac = Float::with_val(prec, s - &floor);
    let mut acc = Float::with_val(prec, 1);
    for v in sigma.iter().take(whole) {
        acc *= v;
    }
    if !frac.is_zero() {
        acc *= Float::with_val(prec, (&sigma[whole]).pow(&frac));
    }
    Ok(acc)
}
