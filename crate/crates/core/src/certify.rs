//! Sufficient checks for the hypotheses of the trace method: multipositivity
//! of the exterior powers, contraction, and a bracket `(k, k+1)` for the
//! affinity dimension.
//!
//! Multipositivity is certified, never decided. Two routes are offered: a
//! user-supplied multicone checked in exact arithmetic, and entrywise
//! positivity of all products of some fixed length.

use std::fmt;

use rayon::prelude::*;
use rug::{Float, Rational};

use crate::bigreal::BigReal;
use crate::error::{Error, Result};
use crate::linalg::{binomial, spectral_radius, wedge_power, RationalMatrix};
use crate::traces::necklace::enumerate_words;

/// Above this many matrices the sign-pattern search is skipped and the caller
/// must provide the pattern.
pub const MAX_SIGN_SEARCH: usize = 12;

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::new();
    for (x, y) in a.iter().zip(b) {
        acc += Rational::from(x * y);
    }
    acc
}

fn render_vector(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// A closed convex polyhedral cone given by both its extreme rays and its
/// facet normals: `K = cone(generators) = {v : ⟨v, f⟩ ≥ 0 for all f}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyhedralCone {
    pub generators: Vec<Vec<Rational>>,
    pub facet_normals: Vec<Vec<Rational>>,
}

impl PolyhedralCone {
    /// Validates the double description.
    ///
    /// The two descriptions are checked for compatibility (every generator
    /// satisfies every facet inequality). The sum of the generators serves as
    /// the interior witness and the sum of the facet normals as the pointedness
    /// witness; cones for which these canonical witnesses fail are rejected.
    pub fn new(generators: Vec<Vec<Rational>>, facet_normals: Vec<Vec<Rational>>) -> Result<Self> {
        let dim = match generators.first() {
            Some(g) => g.len(),
            None => return Err(Error::InvalidInput("a cone needs at least one generator".into())),
        };
        if dim == 0 || facet_normals.is_empty() {
            return Err(Error::InvalidInput(
                "a cone needs facet normals in positive dimension".into(),
            ));
        }
        if generators.iter().chain(&facet_normals).any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "cone vectors must all have length {dim}"
            )));
        }
        for g in &generators {
            for f in &facet_normals {
                if dot(g, f) < 0 {
                    return Err(Error::InvalidInput(format!(
                        "generator {} violates facet {}",
                        render_vector(g),
                        render_vector(f)
                    )));
                }
            }
        }
        let cone = Self {
            generators,
            facet_normals,
        };
        let centre = cone.generator_sum();
        if cone.facet_normals.iter().any(|f| dot(&centre, f) <= 0) {
            return Err(Error::InvalidInput(
                "cone has empty interior (sum of generators lies on a facet)".into(),
            ));
        }
        let pointer = cone.normal_sum();
        if cone.generators.iter().any(|g| dot(g, &pointer) <= 0) {
            return Err(Error::InvalidInput(
                "cone is not pointed (sum of facet normals vanishes on a generator)".into(),
            ));
        }
        Ok(cone)
    }

    /// Parses decimal or `p/q` strings.
    pub fn parse<S: AsRef<str>>(generators: &[Vec<S>], facet_normals: &[Vec<S>]) -> Result<Self> {
        let conv = |rows: &[Vec<S>]| -> Result<Vec<Vec<Rational>>> {
            rows.iter()
                .map(|r| r.iter().map(|x| crate::linalg::parse_rational(x.as_ref())).collect())
                .collect()
        };
        Self::new(conv(generators)?, conv(facet_normals)?)
    }

    /// The closed positive orthant of `R^dim`.
    pub fn positive_orthant(dim: usize) -> Self {
        let basis: Vec<Vec<Rational>> = (0..dim)
            .map(|i| (0..dim).map(|j| Rational::from(u32::from(i == j))).collect())
            .collect();
        Self {
            generators: basis.clone(),
            facet_normals: basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    fn generator_sum(&self) -> Vec<Rational> {
        sum_vectors(&self.generators, self.dim())
    }

    fn normal_sum(&self) -> Vec<Rational> {
        sum_vectors(&self.facet_normals, self.dim())
    }

    /// Whether `v` satisfies every facet inequality strictly.
    pub fn contains_in_interior(&self, v: &[Rational]) -> bool {
        self.facet_normals.iter().all(|f| dot(v, f) > 0)
    }
}

fn sum_vectors(vs: &[Vec<Rational>], dim: usize) -> Vec<Rational> {
    let mut acc = vec![Rational::new(); dim];
    for v in vs {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    acc
}

/// A candidate multicone with its transverse-defining vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Multicone {
    pub cones: Vec<PolyhedralCone>,
    pub transverse: Vec<Rational>,
    /// Optional witnesses for pairwise disjointness: `(j1, j2, h)` asserts that
    /// `h` is strictly positive on the generators of cone `j1` and strictly
    /// negative on those of cone `j2`.
    pub separators: Vec<(usize, usize, Vec<Rational>)>,
}

impl Multicone {
    pub fn new(cones: Vec<PolyhedralCone>, transverse: Vec<Rational>) -> Self {
        Self {
            cones,
            transverse,
            separators: Vec::new(),
        }
    }

    pub fn with_separators(mut self, separators: Vec<(usize, usize, Vec<Rational>)>) -> Self {
        self.separators = separators;
        self
    }

    pub fn dim(&self) -> usize {
        self.transverse.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    UserMulticoneVerified,
    /// Every product of length `depth` of the degree-`k` exterior powers has
    /// entries of one strict sign.
    EventualPositivity {
        depth: usize,
        k: usize,
    },
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// Exterior degree the certificate speaks about.
    pub k: usize,
    /// The checks performed, in order.
    pub details: Vec<String>,
}

impl Certificate {
    pub fn is_verified(&self) -> bool {
        !matches!(self.kind, CertificateKind::Failed(_))
    }

    fn failed(k: usize, details: Vec<String>, reason: String) -> Self {
        Self {
            kind: CertificateKind::Failed(reason),
            k,
            details,
        }
    }
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertificateKind::UserMulticoneVerified => write!(f, "UserMulticoneVerified"),
            CertificateKind::EventualPositivity { depth, k } => write!(f, "EventualPositivity({depth},{k})"),
            CertificateKind::Failed(reason) => write!(f, "Failed({reason})"),
        }
    }
}

fn wedge_all(matrices: &[RationalMatrix], k: usize) -> Result<Vec<RationalMatrix>> {
    let d = matrices
        .first()
        .map(|m| m.dim())
        .ok_or_else(|| Error::InvalidInput("empty matrix tuple".into()))?;
    if matrices.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("matrices of different sizes".into()));
    }
    matrices.iter().map(|m| wedge_power(m, k)).collect()
}

/// Checks the multicone conditions for the degree-`k` exterior
/// powers of `matrices` in exact arithmetic.
///
/// Condition (iii) is tested on generators: if every image `B g` lies strictly
/// inside `±K_ℓ` with one global sign, then so does the image of every nonzero
/// point of `K_j`, since it is a nonnegative, nonzero combination of them.
pub fn check_multicone(matrices: &[RationalMatrix], k: usize, mc: &Multicone) -> Result<Certificate> {
    let powers = wedge_all(matrices, k)?;
    let dim = powers[0].dim();
    if mc.cones.is_empty() {
        return Err(Error::InvalidInput("multicone has no cones".into()));
    }
    if mc.dim() != dim || mc.cones.iter().any(|c| c.dim() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "multicone lives in dimension {}, exterior power of degree {k} acts on dimension {dim}",
            mc.dim()
        )));
    }
    let mut details = Vec::new();

    for (j, cone) in mc.cones.iter().enumerate() {
        if let Some(g) = cone.generators.iter().find(|g| dot(g, &mc.transverse) <= 0) {
            let reason = format!(
                "transverse vector is not positive on generator {} of cone {}",
                render_vector(g),
                j + 1
            );
            return Ok(Certificate::failed(k, details, reason));
        }
    }
    details.push("transverse vector positive on every generator".to_string());

    for j1 in 0..mc.cones.len() {
        for j2 in j1 + 1..mc.cones.len() {
            match disjointness_witness(mc, j1, j2) {
                Some(how) => details.push(format!("cones {} and {} meet only at 0 ({how})", j1 + 1, j2 + 1)),
                None => {
                    let reason = format!(
                        "cannot certify that cones {} and {} meet only at 0; supply a separating functional",
                        j1 + 1,
                        j2 + 1
                    );
                    return Ok(Certificate::failed(k, details, reason));
                }
            }
        }
    }

    for (i, b) in powers.iter().enumerate() {
        for (j, cone) in mc.cones.iter().enumerate() {
            let images: Vec<Vec<Rational>> = cone.generators.iter().map(|g| b.apply(g)).collect();
            let target = mc.cones.iter().enumerate().find_map(|(l, dest)| {
                if images.iter().all(|v| dest.contains_in_interior(v)) {
                    Some((l, '+'))
                } else {
                    let flipped: Vec<Vec<Rational>> = images
                        .iter()
                        .map(|v| v.iter().map(|x| Rational::from(-x)).collect())
                        .collect();
                    flipped.iter().all(|v| dest.contains_in_interior(v)).then_some((l, '-'))
                }
            });
            match target {
                Some((l, sign)) => details.push(format!(
                    "A{}^{k} maps cone {} into {sign}int cone {}",
                    i + 1,
                    j + 1,
                    l + 1
                )),
                None => {
                    let reason = format!(
                        "A{}^{k} does not map cone {} strictly inside any cone up to sign",
                        i + 1,
                        j + 1
                    );
                    return Ok(Certificate::failed(k, details, reason));
                }
            }
        }
    }

    Ok(Certificate {
        kind: CertificateKind::UserMulticoneVerified,
        k,
        details,
    })
}

/// Finds a reason why cones `j1` and `j2` intersect only at the origin.
fn disjointness_witness(mc: &Multicone, j1: usize, j2: usize) -> Option<String> {
    let (a, b) = (&mc.cones[j1], &mc.cones[j2]);
    let separates = |h: &[Rational], pos: &PolyhedralCone, neg: &PolyhedralCone| {
        pos.generators.iter().all(|g| dot(g, h) > 0) && neg.generators.iter().all(|g| dot(g, h) < 0)
    };
    for (p, q, h) in &mc.separators {
        if (*p, *q) == (j1, j2) && separates(h, a, b) {
            return Some("user separator".into());
        }
        if (*p, *q) == (j2, j1) && separates(h, b, a) {
            return Some("user separator".into());
        }
    }
    if mc.dim() == 2 {
        if let (Some(ia), Some(ib)) = (slope_interval(a, &mc.transverse), slope_interval(b, &mc.transverse)) {
            if ia.1 < ib.0 || ib.1 < ia.0 {
                return Some("disjoint slope intervals".into());
            }
        }
    }
    // A facet normal of one cone that is strictly negative on the other cone
    // separates them: it is nonnegative on the first and negative on the second.
    for f in &a.facet_normals {
        if b.generators.iter().all(|g| dot(g, f) < 0) {
            return Some(format!("facet normal {} of cone {}", render_vector(f), j1 + 1));
        }
    }
    for f in &b.facet_normals {
        if a.generators.iter().all(|g| dot(g, f) < 0) {
            return Some(format!("facet normal {} of cone {}", render_vector(f), j2 + 1));
        }
    }
    None
}

/// For a planar cone on the positive side of `w`, the range of
/// `⟨g, w⊥⟩ / ⟨g, w⟩` over its generators. This is a monotone function of the
/// angle, so two cones meet only at 0 exactly when these intervals are disjoint.
fn slope_interval(cone: &PolyhedralCone, w: &[Rational]) -> Option<(Rational, Rational)> {
    let perp = [Rational::from(-&w[1]), w[0].clone()];
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for g in &cone.generators {
        let along = dot(g, w);
        if along <= 0 {
            return None;
        }
        let t = dot(g, &perp) / along;
        if lo.as_ref().is_none_or(|l| t < *l) {
            lo = Some(t.clone());
        }
        if hi.as_ref().is_none_or(|h| t > *h) {
            hi = Some(t);
        }
    }
    Some((lo?, hi?))
}

/// Sign of a product's entries: `Some(±1)` if all are nonzero with one sign.
fn constant_sign(m: &RationalMatrix) -> Option<i32> {
    let first = m.entries().first()?.cmp0();
    if first == std::cmp::Ordering::Equal {
        return None;
    }
    m.entries()
        .iter()
        .all(|x| x.cmp0() == first)
        .then_some(if first.is_gt() { 1 } else { -1 })
}

/// Exact products `B_{i_m} ... B_{i_1}` for every word of length `depth`, in
/// lexicographic order.
fn products(powers: &[RationalMatrix], depth: usize) -> Vec<RationalMatrix> {
    enumerate_words(powers.len(), depth)
        .into_par_iter()
        .map(|w| {
            let mut acc = powers[w.letters[0]].clone();
            for &l in &w.letters[1..] {
                acc = &powers[l] * &acc;
            }
            acc
        })
        .collect()
}

/// Smallest depth `m ≤ max_depth` at which every length-`m` product of the
/// degree-`k` exterior powers has entries of one strict sign.
///
/// Such a tuple of products preserves the positive orthant up to sign and is
/// therefore multipositive, and domination of the length-`m` products implies
/// domination of the original tuple.
pub fn check_eventual_positivity(matrices: &[RationalMatrix], k: usize, max_depth: usize) -> Result<Certificate> {
    if max_depth == 0 {
        return Err(Error::InvalidInput("max_depth must be at least 1".into()));
    }
    let powers = wedge_all(matrices, k)?;
    let mut details = Vec::new();
    for depth in 1..=max_depth {
        let prods = products(&powers, depth);
        let words = enumerate_words(powers.len(), depth);
        match prods.iter().position(|p| constant_sign(p).is_none()) {
            None => {
                details.push(format!(
                    "all {} products of length {depth} at degree {k} have constant-sign entries",
                    prods.len()
                ));
                return Ok(Certificate {
                    kind: CertificateKind::EventualPositivity { depth, k },
                    k,
                    details,
                });
            }
            Some(bad) => details.push(format!(
                "length {depth}: product for word {} has mixed-sign or zero entries",
                words[bad]
            )),
        }
    }
    let reason = format!("no depth up to {max_depth} gives constant-sign products at degree {k}");
    Ok(Certificate::failed(k, details, reason))
}

/// Bounds on `e^{P(k)}` and `e^{P(k+1)}` from spectral radii of sums of
/// exterior powers.
#[derive(Clone, Debug)]
pub struct BracketResult {
    pub k: usize,
    /// `max_ε ρ(Σ ε_i^k A_i^∧k)`, a lower bound for `e^{P(k)}`.
    pub rho_k: BigReal,
    /// `ρ(Σ |A_i^∧(k+1)|)` with entrywise absolute values, an upper bound for
    /// `e^{P(k+1)}`; equal to `Σ |det A_i|` when `k + 1 = d`.
    pub rho_k_plus_1: BigReal,
    pub bracket_holds: bool,
    /// The signs `ε_i` applied to `A_i` that attain `rho_k`.
    pub sign_pattern: Vec<i32>,
    /// Whether some sign pattern makes every `ε_i^k A_i^∧k` entrywise
    /// nonnegative, so that `rho_k = e^{P(k)}` exactly.
    pub lower_is_exact: bool,
    /// Same at degree `k + 1` for `rho_k_plus_1`.
    pub upper_is_exact: bool,
}

/// Signs `±1` for each of `n` matrices, first sign fixed to `+1`, in
/// lexicographic order with `+1` before `-1`.
fn sign_patterns(n: usize) -> Vec<Vec<i32>> {
    (0..1usize << n.saturating_sub(1))
        .map(|bits| {
            (0..n)
                .map(|i| if i > 0 && bits >> (n - 1 - i) & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect()
}

fn signed_sum(powers: &[RationalMatrix], pattern: &[i32], degree: usize) -> RationalMatrix {
    let mut acc = RationalMatrix::zeros(powers[0].dim());
    for (b, &e) in powers.iter().zip(pattern) {
        let flip = e < 0 && degree % 2 == 1;
        acc = if flip { &acc - b } else { &acc + b };
    }
    acc
}

fn entrywise_abs(m: &RationalMatrix) -> RationalMatrix {
    let entries = m.entries().iter().map(|x| Rational::from(x.abs_ref())).collect();
    RationalMatrix::new(m.dim(), entries).expect("same shape")
}

/// Some global sign pattern makes all matrices entrywise nonnegative.
fn consistent_sign_exists(powers: &[RationalMatrix]) -> bool {
    powers.iter().all(|b| {
        let positive = b.entries().iter().all(|x| *x >= 0);
        let negative = b.entries().iter().all(|x| *x <= 0);
        positive || negative
    })
}

/// Brackets the affinity dimension in `(k, k+1)` via spectral radii of sums.
///
/// The lower bound holds for any tuple by the triangle inequality, since
/// `Σ_words ‖B_w‖ ≥ ‖(Σ ε_i B_i)^n‖`. The upper bound holds because
/// `Σ_words ‖B_w‖ ≤ Σ_words ‖|B|_w‖ ≈ ‖(Σ |B_i|)^n‖`. When a sign pattern
/// makes the matrices entrywise nonnegative both are equalities.
pub fn bracket_dimension(matrices: &[RationalMatrix], k: usize) -> Result<BracketResult> {
    bracket_dimension_with(matrices, k, None, 256)
}

/// [`bracket_dimension`] with an optional fixed sign pattern and precision.
pub fn bracket_dimension_with(
    matrices: &[RationalMatrix],
    k: usize,
    pattern: Option<&[i32]>,
    prec: u32,
) -> Result<BracketResult> {
    let d = matrices.first().map(|m| m.dim()).unwrap_or(0);
    if d < 2 {
        return Err(Error::DimensionMismatch("the bracket needs d ≥ 2".into()));
    }
    if k + 1 > d {
        return Err(Error::WedgeDegreeOutOfRange { k: k + 1, dim: d });
    }
    let lower = wedge_all(matrices, k)?;
    let upper = wedge_all(matrices, k + 1)?;

    let patterns = match pattern {
        Some(p) => {
            if p.len() != matrices.len() || p.iter().any(|&e| e != 1 && e != -1) {
                return Err(Error::InvalidInput(format!(
                    "sign pattern must have {} entries of ±1",
                    matrices.len()
                )));
            }
            vec![p.to_vec()]
        }
        None if matrices.len() > MAX_SIGN_SEARCH => {
            return Err(Error::InvalidInput(format!(
                "{} matrices exceed the sign search limit of {MAX_SIGN_SEARCH}; supply a sign pattern",
                matrices.len()
            )))
        }
        None => sign_patterns(matrices.len()),
    };
    let radii: Vec<BigReal> = patterns
        .par_iter()
        .map(|p| spectral_radius(&signed_sum(&lower, p, k), prec))
        .collect();
    let mut best = 0;
    for (i, r) in radii.iter().enumerate() {
        if *r > radii[best] {
            best = i;
        }
    }
    let rho_k = radii[best].clone();

    let rho_k_plus_1 = if binomial(d, k + 1) == 1 {
        let mut acc = Rational::new();
        for b in &upper {
            acc += Rational::from(b.get(0, 0).abs_ref());
        }
        Float::with_val(prec, &acc)
    } else {
        let mut acc = RationalMatrix::zeros(upper[0].dim());
        for b in &upper {
            acc = &acc + &entrywise_abs(b);
        }
        spectral_radius(&acc, prec)
    };

    let lower_is_exact = consistent_sign_exists(&lower);
    let upper_is_exact = consistent_sign_exists(&upper);
    let bracket_holds = rho_k_plus_1 < 1 && rho_k > 1;
    if !bracket_holds && !lower_is_exact && !upper_is_exact {
        return Err(Error::NoPositiveSignPattern { degree: k });
    }
    Ok(BracketResult {
        k,
        rho_k,
        rho_k_plus_1,
        bracket_holds,
        sign_pattern: patterns[best].clone(),
        lower_is_exact,
        upper_is_exact,
    })
}

/// Whether `m` is symmetric positive definite, by Sylvester's criterion.
fn positive_definite(m: &RationalMatrix) -> bool {
    if *m != m.transpose() {
        return false;
    }
    let d = m.dim();
    (1..=d).all(|size| {
        let entries = (0..size)
            .flat_map(|r| (0..size).map(move |c| (r, c)))
            .map(|(r, c)| m.get(r, c).clone())
            .collect();
        RationalMatrix::new(size, entries).expect("square minor").determinant() > 0
    })
}

/// Sufficient contraction check: `‖A_i‖ < 1` for every matrix in the
/// Euclidean norm, or in the norm `‖v‖_G = √(vᵀGv)` when `gram` is given.
///
/// `‖A‖_G < 1` is equivalent to `G − AᵀGA` being positive definite, which is
/// decided exactly. A `false` answer does not rule out some other norm in
/// which the matrices contract.
pub fn check_contraction(matrices: &[RationalMatrix], gram: Option<&RationalMatrix>) -> Result<bool> {
    let d = matrices.first().map(|m| m.dim()).unwrap_or(0);
    if matrices.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("matrices of different sizes".into()));
    }
    let identity = RationalMatrix::identity(d);
    let g = match gram {
        Some(g) => {
            if g.dim() != d {
                return Err(Error::DimensionMismatch(format!("norm form must be {d}×{d}")));
            }
            if !positive_definite(g) {
                return Err(Error::InvalidInput(
                    "norm form must be symmetric positive definite".into(),
                ));
            }
            g
        }
        None => &identity,
    };
    Ok(matrices.iter().all(|a| {
        let pulled = &(&a.transpose() * g) * a;
        positive_definite(&(g - &pulled))
    }))
}
