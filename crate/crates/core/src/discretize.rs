//! Non-rigorous estimate of the affinity dimension of invertible planar
//! tuples by discretizing the transfer operator on the projective line.
//!
//! For `s ∈ [0, 1]` the operator is
//! `(L_s f)(ū) = Σ_i (‖A_i u‖/‖u‖)^s f(A_i u)`, and for `s ∈ [1, 2]` the weight
//! becomes `(‖A_i u‖/‖u‖)^{2−s} |det A_i|^{s−1}`. Its spectral radius is
//! `e^{P(s)}`. The line is sampled at `M` evenly spaced directions and each
//! image direction is snapped to the nearest sample, giving a sparse
//! nonnegative matrix with at most `N` entries per row. Everything here runs
//! in double precision and carries no error bound.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;

pub const DEFAULT_POWER_TOLERANCE: f64 = 1e-12;
pub const MAX_POWER_ITERATIONS: usize = 100_000;
pub const DEFAULT_DIMENSION_TOLERANCE: f64 = 1e-10;

/// Evenly spaced directions `θ_j = jπ/M` on the projective line.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMesh {
    pub size: usize,
    pub angles: Vec<f64>,
}

impl ProjectiveMesh {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidInput("mesh size must be positive".into()));
        }
        let step = PI / size as f64;
        Ok(Self {
            size,
            angles: (0..size).map(|j| j as f64 * step).collect(),
        })
    }

    /// Index of the mesh direction closest to `(x, y)`, angles taken mod π.
    pub fn nearest(&self, x: f64, y: f64) -> usize {
        let theta = y.atan2(x).rem_euclid(PI);
        let idx = (theta * self.size as f64 / PI).round() as usize;
        idx % self.size
    }
}

pub type Matrix2 = [[f64; 2]; 2];

/// Converts a tuple of exact 2×2 matrices, rejecting singular ones.
pub fn planar_tuple(matrices: &[RationalMatrix]) -> Result<Vec<Matrix2>> {
    if matrices.is_empty() {
        return Err(Error::InvalidInput("empty matrix tuple".into()));
    }
    matrices
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if m.dim() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "discretization supports 2×2 matrices only, matrix {} is {}×{}",
                    i + 1,
                    m.dim(),
                    m.dim()
                )));
            }
            if m.determinant() == 0 {
                return Err(Error::SingularMatrix { index: i + 1 });
            }
            let r = m.to_f64_rows();
            Ok([[r[0][0], r[0][1]], [r[1][0], r[1][1]]])
        })
        .collect()
}

/// Sparse nonnegative matrix: row `j` holds `(column, weight)` for each map.
#[derive(Clone, Debug)]
pub struct DiscretizedOperator {
    pub size: usize,
    pub s: f64,
    pub matrices: Vec<Matrix2>,
    /// `cols[j * N + i]` is the mesh index nearest to `A_i u_j`.
    pub cols: Vec<u32>,
    pub weights: Vec<f64>,
}

impl DiscretizedOperator {
    /// `(L f)_j = Σ_i w_{ji} f_{c_{ji}}`.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let n = self.matrices.len();
        out.par_iter_mut().enumerate().for_each(|(j, o)| {
            let base = j * n;
            *o = (0..n)
                .map(|i| self.weights[base + i] * f[self.cols[base + i] as usize])
                .sum();
        });
    }

    pub fn row_sum(&self, j: usize) -> f64 {
        let n = self.matrices.len();
        self.weights[j * n..(j + 1) * n].iter().sum()
    }
}

/// Builds the nearest-point collocation of `L_s` on `mesh`.
pub fn assemble_operator(matrices: &[Matrix2], s: f64, mesh: &ProjectiveMesh) -> Result<DiscretizedOperator> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::InvalidInput(format!("s = {s} lies outside [0, 2]")));
    }
    let dets: Vec<f64> = matrices
        .iter()
        .map(|a| (a[0][0] * a[1][1] - a[0][1] * a[1][0]).abs())
        .collect();
    if let Some(i) = dets.iter().position(|&d| d == 0.0) {
        return Err(Error::SingularMatrix { index: i + 1 });
    }
    let n = matrices.len();
    let entries: Vec<(u32, f64)> = mesh
        .angles
        .par_iter()
        .flat_map_iter(|&theta| {
            let (u0, u1) = (theta.cos(), theta.sin());
            matrices.iter().zip(&dets).map(move |(a, det)| {
                let x = a[0][0] * u0 + a[0][1] * u1;
                let y = a[1][0] * u0 + a[1][1] * u1;
                let stretch = x.hypot(y);
                let weight = if s <= 1.0 {
                    stretch.powf(s)
                } else {
                    stretch.powf(2.0 - s) * det.powf(s - 1.0)
                };
                (mesh.nearest(x, y) as u32, weight)
            })
        })
        .collect();
    debug_assert_eq!(entries.len(), mesh.size * n);
    let (cols, weights) = entries.into_iter().unzip();
    Ok(DiscretizedOperator {
        size: mesh.size,
        s,
        matrices: matrices.to_vec(),
        cols,
        weights,
    })
}

/// Power iteration from the all-ones vector; the growth rate
/// `‖L v‖₁ / ‖v‖₁` is the eigenvalue estimate.
pub fn spectral_radius_power(op: &DiscretizedOperator, tol: f64) -> Result<f64> {
    let mut v = vec![1.0; op.size];
    let mut next = vec![0.0; op.size];
    let mut estimate = f64::NAN;
    for _ in 0..MAX_POWER_ITERATIONS {
        op.apply(&v, &mut next);
        let norm: f64 = next.iter().sum();
        let current: f64 = v.iter().sum();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let quotient = norm / current;
        let scale = 1.0 / norm;
        for (a, b) in v.iter_mut().zip(&next) {
            *a = b * scale;
        }
        if (quotient - estimate).abs() < tol * quotient.max(1.0) {
            return Ok(quotient);
        }
        estimate = quotient;
    }
    Err(Error::PowerIterationStalled {
        iterations: MAX_POWER_ITERATIONS,
    })
}

fn discrete_pressure(matrices: &[Matrix2], s: f64, mesh: &ProjectiveMesh) -> Result<f64> {
    let op = assemble_operator(matrices, s, mesh)?;
    Ok(spectral_radius_power(&op, DEFAULT_POWER_TOLERANCE)? - 1.0)
}

/// A dimension estimate from one mesh size. Always non-rigorous.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedEstimate {
    pub mesh_size: usize,
    pub s: f64,
    pub secant_iterations: usize,
    pub bisected: bool,
}

/// Solves `ρ(L_s^M) = 1` on `[0, 2]` by the secant method, started from the
/// end points of the unit interval on which `ρ − 1` changes sign, with
/// bisection as the fallback when an iterate leaves that interval widened by
/// one half.
pub fn solve_dimension_discretized(
    matrices: &[RationalMatrix],
    mesh_size: usize,
    tol: f64,
) -> Result<DiscretizedEstimate> {
    let tuple = planar_tuple(matrices)?;
    let mesh = ProjectiveMesh::new(mesh_size)?;
    let f = |s: f64| discrete_pressure(&tuple, s, &mesh);

    let f_mid = f(1.0)?;
    let (k, f_lo, f_hi) = if f_mid > 0.0 {
        (1.0, f_mid, f(2.0)?)
    } else {
        (0.0, f(0.0)?, f_mid)
    };
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::BracketFailed {
            lower: format!("ρ({k}) - 1 = {f_lo:e}"),
            upper: format!("ρ({}) - 1 = {f_hi:e}", k + 1.0),
            detail: "discretized pressure does not cross 1 on [0, 2]".into(),
        });
    }

    let (window_lo, window_hi) = (k - 0.5, k + 1.5);
    let (mut s1, mut f1) = (k + 1.0, f_hi);
    let (mut s2, mut f2) = (k, f_lo);
    let mut iterations = 0;
    while iterations < crate::solver::MAX_SECANT_ITERATIONS {
        iterations += 1;
        if f2 == f1 {
            break;
        }
        let s3 = s2 - f2 * (s2 - s1) / (f2 - f1);
        if !(window_lo..=window_hi).contains(&s3) || !s3.is_finite() {
            break;
        }
        let step = (s3 - s2).abs();
        let f3 = f(s3)?;
        (s1, f1, s2, f2) = (s2, f2, s3, f3);
        if step < tol || f3 == 0.0 {
            return Ok(DiscretizedEstimate {
                mesh_size,
                s: s2,
                secant_iterations: iterations,
                bisected: false,
            });
        }
    }

    let (mut lo, mut hi) = (k, k + 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DiscretizedEstimate {
        mesh_size,
        s: 0.5 * (lo + hi),
        secant_iterations: iterations,
        bisected: true,
    })
}
