//! Exact rational linear algebra, exterior powers and certified eigenvalues.

mod eigen;
mod matrix;
mod poly;
mod roots;
mod wedge;

pub use eigen::{eigenvalues, leading_eigen, phi_s, singular_values, spectral_radius, Eigenvalue, LeadingEigen};
pub use matrix::{parse_rational, RationalMatrix, ScaledIntegerMatrix};
pub use poly::{char_poly, RationalPolynomial};
pub use roots::{isolate_roots, overlap_components, RootEnclosure};
pub use wedge::{binomial, index_subsets, wedge_power};
