//! Exact arithmetic kernels: big rationals, Laurent polynomials in `y`,
//! bivariate polynomials in `(x, y)`, and matrices over the Laurent ring.
//!
//! Everything here is immutable after construction and free of floating
//! point; the numerical modules convert at their own boundaries.

mod bivar;
mod laurent;
mod matrix;
mod rat;

pub use bivar::BivarLaurent;
pub use laurent::LaurentPoly;
pub use matrix::{charpoly, laurent_det, LaurentMatrix, MAX_COFACTOR_DIM};
pub use rat::{format_rat, parse_rat, rat, rat_int, rat_to_f64, Rat};
