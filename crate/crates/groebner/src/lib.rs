//! Exact rational multivariate polynomials and a Buchberger implementation
//! used to decide feasibility of basis-change systems.
//!
//! # Neutral format
//!
//! ```text
//! pfk-system v1
//! var x
//! var y
//! gen parity 2
//! term 1 0:1 1:2
//! term -3/2
//! ```
//!
//! `term COEFF i:e ...` lists a rational coefficient followed by
//! variable-index/exponent factors. Bases use the header `pfk-basis v1`,
//! an `order NAME` line, generators tagged `basis`, and a final
//! `verdict TRIVIAL|NONTRIVIAL|BUDGET` line. `#` starts a comment.

mod buchberger;
mod division;
mod monomial;
mod poly;
mod system;

pub use buchberger::{groebner_basis, is_trivial, s_pairs_reduce_to_zero, GbConfig, GbError, GbStats, GroebnerBasis};
pub use division::{divide, normal_form};
pub use monomial::{Monomial, MonomialOrder};
pub use poly::{parse_poly, ParseError, Poly, Rational};
pub use system::{
    basis_to_neutral, basis_to_text, monomial_name, parse_neutral, FormatError, GenTag, Generator, NeutralFile,
    PolySystem, Verdict,
};

/// Buchberger on a tagged system.
pub fn buchberger(s: &PolySystem, cfg: &GbConfig) -> Result<(GroebnerBasis, GbStats), GbError> {
    s.groebner(cfg)
}
