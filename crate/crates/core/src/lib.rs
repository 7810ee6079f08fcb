//! Counting conics `x0^2 + x0*x1 + y*x1^2 = t*x2^2` over K = GF(2)(t) that
//! have a rational point, three independent ways:
//!
//! 1. [`census`] — exhaustive enumeration of all `y` of a given height,
//!    deciding solubility place by place through Serre's characteristic-2
//!    local symbol (the ground truth);
//! 2. [`dirichlet`] — exact integer coefficients of the height zeta function
//!    `Z(s)`, assembled as a truncated Euler product in `u = 2^(-s)`;
//! 3. [`asymptotic`] — the leading constant and the branch-point Tauberian
//!    predictor `c * 4^M / sqrt(M ln 2)`.
//!
//! Routes 1 and 2 must agree bit for bit; route 3 is checked as a trend.
//! The supporting layers are [`gf2poly`] (GF(2)[t] arithmetic), [`funcfield`]
//! (rational functions, places, heights) and [`extfield`] (residue fields
//! GF(2^d) and Laurent expansions), with the solubility predicates in
//! [`symbol`].

pub mod asymptotic;
pub mod census;
pub mod dirichlet;
pub mod extfield;
pub mod funcfield;
pub mod gf2poly;
pub mod symbol;

pub use funcfield::{Place, RatFunc};
pub use gf2poly::BinaryPoly;
