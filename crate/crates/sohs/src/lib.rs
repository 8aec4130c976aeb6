//! Toolkit for noncommutative polynomials over `R<X1,...,Xn>` and their
//! positivity certificates.
//!
//! The crate is organized in layers:
//!
//! * [`ncpoly`]: words in the free monoid, the involution that reverses them,
//!   and polynomials with real coefficients, including a text parser/printer.
//! * [`linalg`]: dense symmetric matrices with the spectral predicates used
//!   everywhere else (PSD tests, pseudo-inverse, Schur complements).
//! * [`gram`]: Gram-like matrix representations `f = W* G W`, expansion,
//!   sum-of-Hermitian-squares certificates and witness extraction.
//! * [`extension`]: extending a polynomial past a fixed certificate while
//!   keeping that certificate as a principal submatrix.
//! * [`completion`]: partially specified symmetric matrices, their
//!   specification graphs, chordality, and PSD completion.
//! * [`regularity`]: quadratic squarefree monomial ideals attached to
//!   completion patterns, their graded Betti numbers, and 2-regularity.

pub mod completion;
pub mod extension;
pub mod gram;
pub mod linalg;
pub mod ncpoly;
pub mod regularity;
pub mod schema;

pub use gram::{GramLikeMatrix, MonomialVector, Representation};
pub use linalg::SymMatrix;
pub use ncpoly::{Polynomial, Word};
