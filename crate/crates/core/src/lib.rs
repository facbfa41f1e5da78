//! Exact-arithmetic verification engine for quotient singularities of
//! small `C3 x C3` actions on affine three-space in characteristic 3.
//!
//! The crate builds finite fields `GF(p^k)`, multivariate polynomial rings,
//! and Groebner machinery, then uses them to machine-check a chain of
//! computations: classification of the relevant matrix groups, hypersurface
//! presentations of their invariant rings, blow-up towers with discrepancy
//! ledgers, two group-theoretic lemmas inside `SL(3, F_3)`, and the
//! characteristic-zero age criterion for cyclic quotient singularities.
//!
//! Everything is exact: field elements, polynomial coefficients, and
//! discrepancy coefficients are never floating point, and every verification
//! either reproduces a claimed identity on the nose or reports the precise
//! mismatch.

pub mod field;
pub mod linalg;
pub mod poly;
pub mod parse;
pub mod groebner;
pub mod group;
pub mod invariant;
pub mod blowup;
pub mod rst;
pub mod reference;
pub mod report;
pub mod scenario;
