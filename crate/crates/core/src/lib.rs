//! Exact computational toolkit for Calabi-Yau complete intersections in
//! toric varieties: secondary-fan phases, autoequivalence relation
//! descriptors, their K-theory shadows, and desk-scale matrix-factorization
//! checks.
//!
//! Everything is exact. Integers are arbitrary precision, rationals are
//! reduced fractions of arbitrary precision, and no floating point appears
//! anywhere in a computation.

mod combinat;
pub mod groebner;
pub mod ktheory;
pub mod lattice;
pub mod laurent;
pub mod linprog;
pub mod mf;
pub mod multipoly;
pub mod relations;
pub mod secondary;
pub mod toric;

pub use lattice::{IntMatrix, RationalVector};
pub use laurent::LaurentElement;
pub use relations::RelationDescriptor;
pub use secondary::{Phase, WallData};
pub use toric::{FanData, GLSMModel, MonomialIdeal};
