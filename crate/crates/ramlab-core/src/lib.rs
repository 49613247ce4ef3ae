//! Exact truncated arithmetic for complete discretely valued fields of mixed
//! characteristic, together with the machinery built on top of it: weighted
//! Gauss norms, Newton polygons and Hensel factorisation, classical
//! ramification filtrations and conductors, the ψ deformation and thickening
//! presentations, and intrinsic radii of p-adic differential modules.
//!
//! The crate is `no_std` and only needs `alloc`. Norms are never floated:
//! every `|x|` is carried as an exact rational exponent `v` with `|x| = θ^v`.

#![no_std]
#![warn(rust_2018_idioms, unused_qualifications)]

extern crate alloc;

pub mod audit;
pub mod corpus;
pub mod diffmod;
pub mod elem;
pub mod error;
pub mod field;
pub mod gauss;
pub mod newton;
pub mod parse;
pub mod poly;
pub mod radius;
pub mod ramification;
pub mod residue;
pub mod scalar;
pub mod thickening;
pub mod valuation;
pub mod verify;
pub mod zmod;

pub use elem::Elem;
pub use error::{Error, Result};
pub use field::{Field, FieldDescription, TowerStep};
pub use gauss::GaussPoly;
pub use valuation::{Q, Valuation};
