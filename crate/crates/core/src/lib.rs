//! Amorphic C-algebras in exact arithmetic.
//!
//! The crate builds amorphic C-algebras from their degree data, checks the
//! C-algebra axioms and amorphicity exactly over `Q(sqrt(n))`, computes
//! fusions and fissions, automorphism groups, character tables and duals,
//! and cross-checks everything against matrix realizations coming from
//! finite affine planes.
//!
//! ```
//! use amorphic::amorphic::{construct, is_amorphic, DegreeSpec};
//! use amorphic::calgebra::{verify_associativity, verify_axioms};
//!
//! let spec = DegreeSpec::from_ints(&[1, 2, 2, 2, 2], -1).unwrap();
//! let a = construct(&spec).unwrap();
//! assert!(verify_axioms(&a).passed());
//! assert!(verify_associativity(&a).passed());
//! assert!(is_amorphic(&a).passed());
//! ```

pub mod amorphic;
pub mod calgebra;
pub mod cli;
pub mod duality;
pub mod error;
pub mod fusion;
pub mod linsolve;
pub mod qfield;
pub mod realization;

pub use calgebra::CAlgebra;
pub use error::{Error, Result};
pub use qfield::{QuadNum, Rational};

/// Compact JSON with object keys in sorted order.
pub fn canonical_json(v: &serde_json::Value) -> String {
    // serde_json's default map is a BTreeMap, so keys come out sorted.
    serde_json::to_string(v).expect("json value serializes")
}
