//! Discriminant Pfister forms of capacity-4 algebras with involution.

pub mod algebra;
pub mod corpus;
pub mod decompose;
pub mod etale;
pub mod arith;
pub mod disc;
pub mod error;
pub mod field;
pub mod formulas;
pub mod instance;
pub mod involution;
pub mod linalg;
pub mod quad;

pub use error::{Error, Result};
pub use field::{Elem, Field, Place};
