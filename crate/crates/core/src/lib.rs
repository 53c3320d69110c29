//! Exact-arithmetic workbench for curved dg algebras and their modules.
//!
//! Algebras and modules are materialized as finite graded linear data over
//! an exact field. Homotopy questions (contractibility, null-homotopy,
//! vanishing of Hom-complex cohomology) become graded linear systems that
//! are solved exactly, so every verdict comes with a witness or with an
//! inconsistent system.

pub mod algebra;
pub mod axioms;
pub mod bar;
pub mod descriptor;
pub mod error;
pub mod fixtures;
pub mod graded;
pub mod homotopy;
pub mod linalg;
pub mod module;

pub use error::{Error, Result};
