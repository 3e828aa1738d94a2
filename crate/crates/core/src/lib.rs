//! Exact lattice computations for classifying finite groups of K3
//! automorphisms that extend maximal symplectic actions: normal forms,
//! automorphism groups of definite lattices, discriminant forms, genus
//! symbols, glue constructions and the classification driver.

pub mod aut;
pub mod classify;
pub mod discform;
pub mod error;
pub mod genus;
pub mod glue;
pub mod lattice;
pub mod linalg;

pub use aut::{automorphism_group, is_isometric, special_subgroup, Isometry, MatrixGroup};
pub use classify::{classify_lattice, run_all, verify_against_reference, CaseRecord, Reference, VerifyReport};
pub use discform::{disc_form, DiscForm, FormIsometry};
pub use error::{Error, Result};
pub use genus::{genus_symbol, same_genus, GenusSymbol};
pub use glue::{build_extension, extend_isometry, GlueMap, PrimitiveExtension};
pub use lattice::{Lattice, LatticeFile, Sublattice};
pub use linalg::{IntMatrix, RatMatrix};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
