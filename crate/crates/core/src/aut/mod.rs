//! Automorphism groups and isometry testing of definite lattices.

mod group;
mod search;
mod short;

pub use group::{CyclicClass, Isometry, MatrixGroup, ELEMENT_CAP};
pub use short::short_vectors;

use crate::error::Result;
use crate::lattice::Lattice;
use crate::linalg::IntMatrix;

/// `O(L)` for a definite lattice. Negative definite input is handled through
/// `L(-1)`, which has the same isometries.
pub fn automorphism_group(l: &Lattice) -> Result<MatrixGroup> {
    if l.rank() == 0 {
        return Ok(MatrixGroup::trivial(0));
    }
    let chain = search::automorphisms(l)?;
    MatrixGroup::with_order(l.rank(), chain.generators, chain.order)
}

/// `SO(L)` as a subgroup of an enumerated group.
pub fn special_subgroup(g: &MatrixGroup) -> Result<MatrixGroup> {
    g.special_subgroup()
}

/// An isometry `g` from `l1` to `l2`, i.e. `g^T G2 g = G1`; its columns are
/// the images of the basis of `l1` in `l2`-coordinates.
pub fn is_isometric(l1: &Lattice, l2: &Lattice) -> Result<Option<IntMatrix>> {
    search::find_isometry(l1, l2)
}
