//! Exact-arithmetic computation of the homotopy invariants of twisted
//! connected sum (TCS) G2-manifolds built from pairs of semi-Fano building
//! blocks: Betti numbers, torsion flags, and the boundary-defect invariants
//! nu, xi and the generalized Eells-Kuiper invariant mu, together with the
//! lattice configuration search and the arithmetic genericity checks that
//! certify a configuration is realized by an actual matching.
//!
//! Everything is computed over arbitrary-precision integers and rationals;
//! no floating point is used anywhere.

pub mod blocks;
pub mod enumerate;
pub mod invariants;
pub mod k3;
pub mod lattice;
pub mod mat;
pub mod matching;
pub mod report;

pub use blocks::{derive_block, load_catalog, validate_catalog, BuildingBlock, SemiFanoFamily};
pub use invariants::{classify, compute_invariants, Residue, TcsInvariants};
pub use lattice::{IntegerLattice, LatticeEmbedding};
pub use mat::IntMat;
pub use matching::{assemble_configuration, search_gluings, Configuration};
