//! Minimal A∞-structure on `Ext*(O ⊕ L, O ⊕ L)` of a complex elliptic curve `C/(Z + Z tau)`,
//! with `L` of degree one.
//!
//! The higher products are governed by the constants `M(a,b,c,d)`, proportional to `g_{a,b}`,
//! derivatives of Eisenstein series evaluated through rapidly convergent Gaussian lattice sums.
//!
//! * [`lattice`]: lattices, shell enumeration and truncated Gaussian sums with tail bounds.
//! * [`eisenstein`]: `f_{m,n}`, `e*_n` by three routes, the Weil operator, `g_{a,b}`.
//! * [`ainf`]: basis, structure constants by two routes, the product table.
//! * [`trees`]: planar trees, their signs, and the tree-sum aggregation.
//! * [`verify`]: identity checks with machine-readable reports.
//! * [`cli`]: command implementations behind the `elliptic-ainf` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ainf;
pub mod cli;
pub mod compensated;
pub mod eisenstein;
pub mod error;
pub mod lattice;
pub mod theta;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{Lattice, SeriesValue, SummationConfig};
