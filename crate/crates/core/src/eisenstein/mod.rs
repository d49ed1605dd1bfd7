//! Eisenstein series through rapidly decreasing Gaussian lattice sums.
//!
//! `f_{m,n}` are the building blocks; `e*_n` and `g_{a,b}` are exact rational combinations of
//! them ([`WeilCombination`]), on which the Weil operator acts symbolically. The classical and
//! q-series routes exist to cross-check the rapid one.

mod series;
mod weil;
mod zeta;

pub use series::{
    classical_e2, eisenstein_value, f_mn, g_ab, EisensteinIndex, EisensteinMethod, SeriesContext,
};
pub use weil::{estar_combination, g_ab_symbolic, g_ab_via_weil, weil_apply, WeilCombination};
pub use zeta::zeta;

pub(crate) use weil::{binomial, factorial};
