//! Exact-arithmetic workbench for MacLane weighted bases of `K[x]` over a
//! valued field `(K, v)`.
//!
//! The crate validates weighted bases, computes adic expansions and weight
//! maps, converts expansions between levels by substitution, and computes
//! and checks Izumi constants and bounds. A truncated power-series oracle
//! provides an independent route to the valuation of the algebraic example
//! `x^2 - y^2 - y^3`.

pub mod basefield;
pub mod catalog;
pub mod io;
pub mod izumi;
pub mod keybasis;
pub mod numeric;
pub mod oracle;
pub mod poly;
pub mod rewrite;
pub mod text;

#[cfg(test)]
mod testutil;
