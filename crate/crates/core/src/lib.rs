//! Selmer groups of the 2-isogeny families `y^2 = x(x + e pD)(x + e qD)` with
//! `q - p = 2^m`, computed by local descent, by partition graphs and by a
//! table-free local solvability oracle.

pub mod arith;
pub mod compare;
pub mod graphs;
pub mod local;
pub mod model;
pub mod oracle;
pub mod selmer;
pub mod sweep;
pub mod verify;
