//! Images of integer linear forms `f(x_1, ..., x_n) = u_1 x_1 + ... + u_n x_n`
//! over finite integer sets and residue rings, together with the explicit
//! constructions that separate pairs of forms: small witness sets, CRT-built
//! local-to-global sets, and residue-subgroup local solutions.

pub mod error;
pub mod harness;
pub mod intset;
pub mod modular;
pub mod numtheory;
pub mod residue_constructions;
pub mod small_sets;

pub use error::{Error, Result};
pub use intset::{FiniteIntSet, LinearForm};
