//! Incomplete exponential sums over multiplicative subgroups of F_p.
//!
//! The crate is organized around four pieces: exact modular arithmetic and
//! order computation ([`modmath`]), evaluation of the sums S_{g,p}(λ,N)
//! and their moments ([`expsum`]), additive-combinatorics set algebra and
//! energies ([`addcomb`]), and evaluable bound formulas with regime
//! classification ([`bounds`]).

pub mod addcomb;
pub mod bounds;
pub mod error;
pub mod expsum;
pub mod modmath;

pub use error::{Error, Result};
