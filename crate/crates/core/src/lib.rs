//! Charged particles in abelian and non-abelian gauge fields: Sternberg phase
//! spaces, Tulczyjew triples, Wong-type equations of motion and flux
//! quantization checks, all evaluated numerically in charts.

pub mod ad;
pub mod dynamics;
pub mod error;
pub mod forms;
pub mod gauge;
pub mod internal;
pub mod lie;
pub mod linalg;
pub mod mesh;
pub mod quantization;
pub mod scenario;
pub mod tulczyjew;

pub use error::{Error, ErrorCategory, Result};
