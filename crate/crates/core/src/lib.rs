pub mod coeff;
pub mod descent;
pub mod enumerate;
pub mod error;
pub mod fibration;
pub mod fincat;
pub mod group;
pub mod linalg;
pub mod monad;
pub mod presheaf;
pub mod random;
pub mod scenarios;
mod unionfind;

pub use error::{Error, Result};
