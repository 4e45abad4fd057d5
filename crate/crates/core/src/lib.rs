pub mod biasmeter;
pub mod corpus;
pub mod error;
pub mod genderspace;
pub mod langmodel;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};
