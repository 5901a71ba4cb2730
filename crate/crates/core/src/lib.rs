pub mod data_ingest;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod simulation;
pub mod special_math;
pub mod variation;

pub use error::{Error, Result};
