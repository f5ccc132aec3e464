pub mod error;
pub mod features;
pub mod lifelong;
pub mod measures;
pub mod nn;
pub mod rdf;
pub mod report;
pub mod summary;
pub mod synthetic;
pub mod tensor;

pub use error::{Error, Result};
