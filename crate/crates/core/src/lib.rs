pub mod error;
pub mod stats;

pub use error::{Error, Result};
pub mod atoms;
pub mod data;
pub mod partition;
pub mod posterior;
pub mod processes;
pub mod sampler;
pub mod simgen;
pub mod theory;
pub mod workbench;
