//! Experiment runner behind the `consensus` binary.

pub mod diffuse;
pub mod inspect;
pub mod report;
pub mod run;
pub mod source;

pub use run::{run, Algorithm, RunConfig, RunOutput};
pub use source::{GraphSource, InitSource};
