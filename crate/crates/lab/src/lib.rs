//! Experiment driver for the waveguide resonance toolkit: configuration,
//! file formats, plots and the named scenarios behind the `wglab` binary.

pub mod config;
pub mod error;
pub mod fft;
pub mod fit;
pub mod formats;
pub mod plot;
pub mod scenarios;

pub use config::ExperimentConfig;
pub use error::{LabError, LabResult};
pub use formats::{Check, Summary};
pub use scenarios::run_scenario;
