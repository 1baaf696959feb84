// bdsim-cli — experiment front end: configuration, seed management,
// parallel replicate execution, persistence of manifests and result tables.
//
// Everything the binary does is reachable through `runner::execute` so the
// acceptance suite can drive full runs in-process.

pub mod config;
pub mod manifest;
pub mod output;
pub mod runner;

pub use config::ExperimentConfig;
pub use manifest::RunManifest;
