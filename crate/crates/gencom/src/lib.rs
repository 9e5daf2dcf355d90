//! Experiment runner, file formats, external decoder client and plotting
//! for the `gencom-core` link simulator.

pub mod config;
pub mod plots;
pub mod pnm;
pub mod runner;
pub mod sidecar;
pub mod testimages;
pub mod trial;
