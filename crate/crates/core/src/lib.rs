pub mod error;
pub mod gp;
pub mod optimize;
pub mod rng;
pub mod space;
pub mod spectral;
pub mod acquisition;
pub mod hyper;
pub mod portfolio;
pub mod testbed;
pub mod harness;
pub mod cli;
