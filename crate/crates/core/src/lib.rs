//! Desk-scale laboratory for a two-discriminator GAN whose generator settles
//! between a source and a target distribution, verified against brute-force
//! divergence oracles on density grids, plus the domain-adaptation pipeline
//! that trains a classifier on real and generated samples.

pub mod config;
pub mod domains;
pub mod error;
pub mod gan;
pub mod loss;
pub mod nn;
pub mod oracles;
pub mod pipeline;
pub mod plot;
pub mod runner;
pub mod seed;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor2;
