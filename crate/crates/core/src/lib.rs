//! Semi-supervised classification for long-tailed image grids.
//!
//! Unlabeled samples are admitted to the training set only when their
//! encoder features sit confidently close to exactly one class prototype;
//! admitted samples receive a soft label blended from the linear head, a
//! nearest-neighbour vote and the prototype winner. Training combines
//! cross-entropy with a weak/strong augmentation alignment term.

pub mod augment;
pub mod config;
pub mod dataset;
pub mod error;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod orchestrator;
pub mod prototype;
pub mod pseudo;
pub mod rng;
pub mod run;
pub mod selector;

pub use error::{Error, Result};
