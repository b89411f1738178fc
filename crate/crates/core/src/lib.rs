//! Core of the pxcnn toolkit: a small convolutional network for binary
//! chest x-ray screening with every forward and backward pass written out
//! explicitly, plus the data handling, metric, and experiment machinery
//! around it.
//!
//! The crate is `no_std` (with `alloc`) and does no I/O; decoding images,
//! file formats, and the command line live in the companion `pxcnn` crate.
//! All randomness flows through explicitly seeded [`rand_chacha`] streams so
//! that a `(seed, dataset)` pair fully determines every result, bit for bit.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod experiment;
pub mod layers;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod synthetic;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
