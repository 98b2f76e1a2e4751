//! Hybrid quantum-classical pipeline for protease cleavage-site
//! classification: a dense few-qubit simulator, data-to-state embeddings with
//! a trainable neural front-end, a parameter-shared quantum convolutional
//! classifier, matched classical baselines, and an experiment harness that
//! runs the full condition matrix under noiseless and noisy execution.

pub mod data;
pub mod datagen;
pub mod embed;
pub mod noise;
pub mod nqe;
pub mod qsim;
