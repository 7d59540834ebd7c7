//! Sequence-labeling toolkit built around a linear-chain CRF with
//! unsupervised word-representation features.
//!
//! The crate covers the full pipeline from BIO-tagged corpora to tagged
//! output: corpus handling ([`corpus`]), embedding tables ([`embeddings`]),
//! binarized and sparse recodings of embeddings ([`transforms`]), Brown and
//! k-means clustering ([`clusters`]), distributional prototypes
//! ([`prototypes`]), CRF training and decoding ([`crf`]) and phrase-level
//! scoring ([`eval`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); everything that touches
//! files lives in the companion CLI crate.

#![cfg_attr(not(feature = "std"), no_std)]

#[macro_use]
extern crate alloc;

pub mod clusters;
pub mod corpus;
pub mod crf;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod prototypes;
pub mod rng;
pub mod transforms;

mod math;

pub use error::CoreError;
