//! Cryptanalysis workbench for LDPC-based pseudorandom error-correcting codes.
//!
//! The crate implements the scheme itself ([`prc`]), four families of attacks
//! against it ([`attacks`]), closed-form complexity estimates ([`complexity`]),
//! simulated watermark channels ([`channel`]) and file formats ([`io`]).
//! Every randomized operation takes an explicit `u64` seed.

pub mod attacks;
pub mod channel;
pub mod cli;
pub mod complexity;
pub mod error;
pub mod gf2;
pub mod io;
pub mod prc;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector, ColumnPermutation, SparseRowMatrix};
pub use prc::{Codeword, KeyPair, PrcParams, PublicKey, Scheme, SecretKey};
