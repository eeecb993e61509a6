//! Attacks on the LDPC code.
//!
//! - [`mitm`]: meet-in-the-middle search for weight-`t` dual vectors of `G`,
//!   then an inner-product distinguisher.
//! - [`weakkey`]: duplicate rows in `G` and the pair-equality distinguisher.
//! - [`overlay`]: Prange decoding of the encode noise and a disjoint overlay
//!   that breaks decoding.
//! - [`pkfree`]: low-weight parity distinguishers that never see the public key.

pub mod mitm;
pub mod overlay;
pub mod pkfree;
pub mod weakkey;

use serde::{Deserialize, Serialize};

/// Outcome of a ratio-threshold test: `verdict = ratio ≥ threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguisherVerdict {
    pub n_zero: u64,
    pub n_tot: u64,
    pub ratio: f64,
    pub threshold: f64,
    pub verdict: bool,
}

impl DistinguisherVerdict {
    pub fn from_counts(n_zero: u64, n_tot: u64, threshold: f64) -> Self {
        let ratio = if n_tot == 0 { 0.0 } else { n_zero as f64 / n_tot as f64 };
        Self { n_zero, n_tot, ratio, threshold, verdict: ratio >= threshold }
    }
}

/// `½(1 + (1−2ω)^t)`: probability that a weight-`t` parity of `Ber(ω)` noise is zero.
pub fn parity_zero_prob(omega: f64, t: usize) -> f64 {
    0.5 * (1.0 + (1.0 - 2.0 * omega).powi(t as i32))
}

/// The suggested threshold `½ + r^{−1/4}`, matching the decoder's margin.
pub fn decoder_aligned_tau(r: usize) -> f64 {
    0.5 + (r as f64).powf(-0.25)
}

/// Default ratio thresholds used in experiments with short texts.
pub fn default_tau(t: usize) -> f64 {
    if t <= 3 {
        0.60
    } else {
        0.55
    }
}
