//! Weak keys: public generators with two identical rows.
//!
//! If `G_α = G_β` then bits `α` and `β` of `Gs` agree for every `s`, so after
//! removing the pad the two positions of a codeword agree with probability
//! `ρ² + (1−ρ)²` instead of ½.

use std::collections::HashMap;

use rayon::prelude::*;

use super::DistinguisherVerdict;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::prc::{Codeword, PublicKey};
use crate::stats::{log2_binomial, one_minus_product};

/// Row-index pairs `(α, β)`, `α < β`, with `G_α = G_β`. A class of `c` equal
/// rows contributes `c − 1` pairs against its first member.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DuplicatePairs {
    pub pairs: Vec<(usize, usize)>,
}

impl DuplicatePairs {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// Exact duplicate detection by hashing rows.
pub fn find_duplicate_rows(g: &BitMatrix) -> DuplicatePairs {
    let mut first: HashMap<&[u64], usize> = HashMap::with_capacity(g.rows());
    let mut pairs = Vec::new();
    for i in 0..g.rows() {
        match first.get(g.row_words(i)) {
            Some(&a) => pairs.push((a, i)),
            None => {
                first.insert(g.row_words(i), i);
            }
        }
    }
    DuplicatePairs { pairs }
}

/// Probability that a fixed-block key has a repeated generated row:
/// `1 − ∏_{i<r} (1 − i/N)` with `N = C(n−r, t−1)`.
pub fn weak_key_prob_llm(n: usize, r: usize, t: usize) -> f64 {
    assert!(t >= 1 && t - 1 <= n - r, "t − 1 must not exceed n − r");
    let big_n = log2_binomial((n - r) as u64, (t - 1) as u64).exp2();
    one_minus_product((0..r).map(|i| i as f64 / big_n))
}

/// Growing-pool analogue: `1 − ∏_{i=1}^{r} (1 − (i−1)/C(n−r+i−1, t−1))`.
pub fn weak_key_prob_gim(n: usize, r: usize, t: usize) -> f64 {
    assert!(t >= 1 && t - 1 <= n - r, "t − 1 must not exceed n − r");
    one_minus_product((1..=r).map(|i| (i - 1) as f64 / log2_binomial((n - r + i - 1) as u64, (t - 1) as u64).exp2()))
}

/// First-order estimate of the weak-key rate for i.i.d. uniform weight-`t`
/// secret rows: two rows sharing `t − 1` positions force two equal rows of
/// any `G` with `PG = 0`.
pub fn weak_key_prob_iid(n: usize, r: usize, t: usize) -> f64 {
    let share = (t as f64) * (n - t) as f64 / log2_binomial(n as u64, t as u64).exp2();
    let pairs = r as f64 * (r as f64 - 1.0) / 2.0;
    -(-pairs * share).exp_m1()
}

/// Index of the first key with duplicate rows, scanning in order.
pub fn multi_target_scan(keys: &[PublicKey]) -> Result<(usize, DuplicatePairs)> {
    if keys.is_empty() {
        return Err(Error::InvalidParams("empty key batch".into()));
    }
    keys.par_iter()
        .enumerate()
        .map(|(i, k)| (i, find_duplicate_rows(&k.g)))
        .find_first(|(_, d)| !d.is_empty())
        .ok_or(Error::NoWeakKey(keys.len()))
}

/// Fraction of (pair, target) combinations with `(x+z)_α = (x+z)_β`.
pub fn distinguish_by_pairs(pairs: &DuplicatePairs, z: &BitVector, targets: &[Codeword], tau: f64) -> Result<DistinguisherVerdict> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    let mut n_zero = 0u64;
    for c in targets {
        if c.len() != z.len() {
            return Err(Error::Dimension(format!("target of length {} against pad of length {}", c.len(), z.len())));
        }
        let xz = c.x.xor(z);
        n_zero += pairs.pairs.iter().filter(|&&(a, b)| xz.get(a) == xz.get(b)).count() as u64;
    }
    Ok(DistinguisherVerdict::from_counts(n_zero, (targets.len() * pairs.len()) as u64, tau))
}

/// `ρ² + (1−ρ)²`.
pub fn pair_equality_prob(rho: f64) -> f64 {
    rho * rho + (1.0 - rho) * (1.0 - rho)
}

/// Default thresholds: 0.60 for `t = 3`, 0.65 otherwise.
pub fn default_pair_tau(t: usize) -> f64 {
    if t <= 3 {
        0.60
    } else {
        0.65
    }
}
