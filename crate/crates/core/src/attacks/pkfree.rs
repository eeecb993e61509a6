//! Distinguishers that never see the public key.
//!
//! Differences `y = x^(i) + x^(i+m)` cancel the pad, leaving `G(s+s′) + e + e′`.
//! A weight-`w` vector `h` in the dual of `G` sees only noise of rate
//! `ω′ = 2ω(1−ω)`, so `⟨h, y⟩ = 0` with probability `½(1 + (1−2ω′)^w)`.
//! The search samples many `h` and counts those whose zero count is high.
//! With `w = t` this targets rows of the secret key; with `w = 2` it targets
//! duplicate rows of `G`.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mitm::unrank_combination;
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::prc::Codeword;
use crate::rng::{rng_for, Stream};
use crate::stats::binomial_u128;

/// Above this many candidates, `h` vectors are drawn by rejection instead of by rank.
const RANK_SAMPLING_LIMIT: u128 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PkFreeConfig {
    pub m: usize,
    pub n_times: u128,
    pub tau1: f64,
    pub tau2: u64,
    pub weight: usize,
}

/// `2⌈log₂ n⌉²`.
pub fn default_m(n: usize) -> usize {
    let l = (n as f64).log2().ceil() as usize;
    2 * l * l
}

/// `⌈3·C(n, t)/r⌉`: about three secret rows expected among the sampled vectors.
pub fn default_n_times(n: usize, r: usize, t: usize) -> u128 {
    let c = binomial_u128(n as u64, t as u64).expect("C(n,t) fits in u128");
    (3 * c).div_ceil(r as u128)
}

/// `2ω(1−ω)`.
pub fn omega_prime(omega: f64) -> f64 {
    2.0 * omega * (1.0 - omega)
}

/// `½[1 + (1−2ω′)^t / 2]`, halfway between ½ and the biased zero rate.
pub fn tau1(omega: f64, t: usize) -> f64 {
    0.5 * (1.0 + (1.0 - 2.0 * omega_prime(omega)).powi(t as i32) / 2.0)
}

impl PkFreeConfig {
    /// Defaults for length `n`, `r` secret rows, noise `ω` and vector weight `w`.
    pub fn new(n: usize, r: usize, omega: f64, weight: usize) -> Self {
        Self { m: default_m(n), n_times: default_n_times(n, r, weight), tau1: tau1(omega, weight), tau2: 0, weight }
    }
}

/// `y^(i) = x^(i) + x^(i+m)` for the two halves of the batch.
pub fn pairwise_differences(targets: &[Codeword]) -> Result<Vec<BitVector>> {
    if targets.len() % 2 == 1 {
        return Err(Error::OddTargets(targets.len()));
    }
    let m = targets.len() / 2;
    (0..m)
        .map(|i| {
            let (a, b) = (&targets[i].x, &targets[i + m].x);
            if a.len() != b.len() {
                return Err(Error::Dimension("targets differ in length".into()));
            }
            Ok(a.xor(b))
        })
        .collect()
}

/// Heuristic noise estimate from the mean weight of the differences, inverting
/// `ω′ = 2ω(1−ω)`. The codeword part of `y` is pseudorandom, so on real
/// codewords this sits near ½ and says little; it is kept for reports.
pub fn estimate_omega(ys: &[BitVector]) -> f64 {
    if ys.is_empty() {
        return 0.0;
    }
    let n = ys[0].len() as f64;
    let w = ys.iter().map(|y| y.weight() as f64).sum::<f64>() / (ys.len() as f64 * n);
    let w = w.min(0.5);
    (1.0 - (1.0 - 2.0 * w).sqrt()) / 2.0
}

/// Bit-sliced view of the differences: for each position, an `m`-bit mask
/// whose bit `i` is `y^(i)` at that position.
struct ColumnMasks {
    words: usize,
    m: usize,
    data: Vec<u64>,
}

impl ColumnMasks {
    fn new(ys: &[BitVector]) -> Self {
        let n = ys.first().map_or(0, |y| y.len());
        let m = ys.len();
        let words = m.div_ceil(64).max(1);
        let mut data = vec![0u64; n * words];
        for (i, y) in ys.iter().enumerate() {
            for j in y.support() {
                data[j * words + i / 64] |= 1 << (i % 64);
            }
        }
        Self { words, m, data }
    }

    /// Number of `i` with `⟨h, y^(i)⟩ = 0`.
    fn zeros(&self, support: &[u32]) -> usize {
        let mut ones = 0;
        for k in 0..self.words {
            let mut acc = 0u64;
            for &j in support {
                acc ^= self.data[j as usize * self.words + k];
            }
            ones += acc.count_ones() as usize;
        }
        self.m - ones
    }
}

/// `n_times` distinct weight-`w` supports, uniform without replacement.
pub fn sample_supports<R: Rng + ?Sized>(n: usize, w: usize, n_times: u128, rng: &mut R) -> Result<Vec<Vec<u32>>> {
    let total = binomial_u128(n as u64, w as u64).ok_or_else(|| Error::InvalidParams("C(n, w) overflows".into()))?;
    if n_times > total {
        return Err(Error::BudgetTooLarge { requested: n_times, available: total, weight: w });
    }
    if total <= RANK_SAMPLING_LIMIT || n_times * 2 >= total {
        if total > RANK_SAMPLING_LIMIT {
            return Err(Error::InvalidParams(format!("enumerating {total} candidates is out of reach")));
        }
        let ranks: Vec<u128> = if n_times == total {
            (0..total).collect()
        } else {
            sample(rng, total as usize, n_times as usize).into_iter().map(|r| r as u128).collect()
        };
        return Ok(ranks.into_iter().map(|r| unrank_combination(r, n, w)).collect());
    }
    // Pack sorted index tuples into one word, then sort, dedup and top up.
    let bits = usize::BITS - (n - 1).leading_zeros();
    if w as u32 * bits > 64 {
        return Err(Error::InvalidParams(format!("weight {w} at n = {n} does not pack into 64 bits")));
    }
    let pack = |s: &[usize]| s.iter().fold(0u64, |acc, &j| (acc << bits) | j as u64);
    let target = n_times as usize;
    let mut keys: Vec<u64> = Vec::with_capacity(target);
    while keys.len() < target {
        let need = target - keys.len();
        for _ in 0..need + need / 64 + 16 {
            let mut s = sample(rng, n, w).into_vec();
            s.sort_unstable();
            keys.push(pack(&s));
        }
        keys.sort_unstable();
        keys.dedup();
        if keys.len() > target {
            // drop a uniform subset of the surplus so the kept set stays uniform
            let mut keep: Vec<usize> = sample(rng, keys.len(), target).into_vec();
            keep.sort_unstable();
            keys = keep.into_iter().map(|i| keys[i]).collect();
        }
    }
    let mask = (1u64 << bits) - 1;
    Ok(keys
        .into_iter()
        .map(|k| {
            let mut s: Vec<u32> = (0..w).map(|i| ((k >> (bits as usize * i)) & mask) as u32).collect();
            s.reverse();
            s
        })
        .collect())
}

/// Result of the counting distinguisher.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PkFreeVerdict {
    /// Number of sampled `h` with more than `τ₁·m` zeros.
    pub s: u64,
    pub n_times: u128,
    pub m: usize,
    pub tau1: f64,
    pub tau2: u64,
    /// Largest zero count seen.
    pub max_zeros: usize,
    pub verdict: bool,
}

/// Counting distinguisher; `verdict = S > τ₂`.
pub fn pkfree_distinguish(targets: &[Codeword], config: &PkFreeConfig, seed: u64) -> Result<PkFreeVerdict> {
    let ys = pairwise_differences(targets)?;
    if ys.len() != config.m {
        return Err(Error::InvalidParams(format!("expected {} targets, got {}", 2 * config.m, targets.len())));
    }
    let n = ys.first().map_or(0, |y| y.len());
    let mut rng = rng_for(seed, Stream::PkFree);
    let supports = sample_supports(n, config.weight, config.n_times, &mut rng)?;
    Ok(count_biased(&ys, &supports, config))
}

/// Scores explicit supports against the differences `ys`.
pub fn count_biased(ys: &[BitVector], supports: &[Vec<u32>], config: &PkFreeConfig) -> PkFreeVerdict {
    let masks = ColumnMasks::new(ys);
    let cut = config.tau1 * ys.len() as f64;
    let (s, max_zeros) = supports
        .par_iter()
        .map(|h| {
            let z = masks.zeros(h);
            (u64::from(z as f64 > cut), z)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1.max(b.1)));
    PkFreeVerdict {
        s,
        n_times: supports.len() as u128,
        m: ys.len(),
        tau1: config.tau1,
        tau2: config.tau2,
        max_zeros,
        verdict: s > config.tau2,
    }
}
