//! Meet-in-the-middle recovery of weight-`t` dual vectors.
//!
//! The rows of `G` are split into halves of `⌈n/2⌉` and `⌊n/2⌋`. List 1 holds
//! sums of `t₁ = ⌈t/2⌉` rows from the first half, list 2 sums of `t₂ = t − t₁`
//! rows from the second. A collision `sum₁ = sum₂` gives `v` with `vG = 0`.
//! Random sub-lists trade the expected number of hits `l` for memory.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{parity_zero_prob, DistinguisherVerdict};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::prc::Codeword;
use crate::rng::{derive_seed, rng_for, Stream};
use crate::stats::{binomial_u128, binomial_upper_tail};

/// Sub-list sizes and the decision threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitmConfig {
    /// Target expected number of recovered secret rows.
    pub l: f64,
    pub list_cap_1: u128,
    pub list_cap_2: u128,
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Half sizes `(n₁, n₂)` and half weights `(t₁, t₂)`.
pub fn split(n: usize, t: usize) -> (usize, usize, usize, usize) {
    (n.div_ceil(2), n / 2, t.div_ceil(2), t - t.div_ceil(2))
}

/// Fraction of weight-`t` vectors with the `t₁`/`t₂` half split.
pub fn split_fraction(n: usize, t: usize) -> f64 {
    let (n1, n2, t1, t2) = split(n, t);
    let num = binomial_u128(n1 as u64, t1 as u64).unwrap() as f64 * binomial_u128(n2 as u64, t2 as u64).unwrap() as f64;
    num / binomial_u128(n as u64, t as u64).map(|c| c as f64).unwrap_or(f64::INFINITY)
}

impl MitmConfig {
    /// Complete lists: every split vector is found.
    pub fn full(n: usize, t: usize, tau: f64) -> Self {
        let (n1, n2, t1, t2) = split(n, t);
        Self {
            l: f64::NAN,
            list_cap_1: binomial_u128(n1 as u64, t1 as u64).unwrap(),
            list_cap_2: binomial_u128(n2 as u64, t2 as u64).unwrap(),
            tau,
            alpha: 1.0,
            beta: 1.0,
        }
    }

    /// Balanced sub-lists with `α·β = l/r′` and `α·C(n₁,t₁) = β·C(n₂,t₂)`,
    /// where `r′ = q·r` is the expected number of split rows of `P`. A
    /// fraction that would exceed 1 is clamped and the other absorbs the rest.
    pub fn balanced(n: usize, r: usize, t: usize, l: f64, tau: f64) -> Self {
        let (n1, n2, t1, t2) = split(n, t);
        let c1 = binomial_u128(n1 as u64, t1 as u64).unwrap() as f64;
        let c2 = binomial_u128(n2 as u64, t2 as u64).unwrap() as f64;
        let r_split = split_fraction(n, t) * r as f64;
        let prod = (l / r_split).min(1.0);
        let mut alpha = (prod * c2 / c1).sqrt();
        let mut beta = prod / alpha;
        if alpha > 1.0 {
            alpha = 1.0;
            beta = prod;
        } else if beta > 1.0 {
            beta = 1.0;
            alpha = prod;
        }
        Self { l, list_cap_1: ((alpha * c1).ceil() as u128).max(1), list_cap_2: ((beta * c2).ceil() as u128).max(1), tau, alpha, beta }
    }
}

/// `α·β·q·r`: expected number of rows of `P` among the collisions.
pub fn expected_recovered_rows(n: usize, r: usize, t: usize, config: &MitmConfig) -> f64 {
    config.alpha * config.beta * split_fraction(n, t) * r as f64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumEntry {
    /// Row indices of `G`, ascending.
    pub indices: Vec<u32>,
    pub sum: BitVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumList {
    /// Length of the code, needed to materialize vectors.
    pub n: usize,
    pub entries: Vec<SumEntry>,
}

/// The `k`-subset of `0..n` with lexicographic-by-colex rank `rank`.
pub fn unrank_combination(mut rank: u128, n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(k);
    let mut hi = n;
    for i in (1..=k).rev() {
        // largest c < hi with C(c, i) ≤ rank
        let (mut lo, mut top) = (i - 1, hi - 1);
        while lo < top {
            let mid = (lo + top).div_ceil(2);
            if binomial_u128(mid as u64, i as u64).unwrap() <= rank {
                lo = mid;
            } else {
                top = mid - 1;
            }
        }
        rank -= binomial_u128(lo as u64, i as u64).unwrap();
        out.push(lo as u32);
        hi = lo;
    }
    out.reverse();
    out
}

fn half_list(g: &BitMatrix, offset: usize, size: usize, k: usize, cap: u128, seed: u64) -> Result<Vec<SumEntry>> {
    let total = binomial_u128(size as u64, k as u64).unwrap();
    if cap > total {
        return Err(Error::CapTooLarge { cap, available: total });
    }
    let ranks: Vec<u128> = if cap == total {
        (0..total).collect()
    } else {
        let mut rng = rng_for(seed, Stream::Mitm);
        sample(&mut rng, total as usize, cap as usize).into_iter().map(|x| x as u128).collect()
    };
    Ok(ranks
        .into_par_iter()
        .map(|rank| {
            let indices: Vec<u32> = unrank_combination(rank, size, k).into_iter().map(|i| i + offset as u32).collect();
            let idx: Vec<usize> = indices.iter().map(|&i| i as usize).collect();
            SumEntry { sum: g.sum_rows(&idx), indices }
        })
        .collect())
}

/// Builds both sub-lists. Subsets are uniform without replacement.
pub fn build_half_lists(g: &BitMatrix, t: usize, config: &MitmConfig, seed: u64) -> Result<(SumList, SumList)> {
    let n = g.rows();
    let (n1, n2, t1, t2) = split(n, t);
    let a = half_list(g, 0, n1, t1, config.list_cap_1, derive_seed(seed, 1))?;
    let b = half_list(g, n1, n2, t2, config.list_cap_2, derive_seed(seed, 2))?;
    Ok((SumList { n, entries: a }, SumList { n, entries: b }))
}

/// Weight-`t` vectors found by the collision search, sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecoveredDual {
    pub vectors: Vec<BitVector>,
}

impl RecoveredDual {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Sorts both lists by sum and emits the cross product of every equal run.
pub fn merge_join(list1: &SumList, list2: &SumList) -> RecoveredDual {
    let mut a: Vec<&SumEntry> = list1.entries.iter().collect();
    let mut b: Vec<&SumEntry> = list2.entries.iter().collect();
    a.sort_by(|x, y| x.sum.cmp(&y.sum));
    b.sort_by(|x, y| x.sum.cmp(&y.sum));
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].sum.cmp(&b[j].sum) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let key = &a[i].sum;
                let ie = i + a[i..].iter().take_while(|e| &e.sum == key).count();
                let je = j + b[j..].iter().take_while(|e| &e.sum == key).count();
                for x in &a[i..ie] {
                    for y in &b[j..je] {
                        let mut v = BitVector::zeros(list1.n);
                        for &c in x.indices.iter().chain(&y.indices) {
                            v.flip(c as usize);
                        }
                        // halves are disjoint so this never drops weight; kept as a guard
                        if v.weight() == x.indices.len() + y.indices.len() {
                            out.push(v);
                        }
                    }
                }
                i = ie;
                j = je;
            }
        }
    }
    out.sort_by_key(|v| v.support());
    out.dedup();
    RecoveredDual { vectors: out }
}

/// Checks `vG = 0` and `w_H(v) = t` for every vector.
pub fn verify_dual(g: &BitMatrix, t: usize, rec: &RecoveredDual) -> bool {
    rec.vectors.iter().all(|v| v.weight() == t && g.left_mul_vec(v).map(|s| s.is_zero()).unwrap_or(false))
}

/// Zero-ratio of `⟨v, x + z⟩` over every (vector, target) pair.
pub fn distinguish(rec: &RecoveredDual, z: &BitVector, targets: &[Codeword], tau: f64) -> Result<DistinguisherVerdict> {
    if rec.is_empty() {
        return Err(Error::EmptyRecovered);
    }
    for c in targets {
        if c.len() != z.len() {
            return Err(Error::Dimension(format!("target of length {} against pad of length {}", c.len(), z.len())));
        }
    }
    let n_zero: u64 = targets
        .par_iter()
        .map(|c| {
            let xz = c.x.xor(z);
            rec.vectors.iter().filter(|v| !v.dot(&xz)).count() as u64
        })
        .sum();
    let n_tot = (targets.len() * rec.len()) as u64;
    Ok(DistinguisherVerdict::from_counts(n_zero, n_tot, tau))
}

/// Exact TPR and FPR of the ratio test with `m·l` pairs: `Pr[Bin(ml, p) ≥ ⌈τ·ml⌉]`
/// at `p` and at ½.
pub fn tpr_fpr(p: f64, m: usize, l: usize, tau: f64) -> (f64, f64) {
    let trials = (m * l) as u64;
    let k = (tau * trials as f64).ceil() as u64;
    (binomial_upper_tail(trials, p, k), binomial_upper_tail(trials, 0.5, k))
}

/// Predicted TPR/FPR for noise rate `ω`.
pub fn predicted_rates(omega: f64, t: usize, m: usize, l: usize, tau: f64) -> (f64, f64) {
    tpr_fpr(parity_zero_prob(omega, t), m, l, tau)
}

/// Result of [`recover_with_retries`].
#[derive(Clone, Debug)]
pub struct MitmOutcome {
    pub recovered: RecoveredDual,
    pub config: MitmConfig,
    pub attempts: usize,
    pub list_entries: u128,
}

/// Runs the collision search, doubling both caps (up to the full lists) while
/// nothing is found and the combined list size stays under `max_entries`.
/// Caps are also doubled up front while the expected yield is below one.
pub fn recover_with_retries(
    g: &BitMatrix,
    r: usize,
    t: usize,
    mut config: MitmConfig,
    max_entries: u128,
    seed: u64,
) -> Result<MitmOutcome> {
    let n = g.rows();
    let full = MitmConfig::full(n, t, config.tau);
    let grow = |c: &mut MitmConfig| {
        c.list_cap_1 = (c.list_cap_1 * 2).min(full.list_cap_1);
        c.list_cap_2 = (c.list_cap_2 * 2).min(full.list_cap_2);
        c.alpha = c.list_cap_1 as f64 / full.list_cap_1 as f64;
        c.beta = c.list_cap_2 as f64 / full.list_cap_2 as f64;
    };
    let at_full = |c: &MitmConfig| c.list_cap_1 == full.list_cap_1 && c.list_cap_2 == full.list_cap_2;
    let fits = |c: &MitmConfig| (c.list_cap_1 * 2).min(full.list_cap_1) + (c.list_cap_2 * 2).min(full.list_cap_2) <= max_entries;
    while expected_recovered_rows(n, r, t, &config) < 1.0 && !at_full(&config) && fits(&config) {
        grow(&mut config);
    }
    let mut attempts = 0;
    loop {
        let (a, b) = build_half_lists(g, t, &config, derive_seed(seed, attempts as u64))?;
        let recovered = merge_join(&a, &b);
        attempts += 1;
        assert!(verify_dual(g, t, &recovered), "collision search emitted a non-dual vector");
        if !recovered.is_empty() || at_full(&config) || !fits(&config) {
            return Ok(MitmOutcome { recovered, config, attempts, list_entries: config.list_cap_1 + config.list_cap_2 });
        }
        grow(&mut config);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prc::{encode, keygen_llm, random_word, PrcParams, Provenance, Scheme};
    use crate::rng::rng_from_seed;
    use crate::stats::proportion_sigma;

    fn brute_force_split_duals(g: &BitMatrix, t: usize) -> Vec<BitVector> {
        let n = g.rows();
        let (n1, _, t1, _) = split(n, t);
        let total = binomial_u128(n as u64, t as u64).unwrap();
        let mut out = Vec::new();
        for rank in 0..total {
            let idx: Vec<usize> = unrank_combination(rank, n, t).into_iter().map(|c| c as usize).collect();
            if idx.iter().filter(|&&c| c < n1).count() != t1 {
                continue;
            }
            if g.sum_rows(&idx).is_zero() {
                out.push(BitVector::from_support(n, &idx));
            }
        }
        out.sort_by_key(|v| v.support());
        out
    }

    #[test]
    fn unranking_is_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for rank in 0..binomial_u128(9, 4).unwrap() {
            let c = unrank_combination(rank, 9, 4);
            assert!(c.windows(2).all(|w| w[0] < w[1]) && *c.last().unwrap() < 9);
            assert!(seen.insert(c));
        }
        assert_eq!(seen.len(), 126);
    }

    #[test]
    fn full_lists_for_t2_are_the_rows() {
        let mut rng = rng_from_seed(1);
        let g = BitMatrix::random(10, 6, &mut rng);
        let (a, b) = build_half_lists(&g, 2, &MitmConfig::full(10, 2, 0.6), 0).unwrap();
        assert_eq!(a.entries.len(), 5);
        assert_eq!(b.entries.len(), 5);
        for (i, e) in a.entries.iter().enumerate() {
            assert_eq!(e.indices, vec![i as u32]);
            assert_eq!(e.sum, g.row(i));
        }
    }

    #[test]
    fn toy_list_sizes_and_sums() {
        let mut rng = rng_from_seed(2);
        let g = BitMatrix::random(8, 4, &mut rng);
        let (a, b) = build_half_lists(&g, 3, &MitmConfig::full(8, 3, 0.6), 0).unwrap();
        assert_eq!((a.entries.len(), b.entries.len()), (6, 4));
        for e in a.entries.iter().chain(&b.entries) {
            let mut s = BitVector::zeros(4);
            for &i in &e.indices {
                s.xor_assign(&g.row(i as usize));
            }
            assert_eq!(s, e.sum);
        }
    }

    #[test]
    fn oversized_cap_is_an_error() {
        let g = BitMatrix::zeros(8, 4);
        let mut c = MitmConfig::full(8, 3, 0.6);
        c.list_cap_1 += 1;
        assert!(matches!(build_half_lists(&g, 3, &c, 0), Err(Error::CapTooLarge { .. })));
    }

    #[test]
    fn zero_rows_collide() {
        let mut rng = rng_from_seed(3);
        let mut g = BitMatrix::random(8, 16, &mut rng);
        g.set_row(1, &BitVector::zeros(16));
        g.set_row(6, &BitVector::zeros(16));
        let (a, b) = build_half_lists(&g, 2, &MitmConfig::full(8, 2, 0.6), 0).unwrap();
        let rec = merge_join(&a, &b);
        assert!(rec.vectors.contains(&BitVector::from_support(8, &[1, 6])));
    }

    #[test]
    fn merge_join_matches_brute_force_at_n64() {
        let p = PrcParams::custom(Scheme::Llm, 64, 56, 12, 3, 0.0).unwrap();
        for seed in 0..3 {
            let kp = keygen_llm(&p, seed).unwrap();
            let g = &kp.public.g;
            let (a, b) = build_half_lists(g, 3, &MitmConfig::full(64, 3, 0.6), seed).unwrap();
            let rec = merge_join(&a, &b);
            assert!(verify_dual(g, 3, &rec));
            assert_eq!(rec.vectors, brute_force_split_duals(g, 3));
            // every split row of P is among them
            for i in 0..kp.secret.p.rows() {
                let v = kp.secret.p.row_vector(i);
                if v.support().iter().filter(|&&c| c < 32).count() == 2 {
                    assert!(rec.vectors.contains(&v));
                }
            }
        }
    }

    #[test]
    fn random_g_has_no_light_duals() {
        let mut rng = rng_from_seed(4);
        let g = BitMatrix::random(64, 40, &mut rng);
        let (a, b) = build_half_lists(&g, 3, &MitmConfig::full(64, 3, 0.6), 0).unwrap();
        let rec = merge_join(&a, &b);
        assert!(rec.is_empty());
    }

    #[test]
    fn expected_rows_formulas() {
        let c = MitmConfig::full(64, 3, 0.6);
        let q = split_fraction(64, 3);
        assert!((expected_recovered_rows(64, 56, 3, &c) - q * 56.0).abs() < 1e-12);
        let n = 1 << 17;
        let r = n * 99 / 100;
        let c = MitmConfig::balanced(n, r, 3, 1.0, 0.6);
        assert!((expected_recovered_rows(n, r, 3, &c) - 1.0).abs() < 1e-9);
        let full = MitmConfig::full(n, 3, 0.6);
        let balance = (c.alpha * full.list_cap_1 as f64) / (c.beta * full.list_cap_2 as f64);
        assert!((balance - 1.0).abs() < 1e-9);
        // g·α·C(n/2, 2) in log₂ reproduces the tabulated partial-recovery cost
        let cost = (48.0 * c.list_cap_1 as f64).log2();
        assert!((cost - 21.30).abs() < 0.1, "{cost}");
        let even = MitmConfig::balanced(4096, 4055, 4, 2.0, 0.55);
        assert_eq!(even.list_cap_1, even.list_cap_2);
    }

    #[test]
    fn mean_recovered_rows_at_n64() {
        // each P row is found iff it splits 2/1, so the count is Bin(r, q)
        let p = PrcParams::custom(Scheme::Llm, 64, 56, 12, 3, 0.0).unwrap();
        let q = split_fraction(64, 3);
        let mut total = 0.0;
        let runs = 200;
        for seed in 0..runs {
            let kp = keygen_llm(&p, 1000 + seed).unwrap();
            let (a, b) = build_half_lists(&kp.public.g, 3, &MitmConfig::full(64, 3, 0.6), seed).unwrap();
            let rec = merge_join(&a, &b);
            total += (0..56).filter(|&i| rec.vectors.contains(&kp.secret.p.row_vector(i))).count() as f64;
        }
        let mean = total / runs as f64;
        let expect = expected_recovered_rows(64, 56, 3, &MitmConfig::full(64, 3, 0.6));
        let sd = (56.0 * q * (1.0 - q) / runs as f64).sqrt();
        assert!((mean - expect).abs() <= 3.0 * sd, "{mean} vs {expect}");
    }

    #[test]
    fn distinguisher_basics() {
        let mut rng = rng_from_seed(5);
        let z = BitVector::random(100, &mut rng);
        let rec = RecoveredDual { vectors: vec![BitVector::from_support(100, &[1, 2, 3]), BitVector::from_support(100, &[4, 50, 99])] };
        let pads: Vec<Codeword> = (0..5).map(|_| Codeword::new(z.clone(), Provenance::Fresh)).collect();
        let v = distinguish(&rec, &z, &pads, 0.6).unwrap();
        assert_eq!(v.ratio, 1.0);
        assert!(v.verdict);
        assert!(matches!(distinguish(&RecoveredDual::default(), &z, &pads, 0.6), Err(Error::EmptyRecovered)));

        let rec = RecoveredDual { vectors: (0..10).map(|i| BitVector::from_support(100, &[i, i + 20, i + 40])).collect() };
        let targets: Vec<Codeword> = (0..100).map(|_| random_word(100, &mut rng)).collect();
        let v = distinguish(&rec, &z, &targets, 0.6).unwrap();
        assert!((v.ratio - 0.5).abs() <= 3.0 * proportion_sigma(0.5, 1000));
    }

    #[test]
    fn watermarked_zero_ratio() {
        let p = PrcParams::custom(Scheme::Llm, 512, 500, 20, 3, 0.1).unwrap();
        let kp = keygen_llm(&p, 7).unwrap();
        // one row, so every inner product sees fresh noise
        let rec = RecoveredDual { vectors: vec![kp.secret.p.row_vector(0)] };
        let targets: Vec<Codeword> = (0..2000).map(|s| encode(&kp.public, &p, s).0).collect();
        let v = distinguish(&rec, &kp.public.z, &targets, 0.6).unwrap();
        let expect = parity_zero_prob(0.1, 3);
        assert!((expect - 0.756).abs() < 1e-12);
        // same value from the sum over even error counts
        let direct: f64 =
            (0..=3).step_by(2).map(|j| binomial_u128(3, j).unwrap() as f64 * 0.1f64.powi(j as i32) * 0.9f64.powi(3 - j as i32)).sum();
        assert!((direct - expect).abs() < 1e-12);
        assert!((v.ratio - expect).abs() <= 3.0 * proportion_sigma(expect, 2000), "{}", v.ratio);
    }

    #[test]
    fn tail_rates() {
        let (tpr, fpr) = tpr_fpr(0.756, 1, 1, 0.5);
        assert!((tpr - 0.756).abs() < 1e-12 && (fpr - 0.5).abs() < 1e-12);
        assert_eq!(tpr_fpr(1.0, 7, 3, 0.9).0, 1.0);
    }
}
