//! Noise recovery and overlay.
//!
//! With `H` spanning the dual of `G`, `H(x + z) = He`, so recovering the encode
//! noise `e` is syndrome decoding. Once `e` is known, an overlay `e′` with
//! support disjoint from `e` raises the noise weight by exactly `w_H(e′)`,
//! where random noise of the same weight would cancel part of `e`.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{kernel_vectors, BitMatrix, BitVector, ColumnPermutation};
use crate::prc::{decode_threshold, Codeword, PrcParams, Provenance, PublicKey};
use crate::rng::{derive_seed, rng_for, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayConfig {
    pub mu: f64,
    pub max_iters: u64,
    /// Inclusive range of accepted candidate weights.
    pub weight_window: (usize, usize),
}

/// `[0, ωn + 4√(nω(1−ω))]`.
pub fn default_weight_window(n: usize, omega: f64) -> (usize, usize) {
    let nf = n as f64;
    (0, (omega * nf + 4.0 * (nf * omega * (1.0 - omega)).sqrt()).floor() as usize)
}

impl OverlayConfig {
    pub fn new(params: &PrcParams, mu: f64, max_iters: u64) -> Self {
        Self { mu, max_iters, weight_window: default_weight_window(params.n, params.omega) }
    }
}

/// The dual matrix and what was learned building it.
#[derive(Clone, Debug)]
pub struct Dual {
    pub h: BitMatrix,
    pub rank_g: usize,
    /// `G` had fewer independent columns than columns.
    pub deficient: bool,
}

/// Rows spanning `{y : yᵀG = 0}`; there are `n − rank(G)` of them.
pub fn dual_matrix(g: &BitMatrix) -> Dual {
    let rows = kernel_vectors(&g.transpose());
    let rank_g = g.rows() - rows.len();
    Dual { h: BitMatrix::from_rows(&rows, g.rows()), rank_g, deficient: rank_g < g.cols() }
}

#[derive(Clone, Debug)]
pub struct SyndromeInstance {
    pub h: BitMatrix,
    pub v: BitVector,
}

/// `v = H(x + z)`.
pub fn syndrome_instance(pk: &PublicKey, x: &Codeword) -> Result<SyndromeInstance> {
    let dual = dual_matrix(&pk.g);
    let v = dual.h.mul_vec(&x.x.xor(&pk.z))?;
    Ok(SyndromeInstance { h: dual.h, v })
}

/// One Prange trial: eliminate `H` taking pivots in a random column order and
/// read the candidate error off the pivot columns.
fn prange_trial(inst: &SyndromeInstance, perm: &ColumnPermutation) -> BitVector {
    let mut h = inst.h.clone();
    let mut v = inst.v.clone();
    let rows = h.rows();
    let mut pivots = Vec::with_capacity(rows);
    for &c in perm.as_slice() {
        let next = pivots.len();
        if next == rows {
            break;
        }
        let Some(p) = (next..rows).find(|&i| h.get(i, c)) else {
            continue;
        };
        h.swap_rows(next, p);
        let (a, b) = (v.get(next), v.get(p));
        v.set(next, b);
        v.set(p, a);
        for i in 0..rows {
            if i != next && h.get(i, c) {
                h.xor_rows(i, next);
                if v.get(next) {
                    v.flip(i);
                }
            }
        }
        pivots.push(c);
    }
    let mut e = BitVector::zeros(h.cols());
    for (i, &c) in pivots.iter().enumerate() {
        if v.get(i) {
            e.set(c, true);
        }
    }
    e
}

#[derive(Clone, Debug)]
pub struct IsdOutcome {
    pub e: BitVector,
    /// 1-based index of the successful trial.
    pub iterations: u64,
}

/// Prange information-set decoding. Trials run in parallel batches; the
/// success with the lowest trial index is returned, so the result depends only
/// on the seed.
pub fn prange_isd(inst: &SyndromeInstance, config: &OverlayConfig, seed: u64) -> Result<IsdOutcome> {
    if inst.v.len() != inst.h.rows() {
        return Err(Error::Dimension("syndrome length differs from the row count of H".into()));
    }
    let n = inst.h.cols();
    let (lo, hi) = config.weight_window;
    let batch = rayon::current_num_threads().max(1) as u64;
    let mut start = 0u64;
    while start < config.max_iters {
        let end = (start + batch).min(config.max_iters);
        let hit = (start..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(derive_seed(seed, i), Stream::Isd);
                let perm = ColumnPermutation::random(n, &mut rng);
                let e = prange_trial(inst, &perm);
                let w = e.weight();
                (lo <= w && w <= hi).then_some((i, e))
            })
            .find_first(|x| x.is_some())
            .flatten();
        if let Some((i, e)) = hit {
            assert_eq!(inst.h.mul_vec(&e)?, inst.v, "decoded error does not match the syndrome");
            return Ok(IsdOutcome { e, iterations: i + 1 });
        }
        start = end;
    }
    Err(Error::IsdExhausted(config.max_iters))
}

/// `(1 − ω)^k`: chance that a trial's `k` non-pivot columns avoid the error.
pub fn prange_success_prob(omega: f64, k: usize) -> f64 {
    (1.0 - omega).powi(k as i32)
}

/// Overlay of weight `⌈μn⌉` supported outside `supp(e)`, uniform among such.
pub fn build_overlay(e: &BitVector, mu: f64, seed: u64) -> Result<BitVector> {
    let n = e.len();
    let needed = (mu * n as f64).ceil() as usize;
    let free: Vec<usize> = (0..n).filter(|&i| !e.get(i)).collect();
    if needed > free.len() {
        return Err(Error::OverlayTooLarge { needed, available: free.len() });
    }
    let mut rng = rng_for(seed, Stream::Overlay);
    let picks: Vec<usize> = sample(&mut rng, free.len(), needed).into_iter().map(|j| free[j]).collect();
    Ok(BitVector::from_support(n, &picks))
}

#[derive(Clone, Debug)]
pub struct OverlayOutcome {
    pub attacked: Codeword,
    pub recovered_e: BitVector,
    pub overlay: BitVector,
    pub iterations: u64,
    pub g_deficient: bool,
}

/// Recovers `e` from `x` and returns `x + e′`.
pub fn overlay_attack(pk: &PublicKey, x: &Codeword, config: &OverlayConfig, seed: u64) -> Result<OverlayOutcome> {
    let dual = dual_matrix(&pk.g);
    let v = dual.h.mul_vec(&x.x.xor(&pk.z))?;
    let inst = SyndromeInstance { h: dual.h, v };
    let isd = prange_isd(&inst, config, derive_seed(seed, 1))?;
    let overlay = build_overlay(&isd.e, config.mu, derive_seed(seed, 2))?;
    Ok(OverlayOutcome {
        attacked: Codeword::new(x.x.xor(&overlay), Provenance::Attacked),
        recovered_e: isd.e,
        overlay,
        iterations: isd.iterations,
        g_deficient: dual.deficient,
    })
}

/// Smallest `μ = W/n` with `(ω+μ)n` above the decode threshold `T`, provided
/// random noise of that rate keeps `(ω+μ−2ωμ)n` below `T`.
pub fn choose_mu(params: &PrcParams) -> Result<f64> {
    let n = params.n as f64;
    let big_t = decode_threshold(params.r) as f64;
    let omega = params.omega;
    let w = ((big_t - omega * n).floor() + 1.0).max(1.0);
    let mu = w / n;
    let random = (omega + mu - 2.0 * omega * mu) * n;
    if mu > 0.5 || random >= big_t {
        return Err(Error::NoOverlayGap(format!(
            "at ω = {omega} the random-noise weight {random:.1} already reaches the threshold {big_t}"
        )));
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prc::{encode, keygen_revised, random_word, PrcParams, Scheme};
    use crate::rng::rng_from_seed;

    fn params_1024(omega: f64) -> PrcParams {
        PrcParams::custom(Scheme::Revised, 1024, 1013, 20, 3, omega).unwrap()
    }

    #[test]
    fn systematic_generator_has_identity_dual() {
        let (n, g) = (12, 4);
        let mut gm = BitMatrix::zeros(n, g);
        for i in 0..g {
            gm.set(i, i, true);
        }
        let d = dual_matrix(&gm);
        assert_eq!(d.h.rows(), n - g);
        assert!(d.h.mul(&gm).unwrap().is_zero());
        // every dual row vanishes on the first g coordinates
        for i in 0..d.h.rows() {
            assert!((0..g).all(|j| !d.h.get(i, j)));
        }
    }

    #[test]
    fn random_dual_has_full_rank() {
        let mut rng = rng_from_seed(1);
        let g = BitMatrix::random(256, 16, &mut rng);
        let d = dual_matrix(&g);
        assert!(d.h.mul(&g).unwrap().is_zero());
        assert_eq!(d.h.rank(), 240);
        assert!(!d.deficient);
    }

    #[test]
    fn deficient_generator_is_flagged() {
        let mut rng = rng_from_seed(2);
        let mut g = BitMatrix::random(64, 8, &mut rng);
        for i in 0..64 {
            let b = g.get(i, 0);
            g.set(i, 7, b);
        }
        let d = dual_matrix(&g);
        assert!(d.deficient);
        assert_eq!(d.h.rows(), 64 - 7);
    }

    #[test]
    fn noiseless_instance_decodes_to_zero() {
        let p = params_1024(0.0);
        let kp = keygen_revised(&p, 1).unwrap();
        let (c, _) = encode(&kp.public, &p, 2);
        let inst = syndrome_instance(&kp.public, &c).unwrap();
        let out = prange_isd(&inst, &OverlayConfig::new(&p, 0.3, 10), 3).unwrap();
        assert!(out.e.is_zero());
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn light_noise_is_recovered_up_to_a_codeword() {
        // G of a revised key can contain very light codewords (columns of P
        // that no row touches), so e is only determined modulo the code
        let p = params_1024(0.02);
        let kp = keygen_revised(&p, 4).unwrap();
        let rank = kp.public.g.rank();
        assert_eq!(rank, 20);
        let window = default_weight_window(p.n, p.omega);
        for s in 0..10 {
            let (c, trace) = encode(&kp.public, &p, s);
            let inst = syndrome_instance(&kp.public, &c).unwrap();
            let out = prange_isd(&inst, &OverlayConfig::new(&p, 0.3, 200), s).unwrap();
            assert!(out.e.weight() <= window.1);
            let diff = out.e.xor(&trace.e);
            let mut cols: Vec<BitVector> = (0..p.g).map(|j| kp.public.g.column(j)).collect();
            cols.push(diff);
            assert_eq!(BitMatrix::from_columns(&cols, p.n).rank(), rank);
        }
    }

    #[test]
    fn exhausted_budget_is_an_error() {
        let p = params_1024(0.02);
        let kp = keygen_revised(&p, 5).unwrap();
        let mut rng = rng_from_seed(6);
        let inst = syndrome_instance(&kp.public, &random_word(1024, &mut rng)).unwrap();
        let cfg = OverlayConfig::new(&p, 0.3, 5);
        assert!(matches!(prange_isd(&inst, &cfg, 0), Err(Error::IsdExhausted(5))));
    }

    #[test]
    fn success_probability_example() {
        let lp = prange_success_prob(1.0 - 0.736, 48).log2();
        assert!((lp + 21.2).abs() < 0.05, "{lp}");
    }

    #[test]
    fn overlay_shapes() {
        let e = BitVector::zeros(100);
        assert!(build_overlay(&e, 0.0, 1).unwrap().is_zero());
        assert_eq!(build_overlay(&e, 0.5, 1).unwrap().weight(), 50);
        let mut rng = rng_from_seed(7);
        let e = BitVector::from_support(1024, &rand::seq::index::sample(&mut rng, 1024, 20).into_vec());
        let o = build_overlay(&e, 0.3, 2).unwrap();
        assert_eq!(o.weight(), 308);
        assert!(o.and(&e).is_zero());
        assert_eq!(e.xor(&o).weight(), 328);
        let full = BitVector::ones(10);
        assert!(matches!(build_overlay(&full, 0.1, 1), Err(Error::OverlayTooLarge { .. })));
    }

    #[test]
    fn zero_overlay_leaves_codeword() {
        let p = params_1024(0.02);
        let kp = keygen_revised(&p, 8).unwrap();
        let (c, _) = encode(&kp.public, &p, 9);
        let out = overlay_attack(&kp.public, &c, &OverlayConfig::new(&p, 0.0, 500), 10).unwrap();
        assert_eq!(out.attacked.x, c.x);
    }

    #[test]
    fn mu_solver() {
        let p = params_1024(0.02);
        let mu = choose_mu(&p).unwrap();
        let t = decode_threshold(1013) as f64;
        assert!((0.02 + mu) * 1024.0 > t);
        assert!((0.02 + mu - 2.0 * 0.02 * mu) * 1024.0 < t);
        assert!(matches!(choose_mu(&params_1024(0.33)), Err(Error::NoOverlayGap(_))));
    }
}
