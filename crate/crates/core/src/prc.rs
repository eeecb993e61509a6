//! The LDPC pseudorandom code: parameters, key generation, encoding, the
//! Bernoulli channel and threshold decoding.
//!
//! A secret key is a sparse `r × n` matrix `P` with row weight `t`; the public
//! generator `G` (`n × g`) satisfies `PG = 0`. Both carry the one-time pad `z`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{kernel_vectors, BitMatrix, BitVector, ColumnPermutation, SparseRowMatrix};
use crate::rng::{rng_for, PrcRng, Stream};
use crate::stats::log2_binomial;

/// Key generation family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Each secret row combines `t−1` rows of a fixed uniform block.
    Llm,
    /// Like `Llm`, but row `i` may also combine any earlier generated row.
    Gim,
    /// Uniform weight-`t` rows, generator taken from the kernel.
    Revised,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Llm => "llm",
            Scheme::Gim => "gim",
            Scheme::Revised => "revised",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "llm" => Ok(Scheme::Llm),
            "gim" => Ok(Scheme::Gim),
            "revised" => Ok(Scheme::Revised),
            other => Err(Error::InvalidParams(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Message bits carried by a multi-bit GIM key.
pub const GIM_MESSAGE_BITS: usize = 512;
/// Parity bits for a 1e−5 false-positive target: ⌈log₂ 1e5⌉.
pub const GIM_PARITY_BITS: usize = 17;

/// Code parameters. `lambda` is the nominal security level in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrcParams {
    pub n: usize,
    pub r: usize,
    pub g: usize,
    pub t: usize,
    pub lambda: usize,
    pub omega: f64,
    pub scheme: Scheme,
}

/// `⌊log₂ C(n, t)⌋`.
pub fn security_bits(n: usize, t: usize) -> usize {
    log2_binomial(n as u64, t as u64).floor() as usize
}

/// `⌊0.99·n⌋`, computed without float rounding surprises.
pub fn llm_rows(n: usize) -> usize {
    n * 99 / 100
}

impl PrcParams {
    /// Language-model parameters: `r = ⌊0.99n⌋`, `g = λ = ⌊log₂ C(n,t)⌋`, `ω = 0`.
    pub fn llm(n: usize, t: usize) -> Result<Self> {
        let lambda = security_bits(n, t);
        let p = Self { n, r: llm_rows(n), g: lambda, t, lambda, omega: 0.0, scheme: Scheme::Llm };
        p.validate()?;
        Ok(p)
    }

    /// Image-model parameters: `k = λ + 512 + 17`, `r = n − k − λ`, `g = λ`,
    /// and encode noise `η = 1 − 2^{−λ/g²}`.
    pub fn gim(n: usize, t: usize) -> Result<Self> {
        let lambda = security_bits(n, t);
        let k = lambda + GIM_MESSAGE_BITS + GIM_PARITY_BITS;
        let r = n
            .checked_sub(k + lambda)
            .filter(|&r| r > 0)
            .ok_or_else(|| Error::InvalidParams(format!("n = {n} too small for the GIM layout (k = {k}, λ = {lambda})")))?;
        let omega = gim_eta(lambda, lambda);
        let p = Self { n, r, g: lambda, t, lambda, omega, scheme: Scheme::Gim };
        p.validate()?;
        Ok(p)
    }

    /// Arbitrary `(n, r, g, t)`; only the basic range checks apply.
    /// `lambda` is set to `⌊log₂ C(n,t)⌋`.
    pub fn custom(scheme: Scheme, n: usize, r: usize, g: usize, t: usize, omega: f64) -> Result<Self> {
        let p = Self { n, r, g, t, lambda: security_bits(n, t), omega, scheme };
        p.validate()?;
        Ok(p)
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        self.omega = omega;
        self.validate()?;
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let Self { n, r, g, t, omega, .. } = *self;
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(0 < r && r < n) {
            return bad(format!("need 0 < r < n, got r = {r}, n = {n}"));
        }
        if !(0 < g && g < n) {
            return bad(format!("need 0 < g < n, got g = {g}, n = {n}"));
        }
        if !(3 <= t && t <= n) {
            return bad(format!("need 3 ≤ t ≤ n, got t = {t}"));
        }
        if !(0.0..0.5).contains(&omega) {
            return bad(format!("need 0 ≤ ω < 1/2, got {omega}"));
        }
        Ok(())
    }

    /// Acceptance threshold `⌊(½ − r^{−1/4})·r⌋` on the syndrome weight.
    pub fn decode_threshold(&self) -> usize {
        decode_threshold(self.r)
    }
}

/// `⌊(½ − r^{−1/4})·r⌋`, clamped at 0.
pub fn decode_threshold(r: usize) -> usize {
    let rf = r as f64;
    let v = (0.5 - rf.powf(-0.25)) * rf;
    if v <= 0.0 {
        0
    } else {
        v.floor() as usize
    }
}

/// `1 − 2^{−λ/g²}`.
pub fn gim_eta(lambda: usize, g: usize) -> f64 {
    -(-(lambda as f64) / (g * g) as f64 * std::f64::consts::LN_2).exp_m1()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub g: BitMatrix,
    pub z: BitVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub p: SparseRowMatrix,
    pub z: BitVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub public: PublicKey,
    pub secret: SecretKey,
}

impl KeyPair {
    /// Checks `PG = 0`, row weights and matching pads.
    pub fn check(&self, t: usize) -> Result<()> {
        let (g, p) = (&self.public.g, &self.secret.p);
        if p.cols() != g.rows() || self.public.z != self.secret.z {
            return Err(Error::Invariant("public and secret key shapes disagree".into()));
        }
        if let Some(i) = (0..p.rows()).find(|&i| p.row_support(i).len() != t) {
            return Err(Error::Invariant(format!("row {i} of P does not have weight {t}")));
        }
        if !p.mul_dense(g)?.is_zero() {
            return Err(Error::Invariant("PG ≠ 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Fresh,
    ChannelNoised,
    Attacked,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub x: BitVector,
    pub provenance: Provenance,
}

impl Codeword {
    pub fn new(x: BitVector, provenance: Provenance) -> Self {
        Self { x, provenance }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// The randomness behind one encoding. Kept in memory for tests and never
/// written to disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodeTrace {
    pub s: BitVector,
    pub e: BitVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

fn check_sparse_room(params: &PrcParams) -> Result<()> {
    params.validate()?;
    if params.t - 1 > params.n - params.r {
        return Err(Error::InvalidParams(format!("t − 1 = {} exceeds n − r = {}", params.t - 1, params.n - params.r)));
    }
    Ok(())
}

/// Applies a uniform position permutation to an unpermuted `(G, P)` pair and
/// draws the pad.
fn finish_keypair(g: BitMatrix, supports: Vec<Vec<u32>>, params: &PrcParams, rng: &mut PrcRng) -> Result<KeyPair> {
    let n = params.n;
    // Position a moves to perm[a].
    let perm = ColumnPermutation::random(n, rng);
    let new_pos = perm.as_slice();
    let mut gp = BitMatrix::zeros(n, g.cols());
    for (a, &to) in new_pos.iter().enumerate() {
        gp.set_row(to, &g.row(a));
    }
    let p = SparseRowMatrix::new(n, supports)?.relabel_columns(new_pos);
    let z = BitVector::random(n, rng);
    Ok(KeyPair { public: PublicKey { g: gp, z: z.clone() }, secret: SecretKey { p, z } })
}

/// Unpermuted LLM/GIM construction. Generated rows occupy positions `0..r`,
/// the uniform block occupies `r..n`. With `growing`, row `i` also draws from
/// generated rows `0..i`.
pub(crate) fn sparse_combination_keys(params: &PrcParams, growing: bool, rng: &mut PrcRng) -> (BitMatrix, Vec<Vec<u32>>) {
    let (n, r, g, t) = (params.n, params.r, params.g, params.t);
    let d = n - r;
    let mut gm = BitMatrix::zeros(n, g);
    for a in r..n {
        gm.set_row(a, &BitVector::random(g, rng));
    }
    let mut supports = Vec::with_capacity(r);
    for i in 0..r {
        let pool = if growing { d + i } else { d };
        // pool index j < d is block row r+j, otherwise generated row j−d
        let picks: Vec<usize> = sample(rng, pool, t - 1).into_iter().map(|j| if j < d { r + j } else { j - d }).collect();
        let row = gm.sum_rows(&picks);
        gm.set_row(i, &row);
        let mut sup: Vec<u32> = picks.iter().map(|&c| c as u32).collect();
        sup.push(i as u32);
        supports.push(sup);
    }
    (gm, supports)
}

/// Key generation with a fixed uniform block of `n − r` rows; every other row
/// of `G` is a sum of `t − 1` block rows.
pub fn keygen_llm(params: &PrcParams, seed: u64) -> Result<KeyPair> {
    check_sparse_room(params)?;
    let mut rng = rng_for(seed, Stream::Keygen);
    let (g, sup) = sparse_combination_keys(params, false, &mut rng);
    finish_keypair(g, sup, params, &mut rng)
}

/// As [`keygen_llm`], but generated row `i` chooses its `t − 1` summands among
/// the `n − r + i` rows fixed before it.
pub fn keygen_gim(params: &PrcParams, seed: u64) -> Result<KeyPair> {
    check_sparse_room(params)?;
    let mut rng = rng_for(seed, Stream::Keygen);
    let (g, sup) = sparse_combination_keys(params, true, &mut rng);
    finish_keypair(g, sup, params, &mut rng)
}

/// What [`keygen_revised_with`] does when `P` has rank below `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankPolicy {
    /// Build `G` from whatever kernel `P` has. Used by default because sparse
    /// `P` with `r` close to `n` is almost never full rank.
    AcceptDeficient,
    /// Resample `P` up to `max_resamples` times, then fail.
    Strict { max_resamples: usize },
}

/// Uniform weight-`t` rows for `P`; `G` built from the kernel of `P`.
pub fn keygen_revised(params: &PrcParams, seed: u64) -> Result<KeyPair> {
    keygen_revised_with(params, seed, RankPolicy::AcceptDeficient)
}

pub fn keygen_revised_with(params: &PrcParams, seed: u64, policy: RankPolicy) -> Result<KeyPair> {
    params.validate()?;
    let (n, r, g, t) = (params.n, params.r, params.g, params.t);
    let mut rng = rng_for(seed, Stream::Keygen);
    let attempts = match policy {
        RankPolicy::AcceptDeficient => 1,
        RankPolicy::Strict { max_resamples } => {
            if g > n - r {
                return Err(Error::InvalidParams(format!("g = {g} exceeds n − r = {}", n - r)));
            }
            max_resamples.max(1)
        }
    };
    let mut last_rank = 0;
    for _ in 0..attempts {
        let supports: Vec<Vec<u32>> = (0..r).map(|_| sample(&mut rng, n, t).into_iter().map(|c| c as u32).collect()).collect();
        let p = SparseRowMatrix::new(n, supports.clone())?;
        let basis = kernel_vectors(&p.to_dense());
        last_rank = n - basis.len();
        if matches!(policy, RankPolicy::Strict { .. }) && last_rank < r {
            continue;
        }
        let gm = if basis.len() >= g {
            let cols: Vec<BitVector> = sample(&mut rng, basis.len(), g).into_iter().map(|j| basis[j].clone()).collect();
            BitMatrix::from_columns(&cols, n)
        } else {
            // too few kernel vectors for g independent columns: random combinations
            let k = BitMatrix::from_columns(&basis, n);
            let mix = BitMatrix::random(basis.len(), g, &mut rng);
            k.mul(&mix)?
        };
        return finish_keypair(gm, supports, params, &mut rng);
    }
    Err(Error::RankDeficient { rank: last_rank, rows: r, attempts })
}

/// Dispatches on `params.scheme`.
pub fn keygen(params: &PrcParams, seed: u64) -> Result<KeyPair> {
    match params.scheme {
        Scheme::Llm => keygen_llm(params, seed),
        Scheme::Gim => keygen_gim(params, seed),
        Scheme::Revised => keygen_revised(params, seed),
    }
}

/// `x = Gs + e + z` with `s` uniform and `e ~ Ber(n, ω)`.
pub fn encode(pk: &PublicKey, params: &PrcParams, seed: u64) -> (Codeword, EncodeTrace) {
    let mut rng = rng_for(seed, Stream::Encode);
    let s = BitVector::random(pk.g.cols(), &mut rng);
    let e = BitVector::bernoulli(pk.g.rows(), params.omega, &mut rng);
    let trace = EncodeTrace { s, e };
    (encode_with_trace(pk, &trace), trace)
}

/// Deterministic encoding from a given `(s, e)`.
pub fn encode_with_trace(pk: &PublicKey, trace: &EncodeTrace) -> Codeword {
    let mut x = pk.g.mul_vec(&trace.s).expect("trace s has g bits");
    x.xor_assign(&trace.e);
    x.xor_assign(&pk.z);
    Codeword::new(x, Provenance::Fresh)
}

/// `w_H(P(x + z))`.
pub fn syndrome_weight(sk: &SecretKey, x: &BitVector) -> Result<usize> {
    Ok(sk.p.mul_vec(&x.xor(&sk.z))?.weight())
}

pub fn decode(sk: &SecretKey, params: &PrcParams, x: &Codeword) -> Result<Decision> {
    if x.len() != params.n {
        return Err(Error::Dimension(format!("codeword has {} bits, expected {}", x.len(), params.n)));
    }
    let w = syndrome_weight(sk, &x.x)?;
    Ok(if w <= decode_threshold(sk.p.rows()) { Decision::Accept } else { Decision::Reject })
}

/// Flips each bit independently with probability `rate`.
pub fn bernoulli_channel(x: &Codeword, rate: f64, seed: u64) -> Result<Codeword> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidParams(format!("channel rate {rate} outside [0, 1]")));
    }
    let mut rng = rng_for(seed, Stream::Channel);
    let noise = BitVector::bernoulli(x.len(), rate, &mut rng);
    Ok(Codeword::new(x.x.xor(&noise), Provenance::ChannelNoised))
}

/// A uniform random word of length `n`.
pub fn random_word<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Codeword {
    Codeword::new(BitVector::random(n, rng), Provenance::Fresh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_seed, rng_from_seed};
    use proptest::prelude::*;

    fn p512() -> PrcParams {
        PrcParams::llm(512, 3).unwrap()
    }

    #[test]
    fn llm_params_follow_the_configuration() {
        let p = PrcParams::llm(1 << 17, 3).unwrap();
        assert_eq!(p.r, 129_761);
        assert_eq!((p.g, p.lambda), (48, 48));
        assert_eq!(PrcParams::llm(1 << 17, 4).unwrap().lambda, 63);
        assert!(PrcParams::llm(512, 2).is_err());
    }

    #[test]
    fn gim_params_follow_the_configuration() {
        let p = PrcParams::gim(1 << 14, 3).unwrap();
        assert_eq!(p.lambda, 39);
        assert_eq!(p.r, (1 << 14) - (39 + 529) - 39);
        assert!((p.omega - 0.0176).abs() < 1e-3);
        assert!(PrcParams::gim(512, 3).is_err());
    }

    #[test]
    fn threshold_arithmetic() {
        assert_eq!(decode_threshold(10_000), 4000);
        assert_eq!(decode_threshold(256), 64);
        assert_eq!(decode_threshold(16), 0);
        assert_eq!(decode_threshold(1), 0);
    }

    #[test]
    fn llm_key_is_consistent_and_deterministic() {
        let p = p512();
        let kp = keygen_llm(&p, 11).unwrap();
        kp.check(3).unwrap();
        assert_eq!(kp, keygen_llm(&p, 11).unwrap());
        assert_ne!(kp, keygen_llm(&p, 12).unwrap());
        assert_eq!(kp.public.g.rows(), 512);
        assert_eq!(kp.public.g.cols(), p.g);
    }

    #[test]
    fn gim_key_is_consistent() {
        let p = p512().with_scheme(Scheme::Gim);
        let kp = keygen_gim(&p, 5).unwrap();
        kp.check(3).unwrap();
    }

    #[test]
    fn first_growing_row_only_uses_the_block() {
        let p = p512();
        for seed in 0..20 {
            let (_, sup) = sparse_combination_keys(&p, true, &mut rng_from_seed(seed));
            assert!(sup[0].iter().all(|&c| c == 0 || c as usize >= p.r));
        }
    }

    #[test]
    fn revised_key_is_consistent_and_deterministic() {
        let p = p512().with_scheme(Scheme::Revised);
        let kp = keygen_revised(&p, 9).unwrap();
        kp.check(3).unwrap();
        assert_eq!(kp, keygen_revised(&p, 9).unwrap());
    }

    #[test]
    fn strict_policy_reports_rank_deficiency() {
        // r close to n with t = 3 leaves empty columns, so P cannot reach rank r
        let p = PrcParams::custom(Scheme::Revised, 256, 250, 4, 3, 0.0).unwrap();
        let err = keygen_revised_with(&p, 1, RankPolicy::Strict { max_resamples: 4 }).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { attempts: 4, .. }));
        // a comfortable r reaches full rank
        let p = PrcParams::custom(Scheme::Revised, 256, 64, 16, 5, 0.0).unwrap();
        let kp = keygen_revised_with(&p, 1, RankPolicy::Strict { max_resamples: 16 }).unwrap();
        kp.check(5).unwrap();
        assert_eq!(kp.public.g.rank(), 16);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(PrcParams::custom(Scheme::Llm, 64, 64, 4, 3, 0.0).is_err());
        assert!(PrcParams::custom(Scheme::Llm, 64, 10, 4, 3, 0.5).is_err());
        let p = PrcParams::custom(Scheme::Llm, 64, 63, 4, 3, 0.0).unwrap();
        assert!(matches!(keygen_llm(&p, 0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn noiseless_encoding_lies_in_the_code() {
        let p = p512();
        let kp = keygen_llm(&p, 2).unwrap();
        let (c, trace) = encode(&kp.public, &p, 3);
        assert!(trace.e.is_zero());
        let xz = c.x.xor(&kp.public.z);
        assert_eq!(xz, kp.public.g.mul_vec(&trace.s).unwrap());
        assert!(decode(&kp.secret, &p, &c).unwrap().is_accept());
        let zero = EncodeTrace { s: BitVector::zeros(p.g), e: BitVector::zeros(p.n) };
        assert_eq!(encode_with_trace(&kp.public, &zero).x, kp.public.z);
    }

    #[test]
    fn noisy_encoding_at_4096() {
        let p = PrcParams::llm(4096, 3).unwrap().with_omega(0.05).unwrap();
        let kp = keygen_llm(&p, 4).unwrap();
        let (c, trace) = encode(&kp.public, &p, 5);
        let rate = trace.e.weight() as f64 / 4096.0;
        assert!((0.03..=0.07).contains(&rate), "{rate}");
        assert!(decode(&kp.secret, &p, &c).unwrap().is_accept());
    }

    #[test]
    fn channel_extremes_and_rate() {
        let mut rng = rng_from_seed(1);
        let c = random_word(10_000, &mut rng);
        assert_eq!(bernoulli_channel(&c, 0.0, 1).unwrap().x, c.x);
        assert_eq!(bernoulli_channel(&c, 1.0, 1).unwrap().x, c.x.not());
        let flips = bernoulli_channel(&c, 0.1, 2).unwrap().x.xor(&c.x).weight() as f64;
        assert!((flips - 1000.0).abs() <= 3.0 * 900f64.sqrt(), "{flips}");
        assert!(bernoulli_channel(&c, 1.5, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn every_keygen_satisfies_pg_zero(seed in any::<u64>()) {
            let base = PrcParams::custom(Scheme::Llm, 200, 190, 12, 3, 0.0).unwrap();
            for scheme in [Scheme::Llm, Scheme::Gim, Scheme::Revised] {
                let p = base.with_scheme(scheme);
                let kp = keygen(&p, derive_seed(seed, scheme as u64)).unwrap();
                prop_assert!(kp.check(3).is_ok());
            }
        }

        #[test]
        fn channel_is_deterministic(seed in any::<u64>()) {
            let c = random_word(300, &mut rng_from_seed(seed));
            prop_assert_eq!(bernoulli_channel(&c, 0.2, seed).unwrap(), bernoulli_channel(&c, 0.2, seed).unwrap());
        }
    }
}
