//! Simulated watermark channels.
//!
//! Text: each codeword bit steers one bit of a sampled token whose marginal
//! probability of a one is `p′`. The sampler keeps the marginal equal to `p′`
//! when the codeword bit is uniform, and a codeword bit survives exactly when
//! `p′ = ½`. A synthetic model draws `p′ ~ Beta(κ, κ)`, so `κ` plays the part
//! of sampling temperature.
//!
//! Images: the codeword is written into the signs of a Gaussian latent, the
//! inversion error is additive Gaussian noise, and bits are read back through
//! an `erf` soft decision.

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::rng::{derive_seed, rng_for, Stream};

/// Synthetic per-bit marginals for the text channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTokenModel {
    /// Bits per token, `⌈log₂|T|⌉`.
    pub vocab_bits: usize,
    /// Beta concentration `κ`; infinity gives `p′ ≡ ½`.
    pub entropy_knob: f64,
}

impl SyntheticTokenModel {
    pub fn new(vocab_bits: usize, entropy_knob: f64) -> Result<Self> {
        if vocab_bits == 0 || entropy_knob.is_nan() || entropy_knob <= 0.0 {
            return Err(Error::InvalidParams("need vocab_bits ≥ 1 and κ > 0".into()));
        }
        Ok(Self { vocab_bits, entropy_knob })
    }

    /// `len` marginals drawn i.i.d. from `Beta(κ, κ)`.
    pub fn p_prime_stream(&self, len: usize, seed: u64) -> Vec<f64> {
        if self.entropy_knob.is_infinite() {
            return vec![0.5; len];
        }
        let mut rng = rng_for(seed, Stream::Simulate);
        let beta = Beta::new(self.entropy_knob, self.entropy_knob).expect("κ > 0");
        (0..len).map(|_| beta.sample(&mut rng)).collect()
    }

    /// Expected per-bit flip rate `E|p′ − ½|` for a uniform codeword bit.
    pub fn flip_rate(&self) -> f64 {
        beta_mean_abs_deviation(self.entropy_knob)
    }
}

/// `E|X − ½|` for `X ~ Beta(κ, κ)`: `1 / (κ·B(κ,κ)·4^κ)`.
pub fn beta_mean_abs_deviation(kappa: f64) -> f64 {
    if kappa.is_infinite() {
        return 0.0;
    }
    (-(kappa.ln() + ln_beta(kappa, kappa) + kappa * 4f64.ln())).exp()
}

/// The `κ` whose expected flip rate is `rate`, for `0 < rate < ½`.
pub fn knob_for_flip_rate(rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 0.5) {
        return Err(Error::InvalidParams(format!("flip rate {rate} outside (0, 1/2)")));
    }
    // flip rate falls monotonically in κ; bisect on ln κ
    let (mut lo, mut hi) = (-20.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_mean_abs_deviation(mid.exp()) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// One sampled bit per codeword bit: `Ber(2p′x)` when `p′ ≤ ½`, otherwise
/// `Ber(1 − 2(1−p′)(1−x))`.
pub fn sample_token_bits(p_prime: &[f64], codeword: &BitVector, seed: u64) -> Result<BitVector> {
    if p_prime.len() != codeword.len() {
        return Err(Error::Dimension(format!("{} marginals for {} codeword bits", p_prime.len(), codeword.len())));
    }
    if let Some(p) = p_prime.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParams(format!("marginal {p} outside [0, 1]")));
    }
    let mut rng = rng_for(seed, Stream::Channel);
    let mut out = BitVector::zeros(codeword.len());
    for (i, &p) in p_prime.iter().enumerate() {
        let x = if codeword.get(i) { 1.0 } else { 0.0 };
        let prob = if p <= 0.5 { 2.0 * p * x } else { 1.0 - 2.0 * (1.0 - p) * (1.0 - x) };
        if rng.random::<f64>() < prob {
            out.set(i, true);
        }
    }
    Ok(out)
}

/// The extractor is the sampled bit stream itself; only whole tokens are accepted.
pub fn extract_bits(token_bits: &BitVector, vocab_bits: usize) -> Result<BitVector> {
    if vocab_bits == 0 || !token_bits.len().is_multiple_of(vocab_bits) {
        return Err(Error::LengthMismatch(format!("{} bits is not a whole number of {vocab_bits}-bit tokens", token_bits.len())));
    }
    Ok(token_bits.clone())
}

/// Packs bits into tokens, most significant bit first.
pub fn bits_to_tokens(bits: &BitVector, vocab_bits: usize) -> Result<Vec<u32>> {
    let bits = extract_bits(bits, vocab_bits)?;
    if vocab_bits > 32 {
        return Err(Error::InvalidParams("tokens wider than 32 bits".into()));
    }
    Ok((0..bits.len() / vocab_bits)
        .map(|k| (0..vocab_bits).fold(0u32, |acc, b| (acc << 1) | bits.get(k * vocab_bits + b) as u32))
        .collect())
}

/// Unpacks tokens into bits, most significant bit first.
pub fn tokens_to_bits(tokens: &[u32], vocab_bits: usize) -> BitVector {
    let mut out = BitVector::zeros(tokens.len() * vocab_bits);
    for (k, &tok) in tokens.iter().enumerate() {
        for b in 0..vocab_bits {
            if (tok >> (vocab_bits - 1 - b)) & 1 == 1 {
                out.set(k * vocab_bits + b, true);
            }
        }
    }
    out
}

/// One position of a text-channel run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub p_prime: f64,
    pub embedded: bool,
    pub sampled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlmTranscript {
    pub vocab_bits: usize,
    pub entropy_knob: f64,
    pub entries: Vec<TranscriptEntry>,
}

impl LlmTranscript {
    pub fn flip_rate(&self) -> f64 {
        let flips = self.entries.iter().filter(|e| e.embedded != e.sampled).count();
        flips as f64 / self.entries.len().max(1) as f64
    }
}

/// Embeds `codeword` through the synthetic text channel and returns the
/// recovered bits with a per-position transcript.
pub fn simulate_llm(model: &SyntheticTokenModel, codeword: &BitVector, seed: u64) -> Result<(BitVector, LlmTranscript)> {
    let p = model.p_prime_stream(codeword.len(), derive_seed(seed, 1));
    let sampled = sample_token_bits(&p, codeword, derive_seed(seed, 2))?;
    let pad = (model.vocab_bits - codeword.len() % model.vocab_bits) % model.vocab_bits;
    // pad the final token so the extractor sees whole tokens
    let mut padded = BitVector::zeros(sampled.len() + pad);
    for i in sampled.support() {
        padded.set(i, true);
    }
    let recovered_all = extract_bits(&padded, model.vocab_bits)?;
    let recovered = BitVector::from_bools(&recovered_all.to_bools()[..codeword.len()]);
    let entries = p
        .iter()
        .enumerate()
        .map(|(i, &pp)| TranscriptEntry { p_prime: pp, embedded: codeword.get(i), sampled: recovered.get(i) })
        .collect();
    Ok((recovered, LlmTranscript { vocab_bits: model.vocab_bits, entropy_knob: model.entropy_knob, entries }))
}

/// Image-channel parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GimChannelParams {
    /// Error calibration factor of the soft decision.
    pub sigma: f64,
    pub inversion_noise_std: f64,
}

impl GimChannelParams {
    pub fn new(sigma: f64, inversion_noise_std: f64) -> Result<Self> {
        if sigma.is_nan() || sigma <= 0.0 || inversion_noise_std.is_nan() || inversion_noise_std < 0.0 {
            return Err(Error::InvalidParams("need σ > 0 and inversion noise std ≥ 0".into()));
        }
        Ok(Self { sigma, inversion_noise_std })
    }
}

/// `ỹ_i = (1 − 2x_i)|y_i|` with `y ~ N(0, I)`.
pub fn embed_gim_latent(codeword: &BitVector, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, Stream::Simulate);
    (0..codeword.len())
        .map(|i| {
            let y: f64 = StandardNormal.sample(&mut rng);
            if codeword.get(i) {
                -y.abs()
            } else {
                y.abs()
            }
        })
        .collect()
}

/// Adds i.i.d. `N(0, std²)` to every coordinate.
pub fn add_inversion_noise(latent: &[f64], std: f64, seed: u64) -> Vec<f64> {
    if std == 0.0 {
        return latent.to_vec();
    }
    let mut rng = rng_for(seed, Stream::Channel);
    let noise = Normal::new(0.0, std).expect("std ≥ 0");
    latent.iter().map(|&v| v + noise.sample(&mut rng)).collect()
}

/// Soft values `erf(y / √(2σ²(1+σ²)))` and hard bits (soft ≥ 0 reads as 0).
pub fn recover_gim_codeword(latent: &[f64], params: &GimChannelParams) -> (Vec<f64>, BitVector) {
    let s2 = params.sigma * params.sigma;
    let scale = (2.0 * s2 * (1.0 + s2)).sqrt();
    let soft: Vec<f64> = latent.iter().map(|&y| erf(y / scale)).collect();
    let mut bits = BitVector::zeros(latent.len());
    for (i, &s) in soft.iter().enumerate() {
        if s < 0.0 {
            bits.set(i, true);
        }
    }
    (soft, bits)
}

/// Hard-decision flip rate for inversion noise of standard deviation `std`:
/// `arctan(std)/π`.
pub fn gim_flip_rate(std: f64) -> f64 {
    std.atan() / std::f64::consts::PI
}

/// Inverse of [`gim_flip_rate`].
pub fn inversion_std_for_flip_rate(rate: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&rate) {
        return Err(Error::InvalidParams(format!("flip rate {rate} outside [0, 1/2)")));
    }
    Ok((std::f64::consts::PI * rate).tan())
}

/// Outcome of an image-channel run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GimRun {
    pub soft: Vec<f64>,
    #[serde(skip)]
    pub recovered: BitVector,
    pub flip_rate: f64,
}

pub fn simulate_gim(codeword: &BitVector, params: &GimChannelParams, seed: u64) -> GimRun {
    let latent = embed_gim_latent(codeword, derive_seed(seed, 1));
    let noisy = add_inversion_noise(&latent, params.inversion_noise_std, derive_seed(seed, 2));
    let (soft, recovered) = recover_gim_codeword(&noisy, params);
    let flip_rate = recovered.xor(codeword).weight() as f64 / codeword.len().max(1) as f64;
    GimRun { soft, recovered, flip_rate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stats::proportion_sigma;

    #[test]
    fn sampler_extremes() {
        let x = BitVector::from_bools(&[true, false, true, false]);
        assert!(sample_token_bits(&[0.0; 4], &x, 1).unwrap().is_zero());
        assert_eq!(sample_token_bits(&[1.0; 4], &x, 1).unwrap(), BitVector::ones(4));
        assert_eq!(sample_token_bits(&[0.5; 4], &x, 1).unwrap(), x);
        assert!(sample_token_bits(&[1.2; 4], &x, 1).is_err());
        assert!(sample_token_bits(&[0.5; 3], &x, 1).is_err());
    }

    #[test]
    fn token_packing_round_trip() {
        let tokens = vec![0b1011u32, 0b0001, 0b1110];
        let bits = tokens_to_bits(&tokens, 4);
        assert!(bits.get(0) && !bits.get(1));
        assert_eq!(bits_to_tokens(&bits, 4).unwrap(), tokens);
        assert!(matches!(extract_bits(&BitVector::zeros(10), 4), Err(Error::LengthMismatch(_))));
    }

    #[test]
    fn full_entropy_round_trip() {
        let model = SyntheticTokenModel::new(16, f64::INFINITY).unwrap();
        let x = BitVector::random(1000, &mut rng_from_seed(1));
        let (rec, tr) = simulate_llm(&model, &x, 2).unwrap();
        assert_eq!(rec, x);
        assert_eq!(tr.flip_rate(), 0.0);
    }

    #[test]
    fn flip_rate_follows_the_knob() {
        let kappa = knob_for_flip_rate(0.1).unwrap();
        assert!((beta_mean_abs_deviation(kappa) - 0.1).abs() < 1e-9);
        assert!((beta_mean_abs_deviation(1.0) - 0.25).abs() < 1e-12);
        let model = SyntheticTokenModel::new(8, kappa).unwrap();
        let n = 40_000;
        let x = BitVector::random(n, &mut rng_from_seed(3));
        let (rec, _) = simulate_llm(&model, &x, 4).unwrap();
        let q = rec.xor(&x).weight() as f64 / n as f64;
        assert!((q - 0.1).abs() <= 3.0 * proportion_sigma(0.1, n), "{q}");
    }

    #[test]
    fn low_entropy_raises_the_recovered_error() {
        // a codeword already carrying 10% noise picks up more in a low-entropy channel
        let n = 20_000;
        let mut rng = rng_from_seed(5);
        let clean = BitVector::random(n, &mut rng);
        let embedded = clean.xor(&BitVector::bernoulli(n, 0.10, &mut rng));
        let model = SyntheticTokenModel::new(8, knob_for_flip_rate(0.125).unwrap()).unwrap();
        let (rec, _) = simulate_llm(&model, &embedded, 6).unwrap();
        let before = embedded.xor(&clean).weight() as f64 / n as f64;
        let after = rec.xor(&clean).weight() as f64 / n as f64;
        assert!(after > before + 0.05, "{before} → {after}");
    }

    #[test]
    fn flip_rate_is_monotone_in_deviation() {
        let n = 20_000;
        let x = BitVector::random(n, &mut rng_from_seed(7));
        let mut last = -1.0;
        for p in [0.5, 0.4, 0.3, 0.2, 0.1, 0.0] {
            let out = sample_token_bits(&vec![p; n], &x, 8).unwrap();
            let q = out.xor(&x).weight() as f64 / n as f64;
            assert!(q >= last - 0.01, "p′={p}: {q} after {last}");
            last = q;
        }
    }

    #[test]
    fn latent_signs_follow_the_codeword() {
        let zeros = embed_gim_latent(&BitVector::zeros(100), 1);
        assert!(zeros.iter().all(|&v| v >= 0.0));
        let ones = embed_gim_latent(&BitVector::ones(100), 1);
        assert!(ones.iter().all(|&v| v <= 0.0));
    }

    #[test]
    fn noiseless_gim_recovers_exactly() {
        let x = BitVector::random(5000, &mut rng_from_seed(9));
        let run = simulate_gim(&x, &GimChannelParams::new(1.0, 0.0).unwrap(), 1);
        assert_eq!(run.recovered, x);
        let (soft, _) = recover_gim_codeword(&[0.0], &GimChannelParams::new(1.0, 0.0).unwrap());
        assert_eq!(soft[0], 0.0);
        assert!(soft.iter().all(|s| (-1.0..=1.0).contains(s)));
    }

    #[test]
    fn calibrated_inversion_noise() {
        let std = inversion_std_for_flip_rate(0.074).unwrap();
        assert!((gim_flip_rate(std) - 0.074).abs() < 1e-12);
        let n = 100_000;
        let x = BitVector::random(n, &mut rng_from_seed(10));
        let run = simulate_gim(&x, &GimChannelParams::new(1.0, std).unwrap(), 11);
        assert!((run.flip_rate - 0.074).abs() < 0.005, "{}", run.flip_rate);
    }
}
