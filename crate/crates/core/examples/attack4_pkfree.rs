//! Distinguish watermarked batches without the public key by scoring sampled
//! low-weight checks against pairwise differences of the targets.

use prc_lab::attacks::pkfree::{self, PkFreeConfig};
use prc_lab::prc;
use prc_lab::rng::{derive_seed, rng_from_seed};
use prc_lab::{Codeword, PrcParams, Scheme};

fn main() -> prc_lab::Result<()> {
    let params = PrcParams::custom(Scheme::Llm, 64, 56, 12, 3, 0.02)?;
    let mut config = PkFreeConfig::new(params.n, params.r, params.omega, params.t);
    config.m = 72;
    println!("m = {}, N_times = {}, τ₁ = {:.4}", config.m, config.n_times, config.tau1);
    let (mut hits, mut false_hits) = (0, 0);
    for b in 0..20u64 {
        let kp = prc::keygen(&params, b)?;
        let marked: Vec<Codeword> = (0..2 * config.m as u64).map(|i| prc::encode(&kp.public, &params, derive_seed(b, i)).0).collect();
        let mut rng = rng_from_seed(derive_seed(b, 1 << 32));
        let uniform: Vec<Codeword> = (0..2 * config.m).map(|_| prc::random_word(params.n, &mut rng)).collect();
        hits += pkfree::pkfree_distinguish(&marked, &config, b)?.verdict as usize;
        false_hits += pkfree::pkfree_distinguish(&uniform, &config, b)?.verdict as usize;
    }
    println!("watermarked batches flagged {hits}/20, uniform batches flagged {false_hits}/20");

    let pk = prc::keygen(&params, 0)?.public;
    let words: Vec<Codeword> = (0..20).map(|i| prc::encode(&pk, &params, i).0).collect();
    let ys = pkfree::pairwise_differences(&words)?;
    println!("noise estimate from 10 differences: {:.3}", pkfree::estimate_omega(&ys));
    Ok(())
}
