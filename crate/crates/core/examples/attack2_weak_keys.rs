//! Weak keys: repeated rows of G and the pair-equality distinguisher.

use prc_lab::attacks::weakkey;
use prc_lab::prc;
use prc_lab::rng::{derive_seed, rng_from_seed};
use prc_lab::{Codeword, PrcParams, Scheme};

fn main() -> prc_lab::Result<()> {
    let params = PrcParams::llm(512, 3)?;
    println!("closed-form weak-key probability {:.4}", weakkey::weak_key_prob_llm(params.n, params.r, params.t));

    let keys: Vec<_> = (0..20).map(|s| prc::keygen(&params, s).map(|kp| kp.public)).collect::<Result<_, _>>()?;
    let (idx, pairs) = weakkey::multi_target_scan(&keys)?;
    println!("key {idx} is weak with {} duplicate pairs", pairs.len());

    let noisy = params.with_omega(0.05)?;
    let pk = &keys[idx];
    let tau = weakkey::default_pair_tau(params.t);
    let marked: Vec<Codeword> = (0..params.n as u64).map(|i| prc::encode(pk, &noisy, derive_seed(3, i)).0).collect();
    let mut rng = rng_from_seed(4);
    let uniform: Vec<Codeword> = (0..params.n).map(|_| prc::random_word(params.n, &mut rng)).collect();
    for (name, batch) in [("watermarked", &marked), ("uniform", &uniform)] {
        let v = weakkey::distinguish_by_pairs(&pairs, &pk.z, batch, tau)?;
        println!("{name:12} equality ratio {:.4} (τ = {tau:.2}) -> {}", v.ratio, v.verdict);
    }

    let revised = params.with_scheme(Scheme::Revised);
    let weak = (0..200).filter(|&s| !weakkey::find_duplicate_rows(&prc::keygen(&revised, s).unwrap().public.g).is_empty()).count();
    println!("revised key generation: {weak}/200 keys with duplicate rows");
    Ok(())
}
