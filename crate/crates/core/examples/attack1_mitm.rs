//! Recover weight-3 dual vectors of a public generator by collision search and
//! use them to tell watermarked batches from uniform ones.

use prc_lab::attacks::decoder_aligned_tau;
use prc_lab::attacks::mitm::{self, MitmConfig};
use prc_lab::prc;
use prc_lab::rng::{derive_seed, rng_from_seed};
use prc_lab::{Codeword, PrcParams};

fn main() -> prc_lab::Result<()> {
    let params = PrcParams::llm(4096, 3)?.with_omega(0.05)?;
    let kp = prc::keygen(&params, 7)?;
    let tau = decoder_aligned_tau(params.r);
    let config = MitmConfig::balanced(params.n, params.r, params.t, 4.0, tau);
    println!(
        "list caps {} and {}, expected rows {:.2}",
        config.list_cap_1,
        config.list_cap_2,
        mitm::expected_recovered_rows(params.n, params.r, params.t, &config)
    );
    let out = mitm::recover_with_retries(&kp.public.g, params.r, params.t, config, 1 << 24, 7)?;
    assert!(mitm::verify_dual(&kp.public.g, params.t, &out.recovered));
    println!("recovered {} vectors after {} attempt(s)", out.recovered.len(), out.attempts);

    let m = params.r.div_ceil(out.recovered.len());
    let marked: Vec<Codeword> = (0..m as u64).map(|i| prc::encode(&kp.public, &params, derive_seed(1, i)).0).collect();
    let mut rng = rng_from_seed(2);
    let uniform: Vec<Codeword> = (0..m).map(|_| prc::random_word(params.n, &mut rng)).collect();
    for (name, batch) in [("watermarked", &marked), ("uniform", &uniform)] {
        let v = mitm::distinguish(&out.recovered, &kp.public.z, batch, tau)?;
        println!("{name:12} zero ratio {:.4} (τ = {tau:.4}) -> {}", v.ratio, v.verdict);
    }
    Ok(())
}
