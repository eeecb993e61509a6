//! Generate a key, encode a few codewords, push them through a binary
//! symmetric channel and decode.

use prc_lab::prc::{self, Decision};
use prc_lab::rng::rng_from_seed;
use prc_lab::PrcParams;

fn main() -> prc_lab::Result<()> {
    let params = PrcParams::llm(4096, 3)?;
    let kp = prc::keygen(&params, 1)?;
    kp.check(params.t)?;
    println!("n={} r={} g={} t={} threshold={}", params.n, params.r, params.g, params.t, params.decode_threshold());

    for (i, rate) in [0.0, 0.05, 0.10, 0.15, 0.25].into_iter().enumerate() {
        let (c, _) = prc::encode(&kp.public, &params, i as u64);
        let noisy = prc::bernoulli_channel(&c, rate, 100 + i as u64)?;
        let w = prc::syndrome_weight(&kp.secret, &noisy.x)?;
        let d = prc::decode(&kp.secret, &params, &noisy)?;
        println!("channel rate {rate:.2}: syndrome weight {w:4} -> {d:?}");
    }

    let u = prc::random_word(params.n, &mut rng_from_seed(9));
    assert_eq!(prc::decode(&kp.secret, &params, &u)?, Decision::Reject);
    println!("uniform word: {:?}", Decision::Reject);
    Ok(())
}
