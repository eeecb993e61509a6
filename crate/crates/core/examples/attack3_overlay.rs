//! Recover the encoding noise of one codeword by Prange decoding and add a
//! disjoint overlay that pushes it past the decoder's threshold.

use prc_lab::attacks::overlay::{self, OverlayConfig};
use prc_lab::prc::{self, Provenance};
use prc_lab::rng::rng_from_seed;
use prc_lab::{BitVector, Codeword, PrcParams, Scheme};

fn main() -> prc_lab::Result<()> {
    let params = PrcParams::custom(Scheme::Revised, 1024, 1013, 20, 3, 0.02)?;
    let kp = prc::keygen(&params, 5)?;
    let (x, trace) = prc::encode(&kp.public, &params, 6);
    let mu = overlay::choose_mu(&params)?;
    let config = OverlayConfig::new(&params, mu, 10_000);
    let out = overlay::overlay_attack(&kp.public, &x, &config, 7)?;
    println!(
        "noise weight {}, recovered weight {}, {} Prange trial(s), overlay weight {}",
        trace.e.weight(),
        out.recovered_e.weight(),
        out.iterations,
        out.overlay.weight()
    );
    let random = Codeword::new(x.x.xor(&BitVector::bernoulli(params.n, mu, &mut rng_from_seed(8))), Provenance::ChannelNoised);
    println!("threshold {}", params.decode_threshold());
    for (name, c) in [("original", &x), ("overlaid", &out.attacked), ("random noise", &random)] {
        let w = prc::syndrome_weight(&kp.secret, &c.x)?;
        println!("{name:13} syndrome weight {w:4} -> {:?}", prc::decode(&kp.secret, &params, c)?);
    }
    Ok(())
}
