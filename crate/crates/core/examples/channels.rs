//! Send a codeword through the synthetic token channel and the image latent
//! channel and measure the flip rates.

use prc_lab::channel::{self, GimChannelParams, SyntheticTokenModel};
use prc_lab::rng::rng_from_seed;
use prc_lab::BitVector;

fn main() -> prc_lab::Result<()> {
    let x = BitVector::random(16_384, &mut rng_from_seed(1));

    for kappa in [0.25, 1.0, 4.0, f64::INFINITY] {
        let model = SyntheticTokenModel::new(16, kappa)?;
        let (got, transcript) = channel::simulate_llm(&model, &x, 2)?;
        let flips = got.xor(&x).weight() as f64 / x.len() as f64;
        println!(
            "token channel κ = {kappa:>5}: predicted {:.4}, observed {flips:.4} over {} tokens",
            model.flip_rate(),
            transcript.entries.len() / 16
        );
    }

    let std = channel::inversion_std_for_flip_rate(0.074)?;
    let run = channel::simulate_gim(&x, &GimChannelParams::new(1.0, std)?, 3);
    println!("latent channel std {std:.4}: predicted {:.4}, observed {:.4}", channel::gim_flip_rate(std), run.flip_rate);
    Ok(())
}
