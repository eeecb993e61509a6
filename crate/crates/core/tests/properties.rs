//! Cross-module properties: overlay construction, Prange iteration counts,
//! and channels feeding the decoder and the attacks.

use prc_lab::attacks::overlay::{self, OverlayConfig};
use prc_lab::attacks::{mitm, parity_zero_prob};
use prc_lab::channel::{self, GimChannelParams, SyntheticTokenModel};
use prc_lab::prc::{self, Decision, Provenance};
use prc_lab::rng::{derive_seed, rng_from_seed};
use prc_lab::{BitMatrix, BitVector, Codeword, PrcParams, PublicKey, Scheme};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlay_avoids_the_error_and_weights_add(seed in any::<u64>(), n in 8usize..600, rate in 0.0f64..0.4, mu in 0.0f64..0.5) {
        let mut rng = rng_from_seed(seed);
        let e = BitVector::bernoulli(n, rate, &mut rng);
        match overlay::build_overlay(&e, mu, seed) {
            Ok(o) => {
                prop_assert!(e.and(&o).is_zero());
                prop_assert_eq!(e.xor(&o).weight(), e.weight() + o.weight());
                prop_assert_eq!(o.weight(), (mu * n as f64).ceil() as usize);
            }
            Err(_) => prop_assert!((mu * n as f64).ceil() as usize > n - e.weight()),
        }
    }

    #[test]
    fn recovered_error_matches_the_syndrome(seed in any::<u64>()) {
        let params = PrcParams::custom(Scheme::Revised, 256, 240, 12, 3, 0.02).unwrap();
        let kp = prc::keygen(&params, seed).unwrap();
        let (x, _) = prc::encode(&kp.public, &params, seed);
        let inst = overlay::syndrome_instance(&kp.public, &x).unwrap();
        let config = OverlayConfig::new(&params, 0.1, 2000);
        if let Ok(out) = overlay::prange_isd(&inst, &config, seed) {
            prop_assert_eq!(inst.h.mul_vec(&out.e).unwrap(), inst.v);
            prop_assert!(out.e.weight() <= config.weight_window.1);
        }
    }
}

/// Prange iteration counts on uniform `[1024, 20]` codes are geometric with
/// rate `(1 − ω_actual)^g`.
#[test]
fn prange_iterations_are_geometric() {
    let (n, g, omega, runs) = (1024, 20, 0.02, 200u64);
    let config = OverlayConfig { mu: 0.0, max_iters: 10_000, weight_window: overlay::default_weight_window(n, omega) };
    let (mut iters, mut noise) = (Vec::new(), 0usize);
    for s in 0..runs {
        let mut rng = rng_from_seed(derive_seed(s, 5));
        let pk = PublicKey { g: BitMatrix::random(n, g, &mut rng), z: BitVector::random(n, &mut rng) };
        let e = BitVector::bernoulli(n, omega, &mut rng);
        noise += e.weight();
        let cw = pk.g.mul_vec(&BitVector::random(g, &mut rng)).unwrap().xor(&pk.z).xor(&e);
        let inst = overlay::syndrome_instance(&pk, &Codeword::new(cw, Provenance::ChannelNoised)).unwrap();
        let out = overlay::prange_isd(&inst, &config, s).unwrap();
        // a uniform code of this rate has no other light coset member
        assert_eq!(out.e, e);
        iters.push(out.iterations);
    }
    let p = overlay::prange_success_prob(noise as f64 / (runs as usize * n) as f64, g);
    let p_hat = runs as f64 / iters.iter().sum::<u64>() as f64;
    let sigma = p * ((1.0 - p) / runs as f64).sqrt();
    assert!((p_hat - p).abs() <= 3.0 * sigma, "rate {p_hat} against {p} ± {}", 3.0 * sigma);
    // geometric: about a fraction p of runs finish on the first trial
    let first = iters.iter().filter(|&&i| i == 1).count() as f64 / runs as f64;
    assert!((first - p).abs() <= 3.0 * (p * (1.0 - p) / runs as f64).sqrt(), "first-trial share {first}");
}

#[test]
fn llm_channel_output_feeds_the_decoder_and_attack_one() {
    let params = PrcParams::llm(4096, 3).unwrap();
    let kp = prc::keygen(&params, 3).unwrap();
    // κ picked for a 3% flip rate
    let model = SyntheticTokenModel::new(16, channel::knob_for_flip_rate(0.03).unwrap()).unwrap();
    let tau = prc_lab::attacks::decoder_aligned_tau(params.r);
    let config = mitm::MitmConfig::balanced(params.n, params.r, 3, 4.0, tau);
    let rec = mitm::recover_with_retries(&kp.public.g, params.r, 3, config, 1 << 24, 3).unwrap().recovered;
    let m = params.r.div_ceil(rec.len());
    let mut received = Vec::new();
    for i in 0..m as u64 {
        let (c, _) = prc::encode(&kp.public, &params, derive_seed(3, i));
        let (bits, transcript) = channel::simulate_llm(&model, &c.x, derive_seed(4, i)).unwrap();
        assert_eq!(bits.len(), params.n);
        assert!(transcript.flip_rate() < 0.06);
        let word = Codeword::new(bits, Provenance::ChannelNoised);
        assert_eq!(prc::decode(&kp.secret, &params, &word).unwrap(), Decision::Accept);
        received.push(word);
    }
    let verdict = mitm::distinguish(&rec, &kp.public.z, &received, tau).unwrap();
    assert!(verdict.verdict, "zero ratio {} below {tau}", verdict.ratio);
    assert!(verdict.ratio > parity_zero_prob(0.06, 3) - 0.05);
}

#[test]
fn gim_channel_output_feeds_the_decoder() {
    let params = PrcParams::custom(Scheme::Gim, 2048, 1400, 30, 3, 0.0).unwrap();
    let kp = prc::keygen(&params, 9).unwrap();
    let std = channel::inversion_std_for_flip_rate(0.074).unwrap();
    let ch = GimChannelParams::new(1.0, std).unwrap();
    let mut rng = rng_from_seed(10);
    for i in 0..20u64 {
        let (c, _) = prc::encode(&kp.public, &params, i);
        let run = channel::simulate_gim(&c.x, &ch, derive_seed(11, i));
        let got = Codeword::new(run.recovered, Provenance::ChannelNoised);
        assert!(prc::decode(&kp.secret, &params, &got).unwrap().is_accept());
        let u = prc::random_word(params.n, &mut rng);
        assert!(!prc::decode(&kp.secret, &params, &u).unwrap().is_accept());
    }
}

#[test]
fn same_seed_same_artifacts() {
    for scheme in [Scheme::Llm, Scheme::Gim, Scheme::Revised] {
        let params = PrcParams::custom(scheme, 300, 280, 16, 3, 0.05).unwrap();
        let a = prc::keygen(&params, 77).unwrap();
        let b = prc::keygen(&params, 77).unwrap();
        assert_eq!(a.public, b.public);
        assert_eq!(a.secret, b.secret);
        assert_eq!(prc::encode(&a.public, &params, 5).0, prc::encode(&b.public, &params, 5).0);
        let c = prc::encode(&a.public, &params, 5).0;
        assert_eq!(prc::bernoulli_channel(&c, 0.1, 6).unwrap(), prc::bernoulli_channel(&c, 0.1, 6).unwrap());
        assert_ne!(prc::keygen(&params, 78).unwrap().public, a.public);
    }
}
