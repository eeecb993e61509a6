//! Parameter advice for a target security level, plus the partial-recovery
//! cost around each suggested boundary.
//!
//! `cargo run --example advisor -- 128`

use prc_lab::complexity::{advise_parameters, t_partial, DerivedParams};
use prc_lab::Scheme;

fn main() -> prc_lab::Result<()> {
    let bits: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(128.0);
    let adv = advise_parameters(Scheme::Llm, bits)?;
    println!("target {bits} bits");
    for p in &adv.partial {
        let Some(e) = p.suggest_exponent else {
            println!("t={:2}: beyond 2^48", p.t);
            continue;
        };
        // cost just below and at the first length that reaches the target
        let cost = |e: u32| DerivedParams::new(Scheme::Llm, 1 << e, p.t).map(|dp| t_partial(&dp)).unwrap_or(f64::NAN);
        println!("t={:2}: n > 2^{e}   T_partial(2^{e}) = {:.2}, T_partial(2^{}) = {:.2}", p.t, cost(e), e + 1, cost(e + 1));
    }
    if let Some(e) = adv.overlay_suggest_exponent {
        println!("overlay: n > 2^{e}");
    }
    for note in &adv.notes {
        println!("note: {note}");
    }
    Ok(())
}
