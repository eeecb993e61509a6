//! Closed-form parameter derivation and attack-cost estimates.
//!
//! All costs are returned as log₂ values with constant factors taken as 1.
//! For the GIM layout the multi-bit public key has `k` columns rather than
//! `g`, and every cost that scales with the column count uses `k`.

use serde::{Deserialize, Serialize};

use crate::attacks::weakkey::{weak_key_prob_gim, weak_key_prob_llm};
use crate::error::{Error, Result};
use crate::prc::{gim_eta, llm_rows, security_bits, Scheme, GIM_MESSAGE_BITS, GIM_PARITY_BITS};
use crate::stats::log2_binomial;

/// Code length of the language-model table.
pub const LLM_TABLE_N: usize = 1 << 17;
/// Code length of the image-model table.
pub const GIM_TABLE_N: usize = 1 << 14;
/// Returned by [`lemma1_max_t`] when ε is so close to ½ that the bound is useless.
pub const LEMMA_T_CAP: usize = 1 << 20;

/// Largest integer `t` with `t < (¼log₂r − 1) / log₂(1/(2ε))`.
pub fn lemma1_max_t(r: usize, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParams(format!("ε = {epsilon} must lie in (0, 1/2)")));
    }
    if r <= 16 {
        return Err(Error::InvalidParams(format!("r = {r} must exceed 16")));
    }
    let x = (0.25 * (r as f64).log2() - 1.0) / (1.0 / (2.0 * epsilon)).log2();
    if !x.is_finite() || x > LEMMA_T_CAP as f64 {
        return Ok(LEMMA_T_CAP);
    }
    Ok((x.ceil() as usize).saturating_sub(1))
}

/// The ε at which the decoding bound is tight for `t`: `½·2^{−(¼log₂r − 1)/t}`.
pub fn epsilon_for_t(r: usize, t: usize) -> f64 {
    0.5 * (-(0.25 * (r as f64).log2() - 1.0) / t as f64).exp2()
}

/// Parameters implied by a scheme's configuration at `(n, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub scheme: Scheme,
    pub n: usize,
    pub t: usize,
    pub r: usize,
    pub g: usize,
    pub lambda: usize,
    /// Public-key column count. Equals `g` except for GIM.
    pub k: usize,
    pub message_bits: usize,
    pub parity_bits: usize,
    pub eta: Option<f64>,
}

impl DerivedParams {
    pub fn new(scheme: Scheme, n: usize, t: usize) -> Result<Self> {
        let lambda = security_bits(n, t);
        match scheme {
            Scheme::Llm | Scheme::Revised => {
                Ok(Self { scheme, n, t, r: llm_rows(n), g: lambda, lambda, k: lambda, message_bits: 0, parity_bits: 0, eta: None })
            }
            Scheme::Gim => {
                let k = lambda + GIM_MESSAGE_BITS + GIM_PARITY_BITS;
                let r = n
                    .checked_sub(k + lambda)
                    .filter(|&r| r > 16)
                    .ok_or_else(|| Error::InvalidParams(format!("n = {n} too small for the GIM layout at t = {t}")))?;
                Ok(Self {
                    scheme,
                    n,
                    t,
                    r,
                    g: lambda,
                    lambda,
                    k,
                    message_bits: GIM_MESSAGE_BITS,
                    parity_bits: GIM_PARITY_BITS,
                    eta: Some(gim_eta(lambda, lambda)),
                })
            }
        }
    }

    pub fn epsilon(&self) -> f64 {
        epsilon_for_t(self.r, self.t)
    }
}

/// log₂ of `k·α·C(n/2, ⌈t/2⌉)`, the partial-key-recovery cost with a constant
/// number of recovered rows.
pub fn t_partial(dp: &DerivedParams) -> f64 {
    let t1 = dp.t.div_ceil(2) as u64;
    let t2 = dp.t as u64 - t1;
    let h = (dp.n / 2) as u64;
    let log_q = log2_binomial(h, t1) + log2_binomial(h, t2) - log2_binomial(dp.n as u64, dp.t as u64);
    let log_r = (dp.r as f64).log2();
    let log_alpha =
        if dp.t.is_multiple_of(2) { -0.5 * (log_q + log_r) } else { 0.5 * ((t1 as f64).log2() - log_q - log_r - ((h - t1) as f64).log2()) };
    (dp.k as f64).log2() + log_alpha + log2_binomial(h, t1)
}

/// log₂ of the weak-key probability for the scheme.
pub fn log2_p_weak(dp: &DerivedParams) -> f64 {
    let p = match dp.scheme {
        Scheme::Gim => weak_key_prob_gim(dp.n, dp.r, dp.t),
        _ => weak_key_prob_llm(dp.n, dp.r, dp.t),
    };
    p.log2()
}

/// log₂ of `P⁻¹·n·k`.
pub fn t_dis(dp: &DerivedParams) -> f64 {
    -log2_p_weak(dp) + (dp.n as f64).log2() + (dp.k as f64).log2()
}

/// log₂ of `(½+ε)^{−k}·n³`, and for GIM also the concrete `2^{k/g}·n³`.
pub fn t_overlay(dp: &DerivedParams) -> (f64, Option<f64>) {
    let log_n3 = 3.0 * (dp.n as f64).log2();
    let theory = -(dp.k as f64) * (0.5 + dp.epsilon()).log2() + log_n3;
    let concrete = (dp.scheme == Scheme::Gim).then(|| dp.k as f64 / dp.g as f64 + log_n3);
    (theory, concrete)
}

/// One row of a complexity table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub t: usize,
    pub epsilon: f64,
    pub rho: f64,
    pub eta: Option<f64>,
    pub log2_t_partial: f64,
    pub log2_p_weak: f64,
    pub log2_t_dis: f64,
    pub log2_t_overlay: f64,
    pub log2_t_overlay_concrete: Option<f64>,
    pub lambda: usize,
}

pub fn complexity_row(dp: &DerivedParams) -> ComplexityRow {
    let epsilon = dp.epsilon();
    let (ov, ov_c) = t_overlay(dp);
    ComplexityRow {
        t: dp.t,
        epsilon,
        rho: 0.5 - epsilon,
        eta: dp.eta,
        log2_t_partial: t_partial(dp),
        log2_p_weak: log2_p_weak(dp),
        log2_t_dis: t_dis(dp),
        log2_t_overlay: ov,
        log2_t_overlay_concrete: ov_c,
        lambda: dp.lambda,
    }
}

/// Supported `t` range and code length of each scheme's table.
pub fn table_layout(scheme: Scheme) -> (usize, std::ops::RangeInclusive<usize>) {
    match scheme {
        Scheme::Gim => (GIM_TABLE_N, 3..=7),
        _ => (LLM_TABLE_N, 3..=14),
    }
}

/// Rows for `t_min..=t_max` at the scheme's table length.
pub fn emit_table(scheme: Scheme, t_min: usize, t_max: usize) -> Result<Vec<ComplexityRow>> {
    let (n, range) = table_layout(scheme);
    for t in [t_min, t_max] {
        if !range.contains(&t) {
            return Err(Error::TOutOfRange { t, min: *range.start(), max: *range.end() });
        }
    }
    (t_min..=t_max).map(|t| Ok(complexity_row(&DerivedParams::new(scheme, n, t)?))).collect()
}

/// Code lengths are searched as powers of two in this exponent range.
pub const ADVISOR_EXPONENTS: std::ops::RangeInclusive<u32> = 8..=48;
/// ε of the largest tabulated `t`; bounds the `t` range the advisor considers
/// for the overlay attack.
pub const ADVISOR_EPSILON: f64 = 0.426;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialAdvice {
    pub t: usize,
    /// Smallest `e` with `T_partial(2^e) ≥ target`; `None` if beyond the search range.
    pub min_exponent: Option<u32>,
    /// Recommendation reads "n > 2^suggest_exponent".
    pub suggest_exponent: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    pub scheme: Scheme,
    pub target_bits: f64,
    pub partial: Vec<PartialAdvice>,
    /// Smallest `e` at which some admissible `t` pushes `T_overlay` to the target.
    pub overlay_min_exponent: Option<u32>,
    pub overlay_suggest_exponent: Option<u32>,
    /// Largest code length each deployment can carry.
    pub max_feasible_exponent: u32,
    pub notes: Vec<String>,
}

/// Candidate `t` values reported by the advisor.
pub const ADVISOR_T: [usize; 4] = [9, 11, 13, 15];

fn first_exponent(mut ok: impl FnMut(usize) -> Option<bool>) -> Option<u32> {
    ADVISOR_EXPONENTS.clone().find(|&e| ok(1usize << e).unwrap_or(false))
}

/// For each candidate `t`, the smallest power-of-two `n` whose partial-recovery
/// cost reaches `target_bits`, and the smallest `n` that defeats the overlay
/// attack for the best `t`. The weak-key attack is left out because the
/// revised key generation removes it.
pub fn advise_parameters(scheme: Scheme, target_bits: f64) -> Result<Advisory> {
    if target_bits > 256.0 {
        return Err(Error::InvalidParams(format!("target {target_bits} exceeds 256 bits")));
    }
    let partial = ADVISOR_T
        .iter()
        .map(|&t| {
            let min_exponent = first_exponent(|n| {
                let dp = DerivedParams::new(scheme, n, t).ok()?;
                Some(t_partial(&dp) >= target_bits)
            });
            PartialAdvice { t, min_exponent, suggest_exponent: min_exponent.map(|e| e.saturating_sub(1)) }
        })
        .collect();
    let overlay_min_exponent = first_exponent(|n| {
        let r = DerivedParams::new(scheme, n, 3).ok()?.r;
        let t_max = lemma1_max_t(r, ADVISOR_EPSILON).ok()?.min(64);
        let best =
            (3..=t_max).filter_map(|t| DerivedParams::new(scheme, n, t).ok()).map(|dp| t_overlay(&dp).0).fold(f64::NEG_INFINITY, f64::max);
        Some(best >= target_bits)
    });
    let (max_feasible_exponent, note) = match scheme {
        Scheme::Gim => (16, "image latents carry at most 2^16 bits"),
        _ => (20, "2^15 tokens carry at most 2^20 bits"),
    };
    let mut notes = vec![format!("{note}; suggestions above 2^{max_feasible_exponent} are not deployable")];
    notes.push("t = 3 is the common default; t = log2(n)/2 = 7 is the usual alternative".into());
    notes.push("g is held at floor(log2 C(n,t))".into());
    Ok(Advisory {
        scheme,
        target_bits,
        partial,
        overlay_min_exponent,
        overlay_suggest_exponent: overlay_min_exponent.map(|e| e.saturating_sub(1)),
        max_feasible_exponent,
        notes,
    })
}
