//! Combinatorics and probability helpers shared by the estimators and attacks.

use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::factorial::ln_binomial;

/// Exact C(n, k), or `None` on u128 overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i)/(i+1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// log₂ C(n, k). Small `min(k, n−k)` is summed term by term; larger
/// arguments go through log-gamma.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k <= 256 {
        let mut s = KahanSum::default();
        for i in 0..k {
            s.add(((n - i) as f64 / (i + 1) as f64).log2());
        }
        s.value()
    } else {
        ln_binomial(n, k) / std::f64::consts::LN_2
    }
}

/// Compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Pr[X ≥ k] for X ~ Bin(trials, p).
pub fn binomial_upper_tail(trials: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > trials {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let b = Binomial::new(p, trials).expect("p checked to lie in (0,1)");
    b.sf(k - 1)
}

/// One binomial standard deviation of a proportion estimated from `trials` draws.
pub fn proportion_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// `1 − ∏ (1 − a_i)` evaluated as `−expm1(Σ log1p(−a_i))`, which stays
/// accurate when the product is near 1 or underflows.
pub fn one_minus_product(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = KahanSum::default();
    for a in terms {
        if a >= 1.0 {
            return 1.0;
        }
        s.add((-a).ln_1p());
    }
    -s.value().exp_m1()
}
