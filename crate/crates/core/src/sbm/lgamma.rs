//! Log-factorials and log-binomials. Everything goes through log-gamma; small
//! arguments come from a lazily built table.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

const TABLE_LEN: usize = 1 << 16;

fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..TABLE_LEN)
            .map(|k| if k < 2 { 0.0 } else { ln_gamma(k as f64 + 1.0) })
            .collect()
    })
}

/// ln(n!)
#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        table()[n as usize]
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// ln C(n, k), with `k <= n`.
#[inline]
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n, "ln_binomial({n}, {k})");
    if k == 0 || k == n {
        return 0.0;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// ln of the multiset coefficient ((n, k)) = C(n + k - 1, k): the number of
/// ways to place `k` indistinguishable items into `n` bins. Zero when `k = 0`.
#[inline]
pub fn ln_multiset(n: u64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    debug_assert!(n > 0, "ln_multiset(0, {k})");
    ln_binomial(n + k - 1, k)
}

/// x ln x with 0 ln 0 = 0.
#[inline]
pub fn xlogx(x: u64) -> f64 {
    if x == 0 {
        0.0
    } else {
        let x = x as f64;
        x * x.ln()
    }
}
