//! Factorials and binomials, exact for small arguments and in log space beyond.

use std::sync::OnceLock;

const EXACT_LIMIT: u64 = 30;
const TABLE_LEN: usize = 4096;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        t.push(0.0);
        let mut acc = 0.0;
        for k in 1..TABLE_LEN {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_factorial_table();
    if n < table.len() {
        return table[n];
    }
    // Stirling series; relative error far below f64 resolution at this size.
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
}

/// Exact binomial coefficient for `n < 30`, `None` otherwise.
fn binomial_exact(n: u64, k: u64) -> Option<u64> {
    if n >= EXACT_LIMIT {
        return None;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    Some(acc)
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    match binomial_exact(n as u64, k as u64) {
        Some(b) => (b as f64).ln(),
        None => ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials_are_exact() {
        assert_eq!(binomial_exact(10, 3), Some(120));
        assert_eq!(binomial_exact(29, 14), Some(77_558_760));
        assert_eq!(ln_binomial(5, 6), f64::NEG_INFINITY);
        assert_eq!(ln_binomial(7, 0), 0.0);
    }

    #[test]
    fn log_path_agrees_with_exact_path() {
        // C(40, 20) = 137846528820
        let v = ln_binomial(40, 20).exp();
        assert!((v - 137_846_528_820.0).abs() / 137_846_528_820.0 < 1e-12);
        let stirling = ln_factorial(5000);
        let direct: f64 = (1..=5000).map(|k| (k as f64).ln()).sum();
        assert!((stirling - direct).abs() / direct < 1e-13);
    }
}
