//! Fock-basis matrix elements of the single- and two-mode squeeze operators.
//!
//! Both follow from the normal-ordered disentangling of the squeeze unitary,
//! `exp(−t·A†) · cosh^{−(N+k)} r · exp(t·A)`, with `t = tanh r` and `A` the
//! pair-annihilation operator (`a_x a_y` or `a²/2`). Each term is summed in
//! log space with an explicit sign.

use super::combinatorics::{ln_binomial, ln_factorial};

/// Signed amplitude `⟨n_x, n_y| Ŝ₂(r) |l_x, l_y⟩` for real `r ≥ 0`.
///
/// Zero unless `l_x − n_x = l_y − n_y = d`; otherwise
/// `tanh^d r / cosh^{n_x+n_y+1} r · Σ_g (−sinh² r)^g √(C(n_x,g) C(n_y,g) C(l_x,d+g) C(l_y,d+g))`
/// over `0 ≤ g ≤ min(n_x, n_y)` with `d + g ≥ 0`.
pub fn s2_amplitude(n_x: usize, n_y: usize, l_x: usize, l_y: usize, r: f64) -> f64 {
    let d = l_x as i64 - n_x as i64;
    if d != l_y as i64 - n_y as i64 {
        return 0.0;
    }
    if r == 0.0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    let ln_t = r.tanh().ln();
    let ln_c = r.cosh().ln();
    let total = (n_x + n_y + 1) as f64;
    let g_min = (-d).max(0) as usize;
    let g_max = n_x.min(n_y);
    let mut sum = 0.0;
    for g in g_min..=g_max {
        let k = (d + g as i64) as usize;
        // Pairwise grouping keeps the x ↔ y swap bit-exact.
        let ln_binoms = (ln_binomial(n_x, g) + ln_binomial(n_y, g))
            + (ln_binomial(l_x, k) + ln_binomial(l_y, k));
        // tanh^{d+2g} · cosh^{2g} = tanh^d · sinh^{2g}
        let ln_mag =
            (d + 2 * g as i64) as f64 * ln_t + (2.0 * g as f64 - total) * ln_c + 0.5 * ln_binoms;
        let term = ln_mag.exp();
        sum += if g % 2 == 0 { term } else { -term };
    }
    sum
}

/// `|⟨n_x, n_y| Ŝ₂(r) |l_x, l_y⟩|²`; zero for index combinations that break
/// the conserved phonon-number difference.
pub fn s2_matrix_element_sq(n_x: usize, n_y: usize, l_x: usize, l_y: usize, r: f64) -> f64 {
    let a = s2_amplitude(n_x, n_y, l_x, l_y, r);
    a * a
}

/// Signed amplitude `⟨n| Ŝ(r) |l⟩` of the single-mode squeeze operator; only
/// the squeezing axis orientation is dropped, which leaves magnitudes intact.
pub fn s1_amplitude(n: usize, l: usize, r: f64) -> f64 {
    if !(n + l).is_multiple_of(2) {
        return 0.0;
    }
    if r == 0.0 {
        return if n == l { 1.0 } else { 0.0 };
    }
    let ln_half_t = (r.tanh() / 2.0).ln();
    let ln_c = r.cosh().ln();
    let base = 0.5 * (ln_factorial(l) + ln_factorial(n));
    let mut sum = 0.0;
    // k pair-annihilations then j pair-creations, m phonons in between
    for k in 0..=l / 2 {
        let m = l - 2 * k;
        if m > n {
            continue;
        }
        let j = (n - m) / 2;
        let ln_mag = (k + j) as f64 * ln_half_t + base
            - ln_factorial(k)
            - ln_factorial(j)
            - ln_factorial(m)
            - (m as f64 + 0.5) * ln_c;
        let term = ln_mag.exp();
        sum += if j.is_multiple_of(2) { term } else { -term };
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sech2(r: f64) -> f64 {
        1.0 / r.cosh().powi(2)
    }

    #[test]
    fn vacuum_to_vacuum() {
        assert!((s2_matrix_element_sq(0, 0, 0, 0, 1.0) - sech2(1.0)).abs() < 1e-15);
        assert!((s2_matrix_element_sq(0, 0, 0, 0, 1.0) - 0.4200).abs() < 5e-5);
    }

    #[test]
    fn delta_violation_is_zero() {
        assert_eq!(s2_matrix_element_sq(1, 0, 0, 0, 0.7), 0.0);
        assert_eq!(s2_matrix_element_sq(3, 1, 2, 2, 0.7), 0.0);
    }

    #[test]
    fn diagonal_pairs_match_fock_expansion() {
        for r in [0.3, 1.0, 1.7] {
            for n in 0..20 {
                let expected = sech2(r) * r.tanh().powi(2 * n as i32);
                let got = s2_matrix_element_sq(n, n, 0, 0, r);
                assert!(
                    (got - expected).abs() <= 1e-13 * expected.max(1e-300),
                    "r {r} n {n}"
                );
            }
        }
    }

    #[test]
    fn identity_at_zero_squeezing() {
        assert_eq!(s2_matrix_element_sq(3, 5, 3, 5, 0.0), 1.0);
        assert_eq!(s2_matrix_element_sq(3, 5, 4, 6, 0.0), 0.0);
        assert_eq!(s1_amplitude(4, 4, 0.0), 1.0);
        assert_eq!(s1_amplitude(4, 2, 0.0), 0.0);
    }

    #[test]
    fn single_mode_vacuum_column_is_squeezed_vacuum() {
        let r: f64 = 0.8;
        let t = r.tanh();
        for m in 0..10usize {
            let p = s1_amplitude(2 * m, 0, r).powi(2);
            let expected = (ln_factorial(2 * m) - 2.0 * ln_factorial(m)).exp()
                / 4f64.powi(m as i32)
                * t.powi(2 * m as i32)
                / r.cosh();
            assert!((p - expected).abs() < 1e-14, "m {m}");
            assert_eq!(s1_amplitude(2 * m + 1, 0, r), 0.0);
        }
    }

    #[test]
    fn single_mode_columns_are_normalized() {
        for l in 0..6 {
            let norm: f64 = (0..400).map(|n| s1_amplitude(n, l, 0.9).powi(2)).sum();
            assert!((norm - 1.0).abs() < 1e-10, "l {l}: {norm}");
        }
    }
}
