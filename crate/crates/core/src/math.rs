//! Log-space combinatorics and small numeric helpers shared across modules.

/// ln(n!)
pub fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// ln C(n, k); callers keep k ≤ n.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// C(n, k) in f64, accurate for the small arguments used here.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    ln_binomial(n, k).exp()
}

/// log(Σ exp(x_i)) without overflow; -inf for an empty or all -inf input.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = terms.iter().map(|&t| (t - m).exp()).sum();
    m + s.ln()
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// -Σ λ ln λ over the given values, with 0·ln 0 = 0. Natural log.
pub fn entropy_nats(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .map(|&l| if l > 0.0 { -l * l.ln() } else { 0.0 })
        .sum()
}

/// Binary entropy h₂(r) in bits, with h₂(0) = h₂(1) = 0.
pub fn binary_entropy_bits(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        return 0.0;
    }
    -(r * r.log2() + (1.0 - r) * (1.0 - r).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn factorials_and_binomials() {
        assert_relative_eq!(ln_factorial(0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_factorial(5).exp(), 120.0, epsilon = 1e-10);
        assert_relative_eq!(binomial(5, 2), 10.0, epsilon = 1e-10);
        // C(100,50)·101/51
        assert_relative_eq!(binomial(101, 50), 1.9980442743337e29, max_relative = 1e-10);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_relative_eq!(log_sum_exp(&[0.0, 0.0]), 2f64.ln(), epsilon = 1e-14);
        // values that would overflow exp individually
        let v = log_sum_exp(&[1000.0, 1000.0 + (3f64).ln()]);
        assert_relative_eq!(v, 1000.0 + 4f64.ln(), epsilon = 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn entropy_edge_cases() {
        assert_eq!(binary_entropy_bits(0.0), 0.0);
        assert_eq!(binary_entropy_bits(1.0), 0.0);
        assert_relative_eq!(binary_entropy_bits(0.5), 1.0, epsilon = 1e-14);
        assert_relative_eq!(entropy_nats(&[0.5, 0.5]), 2f64.ln(), epsilon = 1e-14);
    }
}
