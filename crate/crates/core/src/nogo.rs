//! Non-existence bounds for approximate error correction of g-gapped codes
//! under Gaussian dephasing.
//!
//! The central quantity is
//!
//! ```text
//! ε_{g,σ} = 1 - (1/√2)·(1 + 2·Σ_{k ∈ ℕ^N, k≠0} e^{-g²‖k‖²σ²/2})
//! ```
//!
//! No (ε, E_σ^⊗N)-correctable g-gapped code exists for ε below this value.
//! The N-mode lattice sum factorizes over modes, Σ = (1 + S₁)^N - 1 with S₁
//! the single-mode sum, which is how it is evaluated here. A geometric-series
//! relaxation gives a closed form and the threshold g·σ where the bound
//! starts to bite.
//!
//! Two printed variants of the closed forms in circulation disagree with the
//! threshold table they accompany for N ≥ 2; the default implementations use
//! the forms consistent with the table and the originals are available as
//! `*_paper_literal` for comparison.

use crate::channels::{dephase_apply, DephasingParams};
use crate::codes::GappedCode;
use crate::fock::{outer_difference, trace_norm, FockError, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// How a [`BoundResult`] value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    LatticeSum,
    Geometric,
    Threshold,
}

/// A bound value with its truncation-error budget and parameters.
#[derive(Debug, Clone, Copy)]
pub struct BoundResult {
    pub value: f64,
    /// Rigorous bound on the neglected lattice tail's effect on `value`.
    pub truncation_error: f64,
    pub params: DephasingParams,
    pub method: BoundMethod,
}

/// Σ_{k ∈ ℕ^N, k≠0} e^{-g²‖k‖²σ²/2}, truncated where the one-dimensional
/// terms drop below `tail_tol`, together with a rigorous tail bound.
///
/// Factorizes as (1 + S₁)^N - 1; the tail of S₁ beyond the cutoff K is
/// dominated by the geometric series Σ_{k>K} e^{-αKk}.
pub fn lattice_sum(g: usize, sigma: f64, modes: usize, tail_tol: f64) -> Result<(f64, f64)> {
    let params = DephasingParams::new(sigma, g, modes)?;
    if sigma == 0.0 {
        return Err(FockError::InvalidParameter(
            "lattice sum diverges at sigma = 0 (the bound is vacuous there)".into(),
        ));
    }
    if !(tail_tol > 0.0) {
        return Err(FockError::InvalidParameter(
            "tail_tol must be positive".into(),
        ));
    }
    let alpha = 0.5 * (g as f64 * sigma).powi(2);
    let mut s1 = 0.0;
    let mut k = 1u64;
    loop {
        let term = (-alpha * (k * k) as f64).exp();
        if term < tail_tol {
            break;
        }
        s1 += term;
        k += 1;
        if k > 1_000_000 {
            return Err(FockError::InvalidParameter(format!(
                "lattice sum needs more than 1e6 terms at g·σ = {:.3e}; tail_tol too small",
                g as f64 * sigma
            )));
        }
    }
    // e^{-αk²} <= e^{-αKk} for k >= K, so the dropped tail is geometric
    let ak = alpha * k as f64;
    let tail1 = if ak > 700.0 {
        0.0
    } else {
        (-ak * k as f64).exp() / (1.0 - (-ak).exp())
    };
    let n = params.modes as f64;
    let sum = (1.0 + s1).powf(n) - 1.0;
    let tail = n * (1.0 + s1 + tail1).powf(n - 1.0) * tail1;
    Ok((sum, tail))
}

/// The no-go bound ε_{g,σ} evaluated by the truncated lattice sum.
/// Negative values mean the bound is vacuous; σ → ∞ gives 1 - 1/√2.
pub fn epsilon_g_sigma(g: usize, sigma: f64, modes: usize) -> Result<BoundResult> {
    let (sum, tail) = lattice_sum(g, sigma, modes, 1e-12)?;
    Ok(BoundResult {
        value: 1.0 - FRAC_1_SQRT_2 * (1.0 + 2.0 * sum),
        truncation_error: SQRT_2 * tail,
        params: DephasingParams::new(sigma, g, modes)?,
        method: BoundMethod::LatticeSum,
    })
}

/// Geometric-series relaxation of ε_{g,σ}:
/// 1 - (1/√2)·(2·(1 - e^{-g²σ²/2})^{-N} - 1). Always a lower bound on
/// [`epsilon_g_sigma`]; same σ → ∞ asymptote.
pub fn epsilon_geometric(g: usize, sigma: f64, modes: usize) -> Result<BoundResult> {
    let params = DephasingParams::new(sigma, g, modes)?;
    if sigma == 0.0 {
        return Err(FockError::InvalidParameter(
            "geometric bound requires sigma > 0".into(),
        ));
    }
    let x = (-0.5 * (g as f64 * sigma).powi(2)).exp();
    let value = 1.0 - FRAC_1_SQRT_2 * (2.0 / (1.0 - x).powi(modes as i32) - 1.0);
    Ok(BoundResult {
        value,
        truncation_error: 0.0,
        params,
        method: BoundMethod::Geometric,
    })
}

/// The geometric relaxation exactly as printed, with N multiplying the
/// exponential inside a single denominator. Coincides with
/// [`epsilon_geometric`] at N = 1 and disagrees with the threshold table for
/// N ≥ 2 (the denominator can even change sign); kept for comparison only.
pub fn epsilon_geometric_paper_literal(g: usize, sigma: f64, modes: usize) -> Result<BoundResult> {
    let params = DephasingParams::new(sigma, g, modes)?;
    if sigma == 0.0 {
        return Err(FockError::InvalidParameter(
            "geometric bound requires sigma > 0".into(),
        ));
    }
    let x = (-0.5 * (g as f64 * sigma).powi(2)).exp();
    let denom = 1.0 - modes as f64 * x;
    let value = 1.0 - FRAC_1_SQRT_2 * (1.0 + 2.0 * (1.0 / denom - 1.0));
    Ok(BoundResult {
        value,
        truncation_error: 0.0,
        params,
        method: BoundMethod::Geometric,
    })
}

/// The σ at which the geometric bound crosses zero for gap g:
/// g·σ_thres = √(-2·ln(1 - (2√2 - 2)^{1/N})).
pub fn sigma_thres(g: usize, modes: usize) -> f64 {
    let base: f64 = 2.0 * SQRT_2 - 2.0;
    let gs = (-2.0 * (1.0 - base.powf(1.0 / modes as f64)).ln()).sqrt();
    gs / g as f64
}

/// The threshold exactly as printed: g·σ = √(-2·ln(1 - 2^{3N/2}(2+√2)^{-1/N})).
/// Equals [`sigma_thres`] at N = 1; the log argument turns negative for
/// N ≥ 2, so the result is NaN there. Kept for comparison only.
pub fn sigma_thres_paper_literal(g: usize, modes: usize) -> f64 {
    let n = modes as f64;
    let inner = 1.0 - 2f64.powf(1.5 * n) * (2.0 + SQRT_2).powf(-1.0 / n);
    let gs = (-2.0 * inner.ln()).sqrt();
    gs / g as f64
}

/// [`sigma_thres`] wrapped with its parameters for sweep output.
pub fn sigma_thres_bound(g: usize, modes: usize) -> Result<BoundResult> {
    let sigma = sigma_thres(g, modes);
    Ok(BoundResult {
        value: g as f64 * sigma,
        truncation_error: 0.0,
        params: DephasingParams::new(sigma, g, modes)?,
        method: BoundMethod::Threshold,
    })
}

/// The trace-norm bound of the dephased codeword pair:
/// δ ≤ √2 + 2√2·Σ_{k≠0} e^{-g²‖k‖²σ²/2}. Related to the no-go value by
/// ε = 1 - δ/2.
pub fn lemma4_bound(g: usize, sigma: f64, modes: usize) -> Result<f64> {
    let (sum, _) = lattice_sum(g, sigma, modes, 1e-12)?;
    Ok(SQRT_2 + 2.0 * SQRT_2 * sum)
}

/// Outcome of checking the trace-norm bound on a concrete code.
#[derive(Debug, Clone, Copy)]
pub struct Lemma4Report {
    /// ‖E_σ^⊗N(ρ₊ - ρ₋)‖₁ computed by eigendecomposition.
    pub norm_pm: f64,
    /// ‖E_σ^⊗N(ρ₊ᵢ - ρ₋ᵢ)‖₁.
    pub norm_pmi: f64,
    /// √2 + 2√2·(lattice sum), evaluated at the code's gap and mode count.
    pub bound: f64,
    /// Extra slack from the truncated lattice tail.
    pub tail_slack: f64,
    pub holds: bool,
}

/// Build |±⟩ and |±i⟩ from the codewords, push both differences through the
/// exact elementwise dephasing channel, and check that the smaller trace
/// norm obeys the bound.
pub fn verify_lemma4(code: &GappedCode, sigma: f64) -> Result<Lemma4Report> {
    if !(sigma > 0.0) {
        return Err(FockError::InvalidParameter(
            "verify_lemma4 requires sigma > 0 (noiseless codewords stay orthogonal)".into(),
        ));
    }
    let (plus, minus) = code.plus_minus();
    let (plus_i, minus_i) = code.plus_minus_i();
    let diff_pm = outer_difference(&plus, &minus)?;
    let diff_pmi = outer_difference(&plus_i, &minus_i)?;
    let norm_pm = trace_norm(&dephase_apply(&diff_pm, sigma)?)?;
    let norm_pmi = trace_norm(&dephase_apply(&diff_pmi, sigma)?)?;
    let (sum, tail) = lattice_sum(code.g(), sigma, code.modes(), 1e-12)?;
    let bound = SQRT_2 + 2.0 * SQRT_2 * sum;
    let tail_slack = 2.0 * SQRT_2 * tail;
    let holds = norm_pm.min(norm_pmi) <= bound + tail_slack + 1e-9;
    Ok(Lemma4Report {
        norm_pm,
        norm_pmi,
        bound,
        tail_slack,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_gapped_code, random_gapped_code};
    use crate::fock::TruncationConfig;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    // Σ_{k>=1} e^{-2k²} to 20 digits, summed term by term in extended
    // precision (k up to 6 already saturates f64)
    const S1_GSIGMA_2: f64 = 0.13567076109450761;

    #[test]
    fn lattice_sum_single_mode() {
        let (sum, tail) = lattice_sum(1, 2.0, 1, 1e-15).unwrap();
        assert_relative_eq!(sum, S1_GSIGMA_2, epsilon = 1e-14);
        assert!(tail < 1e-12);
        // g and sigma enter only through g·σ
        let (sum2, _) = lattice_sum(2, 1.0, 1, 1e-15).unwrap();
        assert_relative_eq!(sum, sum2, epsilon = 1e-15);
    }

    #[test]
    fn lattice_sum_two_modes_product_structure() {
        let (s1, _) = lattice_sum(1, 2.0, 1, 1e-15).unwrap();
        let (s2, _) = lattice_sum(1, 2.0, 2, 1e-15).unwrap();
        assert_relative_eq!(s2, (1.0 + s1) * (1.0 + s1) - 1.0, epsilon = 1e-14);
        assert_relative_eq!(s2, 0.28974807760497819, epsilon = 1e-13);
    }

    #[test]
    fn lattice_sum_vanishes_at_large_gsigma() {
        let (sum, tail) = lattice_sum(10, 10.0, 1, 1e-15).unwrap();
        assert_eq!(sum, 0.0);
        assert!(tail < 1e-300);
    }

    #[test]
    fn lattice_sum_rejects_sigma_zero() {
        assert!(lattice_sum(1, 0.0, 1, 1e-12).is_err());
    }

    #[test]
    fn epsilon_values_against_oracle() {
        let b = epsilon_g_sigma(1, 2.0, 1).unwrap();
        assert_relative_eq!(b.value, 0.10102578845611976, epsilon = 1e-13);
        assert!(b.truncation_error < 1e-11);

        let b2 = epsilon_g_sigma(1, 2.0, 2).unwrap();
        assert_relative_eq!(b2.value, -0.11687244220703973, epsilon = 1e-12);

        // asymptote
        let b = epsilon_g_sigma(1, 20.0, 1).unwrap();
        assert_relative_eq!(b.value, 1.0 - FRAC_1_SQRT_2, epsilon = 1e-12);
        assert!(b.value <= 1.0);
    }

    #[test]
    fn epsilon_geometric_against_oracle() {
        // 1 - (1/√2)(1 + 2/(e²-1))
        let b = epsilon_geometric(1, 2.0, 1).unwrap();
        assert_relative_eq!(b.value, 0.071543845686208382, epsilon = 1e-13);
        // paper-literal form coincides at N = 1
        let lit = epsilon_geometric_paper_literal(1, 2.0, 1).unwrap();
        assert_relative_eq!(lit.value, b.value, epsilon = 1e-14);
        // large gσ asymptote
        let b = epsilon_geometric(1, 20.0, 1).unwrap();
        assert_relative_eq!(b.value, 0.29289321881345248, epsilon = 1e-12);
        assert!(epsilon_geometric(1, 0.0, 1).is_err());
    }

    #[test]
    fn geometric_is_a_relaxation() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..200 {
            let g = rng.gen_range(1..12usize);
            let sigma: f64 = rng.gen_range(0.05..3.0);
            let modes = rng.gen_range(1..5usize);
            let lat = epsilon_g_sigma(g, sigma, modes).unwrap();
            let geo = epsilon_geometric(g, sigma, modes).unwrap();
            assert!(
                geo.value <= lat.value + lat.truncation_error + 1e-12,
                "g={g} sigma={sigma} N={modes}: {} > {}",
                geo.value,
                lat.value
            );
        }
    }

    #[test]
    fn epsilon_monotone_in_sigma_and_g() {
        for modes in [1usize, 2] {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..60 {
                let sigma = 0.05 * i as f64;
                let v = epsilon_g_sigma(3, sigma, modes).unwrap().value;
                assert!(v >= prev - 1e-12, "sigma sweep dipped at {sigma}");
                prev = v;
            }
            let mut prev = f64::NEG_INFINITY;
            for g in 1..12 {
                let v = epsilon_g_sigma(g, 0.4, modes).unwrap().value;
                assert!(v >= prev - 1e-12, "g sweep dipped at {g}");
                prev = v;
            }
        }
    }

    #[test]
    fn threshold_tabulated_values() {
        // table anchor: 1.87, 2.19, 2.36, 2.48, 2.56 for N = 1..5
        let expected = [
            1.8776299816732188,
            2.1954245632681352,
            2.3664019476236656,
            2.4818703234410110,
            2.5683890889787432,
        ];
        let table = [1.87, 2.19, 2.36, 2.48, 2.56];
        for (i, (&precise, &rounded)) in expected.iter().zip(&table).enumerate() {
            let n = i + 1;
            let gs = sigma_thres(1, n);
            assert_relative_eq!(gs, precise, epsilon = 1e-12);
            assert!((gs - rounded).abs() <= 0.01, "N={n}: {gs} vs {rounded}");
            // scaling: g·sigma_thres(g) is g-independent
            assert_relative_eq!(7.0 * sigma_thres(7, n), gs, epsilon = 1e-12);
        }
    }

    #[test]
    fn threshold_is_geometric_zero_crossing() {
        for modes in 1..=5usize {
            let g = 3;
            let sigma = sigma_thres(g, modes);
            let at = epsilon_geometric(g, sigma, modes).unwrap().value;
            assert!(at.abs() < 1e-10, "N={modes}: {at}");
            let above = epsilon_geometric(g, 1.01 * sigma, modes).unwrap().value;
            assert!(above > 0.0);
        }
    }

    #[test]
    fn paper_literal_threshold_matches_only_single_mode() {
        assert_relative_eq!(
            sigma_thres_paper_literal(1, 1),
            sigma_thres(1, 1),
            epsilon = 1e-12
        );
        assert!(sigma_thres_paper_literal(1, 2).is_nan());
    }

    #[test]
    fn lemma4_bound_and_identity() {
        let b = lemma4_bound(1, 2.0, 1).unwrap();
        assert_relative_eq!(b, 1.7979484230877605, epsilon = 1e-13);
        // ε = 1 - δ/2 exactly
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..100 {
            let g = rng.gen_range(1..10usize);
            let sigma: f64 = rng.gen_range(0.05..3.0);
            let modes = rng.gen_range(1..4usize);
            let delta = lemma4_bound(g, sigma, modes).unwrap();
            let eps = epsilon_g_sigma(g, sigma, modes).unwrap().value;
            assert_relative_eq!(1.0 - delta / 2.0, eps, epsilon = 1e-12);
        }
        // gσ → ∞ leaves only √2
        assert_relative_eq!(lemma4_bound(10, 5.0, 1).unwrap(), SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn verify_lemma4_two_level_code() {
        // |0⟩, |g⟩: the dephased difference has trace norm 2e^{-g²σ²/2}
        let g = 3;
        let trunc = TruncationConfig::new(6, 1).unwrap();
        let code = make_gapped_code(
            &[(vec![0], Complex64::new(1.0, 0.0))],
            &[(vec![g], Complex64::new(1.0, 0.0))],
            g,
            vec![0],
            trunc,
        )
        .unwrap();
        for sigma in [0.2, 0.7, 1.5] {
            let rep = verify_lemma4(&code, sigma).unwrap();
            let expected = 2.0 * (-0.5 * (g as f64 * sigma).powi(2)).exp();
            assert_relative_eq!(rep.norm_pm, expected, epsilon = 1e-10);
            assert_relative_eq!(rep.norm_pmi, expected, epsilon = 1e-10);
            assert!(rep.holds);
        }
        assert!(verify_lemma4(&code, 0.0).is_err());
    }

    #[test]
    fn verify_lemma4_random_codes() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..25 {
            let g = rng.gen_range(2..9usize);
            let trunc = TruncationConfig::new(40, 1).unwrap();
            let code = random_gapped_code(&mut rng, g, vec![0], trunc).unwrap();
            let sigma = rng.gen_range(0.1..2.0);
            let rep = verify_lemma4(&code, sigma).unwrap();
            assert!(rep.holds, "g={g} sigma={sigma}: {rep:?}");
        }
    }
}
