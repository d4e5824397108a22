//! Noise channels on truncated Fock space.
//!
//! Gaussian dephasing acts elementwise, E_σ(|n⟩⟨m|) = e^{-(m-n)²σ²/2}|n⟩⟨m|,
//! per mode and multiplicatively across modes. The same channel also has the
//! integral form ∫ p(θ) e^{-iθn̂} ρ e^{iθn̂} dθ with p a centered Gaussian of
//! standard deviation σ; both are implemented and cross-validated against
//! each other. Amplitude damping and the modular recovery map are finite
//! Kraus families; the damping family closes exactly on the truncated space,
//! the recovery map is trace preserving on the span of |1⟩..|⌊n_max/g⌋·g⟩.

use crate::fock::{FockError, HermitianOperator, Result, TruncationConfig};
use crate::quadrature::GaussLegendre;
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use std::ops::RangeInclusive;

/// A finite Kraus family {K_i} on the truncated space.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<DMatrix<Complex64>>,
    label: String,
    trunc: TruncationConfig,
}

impl KrausChannel {
    pub fn new(kraus: Vec<DMatrix<Complex64>>, label: impl Into<String>, trunc: TruncationConfig) -> Result<Self> {
        let dim = trunc.dim();
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(FockError::WrongLength {
                    got: k.nrows().max(k.ncols()),
                    expected: dim,
                });
            }
        }
        Ok(KrausChannel {
            kraus,
            label: label.into(),
            trunc,
        })
    }

    pub fn kraus(&self) -> &[DMatrix<Complex64>] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn trunc(&self) -> &TruncationConfig {
        &self.trunc
    }

    /// Σ K ρ K† on a raw matrix (not necessarily Hermitian).
    pub fn apply_matrix(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let dim = self.trunc.dim();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(FockError::WrongLength {
                got: rho.nrows().max(rho.ncols()),
                expected: dim,
            });
        }
        let mut out = DMatrix::from_element(dim, dim, Complex64::ZERO);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// Σ K ρ K† on a Hermitian operator; Hermiticity is preserved.
    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        if rho.trunc().n_max() != self.trunc.n_max() || rho.trunc().modes() != self.trunc.modes() {
            return Err(FockError::MismatchedTruncation(
                format!("(n_max={}, modes={})", rho.trunc().n_max(), rho.trunc().modes()),
                format!("(n_max={}, modes={})", self.trunc.n_max(), self.trunc.modes()),
            ));
        }
        let out = self.apply_matrix(rho.entries())?;
        // numerically re-symmetrize the last bits of rounding
        let sym = (&out + out.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(HermitianOperator::from_matrix_unchecked(sym, *rho.trunc()))
    }

    /// max |(Σ K†K - 1)_{ij}| on the whole truncated space.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.trunc.dim();
        let idx: Vec<usize> = (0..dim).collect();
        self.completeness_defect_on(&idx)
    }

    /// max |(Σ K†K - 1)_{ij}| restricted to rows/columns in `span`.
    pub fn completeness_defect_on(&self, span: &[usize]) -> f64 {
        let dim = self.trunc.dim();
        let mut sum = DMatrix::from_element(dim, dim, Complex64::ZERO);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        let mut worst: f64 = 0.0;
        for &i in span {
            for &j in span {
                let expected = if i == j { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((sum[(i, j)] - expected).norm());
            }
        }
        worst
    }
}

/// Dephasing strength σ together with the gap and mode count it is applied
/// against; carries the parameter triple used by the bound sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    pub sigma: f64,
    pub g: usize,
    pub modes: usize,
}

impl DephasingParams {
    pub fn new(sigma: f64, g: usize, modes: usize) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(FockError::InvalidParameter(format!(
                "sigma must be >= 0, got {sigma}"
            )));
        }
        if g < 1 {
            return Err(FockError::InvalidParameter("gap g must be >= 1".into()));
        }
        if modes < 1 {
            return Err(FockError::InvalidParameter("modes must be >= 1".into()));
        }
        Ok(DephasingParams { sigma, g, modes })
    }
}

/// Gaussian dephasing in its exact elementwise form: entry (j, k) is scaled
/// by e^{-‖j-k‖²σ²/2} with the multi-index Euclidean distance. The diagonal
/// (and hence the trace) is untouched.
pub fn dephase_apply(rho: &HermitianOperator, sigma: f64) -> Result<HermitianOperator> {
    if !(sigma >= 0.0) {
        return Err(FockError::InvalidParameter(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    let trunc = *rho.trunc();
    let dim = trunc.dim();
    let mut out = rho.entries().clone();
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                let d2 = trunc.index_distance_sq(i, j);
                out[(i, j)] *= (-0.5 * d2 * sigma * sigma).exp();
            }
        }
    }
    Ok(HermitianOperator::from_matrix_unchecked(out, trunc))
}

/// Gaussian dephasing via numerical quadrature of the integral form.
///
/// The Gaussian is truncated to [-8σ, 8σ] (tail < 1.1e-15) and each
/// single-mode mask value ∫ p(θ) cos(θ·d) dθ is integrated with composite
/// Gauss–Legendre using `quad_nodes` points per panel. The panel count grows
/// with σ·d so the oscillation stays resolved; a single Gauss–Hermite panel
/// fails completely in this regime (error ~1 for σ ≥ 1, d ≳ 15).
pub fn dephase_by_quadrature(
    rho: &HermitianOperator,
    sigma: f64,
    quad_nodes: usize,
) -> Result<HermitianOperator> {
    if !(sigma >= 0.0) {
        return Err(FockError::InvalidParameter(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if quad_nodes < 16 {
        return Err(FockError::InvalidParameter(format!(
            "quad_nodes must be >= 16, got {quad_nodes}"
        )));
    }
    let trunc = *rho.trunc();
    if sigma == 0.0 {
        return Ok(rho.clone());
    }
    let mask = dephasing_mask_by_quadrature(sigma, trunc.n_max(), quad_nodes);
    let dim = trunc.dim();
    let mut out = rho.entries().clone();
    let single_mode = trunc.modes() == 1;
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            let factor = if single_mode {
                mask[i.abs_diff(j)]
            } else {
                let a = trunc.unflatten(i);
                let b = trunc.unflatten(j);
                a.iter().zip(&b).map(|(&x, &y)| mask[x.abs_diff(y)]).product()
            };
            out[(i, j)] *= factor;
        }
    }
    Ok(HermitianOperator::from_matrix_unchecked(out, trunc))
}

/// Single-mode mask values M(d) = ∫ p(θ) cos(θ d) dθ for d = 0..=n_max.
fn dephasing_mask_by_quadrature(sigma: f64, n_max: usize, quad_nodes: usize) -> Vec<f64> {
    let rule = GaussLegendre::new(quad_nodes);
    let half_width = 8.0 * sigma;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    (0..=n_max)
        .map(|d| {
            // keep the per-panel phase below quad_nodes/2 radians
            let phase = 2.0 * half_width * d as f64;
            let panels = ((2.0 * phase / quad_nodes as f64).ceil() as usize).max(1);
            rule.integrate_composite(-half_width, half_width, panels, |theta| {
                norm * (-theta * theta / (2.0 * sigma * sigma)).exp() * (theta * d as f64).cos()
            })
        })
        .collect()
}

/// Bosonic amplitude damping with loss probability γ per excitation.
///
/// A_k = Σ_{m≥k} √(C(m,k) (1-γ)^{m-k} γ^k) |m-k⟩⟨m| for k = 0..n_max; the
/// per-column binomial sum closes exactly on the truncated space, so
/// Σ A†A = 1 holds to machine precision. Kraus operators that vanish
/// identically (γ = 0 or γ = 1) are dropped.
pub fn amp_damp_kraus(gamma: f64, trunc: TruncationConfig) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(FockError::InvalidParameter(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    if trunc.modes() != 1 {
        return Err(FockError::InvalidParameter(
            "amplitude damping is a single-mode channel".into(),
        ));
    }
    let dim = trunc.dim();
    let n_max = trunc.n_max();
    let mut kraus = Vec::new();
    for k in 0..=n_max {
        let mut op = DMatrix::from_element(dim, dim, Complex64::ZERO);
        let mut nonzero = false;
        for m in k..=n_max {
            let c = crate::math::binomial(m as u64, k as u64);
            let amp = (c * pow_with_zero(1.0 - gamma, (m - k) as i32) * pow_with_zero(gamma, k as i32)).sqrt();
            if amp != 0.0 {
                op[(m - k, m)] = Complex64::new(amp, 0.0);
                nonzero = true;
            }
        }
        if nonzero {
            kraus.push(op);
        }
    }
    KrausChannel::new(kraus, format!("amp_damp(gamma={gamma})"), trunc)
}

// 0^0 = 1 so that the γ ∈ {0, 1} boundaries stay exact.
fn pow_with_zero(base: f64, exp: i32) -> f64 {
    if exp == 0 {
        1.0
    } else {
        base.powi(exp)
    }
}

/// Σ K ρ K†.
pub fn apply_kraus(ch: &KrausChannel, rho: &HermitianOperator) -> Result<HermitianOperator> {
    ch.apply(rho)
}

/// λ·E_σ(ρ) + (1-λ)·A_γ(ρ), the per-mode mixed noise model.
pub fn mix_apply(
    rho: &HermitianOperator,
    lambda: f64,
    sigma: f64,
    gamma: f64,
) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(FockError::InvalidParameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let dephased = dephase_apply(rho, sigma)?;
    let damped = amp_damp_kraus(gamma, *rho.trunc())?.apply(rho)?;
    dephased.scale(lambda).add(&damped.scale(1.0 - lambda))
}

/// The recovery map R_j = Σ_{k≥1} |kg⟩⟨kg-j|, j = 0..g-1, together with the
/// span on which it is trace preserving.
#[derive(Debug, Clone)]
pub struct RecoveryMap {
    pub channel: KrausChannel,
    /// Fock levels 1..=⌊n_max/g⌋·g on which Σ R†R equals the identity.
    pub valid_span: RangeInclusive<usize>,
}

/// Build the recovery map that projects g-gapped support back onto the
/// lattice {|g⟩, |2g⟩, …}. Requires n_max ≥ 2g so the {|g⟩, |2g⟩} qubit
/// fits below the cutoff.
pub fn recovery_kraus(g: usize, trunc: TruncationConfig) -> Result<RecoveryMap> {
    if g < 1 {
        return Err(FockError::InvalidParameter("gap g must be >= 1".into()));
    }
    if trunc.modes() != 1 {
        return Err(FockError::InvalidParameter(
            "the recovery map is a single-mode channel".into(),
        ));
    }
    let n_max = trunc.n_max();
    if n_max < 2 * g {
        return Err(FockError::InvalidParameter(format!(
            "n_max = {n_max} is too small for gap g = {g}; need n_max >= {}",
            2 * g
        )));
    }
    let dim = trunc.dim();
    let k_top = n_max / g;
    let mut kraus = Vec::with_capacity(g);
    for j in 0..g {
        let mut op = DMatrix::from_element(dim, dim, Complex64::ZERO);
        for k in 1..=k_top {
            op[(k * g, k * g - j)] = Complex64::ONE;
        }
        kraus.push(op);
    }
    let channel = KrausChannel::new(kraus, format!("recovery(g={g})"), trunc)?;
    Ok(RecoveryMap {
        channel,
        valid_span: 1..=(k_top * g),
    })
}

/// Qubit dephasing D(ρ) = (1-p)ρ + pZρZ on a 2×2 density matrix: the
/// off-diagonals shrink by (1-2p), the diagonal is fixed.
pub fn qubit_dephasing_apply(rho2: &Matrix2<Complex64>, p: f64) -> Result<Matrix2<Complex64>> {
    if !(0.0..=0.5).contains(&p) {
        return Err(FockError::InvalidParameter(format!(
            "dephasing probability p must lie in [0, 1/2], got {p}"
        )));
    }
    let mut out = *rho2;
    let scale = Complex64::new(1.0 - 2.0 * p, 0.0);
    out[(0, 1)] *= scale;
    out[(1, 0)] *= scale;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::basis_state;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(trunc: TruncationConfig, seed: u64) -> HermitianOperator {
        // cheap deterministic LCG; plenty for test fixtures
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let dim = trunc.dim();
        let mut m = DMatrix::from_element(dim, dim, Complex64::ZERO);
        for i in 0..dim {
            for j in 0..=i {
                let z = if i == j {
                    c(next(), 0.0)
                } else {
                    c(next(), next())
                };
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianOperator::from_matrix(m, trunc).unwrap()
    }

    #[test]
    fn dephasing_fixes_diagonals() {
        let trunc = TruncationConfig::new(5, 1).unwrap();
        let rho = random_hermitian(trunc, 7);
        let out = dephase_apply(&rho, 1.3).unwrap();
        for i in 0..trunc.dim() {
            assert_eq!(out.entry(i, i), rho.entry(i, i));
        }
        assert_eq!(out.trace(), rho.trace());
    }

    #[test]
    fn dephasing_offdiagonal_factor() {
        let trunc = TruncationConfig::new(3, 1).unwrap();
        let rho = random_hermitian(trunc, 3);
        let out = dephase_apply(&rho, 1.0).unwrap();
        let expected = rho.entry(0, 1) * (-0.5f64).exp();
        assert_relative_eq!(out.entry(0, 1).re, expected.re, epsilon = 1e-15);
        assert_relative_eq!(out.entry(0, 1).im, expected.im, epsilon = 1e-15);
        // sigma = 0 is the identity channel
        let id = dephase_apply(&rho, 0.0).unwrap();
        assert_eq!(id.entries(), rho.entries());
        assert!(dephase_apply(&rho, -1.0).is_err());
    }

    #[test]
    fn dephasing_multi_mode_distance() {
        let trunc = TruncationConfig::new(2, 2).unwrap();
        let rho = random_hermitian(trunc, 11);
        let out = dephase_apply(&rho, 0.7).unwrap();
        let i = trunc.flatten(&[0, 1]).unwrap();
        let j = trunc.flatten(&[2, 2]).unwrap();
        // ‖(0,1)-(2,2)‖² = 4 + 1 = 5
        let expected = rho.entry(i, j) * (-0.5f64 * 5.0 * 0.49).exp();
        assert_relative_eq!(out.entry(i, j).re, expected.re, epsilon = 1e-15);
        assert_relative_eq!(out.entry(i, j).im, expected.im, epsilon = 1e-15);
    }

    #[test]
    fn quadrature_matches_elementwise() {
        let trunc = TruncationConfig::new(12, 1).unwrap();
        let rho = random_hermitian(trunc, 5);
        for sigma in [0.3, 1.0, 3.0] {
            let exact = dephase_apply(&rho, sigma).unwrap();
            let quad = dephase_by_quadrature(&rho, sigma, 64).unwrap();
            let diff = (exact.entries() - quad.entries()).map(|z| z.norm()).max();
            assert!(diff < 1e-8, "sigma={sigma}: diff {diff:.3e}");
        }
    }

    #[test]
    fn quadrature_edge_cases() {
        let trunc = TruncationConfig::new(6, 1).unwrap();
        let rho = random_hermitian(trunc, 9);
        let out = dephase_by_quadrature(&rho, 0.0, 64).unwrap();
        let diff = (out.entries() - rho.entries()).map(|z| z.norm()).max();
        assert!(diff < 1e-14);

        // a diagonal state is untouched up to quadrature normalization error
        let mut m = DMatrix::from_element(trunc.dim(), trunc.dim(), Complex64::ZERO);
        for i in 0..trunc.dim() {
            m[(i, i)] = c(1.0 / trunc.dim() as f64, 0.0);
        }
        let diag = HermitianOperator::from_matrix(m, trunc).unwrap();
        let out = dephase_by_quadrature(&diag, 1.0, 64).unwrap();
        let diff = (out.entries() - diag.entries()).map(|z| z.norm()).max();
        assert!(diff < 1e-12);

        assert!(dephase_by_quadrature(&rho, 1.0, 8).is_err());
    }

    #[test]
    fn quadrature_on_two_modes() {
        let trunc = TruncationConfig::new(3, 2).unwrap();
        let rho = random_hermitian(trunc, 13);
        let exact = dephase_apply(&rho, 0.8).unwrap();
        let quad = dephase_by_quadrature(&rho, 0.8, 64).unwrap();
        let diff = (exact.entries() - quad.entries()).map(|z| z.norm()).max();
        assert!(diff < 1e-10, "diff {diff:.3e}");
    }

    #[test]
    fn amp_damp_limits() {
        let trunc = TruncationConfig::new(4, 1).unwrap();
        let ch = amp_damp_kraus(0.0, trunc).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let id_defect = (&ch.kraus()[0] - DMatrix::identity(5, 5)).map(|z| z.norm()).max();
        assert_eq!(id_defect, 0.0);

        let total = amp_damp_kraus(1.0, trunc).unwrap();
        let rho = HermitianOperator::projector(&basis_state(&[3], trunc).unwrap());
        let out = total.apply(&rho).unwrap();
        assert_relative_eq!(out.entry(0, 0).re, 1.0, epsilon = 1e-14);
        let offmass: f64 = out
            .entries()
            .iter()
            .map(|z| z.norm())
            .sum::<f64>();
        assert_relative_eq!(offmass, 1.0, epsilon = 1e-14);

        assert!(amp_damp_kraus(-0.1, trunc).is_err());
        assert!(amp_damp_kraus(1.1, trunc).is_err());
    }

    #[test]
    fn amp_damp_matrix_element() {
        let trunc = TruncationConfig::new(3, 1).unwrap();
        let ch = amp_damp_kraus(0.2, trunc).unwrap();
        // ⟨0|A_1|1⟩ = √γ
        let a1 = &ch.kraus()[1];
        assert_relative_eq!(a1[(0, 1)].re, 0.2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn amp_damp_completeness_exact() {
        for gamma in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let trunc = TruncationConfig::new(20, 1).unwrap();
            let ch = amp_damp_kraus(gamma, trunc).unwrap();
            assert!(ch.completeness_defect() < 1e-12, "gamma={gamma}");
        }
    }

    #[test]
    fn amp_damp_half_loss_on_one_photon() {
        let trunc = TruncationConfig::new(2, 1).unwrap();
        let ch = amp_damp_kraus(0.5, trunc).unwrap();
        let rho = HermitianOperator::projector(&basis_state(&[1], trunc).unwrap());
        let out = ch.apply(&rho).unwrap();
        assert_relative_eq!(out.entry(0, 0).re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(out.entry(1, 1).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn kraus_identity_channel() {
        let trunc = TruncationConfig::new(3, 1).unwrap();
        let ident = KrausChannel::new(vec![DMatrix::identity(4, 4)], "id", trunc).unwrap();
        let rho = random_hermitian(trunc, 17);
        let out = apply_kraus(&ident, &rho).unwrap();
        let diff = (out.entries() - rho.entries()).map(|z| z.norm()).max();
        assert!(diff < 1e-15);
    }

    #[test]
    fn kraus_dimension_mismatch() {
        let trunc = TruncationConfig::new(3, 1).unwrap();
        assert!(KrausChannel::new(vec![DMatrix::identity(3, 3)], "bad", trunc).is_err());
    }

    #[test]
    fn mix_apply_limits() {
        let trunc = TruncationConfig::new(4, 1).unwrap();
        let rho = random_hermitian(trunc, 23);
        let sigma = 0.9;
        let gamma = 0.3;
        let pure_dephase = dephase_apply(&rho, sigma).unwrap();
        let pure_damp = amp_damp_kraus(gamma, trunc).unwrap().apply(&rho).unwrap();

        let m1 = mix_apply(&rho, 1.0, sigma, gamma).unwrap();
        let m0 = mix_apply(&rho, 0.0, sigma, gamma).unwrap();
        assert!((m1.entries() - pure_dephase.entries()).map(|z| z.norm()).max() < 1e-14);
        assert!((m0.entries() - pure_damp.entries()).map(|z| z.norm()).max() < 1e-14);
        assert!(mix_apply(&rho, 1.5, sigma, gamma).is_err());

        // diagonal rho with gamma = 0 is fixed by both channels
        let mut m = DMatrix::from_element(trunc.dim(), trunc.dim(), Complex64::ZERO);
        for i in 0..trunc.dim() {
            m[(i, i)] = c(0.2, 0.0);
        }
        let diag = HermitianOperator::from_matrix(m, trunc).unwrap();
        let out = mix_apply(&diag, 0.5, sigma, 0.0).unwrap();
        assert!((out.entries() - diag.entries()).map(|z| z.norm()).max() < 1e-14);
    }

    #[test]
    fn trace_preservation_and_positivity() {
        let trunc = TruncationConfig::new(8, 1).unwrap();
        for seed in 1..6u64 {
            // random pure state input
            let mut state = seed;
            let mut next = move || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let amps: Vec<Complex64> = (0..trunc.dim()).map(|_| c(next(), next())).collect();
            let psi = crate::fock::FockVector::from_amplitudes(amps, trunc)
                .unwrap()
                .normalized()
                .unwrap();
            let rho = HermitianOperator::projector(&psi);
            for out in [
                dephase_apply(&rho, 0.8).unwrap(),
                amp_damp_kraus(0.3, trunc).unwrap().apply(&rho).unwrap(),
                mix_apply(&rho, 0.4, 0.8, 0.3).unwrap(),
            ] {
                assert_relative_eq!(out.trace().re, 1.0, epsilon = 1e-10);
                assert!(out.trace().im.abs() < 1e-12);
                let min_ev = crate::fock::hermitian_eigenvalues(&out)
                    .unwrap()
                    .into_iter()
                    .fold(f64::INFINITY, f64::min);
                assert!(min_ev > -1e-10, "min eigenvalue {min_ev:.3e}");
            }
        }
    }

    #[test]
    fn recovery_map_structure() {
        let trunc = TruncationConfig::new(9, 1).unwrap();
        let rec = recovery_kraus(3, trunc).unwrap();
        assert_eq!(rec.channel.kraus().len(), 3);
        assert_eq!(rec.valid_span, 1..=9);

        // g=2: R_1 maps |3⟩ (= 2·2-1) to |4⟩
        let rec2 = recovery_kraus(2, trunc).unwrap();
        let r1 = &rec2.channel.kraus()[1];
        assert_eq!(r1[(4, 3)], c(1.0, 0.0));

        assert!(recovery_kraus(5, trunc).is_err());
    }

    #[test]
    fn recovery_completeness_on_valid_span() {
        for g in [1usize, 2, 3, 5] {
            let trunc = TruncationConfig::new(17, 1).unwrap();
            let rec = recovery_kraus(g, trunc).unwrap();
            let span: Vec<usize> = rec.valid_span.clone().collect();
            assert!(rec.channel.completeness_defect_on(&span) < 1e-12, "g={g}");
        }
        // g=1: R_0 is the identity on the k >= 1 span
        let trunc = TruncationConfig::new(6, 1).unwrap();
        let rec = recovery_kraus(1, trunc).unwrap();
        assert_eq!(rec.channel.kraus().len(), 1);
        let span: Vec<usize> = rec.valid_span.clone().collect();
        assert_eq!(span, vec![1, 2, 3, 4, 5, 6]);
        assert!(rec.channel.completeness_defect_on(&span) < 1e-15);
    }

    #[test]
    fn qubit_dephasing_action() {
        let rho = Matrix2::new(c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0));
        let out = qubit_dephasing_apply(&rho, 0.1).unwrap();
        assert_relative_eq!(out[(0, 1)].re, 0.8, epsilon = 1e-15);
        assert_eq!(out[(0, 0)], c(0.5, 0.0));

        let ident = qubit_dephasing_apply(&rho, 0.0).unwrap();
        assert_eq!(ident, rho);
        let full = qubit_dephasing_apply(&rho, 0.5).unwrap();
        assert_eq!(full[(0, 1)], c(0.0, 0.0));
        assert!(qubit_dephasing_apply(&rho, 0.6).is_err());
    }

    #[test]
    fn effective_qubit_consistency() {
        // dephase_apply restricted to span{|0⟩,|g⟩} equals qubit dephasing
        // with 1 - 2p = exp(-g²σ²/2)
        let g = 3usize;
        let sigma = 0.4;
        let trunc = TruncationConfig::new(4, 1).unwrap();
        let mut m = DMatrix::from_element(trunc.dim(), trunc.dim(), Complex64::ZERO);
        m[(0, 0)] = c(0.6, 0.0);
        m[(g, g)] = c(0.4, 0.0);
        m[(0, g)] = c(0.3, 0.2);
        m[(g, 0)] = c(0.3, -0.2);
        let rho = HermitianOperator::from_matrix(m, trunc).unwrap();
        let out = dephase_apply(&rho, sigma).unwrap();

        let p = 0.5 * (1.0 - (-0.5 * (g as f64 * sigma).powi(2)).exp());
        let rho2 = Matrix2::new(c(0.6, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(0.4, 0.0));
        let out2 = qubit_dephasing_apply(&rho2, p).unwrap();
        assert_relative_eq!(out.entry(0, g).re, out2[(0, 1)].re, epsilon = 1e-15);
        assert_relative_eq!(out.entry(0, g).im, out2[(0, 1)].im, epsilon = 1e-15);
    }
}
