//! Dense linear algebra over truncated Fock spaces.
//!
//! A single bosonic mode truncated at photon number `n_max` is the span of
//! {|0⟩, …, |n_max⟩}; `N` modes use the tensor product with multi-indices
//! k ∈ {0..n_max}^N flattened row-major (last mode fastest). Everything here
//! is immutable after construction and safe to share across threads.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Default guard against accidentally huge tensor-product spaces.
pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),
    #[error("multi-index component {component} has value {value}, outside 0..={n_max}")]
    IndexOutOfRange {
        component: usize,
        value: usize,
        n_max: usize,
    },
    #[error("multi-index has {got} components, expected {expected}")]
    WrongIndexArity { got: usize, expected: usize },
    #[error("truncation configs do not match: {0} vs {1}")]
    MismatchedTruncation(String, String),
    #[error("amplitude vector has length {got}, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("dimension {dim} exceeds the cap of {cap}; raise the cap explicitly if intended")]
    DimensionCap { dim: usize, cap: usize },
    #[error("state not normalized: norms ({0}, {1}) differ from 1 beyond tolerance")]
    NotNormalized(f64, f64),
    #[error("matrix not Hermitian: max |H - H†| entry is {max_asymmetry:.3e} (tol {tol:.3e})")]
    NotHermitian { max_asymmetry: f64, tol: f64 },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("codeword support lies off the gapped lattice at flat indices {indices:?}")]
    OffLattice { indices: Vec<usize> },
    #[error("codewords are not orthogonal: |overlap| = {overlap:.3e}")]
    NonOrthogonal { overlap: f64 },
    #[error(
        "error set breaks the gap assumption: worst K†K' shift magnitude {max_pair_shift} >= g = {g}"
    )]
    GapViolation { max_pair_shift: usize, g: usize },
    #[error(
        "matrix is numerically of full column rank (residual {residual:.3e}); retry with k_max > {k_max}"
    )]
    KernelFullRank { residual: f64, k_max: usize },
    #[error("kernel vector has no {side} part; cannot split into two codewords")]
    CannotSplitKernel { side: &'static str },
    #[error("quadrature did not converge: relative change {relative_change:.3e} after doubling {nodes} nodes")]
    QuadratureNotConverged { relative_change: f64, nodes: usize },
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, FockError>;

/// Per-mode Fock cutoff, mode count and the numeric tolerance used by
/// validation checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    n_max: usize,
    modes: usize,
    tol: f64,
    dim_cap: usize,
}

impl TruncationConfig {
    /// Cutoff `n_max` per mode, `modes` modes, default tolerance 1e-10 and
    /// default dimension cap.
    pub fn new(n_max: usize, modes: usize) -> Result<Self> {
        Self::with_caps(n_max, modes, 1e-10, DEFAULT_DIM_CAP)
    }

    /// Fully explicit constructor; `dim_cap` is the override for spaces
    /// larger than [`DEFAULT_DIM_CAP`].
    pub fn with_caps(n_max: usize, modes: usize, tol: f64, dim_cap: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(FockError::InvalidTruncation("n_max must be >= 1".into()));
        }
        if modes < 1 {
            return Err(FockError::InvalidTruncation("modes must be >= 1".into()));
        }
        if !(tol > 0.0 && tol <= 1e-3) {
            return Err(FockError::InvalidTruncation(format!(
                "tol must lie in (0, 1e-3], got {tol}"
            )));
        }
        let cfg = TruncationConfig {
            n_max,
            modes,
            tol,
            dim_cap,
        };
        let dim = cfg.checked_dim()?;
        if dim > dim_cap {
            return Err(FockError::DimensionCap { dim, cap: dim_cap });
        }
        Ok(cfg)
    }

    pub fn with_tol(self, tol: f64) -> Result<Self> {
        Self::with_caps(self.n_max, self.modes, tol, self.dim_cap)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    /// Total dimension (n_max + 1)^modes.
    pub fn dim(&self) -> usize {
        (self.n_max + 1).pow(self.modes as u32)
    }

    fn checked_dim(&self) -> Result<usize> {
        (self.n_max + 1)
            .checked_pow(self.modes as u32)
            .ok_or_else(|| FockError::InvalidTruncation("dimension overflows usize".into()))
    }

    /// Row-major flat index of a multi-index (last mode fastest).
    pub fn flatten(&self, k: &[usize]) -> Result<usize> {
        if k.len() != self.modes {
            return Err(FockError::WrongIndexArity {
                got: k.len(),
                expected: self.modes,
            });
        }
        let mut flat = 0;
        for (component, &v) in k.iter().enumerate() {
            if v > self.n_max {
                return Err(FockError::IndexOutOfRange {
                    component,
                    value: v,
                    n_max: self.n_max,
                });
            }
            flat = flat * (self.n_max + 1) + v;
        }
        Ok(flat)
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let base = self.n_max + 1;
        let mut k = vec![0; self.modes];
        for slot in k.iter_mut().rev() {
            *slot = flat % base;
            flat /= base;
        }
        k
    }

    /// Squared Euclidean distance between the multi-indices of two flat
    /// indices. For one mode this is just (i - j)².
    pub fn index_distance_sq(&self, i: usize, j: usize) -> f64 {
        if self.modes == 1 {
            let d = i as f64 - j as f64;
            return d * d;
        }
        let a = self.unflatten(i);
        let b = self.unflatten(j);
        a.iter()
            .zip(&b)
            .map(|(&x, &y)| {
                let d = x as f64 - y as f64;
                d * d
            })
            .sum()
    }

    fn describe(&self) -> String {
        format!("(n_max={}, modes={})", self.n_max, self.modes)
    }

    fn check_same(&self, other: &TruncationConfig) -> Result<()> {
        if self.n_max != other.n_max || self.modes != other.modes {
            return Err(FockError::MismatchedTruncation(
                self.describe(),
                other.describe(),
            ));
        }
        Ok(())
    }
}

/// A (possibly unnormalized) state vector over the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: DVector<Complex64>,
    trunc: TruncationConfig,
}

impl FockVector {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>, trunc: TruncationConfig) -> Result<Self> {
        if amplitudes.len() != trunc.dim() {
            return Err(FockError::WrongLength {
                got: amplitudes.len(),
                expected: trunc.dim(),
            });
        }
        Ok(FockVector {
            amplitudes: DVector::from_vec(amplitudes),
            trunc,
        })
    }

    /// Build from a sparse list of (multi-index, amplitude) pairs; repeated
    /// indices accumulate.
    pub fn from_sparse(entries: &[(Vec<usize>, Complex64)], trunc: TruncationConfig) -> Result<Self> {
        let mut amplitudes = DVector::from_element(trunc.dim(), Complex64::ZERO);
        for (k, amp) in entries {
            let flat = trunc.flatten(k)?;
            amplitudes[flat] += amp;
        }
        Ok(FockVector { amplitudes, trunc })
    }

    pub fn zero(trunc: TruncationConfig) -> Self {
        FockVector {
            amplitudes: DVector::from_element(trunc.dim(), Complex64::ZERO),
            trunc,
        }
    }

    pub fn trunc(&self) -> &TruncationConfig {
        &self.trunc
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, flat: usize) -> Complex64 {
        self.amplitudes[flat]
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(FockError::ZeroVector);
        }
        Ok(FockVector {
            amplitudes: &self.amplitudes / Complex64::new(n, 0.0),
            trunc: self.trunc,
        })
    }

    /// ca·|a⟩ + cb·|b⟩ over matching truncations.
    pub fn superpose(a: &FockVector, b: &FockVector, ca: Complex64, cb: Complex64) -> Result<Self> {
        a.trunc.check_same(&b.trunc)?;
        Ok(FockVector {
            amplitudes: &a.amplitudes * ca + &b.amplitudes * cb,
            trunc: a.trunc,
        })
    }

    /// Flat indices carrying amplitude above the truncation tolerance.
    pub fn support(&self) -> Vec<usize> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > self.trunc.tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// |k⟩ for a multi-index k; unit amplitude at the flattened position.
pub fn basis_state(k: &[usize], trunc: TruncationConfig) -> Result<FockVector> {
    let flat = trunc.flatten(k)?;
    let mut amplitudes = DVector::from_element(trunc.dim(), Complex64::ZERO);
    amplitudes[flat] = Complex64::ONE;
    Ok(FockVector { amplitudes, trunc })
}

/// ⟨a|b⟩, conjugate-linear in the first argument.
pub fn inner_product(a: &FockVector, b: &FockVector) -> Result<Complex64> {
    a.trunc.check_same(&b.trunc)?;
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// |a⟩ ⊗ |b⟩; mode counts add, flattening stays row-major with `a` slowest.
pub fn tensor(a: &FockVector, b: &FockVector) -> Result<FockVector> {
    if a.trunc.n_max != b.trunc.n_max {
        return Err(FockError::MismatchedTruncation(
            a.trunc.describe(),
            b.trunc.describe(),
        ));
    }
    let cap = a.trunc.dim_cap.max(b.trunc.dim_cap);
    let trunc = TruncationConfig::with_caps(
        a.trunc.n_max,
        a.trunc.modes + b.trunc.modes,
        a.trunc.tol.min(b.trunc.tol),
        cap,
    )?;
    Ok(FockVector {
        amplitudes: a.amplitudes.kronecker(&b.amplitudes),
        trunc,
    })
}

/// A Hermitian operator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
    trunc: TruncationConfig,
}

impl HermitianOperator {
    /// Validates Hermiticity within the truncation tolerance.
    pub fn from_matrix(entries: DMatrix<Complex64>, trunc: TruncationConfig) -> Result<Self> {
        if entries.nrows() != trunc.dim() || entries.ncols() != trunc.dim() {
            return Err(FockError::WrongLength {
                got: entries.nrows().max(entries.ncols()),
                expected: trunc.dim(),
            });
        }
        let max_asymmetry = asymmetry(&entries);
        if max_asymmetry > trunc.tol {
            return Err(FockError::NotHermitian {
                max_asymmetry,
                tol: trunc.tol,
            });
        }
        Ok(HermitianOperator { entries, trunc })
    }

    /// For matrices Hermitian by construction; skips the validation pass.
    pub(crate) fn from_matrix_unchecked(entries: DMatrix<Complex64>, trunc: TruncationConfig) -> Self {
        debug_assert!(asymmetry(&entries) <= 1e-12 + trunc.tol);
        HermitianOperator { entries, trunc }
    }

    pub fn zero(trunc: TruncationConfig) -> Self {
        HermitianOperator {
            entries: DMatrix::from_element(trunc.dim(), trunc.dim(), Complex64::ZERO),
            trunc,
        }
    }

    /// |a⟩⟨a| of a (not necessarily normalized) vector.
    pub fn projector(a: &FockVector) -> Self {
        let entries = &a.amplitudes * a.amplitudes.adjoint();
        HermitianOperator {
            entries,
            trunc: a.trunc,
        }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn trunc(&self) -> &TruncationConfig {
        &self.trunc
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// A + B and A - B over matching truncations.
    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.trunc.check_same(&other.trunc)?;
        Ok(HermitianOperator {
            entries: &self.entries + &other.entries,
            trunc: self.trunc,
        })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.trunc.check_same(&other.trunc)?;
        Ok(HermitianOperator {
            entries: &self.entries - &other.entries,
            trunc: self.trunc,
        })
    }

    pub fn scale(&self, factor: f64) -> HermitianOperator {
        HermitianOperator {
            entries: &self.entries * Complex64::new(factor, 0.0),
            trunc: self.trunc,
        }
    }
}

/// |a⟩⟨a| - |b⟩⟨b| for unit vectors a, b.
pub fn outer_difference(a: &FockVector, b: &FockVector) -> Result<HermitianOperator> {
    a.trunc.check_same(&b.trunc)?;
    let (na, nb) = (a.norm(), b.norm());
    let tol = a.trunc.tol.max(b.trunc.tol);
    if (na - 1.0).abs() > tol || (nb - 1.0).abs() > tol {
        return Err(FockError::NotNormalized(na, nb));
    }
    let entries = &a.amplitudes * a.amplitudes.adjoint() - &b.amplitudes * b.amplitudes.adjoint();
    Ok(HermitianOperator {
        entries,
        trunc: a.trunc,
    })
}

/// Real eigenvalues in descending order. Errors if the matrix drifted from
/// Hermitian beyond the truncation tolerance.
pub fn hermitian_eigenvalues(h: &HermitianOperator) -> Result<Vec<f64>> {
    let max_asymmetry = asymmetry(&h.entries);
    if max_asymmetry > h.trunc.tol {
        return Err(FockError::NotHermitian {
            max_asymmetry,
            tol: h.trunc.tol,
        });
    }
    // exact symmetrization so the solver sees a clean Hermitian input
    let sym = (&h.entries + h.entries.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(ev)
}

/// Σ |λ_i| over the Hermitian spectrum; equals 2 for a difference of
/// orthogonal pure states.
pub fn trace_norm(h: &HermitianOperator) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.iter().map(|l| l.abs()).sum())
}

/// A ⊗ B for operators; mode counts add.
pub fn tensor_op(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    if a.trunc.n_max != b.trunc.n_max {
        return Err(FockError::MismatchedTruncation(
            a.trunc.describe(),
            b.trunc.describe(),
        ));
    }
    let cap = a.trunc.dim_cap.max(b.trunc.dim_cap);
    let trunc = TruncationConfig::with_caps(
        a.trunc.n_max,
        a.trunc.modes + b.trunc.modes,
        a.trunc.tol.min(b.trunc.tol),
        cap,
    )?;
    Ok(HermitianOperator {
        entries: a.entries.kronecker(&b.entries),
        trunc,
    })
}

fn asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
