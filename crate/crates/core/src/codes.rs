//! Construction and validation of g-gapped bosonic codes.
//!
//! A g-gapped code holds both codewords on the lattice {n + g·k}: the gap
//! keeps number-shift errors from mapping one codeword onto the other. This
//! module builds the generic codes, the binomial family, and codes extracted
//! from the kernel of the expectation matrix of a number-shift error set,
//! and checks the Knill–Laflamme conditions numerically.

use crate::fock::{
    inner_product, FockError, FockVector, Result, TruncationConfig, DEFAULT_DIM_CAP,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A pair of orthonormal logical codewords supported on the lattice
/// {n + g·k : k ∈ ℕ^N}.
#[derive(Debug, Clone)]
pub struct GappedCode {
    zero_l: FockVector,
    one_l: FockVector,
    g: usize,
    base_shift: Vec<usize>,
}

impl GappedCode {
    /// Validates unit norms, orthogonality and lattice support.
    pub fn new(
        zero_l: FockVector,
        one_l: FockVector,
        g: usize,
        base_shift: Vec<usize>,
    ) -> Result<Self> {
        if g < 1 {
            return Err(FockError::InvalidParameter("gap g must be >= 1".into()));
        }
        let trunc = *zero_l.trunc();
        if base_shift.len() != trunc.modes() {
            return Err(FockError::WrongIndexArity {
                got: base_shift.len(),
                expected: trunc.modes(),
            });
        }
        let tol = trunc.tol();
        let (n0, n1) = (zero_l.norm(), one_l.norm());
        if (n0 - 1.0).abs() > tol || (n1 - 1.0).abs() > tol {
            return Err(FockError::NotNormalized(n0, n1));
        }
        let overlap = inner_product(&zero_l, &one_l)?.norm();
        if overlap > tol {
            return Err(FockError::NonOrthogonal { overlap });
        }
        let mut offenders = Vec::new();
        for v in [&zero_l, &one_l] {
            for flat in v.support() {
                let k = trunc.unflatten(flat);
                let on_lattice = k
                    .iter()
                    .zip(&base_shift)
                    .all(|(&ki, &ni)| ki >= ni && (ki - ni) % g == 0);
                if !on_lattice {
                    offenders.push(flat);
                }
            }
        }
        if !offenders.is_empty() {
            offenders.sort_unstable();
            offenders.dedup();
            return Err(FockError::OffLattice { indices: offenders });
        }
        Ok(GappedCode {
            zero_l,
            one_l,
            g,
            base_shift,
        })
    }

    pub fn zero_l(&self) -> &FockVector {
        &self.zero_l
    }

    pub fn one_l(&self) -> &FockVector {
        &self.one_l
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn base_shift(&self) -> &[usize] {
        &self.base_shift
    }

    pub fn modes(&self) -> usize {
        self.zero_l.trunc().modes()
    }

    pub fn trunc(&self) -> &TruncationConfig {
        self.zero_l.trunc()
    }

    /// (|+⟩, |-⟩) = (|0_L⟩ ± |1_L⟩)/√2.
    pub fn plus_minus(&self) -> (FockVector, FockVector) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let plus = FockVector::superpose(&self.zero_l, &self.one_l, s, s)
            .expect("codewords share a truncation");
        let minus = FockVector::superpose(&self.zero_l, &self.one_l, s, -s)
            .expect("codewords share a truncation");
        (plus, minus)
    }

    /// (|+i⟩, |-i⟩) = (|0_L⟩ ± i|1_L⟩)/√2.
    pub fn plus_minus_i(&self) -> (FockVector, FockVector) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let si = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let plus = FockVector::superpose(&self.zero_l, &self.one_l, s, si)
            .expect("codewords share a truncation");
        let minus = FockVector::superpose(&self.zero_l, &self.one_l, s, -si)
            .expect("codewords share a truncation");
        (plus, minus)
    }

    /// Mean photon number Σ_modes ⟨n̂_m⟩ of a codeword.
    pub fn mean_photon_number(&self, which: usize) -> f64 {
        let v = if which == 0 { &self.zero_l } else { &self.one_l };
        let trunc = v.trunc();
        v.amplitudes()
            .iter()
            .enumerate()
            .map(|(flat, amp)| {
                let total: usize = trunc.unflatten(flat).iter().sum();
                total as f64 * amp.norm_sqr()
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        let pack = |v: &FockVector| -> Vec<(usize, f64, f64)> {
            v.amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > 0.0)
                .map(|(i, a)| (i, a.re, a.im))
                .collect()
        };
        let json = CodeJson {
            g: self.g,
            n: self.base_shift.clone(),
            modes: self.modes(),
            n_max: self.trunc().n_max(),
            codewords: vec![pack(&self.zero_l), pack(&self.one_l)],
        };
        serde_json::to_string_pretty(&json).expect("code serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: CodeJson =
            serde_json::from_str(text).map_err(|e| FockError::Serde(e.to_string()))?;
        if json.codewords.len() != 2 {
            return Err(FockError::Serde(format!(
                "expected exactly 2 codewords, got {}",
                json.codewords.len()
            )));
        }
        let trunc = TruncationConfig::new(json.n_max, json.modes)?;
        let unpack = |entries: &[(usize, f64, f64)]| -> Result<FockVector> {
            let mut amps = vec![Complex64::ZERO; trunc.dim()];
            for &(i, re, im) in entries {
                if i >= trunc.dim() {
                    return Err(FockError::Serde(format!(
                        "flat index {i} outside dimension {}",
                        trunc.dim()
                    )));
                }
                amps[i] = Complex64::new(re, im);
            }
            FockVector::from_amplitudes(amps, trunc)
        };
        GappedCode::new(
            unpack(&json.codewords[0])?,
            unpack(&json.codewords[1])?,
            json.g,
            json.n,
        )
    }
}

/// On-disk form of a code: flat indices with real/imaginary amplitude parts.
#[derive(Debug, Serialize, Deserialize)]
struct CodeJson {
    g: usize,
    n: Vec<usize>,
    modes: usize,
    n_max: usize,
    codewords: Vec<Vec<(usize, f64, f64)>>,
}

/// Build a gapped code from sparse amplitude lists; inputs are normalized.
pub fn make_gapped_code(
    amplitudes0: &[(Vec<usize>, Complex64)],
    amplitudes1: &[(Vec<usize>, Complex64)],
    g: usize,
    base_shift: Vec<usize>,
    trunc: TruncationConfig,
) -> Result<GappedCode> {
    let zero_l = FockVector::from_sparse(amplitudes0, trunc)?.normalized()?;
    let one_l = FockVector::from_sparse(amplitudes1, trunc)?.normalized()?;
    GappedCode::new(zero_l, one_l, g, base_shift)
}

/// The g-gapped binomial code correcting `d_phase` phase errors:
/// |0_L⟩ ∝ Σ_{j even} √C(2D+1, j)|gj⟩ and |1_L⟩ the odd-j partner.
/// Needs n_max ≥ (2D+1)·g.
pub fn binomial_codewords(d_phase: usize, g: usize, trunc: TruncationConfig) -> Result<GappedCode> {
    if trunc.modes() != 1 {
        return Err(FockError::InvalidParameter(
            "binomial codes are single-mode".into(),
        ));
    }
    let required = (2 * d_phase + 1) * g;
    if trunc.n_max() < required {
        return Err(FockError::InvalidParameter(format!(
            "cutoff n_max = {} too small for the binomial code; need n_max >= {required}",
            trunc.n_max()
        )));
    }
    let mut even = Vec::new();
    let mut odd = Vec::new();
    let scale = 0.5f64.powi(d_phase as i32); // √(2^{-2D})
    for j in 0..=(2 * d_phase + 1) {
        let amp = scale * crate::math::binomial((2 * d_phase + 1) as u64, j as u64).sqrt();
        let entry = (vec![g * j], Complex64::new(amp, 0.0));
        if j % 2 == 0 {
            even.push(entry);
        } else {
            odd.push(entry);
        }
    }
    let zero_l = FockVector::from_sparse(&even, trunc)?;
    let one_l = FockVector::from_sparse(&odd, trunc)?;
    GappedCode::new(zero_l, one_l, g, vec![0])
}

/// Gain errors push Fock support up by u, loss errors pull it down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    Gain,
    Loss,
}

/// Coefficients k_{p,j} of a number-shift Kraus operator, indexed by the
/// lower Fock level j of each matrix element.
#[derive(Debug, Clone)]
pub enum ShiftCoefficients {
    /// √((j+u)!/j!): the coefficients of a^u and (a†)^u.
    LadderPower,
    /// Arbitrary user coefficients; entries beyond the list are zero.
    Explicit(Vec<Complex64>),
}

/// One number-shift Kraus operator: Σ_j k_j |j+u⟩⟨j| (gain) or
/// Σ_j k_j |j⟩⟨j+u| (loss).
#[derive(Debug, Clone)]
pub struct NumberShiftError {
    pub direction: ShiftDirection,
    pub shift: usize,
    pub coefficients: ShiftCoefficients,
}

impl NumberShiftError {
    pub fn new(direction: ShiftDirection, shift: usize, coefficients: ShiftCoefficients) -> Result<Self> {
        if shift < 1 {
            return Err(FockError::InvalidParameter(
                "number-shift errors need shift u >= 1; the identity is implicit".into(),
            ));
        }
        Ok(NumberShiftError {
            direction,
            shift,
            coefficients,
        })
    }

    /// a^u (loss by u with ladder coefficients).
    pub fn lowering_power(u: usize) -> Result<Self> {
        Self::new(ShiftDirection::Loss, u, ShiftCoefficients::LadderPower)
    }

    /// (a†)^u (gain by u with ladder coefficients).
    pub fn raising_power(u: usize) -> Result<Self> {
        Self::new(ShiftDirection::Gain, u, ShiftCoefficients::LadderPower)
    }

    /// +u for gain, -u for loss.
    pub fn signed_shift(&self) -> i64 {
        match self.direction {
            ShiftDirection::Gain => self.shift as i64,
            ShiftDirection::Loss => -(self.shift as i64),
        }
    }

    fn coefficient(&self, j: usize) -> Complex64 {
        match &self.coefficients {
            ShiftCoefficients::LadderPower => {
                let mut prod = 1.0;
                for i in 1..=self.shift {
                    prod *= (j + i) as f64;
                }
                Complex64::new(prod.sqrt(), 0.0)
            }
            ShiftCoefficients::Explicit(v) => v.get(j).copied().unwrap_or(Complex64::ZERO),
        }
    }

    /// Dense single-mode matrix on the truncated space.
    pub fn to_matrix(&self, trunc: &TruncationConfig) -> Result<DMatrix<Complex64>> {
        if trunc.modes() != 1 {
            return Err(FockError::InvalidParameter(
                "number-shift error sets are single-mode".into(),
            ));
        }
        let dim = trunc.dim();
        let u = self.shift;
        let mut m = DMatrix::from_element(dim, dim, Complex64::ZERO);
        for j in 0..dim.saturating_sub(u) {
            let c = self.coefficient(j);
            match self.direction {
                ShiftDirection::Gain => m[(j + u, j)] = c,
                ShiftDirection::Loss => m[(j, j + u)] = c,
            }
        }
        Ok(m)
    }

    pub fn label(&self) -> String {
        match (&self.direction, &self.coefficients) {
            (ShiftDirection::Loss, ShiftCoefficients::LadderPower) => format!("a^{}", self.shift),
            (ShiftDirection::Gain, ShiftCoefficients::LadderPower) => format!("ad^{}", self.shift),
            (ShiftDirection::Loss, _) => format!("loss(u={})", self.shift),
            (ShiftDirection::Gain, _) => format!("gain(u={})", self.shift),
        }
    }
}

/// A finite set Ω of number-shift errors; the identity is adjoined
/// implicitly wherever pairs K†K' are formed.
#[derive(Debug, Clone, Default)]
pub struct ErrorSet {
    ops: Vec<NumberShiftError>,
}

impl ErrorSet {
    pub fn from_ops(ops: Vec<NumberShiftError>) -> Self {
        ErrorSet { ops }
    }

    /// {a^l : 1 ≤ l ≤ loss_max} ∪ {(a†)^m : 1 ≤ m ≤ gain_max}.
    pub fn ladder(loss_max: usize, gain_max: usize) -> Self {
        let mut ops = Vec::new();
        for l in 1..=loss_max {
            ops.push(NumberShiftError::lowering_power(l).expect("l >= 1"));
        }
        for m in 1..=gain_max {
            ops.push(NumberShiftError::raising_power(m).expect("m >= 1"));
        }
        ErrorSet { ops }
    }

    /// Ω = {a}.
    pub fn lowering() -> Self {
        Self::ladder(1, 0)
    }

    pub fn ops(&self) -> &[NumberShiftError] {
        &self.ops
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Worst |shift(K†K')| over (Ω ∪ {I})²: the quantity the gap must beat
    /// for the off-diagonal Knill–Laflamme block to vanish identically.
    pub fn max_pair_shift(&self) -> usize {
        let mut lo = 0i64;
        let mut hi = 0i64;
        for op in &self.ops {
            lo = lo.min(op.signed_shift());
            hi = hi.max(op.signed_shift());
        }
        (hi - lo) as usize
    }

    fn max_gain(&self) -> usize {
        self.ops
            .iter()
            .map(|o| o.signed_shift().max(0) as usize)
            .max()
            .unwrap_or(0)
    }
}

/// Worst-case violations of the Knill–Laflamme conditions over an error set.
#[derive(Debug, Clone, Copy)]
pub struct KLReport {
    /// Worst |⟨j_L|K†K'|j'_L⟩| with j ≠ j'.
    pub max_offdiagonal_violation: f64,
    /// Worst |⟨0_L|K†K'|0_L⟩ - ⟨1_L|K†K'|1_L⟩|.
    pub max_deformation_violation: f64,
    pub pass: bool,
}

/// Evaluate the Knill–Laflamme conditions for `code` against `errs ∪ {I}`.
///
/// Errors out if some pair K†K' shifts by at least g, in which case the gap
/// argument cannot silence the off-diagonal block. Operators are applied on
/// a space extended by the largest gain so no expectation is clipped by the
/// cutoff.
pub fn kl_check(code: &GappedCode, errs: &ErrorSet, tol: f64) -> Result<KLReport> {
    if code.modes() != 1 {
        return Err(FockError::InvalidParameter(
            "kl_check handles single-mode codes".into(),
        ));
    }
    let max_pair = errs.max_pair_shift();
    if max_pair >= code.g() {
        return Err(FockError::GapViolation {
            max_pair_shift: max_pair,
            g: code.g(),
        });
    }
    let applied = apply_ops_with_headroom(code, errs)?;
    let mut max_off: f64 = 0.0;
    let mut max_def: f64 = 0.0;
    for (v0_k, v1_k) in &applied {
        for (v0_kp, v1_kp) in &applied {
            // ⟨j_L|K†K'|j'_L⟩ = (K|j_L⟩)†(K'|j'_L⟩)
            max_off = max_off.max(v0_k.dotc(v1_kp).norm());
            max_off = max_off.max(v1_k.dotc(v0_kp).norm());
            let deform = v0_k.dotc(v0_kp) - v1_k.dotc(v1_kp);
            max_def = max_def.max(deform.norm());
        }
    }
    Ok(KLReport {
        max_offdiagonal_violation: max_off,
        max_deformation_violation: max_def,
        pass: max_off <= tol && max_def <= tol,
    })
}

/// For each K in {I} ∪ Ω, the pair (K|0_L⟩, K|1_L⟩) embedded in a space
/// tall enough that gain errors do not fall off the cutoff.
fn apply_ops_with_headroom(
    code: &GappedCode,
    errs: &ErrorSet,
) -> Result<Vec<(DVector<Complex64>, DVector<Complex64>)>> {
    let n_ext = code.trunc().n_max() + errs.max_gain();
    let ext = TruncationConfig::with_caps(
        n_ext,
        1,
        code.trunc().tol(),
        DEFAULT_DIM_CAP.max(n_ext + 1),
    )?;
    let embed = |v: &FockVector| -> DVector<Complex64> {
        let mut out = DVector::from_element(ext.dim(), Complex64::ZERO);
        out.rows_mut(0, v.dim()).copy_from(v.amplitudes());
        out
    };
    let v0 = embed(code.zero_l());
    let v1 = embed(code.one_l());
    let mut applied = vec![(v0.clone(), v1.clone())];
    for op in errs.ops() {
        let m = op.to_matrix(&ext)?;
        applied.push((&m * &v0, &m * &v1));
    }
    Ok(applied)
}

/// Which half of a complex expectation a row of the A matrix carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReImPart {
    Re,
    Im,
}

/// Provenance of one row of the A matrix.
#[derive(Debug, Clone)]
pub struct ARowLabel {
    pub left: String,
    pub right: String,
    pub part: ReImPart,
    /// Identically zero on the computed columns (for example the Im row of a
    /// manifestly real expectation). Retained in the matrix.
    pub is_zero: bool,
}

/// The real matrix whose kernel vectors induce non-deformation codes:
/// rows are (K, K', Re/Im) over (Ω ∪ {I})², columns k = 0..k_max with
/// entries Re/Im ⟨gk|K†K'|gk⟩.
#[derive(Debug, Clone)]
pub struct AMatrix {
    pub matrix: DMatrix<f64>,
    pub rows: Vec<ARowLabel>,
}

impl AMatrix {
    pub fn nontrivial_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_zero).count()
    }
}

/// Build the expectation matrix for a single-mode error set. `k_max`
/// defaults to twice the row count, which leaves the kernel nontrivial with
/// margin; an explicit k_max must still exceed the number of nontrivial rows.
pub fn build_a_matrix(errs: &ErrorSet, g: usize, k_max: Option<usize>) -> Result<AMatrix> {
    if g < 1 {
        return Err(FockError::InvalidParameter("gap g must be >= 1".into()));
    }
    let n_ops = errs.ops().len() + 1;
    let total_rows = 2 * n_ops * n_ops;
    let k_max = k_max.unwrap_or(2 * total_rows);
    let cols = k_max + 1;

    // headroom so ⟨g·k_max|K†K'|g·k_max⟩ sees no truncation
    let n_ext = g * k_max + errs.max_gain();
    let ext = TruncationConfig::with_caps(n_ext.max(1), 1, 1e-10, DEFAULT_DIM_CAP.max(n_ext + 1))?;
    let mut mats = vec![DMatrix::identity(ext.dim(), ext.dim())];
    let mut labels = vec!["I".to_string()];
    for op in errs.ops() {
        mats.push(op.to_matrix(&ext)?);
        labels.push(op.label());
    }

    let mut matrix = DMatrix::zeros(total_rows, cols);
    let mut rows = Vec::with_capacity(total_rows);
    let mut row = 0;
    for (i, ki) in mats.iter().enumerate() {
        for (j, kj) in mats.iter().enumerate() {
            for col in 0..cols {
                let idx = g * col;
                // column (gk) of K dotted against column (gk) of K'
                let e: Complex64 = ki.column(idx).dotc(&kj.column(idx));
                matrix[(row, col)] = e.re;
                matrix[(row + 1, col)] = e.im;
            }
            for (offset, part) in [(0, ReImPart::Re), (1, ReImPart::Im)] {
                let is_zero = (0..cols).all(|c| matrix[(row + offset, c)] == 0.0);
                rows.push(ARowLabel {
                    left: labels[i].clone(),
                    right: labels[j].clone(),
                    part,
                    is_zero,
                });
            }
            row += 2;
        }
    }
    let a = AMatrix { matrix, rows };
    if k_max < a.nontrivial_rows() {
        return Err(FockError::InvalidParameter(format!(
            "k_max = {k_max} leaves fewer columns than the {} nontrivial rows; kernel not guaranteed",
            a.nontrivial_rows()
        )));
    }
    Ok(a)
}

/// A deterministic nonzero kernel vector of a real matrix: the right
/// singular vector of the smallest singular value (via the spectral
/// decomposition of AᵀA), sign-fixed so the first significant entry is
/// positive. Errors when the columns are numerically independent.
pub fn kernel_vector(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    let cols = a.ncols();
    if cols == 0 {
        return Err(FockError::InvalidParameter(
            "kernel of an empty matrix is undefined".into(),
        ));
    }
    if a.iter().all(|&v| v == 0.0) {
        let mut e0 = DVector::zeros(cols);
        e0[0] = 1.0;
        return Ok(e0);
    }
    let gram = a.transpose() * a;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut min_idx = 0;
    for i in 1..cols {
        if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let mut x: DVector<f64> = eig.eigenvectors.column(min_idx).into();
    let max_abs = x.amax();
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-12 * max_abs) {
        if *first < 0.0 {
            x = -x;
        }
    }
    let residual = (a * &x).amax();
    if residual > 1e-10 * max_abs {
        return Err(FockError::KernelFullRank {
            residual,
            k_max: cols - 1,
        });
    }
    Ok(x)
}

/// How kernel entries become codeword amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeConvention {
    /// √(x±_k / ‖x±‖₁): unit norm, and every A-row expectation stays linear
    /// in x so non-deformation holds exactly.
    #[default]
    Sqrt,
    /// x±_k renormalized to unit 2-norm, the form printed alongside the
    /// construction; kept for comparison.
    Literal,
}

/// Split a kernel vector into its positive and negative parts and place them
/// on the g-lattice as the two codewords.
pub fn code_from_kernel(
    x: &DVector<f64>,
    g: usize,
    convention: AmplitudeConvention,
    trunc: TruncationConfig,
) -> Result<GappedCode> {
    if trunc.modes() != 1 {
        return Err(FockError::InvalidParameter(
            "kernel codes are single-mode".into(),
        ));
    }
    let max_abs = x.amax();
    if max_abs == 0.0 {
        return Err(FockError::ZeroVector);
    }
    // entries at rounding level are treated as zero so SVD noise does not
    // leak into codeword support
    let cut = 1e-12 * max_abs;
    let plus: Vec<f64> = x.iter().map(|&v| if v > cut { v } else { 0.0 }).collect();
    let minus: Vec<f64> = x.iter().map(|&v| if v < -cut { -v } else { 0.0 }).collect();
    if plus.iter().all(|&v| v == 0.0) {
        return Err(FockError::CannotSplitKernel { side: "positive" });
    }
    if minus.iter().all(|&v| v == 0.0) {
        return Err(FockError::CannotSplitKernel { side: "negative" });
    }
    let top = plus
        .iter()
        .zip(&minus)
        .enumerate()
        .filter(|(_, (p, m))| **p > 0.0 || **m > 0.0)
        .map(|(k, _)| k)
        .max()
        .expect("nonzero vector has a top index");
    if trunc.n_max() < g * top {
        return Err(FockError::InvalidParameter(format!(
            "cutoff n_max = {} cannot hold lattice index g·{top} = {}",
            trunc.n_max(),
            g * top
        )));
    }
    let amplitudes = |part: &[f64]| -> Vec<(Vec<usize>, Complex64)> {
        match convention {
            AmplitudeConvention::Sqrt => {
                let l1: f64 = part.iter().sum();
                part.iter()
                    .enumerate()
                    .filter(|(_, v)| **v > 0.0)
                    .map(|(k, v)| (vec![g * k], Complex64::new((v / l1).sqrt(), 0.0)))
                    .collect()
            }
            AmplitudeConvention::Literal => {
                let l2: f64 = part.iter().map(|v| v * v).sum::<f64>().sqrt();
                part.iter()
                    .enumerate()
                    .filter(|(_, v)| **v > 0.0)
                    .map(|(k, v)| (vec![g * k], Complex64::new(v / l2, 0.0)))
                    .collect()
            }
        }
    };
    let zero_l = FockVector::from_sparse(&amplitudes(&plus), trunc)?;
    let one_l = FockVector::from_sparse(&amplitudes(&minus), trunc)?;
    GappedCode::new(zero_l, one_l, g, vec![0])
}

fn lattice_points(g: usize, base_shift: &[usize], trunc: &TruncationConfig) -> Vec<usize> {
    (0..trunc.dim())
        .filter(|&flat| {
            trunc
                .unflatten(flat)
                .iter()
                .zip(base_shift)
                .all(|(&ki, &ni)| ki >= ni && (ki - ni) % g == 0)
        })
        .collect()
}

/// A random g-gapped code on the lattice {base_shift + g·k}^N: two random
/// complex vectors on the full lattice support, orthonormalized. Supports
/// generally overlap.
pub fn random_gapped_code<R: Rng>(
    rng: &mut R,
    g: usize,
    base_shift: Vec<usize>,
    trunc: TruncationConfig,
) -> Result<GappedCode> {
    if base_shift.len() != trunc.modes() {
        return Err(FockError::WrongIndexArity {
            got: base_shift.len(),
            expected: trunc.modes(),
        });
    }
    let lattice = lattice_points(g, &base_shift, &trunc);
    if lattice.len() < 2 {
        return Err(FockError::InvalidParameter(format!(
            "lattice holds only {} points; cannot host two orthogonal codewords",
            lattice.len()
        )));
    }
    for _ in 0..32 {
        let draw = |rng: &mut R| -> DVector<Complex64> {
            let mut v = DVector::from_element(trunc.dim(), Complex64::ZERO);
            for &flat in &lattice {
                v[flat] = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
            v
        };
        let mut v0 = draw(rng);
        let n0 = v0.norm();
        if n0 < 1e-6 {
            continue;
        }
        v0 /= Complex64::new(n0, 0.0);
        let mut v1 = draw(rng);
        let overlap = v0.dotc(&v1);
        v1 -= &v0 * overlap;
        let n1 = v1.norm();
        if n1 < 1e-6 {
            continue;
        }
        v1 /= Complex64::new(n1, 0.0);
        let zero_l = FockVector::from_amplitudes(v0.iter().cloned().collect(), trunc)?;
        let one_l = FockVector::from_amplitudes(v1.iter().cloned().collect(), trunc)?;
        return GappedCode::new(zero_l, one_l, g, base_shift);
    }
    Err(FockError::InvalidParameter(
        "failed to draw an orthonormal pair after 32 attempts".into(),
    ))
}

/// A random g-gapped code whose codewords sit on disjoint halves of the
/// lattice. Disjoint support is what makes the off-diagonal Knill–Laflamme
/// block vanish identically for admissible shifts.
pub fn random_disjoint_gapped_code<R: Rng>(
    rng: &mut R,
    g: usize,
    base_shift: Vec<usize>,
    trunc: TruncationConfig,
) -> Result<GappedCode> {
    if base_shift.len() != trunc.modes() {
        return Err(FockError::WrongIndexArity {
            got: base_shift.len(),
            expected: trunc.modes(),
        });
    }
    let lattice = lattice_points(g, &base_shift, &trunc);
    if lattice.len() < 2 {
        return Err(FockError::InvalidParameter(format!(
            "lattice holds only {} points; cannot host two orthogonal codewords",
            lattice.len()
        )));
    }
    let draw_on = |rng: &mut R, points: &[usize]| -> Result<FockVector> {
        let mut v = DVector::from_element(trunc.dim(), Complex64::ZERO);
        for &flat in points {
            v[flat] = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let n = v.norm();
        if n < 1e-9 {
            return Err(FockError::ZeroVector);
        }
        v /= Complex64::new(n, 0.0);
        FockVector::from_amplitudes(v.iter().cloned().collect(), trunc)
    };
    for _ in 0..32 {
        let mut half0 = Vec::new();
        let mut half1 = Vec::new();
        for &flat in &lattice {
            if rng.gen::<bool>() {
                half0.push(flat);
            } else {
                half1.push(flat);
            }
        }
        if half0.is_empty() || half1.is_empty() {
            continue;
        }
        let zero_l = draw_on(rng, &half0)?;
        let one_l = draw_on(rng, &half1)?;
        return GappedCode::new(zero_l, one_l, g, base_shift);
    }
    Err(FockError::InvalidParameter(
        "failed to split the lattice after 32 attempts".into(),
    ))
}

/// Expectation ⟨j_L|op|j_L⟩ of an arbitrary single-mode operator.
pub fn codeword_expectation(
    code: &GappedCode,
    op: &DMatrix<Complex64>,
    which: usize,
) -> Result<Complex64> {
    let v = if which == 0 { code.zero_l() } else { code.one_l() };
    if op.nrows() != v.dim() || op.ncols() != v.dim() {
        return Err(FockError::WrongLength {
            got: op.nrows().max(op.ncols()),
            expected: v.dim(),
        });
    }
    Ok(v.amplitudes().dotc(&(op * v.amplitudes())))
}
