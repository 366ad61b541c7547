//! Dense complex matrix kernel.
//!
//! Every routine works on `nalgebra::DMatrix<Complex64>`. Composite spaces
//! always place subsystem A as the left (most significant) tensor factor, so
//! for a split `(d_a, d_b)` the basis index of `|a⟩⊗|b⟩` is `a * d_b + b`.
//! The same row-major convention is used for every multi-index in the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::states::{BipartiteSplit, Subsystem};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Entrywise Hermiticity residual accepted when symmetrizing an input.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;

/// Relative tolerance used to group eigenvalues into degenerate clusters.
const DEGENERACY_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Threshold below which eigenvalues count as exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance {
    pub relative_threshold: f64,
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self {
            relative_threshold: 1e-12,
        }
    }
}

impl RankTolerance {
    pub fn new(relative_threshold: f64) -> Self {
        Self { relative_threshold }
    }

    /// Absolute cutoff for a spectrum whose largest magnitude is `scale`.
    pub fn cutoff(&self, scale: f64) -> f64 {
        self.relative_threshold * scale
    }
}

/// A validated Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    /// Accepts `m` if it is Hermitian to [`HERMITIAN_INPUT_TOL`] and stores
    /// its symmetrized part.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m, "HermitianOperator")?;
        let residual = hermitian_residual(&m);
        if residual > HERMITIAN_INPUT_TOL * m.camax().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self(hermitian_part(&m)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl AsRef<CMatrix> for HermitianOperator {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `Σ_k f(λ_k) v_k v_k†`.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for k in 0..n {
            let fk = f(self.eigenvalues[k]);
            for r in 0..n {
                scaled[(r, k)] *= fk;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|l| c(l, 0.0))
    }

    /// Indices of eigenvalues above the rank cutoff.
    pub fn support(&self, tol: RankTolerance) -> Vec<usize> {
        let cut = tol.cutoff(self.max_abs());
        (0..self.dim()).filter(|&k| self.eigenvalues[k] > cut).collect()
    }
}

pub fn check_square(m: &CMatrix, context: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}

pub fn check_dim(m: &CMatrix, dim: usize, context: &'static str) -> Result<()> {
    check_square(m, context)?;
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch {
            context,
            expected: dim,
            found: m.nrows(),
        });
    }
    Ok(())
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Hermitian eigendecomposition with a deterministic basis.
///
/// Eigenvalues are sorted ascending. Inside a degenerate cluster the
/// eigenvectors are re-chosen by Gram–Schmidt of the standard basis vectors
/// (in index order) projected onto the cluster, and every eigenvector is
/// rotated so that its first largest-magnitude component is real positive.
pub fn eig_hermitian(m: &HermitianOperator) -> SpectralDecomposition {
    eigh_unchecked(m.matrix())
}

/// [`eig_hermitian`] on a raw matrix, validating Hermiticity first.
pub fn eigh(m: &CMatrix) -> Result<SpectralDecomposition> {
    check_square(m, "eigh")?;
    let residual = hermitian_residual(m);
    if residual > HERMITIAN_INPUT_TOL * m.camax().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(eigh_unchecked(m))
}

pub(crate) fn eigh_unchecked(m: &CMatrix) -> SpectralDecomposition {
    let n = m.nrows();
    let sym = hermitian_part(m);
    let raw = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw.eigenvalues[a].total_cmp(&raw.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| raw.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &raw.eigenvectors.column(src));
    }
    let scale = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[end] - eigenvalues[start]).abs() <= DEGENERACY_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let aligned = align_to_reference(&block, &CMatrix::identity(n, n));
            vectors.columns_mut(start, end - start).copy_from(&aligned);
        }
        start = end;
    }
    for k in 0..n {
        fix_phase(&mut vectors, k);
    }
    SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    }
}

/// Re-chooses an orthonormal basis of `span(block)` by projecting the columns
/// of `reference` onto it, in order, and orthonormalizing.
pub(crate) fn align_to_reference(block: &CMatrix, reference: &CMatrix) -> CMatrix {
    let want = block.ncols();
    let projector = block * block.adjoint();
    let mut chosen: Vec<CVector> = Vec::with_capacity(want);
    for r in 0..reference.ncols() {
        if chosen.len() == want {
            break;
        }
        let mut w = &projector * reference.column(r);
        for q in &chosen {
            let overlap = q.dotc(&w);
            w -= q * overlap;
        }
        let norm = w.norm();
        if norm > 1e-6 {
            chosen.push(w / c(norm, 0.0));
        }
    }
    if chosen.len() < want {
        // reference did not span the block; keep the original basis
        return block.clone();
    }
    let mut out = CMatrix::zeros(block.nrows(), want);
    for (k, q) in chosen.iter().enumerate() {
        out.set_column(k, q);
    }
    out
}

/// Rotates column `k` so its first largest-magnitude entry is real positive.
pub(crate) fn fix_phase(vectors: &mut CMatrix, k: usize) {
    let col = vectors.column(k);
    let max = col.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = col.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let phase = col[pivot] / c(col[pivot].norm(), 0.0);
    let rot = phase.conj();
    vectors.column_mut(k).iter_mut().for_each(|z| *z *= rot);
}

/// Schatten norm order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenP {
    One,
    Two,
    Infinity,
}

/// Singular values, descending, from the spectrum of the Hermitian dilation
/// `[[0, M], [M†, 0]]`, whose eigenvalues are `±s_i` padded with zeros.
///
/// This stays accurate to `ε‖M‖` in absolute terms; nalgebra's complex SVD
/// was observed to return wrong factors on rank-deficient inputs.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let (r, cl) = m.shape();
    let mut dilation = CMatrix::zeros(r + cl, r + cl);
    dilation.view_mut((0, r), (r, cl)).copy_from(m);
    dilation.view_mut((r, 0), (cl, r)).copy_from(&m.adjoint());
    let spec = eigh_unchecked(&dilation);
    spec.eigenvalues
        .iter()
        .rev()
        .take(r.min(cl))
        .map(|&s| s.max(0.0))
        .collect()
}

/// `‖M‖_p` from the singular values of `M`.
pub fn schatten_norm(m: &CMatrix, p: SchattenP) -> f64 {
    match p {
        SchattenP::Two => m.norm(),
        SchattenP::One => singular_values(m).iter().sum(),
        SchattenP::Infinity => singular_values(m).iter().fold(0.0, |a, &s| a.max(s)),
    }
}

/// Trace norm of a Hermitian matrix via its eigenvalues.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigh_unchecked(m).eigenvalues.iter().map(|l| l.abs()).sum()
}

/// Kronecker product, `a` as the most significant factor.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

fn check_split(m: &CMatrix, split: BipartiteSplit, context: &'static str) -> Result<()> {
    check_dim(m, split.dim(), context)
}

pub fn partial_trace(m: &CMatrix, split: BipartiteSplit, keep: Subsystem) -> Result<CMatrix> {
    check_split(m, split, "partial_trace")?;
    let (da, db) = (split.d_a, split.d_b);
    Ok(match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| (0..db).map(|b| m[(i * db + b, j * db + b)]).sum()),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum()),
    })
}

/// Transposes the chosen tensor factor only.
pub fn partial_transpose(m: &CMatrix, split: BipartiteSplit, which: Subsystem) -> Result<CMatrix> {
    check_split(m, split, "partial_transpose")?;
    let db = split.d_b;
    let n = split.dim();
    Ok(CMatrix::from_fn(n, n, |r, s| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (s / db, s % db);
        match which {
            Subsystem::A => m[(a2 * db + b, a * db + b2)],
            Subsystem::B => m[(a * db + b2, a2 * db + b)],
        }
    }))
}

fn psd_spectrum(a: &CMatrix, tol: RankTolerance) -> Result<SpectralDecomposition> {
    let spec = eigh(a)?;
    let cut = tol.cutoff(spec.max_abs());
    if spec.min() < -cut {
        return Err(Error::NotPsd {
            min_eigenvalue: spec.min(),
        });
    }
    Ok(spec)
}

/// `Π_A (ln A) Π_A`, zero outside the support.
pub fn matrix_log_on_support(a: &CMatrix, tol: RankTolerance) -> Result<CMatrix> {
    let spec = psd_spectrum(a, tol)?;
    Ok(log_from_spectrum(&spec, tol))
}

pub(crate) fn log_from_spectrum(spec: &SpectralDecomposition, tol: RankTolerance) -> CMatrix {
    let cut = tol.cutoff(spec.max_abs());
    spec.map(|l| if l > cut { c(l.ln(), 0.0) } else { ZERO })
}

pub fn support_projector(a: &CMatrix, tol: RankTolerance) -> Result<CMatrix> {
    let spec = psd_spectrum(a, tol)?;
    Ok(projector_from_spectrum(&spec, tol))
}

pub(crate) fn projector_from_spectrum(spec: &SpectralDecomposition, tol: RankTolerance) -> CMatrix {
    let cut = tol.cutoff(spec.max_abs());
    spec.map(|l| if l > cut { ONE } else { ZERO })
}

/// First-order perturbation of the logarithm, `G_A(B) = B ∘ T(A)` in the
/// eigenbasis of `A`, with `T_kl = (ln a_k − ln a_l)/(a_k − a_l)` and the
/// limit `1/a_k` on (near-)degenerate pairs. Restricted to `supp(A)`.
pub fn hadamard_perturbation(a: &CMatrix, b: &CMatrix, tol: RankTolerance) -> Result<CMatrix> {
    let spec = psd_spectrum(a, tol)?;
    hadamard_perturbation_with(&spec, b, tol)
}

pub(crate) fn hadamard_perturbation_with(
    spec: &SpectralDecomposition,
    b: &CMatrix,
    tol: RankTolerance,
) -> Result<CMatrix> {
    check_dim(b, spec.dim(), "hadamard_perturbation")?;
    let scale = spec.max_abs();
    if scale == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let cut = tol.cutoff(scale);
    let v = &spec.eigenvectors;
    let mut inner = v.adjoint() * b * v;
    let a = &spec.eigenvalues;
    let n = spec.dim();
    for k in 0..n {
        for l in 0..n {
            let t = if a[k] <= cut || a[l] <= cut {
                0.0
            } else {
                log_divided_difference(a[k], a[l], cut)
            };
            inner[(k, l)] *= t;
        }
    }
    Ok(hermitian_part(&(v * inner * v.adjoint())))
}

/// `(ln x − ln y)/(x − y)` for positive `x, y`, `1/x` when `|x − y| ≤ degenerate`.
pub(crate) fn log_divided_difference(x: f64, y: f64, degenerate: f64) -> f64 {
    let d = x - y;
    if d.abs() <= degenerate {
        1.0 / x
    } else {
        (d / y).ln_1p() / d
    }
}

pub fn sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    let spec = psd_spectrum(a, RankTolerance::default())?;
    Ok(spec.map(|l| c(l.max(0.0).sqrt(), 0.0)))
}

/// `e^{−iHt}`.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let spec = eigh(h)?;
    Ok(spec.map(|e| C64::from_polar(1.0, -e * t)))
}

/// `exp(A)` for Hermitian `A`.
pub fn exp_hermitian(a: &CMatrix) -> Result<CMatrix> {
    Ok(eigh(a)?.map(|l| c(l.exp(), 0.0)))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Orthonormal Hermitian operator basis of `d × d` matrices under the
/// Hilbert–Schmidt inner product: `I/√d` followed by the generalized
/// Gell-Mann matrices (symmetric, antisymmetric, then diagonal), each
/// normalized. For `d = 2` this is `{I, X, Y, Z}/√2`.
pub fn hermitian_operator_basis(d: usize) -> Vec<CMatrix> {
    let mut out = vec![identity(d).scale(1.0 / (d as f64).sqrt())];
    if d == 2 {
        let s = 1.0 / 2f64.sqrt();
        out.extend([pauli_x().scale(s), pauli_y().scale(s), pauli_z().scale(s)]);
        return out;
    }
    let s = 1.0 / 2f64.sqrt();
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(s, 0.0);
            m[(k, j)] = c(s, 0.0);
            out.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(0.0, -s);
            m[(k, j)] = c(0.0, s);
            out.push(m);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = c(norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * norm, 0.0);
        out.push(m);
    }
    out
}

/// Row-major vectorization: `vec(M)[i * cols + j] = M[i, j]`.
pub fn vectorize(m: &CMatrix) -> CVector {
    let (r, cl) = m.shape();
    CVector::from_fn(r * cl, |k, _| m[(k / cl, k % cl)])
}

pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_complex_gaussian(n, n, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_complex_gaussian(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / c(d.norm(), 0.0) } else { ONE };
        q.column_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    q
}
