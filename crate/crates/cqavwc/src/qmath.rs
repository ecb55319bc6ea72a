//! Complex Hermitian matrix arithmetic and the entropic/metric functionals the
//! rest of the crate consumes.
//!
//! All logarithms are base 2; entropies and rates are in bits. Operations are
//! pure functions of their inputs and values are immutable after construction,
//! so everything here is safe to share across worker threads.

use nalgebra::{Complex, DMatrix};
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Hermiticity tolerance for validation.
pub const TOL_HERM: f64 = 1e-9;
/// Unit-trace tolerance for validation.
pub const TOL_TRACE: f64 = 1e-9;
/// Eigenvalues of a density operator must be `>= -TOL_PSD`.
pub const TOL_PSD: f64 = 1e-9;
/// Spectral decomposition reconstruction tolerance.
pub const TOL_SPEC: f64 = 1e-8;
/// Eigenvalues below this are treated as kernel by `psd_power`.
pub const TOL_KERNEL: f64 = 1e-10;

#[inline]
pub fn cplx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real part of the trace.
pub fn real_trace(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// `Re tr(a b)` computed entrywise, avoiding the full product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(b.ncols(), a.nrows());
    let mut total = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let x = a[(i, j)];
            let y = b[(j, i)];
            total += x.re * y.re - x.im * y.im;
        }
    }
    total
}

fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Max deviation `|m_ij - conj(m_ji)|` from Hermiticity.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn require_hermitian(m: &CMatrix) -> Result<usize> {
    let n = require_square(m)?;
    let dev = hermitian_deviation(m);
    if dev.is_nan() || dev > TOL_HERM {
        return Err(Error::NotHermitian { max_dev: dev, tol: TOL_HERM });
    }
    Ok(n)
}

/// Eigenvalues of a Hermitian matrix, descending, without accumulating
/// eigenvectors (noticeably cheaper than a full decomposition).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    require_hermitian(m)?;
    let sym = (m + m.adjoint()).scale(0.5);
    let mut eigs: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eigs)
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix, sorted by
/// descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the same order as `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn of_hermitian(m: &CMatrix) -> Result<Self> {
        require_hermitian(m)?;
        // Kill the sub-tolerance asymmetry before handing to the eigensolver.
        let sym = (m + m.adjoint()).scale(0.5);
        let se = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
        let dim = m.nrows();
        let mut eigenvectors = CMatrix::zeros(dim, dim);
        for (col, &k) in order.iter().enumerate() {
            eigenvectors.set_column(col, &se.eigenvectors.column(k));
        }
        Ok(Self { eigenvalues, eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sum_k l_k |e_k><e_k|`.
    pub fn reconstruct(&self) -> CMatrix {
        self.map_eigenvalues(|l| l)
    }

    /// Applies `f` to the spectrum and reassembles the matrix.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for k in 0..d {
            let w = cplx(f(self.eigenvalues[k]), 0.0);
            scaled.column_mut(k).scale_mut(1.0);
            for i in 0..d {
                scaled[(i, k)] *= w;
            }
        }
        &scaled * self.eigenvectors.adjoint()
    }

    /// Reconstruction error (trace norm) and Gram deviation from identity.
    /// Test support; both should sit well under [`TOL_SPEC`].
    pub fn verify(&self, original: &CMatrix) -> (f64, f64) {
        let recon_err = trace_norm(&(self.reconstruct() - original)).unwrap_or(f64::NAN);
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let mut gram_dev: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let target = if i == j { cplx(1.0, 0.0) } else { cplx(0.0, 0.0) };
                gram_dev = gram_dev.max((gram[(i, j)] - target).norm());
            }
        }
        (recon_err, gram_dev)
    }
}

/// A validated quantum state: Hermitian, positive semi-definite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and unit trace; each violated
    /// invariant is reported by name.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = require_square(&matrix)?;
        if !matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::OperatorRange("non-finite entry".into()));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > TOL_HERM {
            return Err(Error::NotHermitian { max_dev: dev, tol: TOL_HERM });
        }
        let tr = matrix.diagonal().iter().sum::<C64>();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::BadTrace { trace: tr.re, tol: TOL_TRACE });
        }
        let sym = (&matrix + matrix.adjoint()).scale(0.5);
        let eigs = sym.symmetric_eigenvalues();
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -TOL_PSD {
            return Err(Error::NotPsd { min_eig });
        }
        let _ = n;
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Spectrum clipped into `[0, 1]`; validation has already run, so the clip
    /// only removes eigensolver noise.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigenvalues(&self.matrix)?.iter().map(|l| l.clamp(0.0, 1.0)).collect())
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::of_hermitian(&self.matrix)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = cplx(v, 0.0);
        }
        Self::new(m)
    }

    /// `|v><v| / <v|v>`.
    pub fn pure_from_ket(ket: &[C64]) -> Result<Self> {
        let d = ket.len();
        let norm_sq: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::DegenerateInput("zero ket".into()));
        }
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = ket[i] * ket[j].conj() / cplx(norm_sq, 0.0);
            }
        }
        Self::new(m)
    }

    /// `|k><k|` in the computational basis.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = cplx(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = cplx(1.0 / dim as f64, 0.0);
        }
        Self { matrix: m }
    }

    /// Wraps a matrix that is a density operator by construction (tensor
    /// products and convex mixtures of validated states), skipping the
    /// eigensolve that full validation would need.
    pub(crate) fn trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// Convex mixture `sum_i w_i rho_i`. Weights must be a distribution.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::DegenerateInput("empty mixture".into()));
        }
        let d = parts[0].1.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, rho) in parts {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch { left: d, right: rho.dim() });
            }
            m += rho.matrix().scale(*w);
        }
        Self::new(m)
    }
}

/// Von Neumann entropy in bits: `-sum_i l_i log2 l_i` over the spectrum,
/// with `0 log 0 = 0`. Lies in `[0, log2 dim]`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let spectrum = rho.spectrum().expect("validated density operator");
    entropy_of_spectrum(&spectrum)
}

/// Shannon entropy in bits of a (sub)normalized spectrum, clipping noise
/// below zero.
pub fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Trace norm: sum of singular values. For Hermitian inputs this is the sum
/// of eigenvalue magnitudes, which is the route taken.
pub fn trace_norm(a: &CMatrix) -> Result<f64> {
    require_square(a)?;
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::OperatorRange("non-finite entry".into()));
    }
    if hermitian_deviation(a) <= TOL_HERM {
        let sym = (a + a.adjoint()).scale(0.5);
        Ok(sym.symmetric_eigenvalues().iter().map(|l| l.abs()).sum())
    } else {
        Ok(a.clone().singular_values().iter().sum())
    }
}

/// Kronecker product; dimension is the product of the factors'.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    require_square(a)?;
    require_square(b)?;
    Ok(a.kronecker(b))
}

/// Spectral power `l -> l^exponent` on the support of a Hermitian PSD matrix.
/// Eigenvalues below [`TOL_KERNEL`] map to 0, which makes negative exponents
/// pseudo-inverses.
pub fn psd_power(a: &CMatrix, exponent: f64) -> Result<CMatrix> {
    require_hermitian(a)?;
    let dec = SpectralDecomposition::of_hermitian(a)?;
    if let Some(&min_eig) = dec
        .eigenvalues
        .iter()
        .filter(|&&l| l < -TOL_PSD)
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        return Err(Error::NotPsd { min_eig });
    }
    Ok(dec.map_eigenvalues(|l| if l < TOL_KERNEL { 0.0 } else { l.powf(exponent) }))
}

/// Output of [`gentle_damage`].
#[derive(Debug, Clone, Copy)]
pub struct GentleDamage {
    /// `|| rho - sqrt(X) rho sqrt(X) ||_1`
    pub distance: f64,
    /// `sqrt(8 * (1 - tr(rho X)))`
    pub bound: f64,
}

/// Gentle-measurement damage: for `0 <= X <= id`, measuring `X` on `rho`
/// disturbs it by at most `sqrt(8 lambda)` in trace norm, where
/// `lambda = 1 - tr(rho X)`. Returns both sides; callers assert
/// `distance <= bound`.
pub fn gentle_damage(rho: &DensityOperator, x: &CMatrix) -> Result<GentleDamage> {
    let n = require_square(x)?;
    if n != rho.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: n });
    }
    let dev = hermitian_deviation(x);
    if dev > TOL_HERM {
        return Err(Error::OperatorRange(format!(
            "X not Hermitian (deviation {dev:.3e})"
        )));
    }
    let dec = SpectralDecomposition::of_hermitian(x)?;
    let min_eig = dec.eigenvalues.last().copied().unwrap_or(0.0);
    let max_eig = dec.eigenvalues.first().copied().unwrap_or(0.0);
    if min_eig < -TOL_PSD {
        return Err(Error::OperatorRange(format!(
            "X not positive (min eigenvalue {min_eig:.3e})"
        )));
    }
    if max_eig > 1.0 + TOL_PSD {
        return Err(Error::OperatorRange(format!(
            "X exceeds identity (max eigenvalue {max_eig})"
        )));
    }
    let sqrt_x = dec.map_eigenvalues(|l| l.clamp(0.0, 1.0).sqrt());
    let lambda = (1.0 - trace_of_product(rho.matrix(), x)).clamp(0.0, 1.0);
    let damaged = &sqrt_x * rho.matrix() * &sqrt_x;
    let distance = trace_norm(&(rho.matrix() - &damaged))?;
    Ok(GentleDamage { distance, bound: (8.0 * lambda).sqrt() })
}

/// Output of [`fannes_gap`].
#[derive(Debug, Clone, Copy)]
pub struct FannesGap {
    /// `|S(x) - S(y)|` in bits.
    pub entropy_gap: f64,
    /// `mu log2 d - mu log2 mu` when `mu = ||x - y||_1 < 1/e`, else `None`.
    pub bound: Option<f64>,
}

/// Entropy continuity (Fannes) check: when two states are trace-norm close,
/// their entropies are close. The bound only applies for `mu < 1/e`.
pub fn fannes_gap(x: &DensityOperator, y: &DensityOperator) -> Result<FannesGap> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: y.dim() });
    }
    let entropy_gap = (von_neumann_entropy(x) - von_neumann_entropy(y)).abs();
    let mu = trace_norm(&(x.matrix() - y.matrix()))?;
    let bound = if mu == 0.0 {
        Some(0.0)
    } else if mu < std::f64::consts::E.recip() {
        Some(mu * (x.dim() as f64).log2() - mu * mu.log2())
    } else {
        None
    };
    Ok(FannesGap { entropy_gap, bound })
}

/// Uniform random complex matrix with entries in the unit square, for tests
/// and sweeps.
pub fn random_matrix(rng: &mut impl Rng, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Random full-rank-ish density operator `G G^dag / tr`.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    loop {
        let g = random_matrix(rng, dim);
        let h = &g * g.adjoint();
        let tr = real_trace(&h);
        if tr > 1e-9 {
            if let Ok(rho) = DensityOperator::new(h.scale(1.0 / tr)) {
                return rho;
            }
        }
    }
}

/// Random pure state.
pub fn random_pure(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    loop {
        let ket: Vec<C64> = (0..dim)
            .map(|_| cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if ket.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6 {
            return DensityOperator::pure_from_ket(&ket).expect("normalized ket");
        }
    }
}

/// Haar-ish random unitary via QR of a random matrix with phase fixing.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = random_matrix(rng, dim);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / cplx(rkk.norm(), 0.0) } else { cplx(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random operator with `0 <= X <= id` (identity minus a scaled contraction).
pub fn random_unit_interval_operator(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = random_matrix(rng, dim);
    let h = &g * g.adjoint();
    let max_eig =
        h.clone().symmetric_eigenvalues().iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    let scale: f64 = rng.random_range(0.0..1.0);
    let id = CMatrix::identity(dim, dim);
    &id - h.scale(scale / max_eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn entropy_maximally_mixed_qubit_is_one_bit() {
        let rho = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_pure_state_is_zero() {
        let rho = DensityOperator::basis_state(2, 0);
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_matches_binary_entropy_oracle() {
        // Oracle: direct eigenvalue formula h(1/4) applied to the known spectrum.
        let expected = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.8112781244591328, epsilon = 1e-12);
    }

    #[test]
    fn entropy_rejects_invalid_operators() {
        let bad_trace = CMatrix::from_diagonal_element(2, 2, cplx(0.45, 0.0));
        assert!(matches!(DensityOperator::new(bad_trace), Err(Error::BadTrace { .. })));

        let mut non_herm = CMatrix::zeros(2, 2);
        non_herm[(0, 0)] = cplx(0.5, 0.0);
        non_herm[(1, 1)] = cplx(0.5, 0.0);
        non_herm[(0, 1)] = cplx(0.3, 0.0);
        assert!(matches!(DensityOperator::new(non_herm), Err(Error::NotHermitian { .. })));

        let neg = DensityOperator::new(
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                cplx(1.2, 0.0),
                cplx(-0.2, 0.0),
            ])),
        );
        assert!(matches!(neg, Err(Error::NotPsd { .. })));
    }

    #[test]
    fn trace_norm_examples() {
        let a = DensityOperator::basis_state(2, 0).into_matrix()
            - DensityOperator::basis_state(2, 1).into_matrix();
        assert_abs_diff_eq!(trace_norm(&a).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0, epsilon = 1e-15);

        // [[.5,.5],[.5,.5]] - I/2 has eigenvalues +-1/2.
        let mut m = CMatrix::from_element(2, 2, cplx(0.5, 0.0));
        m[(0, 0)] -= cplx(0.5, 0.0);
        m[(1, 1)] -= cplx(0.5, 0.0);
        assert_abs_diff_eq!(trace_norm(&m).unwrap(), 1.0, epsilon = 1e-12);

        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(trace_norm(&rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn tensor_examples() {
        let id2 = CMatrix::identity(2, 2);
        assert_eq!(tensor(&id2, &id2).unwrap(), CMatrix::identity(4, 4));

        let zero = DensityOperator::basis_state(2, 0).into_matrix();
        let one = DensityOperator::basis_state(2, 1).into_matrix();
        let zo = tensor(&zero, &one).unwrap();
        let expected = DensityOperator::basis_state(4, 1).into_matrix();
        assert_abs_diff_eq!((zo - expected).norm(), 0.0, epsilon = 1e-15);

        let a = DensityOperator::from_diagonal(&[0.3, 0.7]).unwrap().into_matrix();
        let b = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap().into_matrix();
        let ab = tensor(&a, &b).unwrap();
        for (i, expect) in [0.27, 0.03, 0.63, 0.07].iter().enumerate() {
            assert_abs_diff_eq!(ab[(i, i)].re, *expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn psd_power_examples() {
        let id2 = CMatrix::identity(2, 2);
        assert_abs_diff_eq!((psd_power(&id2, -0.5).unwrap() - &id2).norm(), 0.0, epsilon = 1e-10);

        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = cplx(4.0, 0.0);
        let p = psd_power(&m, -0.5).unwrap();
        assert_abs_diff_eq!(p[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[(1, 1)].re, 0.0, epsilon = 1e-12);

        let mut m2 = CMatrix::zeros(2, 2);
        m2[(0, 0)] = cplx(9.0, 0.0);
        m2[(1, 1)] = cplx(4.0, 0.0);
        let s = psd_power(&m2, 0.5).unwrap();
        assert_abs_diff_eq!(s[(0, 0)].re, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(1, 1)].re, 2.0, epsilon = 1e-12);

        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = cplx(1.0, 0.0);
        neg[(1, 1)] = cplx(-0.5, 0.0);
        assert!(matches!(psd_power(&neg, 0.5), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn gentle_damage_examples() {
        let mut r = rng(7);
        let rho = random_density(&mut r, 2);
        let gd = gentle_damage(&rho, &CMatrix::identity(2, 2)).unwrap();
        assert_abs_diff_eq!(gd.distance, 0.0, epsilon = 1e-10);
        // lambda carries O(eps) trace noise and the bound takes a square root
        assert_abs_diff_eq!(gd.bound, 0.0, epsilon = 1e-6);

        let zero = DensityOperator::basis_state(2, 0);
        let support = zero.matrix().clone();
        let gd2 = gentle_damage(&zero, &support).unwrap();
        assert_abs_diff_eq!(gd2.distance, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gd2.bound, 0.0, epsilon = 1e-6);

        // Direct 2x2 evaluation: X = diag(1, 1/2) on I/2 gives lambda = 1/4,
        // damaged = diag(1/2, 1/4), distance = 1/4, bound = sqrt(2).
        let mixed = DensityOperator::maximally_mixed(2);
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 0)] = cplx(1.0, 0.0);
        x[(1, 1)] = cplx(0.5, 0.0);
        let gd3 = gentle_damage(&mixed, &x).unwrap();
        assert_abs_diff_eq!(gd3.distance, 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(gd3.bound, 2.0f64.sqrt(), epsilon = 1e-12);
        assert!(gd3.distance <= gd3.bound);

        let too_big = CMatrix::identity(2, 2).scale(1.5);
        assert!(matches!(gentle_damage(&mixed, &too_big), Err(Error::OperatorRange(_))));
    }

    #[test]
    fn fannes_gap_examples() {
        let mut r = rng(11);
        let rho = random_density(&mut r, 3);
        let fg = fannes_gap(&rho, &rho).unwrap();
        assert_abs_diff_eq!(fg.entropy_gap, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fg.bound.unwrap(), 0.0, epsilon = 1e-10);

        // mu = 2*eps = 0.1 < 1/e; bound = 0.1 - 0.1*log2(0.1).
        let x = DensityOperator::maximally_mixed(2);
        let y = DensityOperator::from_diagonal(&[0.55, 0.45]).unwrap();
        let fg2 = fannes_gap(&x, &y).unwrap();
        let expected_bound = 0.1 * 2.0f64.log2() - 0.1 * 0.1f64.log2();
        assert_abs_diff_eq!(fg2.bound.unwrap(), expected_bound, epsilon = 1e-9);
        assert!(fg2.entropy_gap <= fg2.bound.unwrap());

        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        let fg3 = fannes_gap(&zero, &one).unwrap();
        assert_abs_diff_eq!(fg3.entropy_gap, 0.0, epsilon = 1e-10);
        assert!(fg3.bound.is_none());

        let big = DensityOperator::maximally_mixed(3);
        assert!(matches!(fannes_gap(&x, &big), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn entropy_bounds_hold_on_random_states() {
        let mut r = rng(13);
        for dim in [2usize, 3, 4] {
            for _ in 0..1000 {
                let rho = random_density(&mut r, dim);
                let s = von_neumann_entropy(&rho);
                assert!(s >= -1e-12 && s <= (dim as f64).log2() + 1e-9, "S={s} dim={dim}");
            }
        }
    }

    #[test]
    fn entropy_is_unitarily_invariant() {
        let mut r = rng(17);
        for _ in 0..50 {
            let rho = random_density(&mut r, 4);
            let u = random_unitary(&mut r, 4);
            let rotated = DensityOperator::new(&u * rho.matrix() * u.adjoint()).unwrap();
            assert_abs_diff_eq!(
                von_neumann_entropy(&rho),
                von_neumann_entropy(&rotated),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn trace_norm_is_a_norm() {
        let mut r = rng(19);
        for _ in 0..200 {
            let g1 = random_matrix(&mut r, 3);
            let g2 = random_matrix(&mut r, 3);
            let a = (&g1 + g1.adjoint()).scale(0.5);
            let b = (&g2 + g2.adjoint()).scale(0.5);
            let na = trace_norm(&a).unwrap();
            let nb = trace_norm(&b).unwrap();
            let nab = trace_norm(&(&a + &b)).unwrap();
            assert!(nab <= na + nb + 1e-9);
            let c: f64 = r.random_range(-2.0..2.0);
            assert_abs_diff_eq!(trace_norm(&a.scale(c)).unwrap(), c.abs() * na, epsilon = 1e-9);
        }
    }

    #[test]
    fn psd_power_reconstructs_on_support() {
        let mut r = rng(23);
        for _ in 0..100 {
            let rho = random_density(&mut r, 3);
            let sqrt = psd_power(rho.matrix(), 0.5).unwrap();
            assert!(trace_norm(&(&sqrt * &sqrt - rho.matrix())).unwrap() <= 1e-8);

            let inv_sqrt = psd_power(rho.matrix(), -0.5).unwrap();
            let support = psd_power(rho.matrix(), 0.0).unwrap();
            let sandwich = &inv_sqrt * rho.matrix() * &inv_sqrt;
            assert!(trace_norm(&(sandwich - support)).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn gentle_bound_holds_on_random_pairs() {
        let mut r = rng(29);
        for _ in 0..1000 {
            let rho = random_density(&mut r, 2);
            let x = random_unit_interval_operator(&mut r, 2);
            let gd = gentle_damage(&rho, &x).unwrap();
            assert!(gd.distance <= gd.bound + 1e-9, "{} > {}", gd.distance, gd.bound);
        }
    }

    #[test]
    fn fannes_bound_holds_on_random_pairs() {
        let mut r = rng(31);
        for _ in 0..1000 {
            let x = random_density(&mut r, 3);
            let y = random_density(&mut r, 3);
            let fg = fannes_gap(&x, &y).unwrap();
            if let Some(bound) = fg.bound {
                assert!(fg.entropy_gap <= bound + 1e-9, "{} > {}", fg.entropy_gap, bound);
            }
        }
    }

    #[test]
    fn spectral_decomposition_invariants() {
        let mut r = rng(37);
        for dim in [2usize, 4, 6] {
            for _ in 0..25 {
                let rho = random_density(&mut r, dim);
                let dec = rho.decompose().unwrap();
                let (recon, gram) = dec.verify(rho.matrix());
                assert!(recon <= TOL_SPEC, "reconstruction {recon}");
                assert!(gram <= TOL_SPEC, "gram {gram}");
                for w in dec.eigenvalues.windows(2) {
                    assert!(w[0] >= w[1]);
                }
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn hermitian2() -> impl Strategy<Value = CMatrix> {
            (
                -1.0f64..1.0,
                -1.0f64..1.0,
                -1.0f64..1.0,
                -1.0f64..1.0,
            )
                .prop_map(|(a, d, re, im)| {
                    let mut m = CMatrix::zeros(2, 2);
                    m[(0, 0)] = cplx(a, 0.0);
                    m[(1, 1)] = cplx(d, 0.0);
                    m[(0, 1)] = cplx(re, im);
                    m[(1, 0)] = cplx(re, -im);
                    m
                })
        }

        proptest! {
            #[test]
            fn trace_norm_satisfies_triangle_inequality(a in hermitian2(), b in hermitian2()) {
                let na = trace_norm(&a).unwrap();
                let nb = trace_norm(&b).unwrap();
                let nab = trace_norm(&(&a + &b)).unwrap();
                prop_assert!(nab <= na + nb + 1e-9);
            }

            #[test]
            fn trace_norm_is_absolutely_homogeneous(a in hermitian2(), c in -3.0f64..3.0) {
                let na = trace_norm(&a).unwrap();
                let scaled = trace_norm(&a.scale(c)).unwrap();
                prop_assert!((scaled - c.abs() * na).abs() <= 1e-9);
            }

            #[test]
            fn tensor_multiplies_traces_and_dims(a in hermitian2(), b in hermitian2()) {
                let t = tensor(&a, &b).unwrap();
                prop_assert_eq!(t.nrows(), 4);
                let ta = real_trace(&a);
                let tb = real_trace(&b);
                prop_assert!((real_trace(&t) - ta * tb).abs() <= 1e-12);
                // trace of a product against the entrywise evaluation
                prop_assert!(
                    (trace_of_product(&a, &b) - real_trace(&(&a * &b))).abs() <= 1e-12
                );
            }
        }
    }
}
