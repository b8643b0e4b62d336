//! Finite-dimensional Hermitian linear algebra.
//!
//! A player is a self-adjoint operator whose moves are its eigenvalues, a
//! mixed quantum strategy is a density operator, and the distance between
//! strategies is the trace norm. Everything here is a dense `dim x dim`
//! complex matrix; there is no sparse or unbounded machinery.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Absolute tolerance on `|a_ij - conj(a_ji)|` accepted at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Slack on the smallest eigenvalue of a density operator.
pub const PSD_TOL: f64 = 1e-10;
/// Slack on the unit trace of a density operator.
pub const TRACE_TOL: f64 = 1e-10;
/// Relative eigenvalue clustering tolerance used when none is supplied.
pub const DEFAULT_CLUSTER_RTOL: f64 = 1e-8;

fn check_square(m: &CMatrix) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyOperator);
    }
    Ok(rows)
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let n = check_square(m)?;
    for i in 0..n {
        for j in 0..n {
            let a = m[(i, j)];
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
            if deviation > HERMITIAN_TOL {
                return Err(Error::NotHermitian {
                    row: i,
                    col: j,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

/// `(A + A*) / 2`, which is exactly Hermitian in floating point.
fn symmetrize(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    out
}

fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}

fn to_faer(m: &CMatrix) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full eigendecomposition of a Hermitian matrix: eigenvalues ascending, with
/// the matching orthonormal eigenvectors as columns.
pub(crate) fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    if is_diagonal(m) {
        order.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
        let values = order.iter().map(|&i| m[(i, i)].re).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            vectors[(i, k)] = C64::new(1.0, 0.0);
        }
        return Ok((values, vectors));
    }
    // faer keeps eigenvectors accurate across near-degenerate pairs.
    let eig = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenFailed { dim: n })?;
    let (s, u) = (eig.S(), eig.U());
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let values = order.iter().map(|&i| s[i].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| u[(r, order[k])]);
    Ok((values, vectors))
}

/// `Re tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a[(i, j)], b[(j, i)]);
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// `<v, A v>` for a unit vector `v` and Hermitian `A`.
pub(crate) fn expectation(a: &CMatrix, v: &CVector) -> f64 {
    v.dotc(&(a * v)).re
}

/// A finite-dimensional self-adjoint operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity within [`HERMITIAN_TOL`] and stores the
    /// symmetrized matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_hermitian(&matrix)?;
        Ok(Self {
            matrix: symmetrize(&matrix),
        })
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::EmptyOperator);
        }
        let d = DVector::from_iterator(diagonal.len(), diagonal.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(CMatrix::from_diagonal(&d))
    }

    /// Builds from real row-major entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyOperator);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyOperator);
        }
        Ok(Self {
            matrix: CMatrix::identity(dim, dim),
        })
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

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64> {
        let (values, _) = eigh(&self.matrix)?;
        Ok(values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * alpha),
        }
    }

    /// `self - mu * other`, used for Lagrangian shifts.
    pub fn shifted_by(&self, mu: f64, other: &HermitianOperator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix - other.matrix.map(|z| z * mu),
        })
    }

    /// Whether `[self, other]` vanishes within `tol` in Frobenius norm.
    pub fn commutes_with(&self, other: &HermitianOperator, tol: f64) -> bool {
        self.dim() == other.dim()
            && (&self.matrix * &other.matrix - &other.matrix * &self.matrix).norm() <= tol
    }

    /// `tr(rho A)` for a state `rho`.
    pub fn expectation(&self, rho: &DensityOperator) -> f64 {
        trace_product(rho.matrix(), &self.matrix)
    }
}

/// Clustered spectral resolution `A = sum_i lambda_i P_i`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    bases: Vec<CMatrix>,
    projectors: Vec<CMatrix>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    /// Number of distinct eigenvalues.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Orthonormal basis (as columns) of the `i`-th eigenspace.
    pub fn basis(&self, i: usize) -> &CMatrix {
        &self.bases[i]
    }

    pub fn multiplicity(&self, i: usize) -> usize {
        self.bases[i].ncols()
    }

    /// `m(T)`.
    pub fn lower_bound(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `M(T)`.
    pub fn upper_bound(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// `E(lambda)`: the projector onto eigenvalues `<= lambda`.
    pub fn cumulative_projector(&self, lambda: f64) -> CMatrix {
        let n = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .filter(|(v, _)| **v <= lambda)
            .fold(CMatrix::zeros(n, n), |acc, (_, p)| acc + p)
    }

    /// `sum_i f(lambda_i) P_i`.
    pub fn apply_function(&self, mut f: impl FnMut(usize, f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for (i, (v, p)) in self.eigenvalues.iter().zip(&self.projectors).enumerate() {
            let a = f(i, *v);
            if a != 0.0 {
                out += p.map(|z| z * a);
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|_, v| v)
    }
}

/// Default clustering tolerance `1e-8 * (1 + ||A||)`.
pub fn default_cluster_tol(a: &HermitianOperator) -> Result<f64> {
    Ok(DEFAULT_CLUSTER_RTOL * (1.0 + a.operator_norm()?))
}

/// Eigendecomposition with eigenvalues closer than `cluster_tol` merged into
/// one eigenspace. Merged eigenvalues are replaced by their mean.
pub fn spectral_decompose(
    a: &HermitianOperator,
    cluster_tol: Option<f64>,
) -> Result<SpectralDecomposition> {
    let (values, vectors) = eigh(a.matrix())?;
    let tol = match cluster_tol {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => {
            return Err(Error::InvalidParameter(format!(
                "cluster tolerance must be positive, got {t}"
            )))
        }
        None => {
            DEFAULT_CLUSTER_RTOL * (1.0 + values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        }
    };
    Ok(cluster(&values, &vectors, tol))
}

pub(crate) fn cluster(values: &[f64], vectors: &CMatrix, tol: f64) -> SpectralDecomposition {
    let n = vectors.nrows();
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            groups.push((start, k));
            start = k;
        }
    }
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut bases = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for (lo, hi) in groups {
        let mean = values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        let basis = vectors.columns(lo, hi - lo).into_owned();
        let mut p = &basis * basis.adjoint();
        // Exact Hermiticity keeps downstream traces real.
        p = symmetrize(&p);
        eigenvalues.push(mean);
        bases.push(basis);
        projectors.push(p);
    }
    debug_assert!(projectors.iter().all(|p| p.nrows() == n));
    SpectralDecomposition {
        eigenvalues,
        bases,
        projectors,
    }
}

/// `||T||_1`, the sum of singular values.
pub fn trace_norm(t: &CMatrix) -> Result<f64> {
    let n = check_square(t)?;
    if check_hermitian(t).is_ok() {
        let (values, _) = eigh(&symmetrize(t))?;
        return Ok(values.iter().map(|v| v.abs()).sum());
    }
    let sv = to_faer(t)
        .singular_values()
        .map_err(|_| Error::EigenFailed { dim: n })?;
    Ok(sv.iter().sum())
}

/// A positive semidefinite operator of unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates every state invariant, naming the first one violated.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        match check_hermitian(&matrix) {
            Ok(()) => {}
            Err(Error::NotHermitian { row, col, deviation }) => {
                return Err(Error::InvalidState(format!(
                    "not Hermitian at ({row}, {col}), deviation {deviation:e}"
                )))
            }
            Err(e) => return Err(e),
        }
        let matrix = symmetrize(&matrix);
        let trace: f64 = (0..matrix.nrows()).map(|i| matrix[(i, i)].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let (values, _) = eigh(&matrix)?;
        if values[0] < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite, minimum eigenvalue {:e}",
                values[0]
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix already known to be a state (convex combinations and
    /// outer products built inside the crate).
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self {
            matrix: symmetrize(&matrix),
        }
    }

    /// The maximally mixed state `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyOperator);
        }
        Ok(Self {
            matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        })
    }

    /// Diagonal state with the given probability vector.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| C64::new(p, 0.0)),
        );
        Self::new(CMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.matrix)?.0[0])
    }

    /// `(1 - t) self + t other`.
    pub fn mix(&self, other: &DensityOperator, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight must lie in [0, 1], got {t}"
            )));
        }
        Ok(Self::from_trusted(
            self.matrix.map(|z| z * (1.0 - t)) + other.matrix.map(|z| z * t),
        ))
    }

    /// `||self - other||_1`.
    pub fn distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        trace_norm(&(&self.matrix - &other.matrix))
    }
}

/// `|v><v| / ||v||^2`.
pub fn rank_one_state(v: &[C64]) -> Result<DensityOperator> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let u = CVector::from_iterator(v.len(), v.iter().map(|z| z / norm));
    Ok(DensityOperator::from_trusted(&u * u.adjoint()))
}

/// Deterministic random full-rank state `G G* / tr(G G*)`.
pub fn random_density(dim: usize, seed: u64) -> Result<DensityOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(&mut rng, dim)
}

pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<DensityOperator> {
    if dim == 0 {
        return Err(Error::EmptyOperator);
    }
    let g = random_gaussian_matrix(rng, dim);
    let w = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| w[(i, i)].re).sum();
    Ok(DensityOperator::from_trusted(w / C64::new(tr, 0.0)))
}

/// Matrix of independent standard complex Gaussians.
pub fn random_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Random Hermitian `(G + G*) / 2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = random_gaussian_matrix(rng, dim);
    HermitianOperator {
        matrix: symmetrize(&((&g + g.adjoint()) * C64::new(0.5, 0.0))),
    }
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = random_gaussian_matrix(rng, dim);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// `U diag(values) U*`.
pub fn operator_in_basis(unitary: &CMatrix, values: &[f64]) -> Result<HermitianOperator> {
    let d = DVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0)));
    HermitianOperator::new(symmetrize(&(unitary * CMatrix::from_diagonal(&d) * unitary.adjoint())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eigh_separates_close_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for sep in [1e-4, 6e-8, 1e-12] {
            for _ in 0..200 {
                let u = random_unitary(&mut rng, 5);
                let a = operator_in_basis(&u, &[0.3, 0.3 + sep, -3.9, 1.0, 2.0]).unwrap();
                let (values, vectors) = eigh(a.matrix()).unwrap();
                for (k, &l) in values.iter().enumerate() {
                    let v = vectors.column(k);
                    let r = (a.matrix() * v - v * C64::new(l, 0.0)).norm();
                    assert!(r < 1e-12, "sep {sep}: residual {r}");
                }
            }
        }
    }

    #[test]
    fn identity_has_single_eigenvalue() {
        let d = spectral_decompose(&HermitianOperator::identity(2).unwrap(), None).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0]);
        assert!(close(&d.projectors()[0], &CMatrix::identity(2, 2), 1e-14));
    }

    #[test]
    fn diagonal_decomposition() {
        let a = HermitianOperator::from_real_diagonal(&[0.0, 1.0]).unwrap();
        let d = spectral_decompose(&a, None).unwrap();
        assert_eq!(d.eigenvalues(), &[0.0, 1.0]);
        assert_eq!(d.lower_bound(), 0.0);
        assert_eq!(d.upper_bound(), 1.0);
        let p0 = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let p1 = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        assert!(close(&d.projectors()[0], &p0, 1e-14));
        assert!(close(&d.projectors()[1], &p1, 1e-14));
    }

    #[test]
    fn pauli_x_projectors() {
        let x = HermitianOperator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = spectral_decompose(&x, None).unwrap();
        assert!((d.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((d.eigenvalues()[1] - 1.0).abs() < 1e-14);
        // 1/2 [[1, -+1], [-+1, 1]]
        let minus = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(-0.5, 0.), c(-0.5, 0.), c(0.5, 0.)]);
        let plus = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(0.5, 0.)]);
        assert!(close(&d.projectors()[0], &minus, 1e-12));
        assert!(close(&d.projectors()[1], &plus, 1e-12));
    }

    #[test]
    fn near_degenerate_eigenvalues_are_merged() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, 1.0 + 1e-12, 3.0]).unwrap();
        let d = spectral_decompose(&a, None).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.multiplicity(0), 2);
        assert!((d.eigenvalues()[0] - (1.0 + 0.5e-12)).abs() < 1e-15);
    }

    #[test]
    fn cumulative_projector_steps() {
        let a = HermitianOperator::from_real_diagonal(&[2.0, 0.0, 1.0]).unwrap();
        let d = spectral_decompose(&a, None).unwrap();
        let e = d.cumulative_projector(1.0);
        let want = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0., 0.), c(1., 0.), c(1., 0.)]));
        assert!(close(&e, &want, 1e-14));
        assert!(close(&d.cumulative_projector(-1.0), &CMatrix::zeros(3, 3), 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(HermitianOperator::new(rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn symmetrizes_rounding_noise() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 1e-13), c(0.5, 0.25), c(0.5 + 5e-13, -0.25), c(2., 0.)]);
        let a = HermitianOperator::new(m).unwrap();
        assert_eq!(a.matrix()[(0, 1)], a.matrix()[(1, 0)].conj());
        assert_eq!(a.matrix()[(0, 0)].im, 0.0);
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1., 0.), c(-2., 0.)]));
        assert!((trace_norm(&d).unwrap() - 3.0).abs() < 1e-14);
        let rho = random_density(4, 3).unwrap();
        assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-12);
        // non-Hermitian nilpotent: singular values (1, 0)
        let n = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!((trace_norm(&n).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one_examples() {
        let e1 = rank_one_state(&[c(1., 0.), c(0., 0.)]).unwrap();
        assert_eq!(e1.matrix(), &CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]));
        let plus = rank_one_state(&[c(1., 0.), c(1., 0.)]).unwrap();
        assert!(close(plus.matrix(), &CMatrix::from_element(2, 2, c(0.5, 0.)), 1e-15));
        // |v><v| with v = (1, i)/sqrt2: entries v_i conj(v_j)
        let y = rank_one_state(&[c(1., 0.), c(0., 1.)]).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0., -0.5), c(0., 0.5), c(0.5, 0.)]);
        assert!(close(y.matrix(), &want, 1e-15));
        assert_eq!(rank_one_state(&[c(0., 0.), c(0., 0.)]), Err(Error::ZeroVector));
    }

    #[test]
    fn random_density_properties() {
        let one = random_density(1, 99).unwrap();
        assert!((one.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert_eq!(random_density(3, 5).unwrap(), random_density(3, 5).unwrap());
        let rho = random_density(4, 7).unwrap();
        assert!(rho.min_eigenvalue().unwrap() > 0.0);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(DensityOperator::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn density_validation_names_invariant() {
        let bad_trace = CMatrix::identity(2, 2);
        let err = DensityOperator::new(bad_trace).unwrap_err();
        assert!(err.to_string().contains("trace"));
        let indefinite = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5, 0.), c(-0.5, 0.)]));
        let err = DensityOperator::new(indefinite).unwrap_err();
        assert!(err.to_string().contains("positive semidefinite"));
    }
}
