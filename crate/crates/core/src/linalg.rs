//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is the carrier for points, group elements, and
//! coefficient operators. Factorizations (LU, QR, Hermitian eigen, SVD,
//! matrix exponential) are delegated to `nalgebra`; the Pfaffian is computed
//! here by skew-symmetric Gaussian elimination.
//!
//! Tolerances throughout are hybrids: a residual passes when it is at most
//! `tol * max(1, ‖input‖)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

const EIGEN_EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

/// Scale factor used by the hybrid tolerances.
pub fn tol_scale(norm: f64) -> f64 {
    norm.max(1.0)
}

/// Dense rectangular complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} ", self.nrows(), self.ncols())?;
        f.debug_list()
            .entries((0..self.nrows()).map(|i| self.row(i)))
            .finish()
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::from_element(rows, cols, ZERO) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::identity(n, n) }
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numeric("matrix entries must be finite".into()));
        }
        Ok(Self { inner: DMatrix::from_row_slice(rows, cols, &entries) })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { inner: DMatrix::from_fn(rows, cols, f) }
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        Self::from_fn(rows, cols, |i, j| C64::new(entries[i * cols + j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn row_vector(values: &[C64]) -> Self {
        Self::from_fn(1, values.len(), |_, j| values[j])
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.nrows() != b.nrows()
            || c.nrows() != d.nrows()
            || a.ncols() != c.ncols()
            || b.ncols() != d.ncols()
        {
            return Err(Error::Dimension("incompatible block sizes".into()));
        }
        let (r, s) = (a.nrows(), a.ncols());
        let rows = r + c.nrows();
        let cols = s + b.ncols();
        Ok(Self::from_fn(rows, cols, |i, j| match (i < r, j < s) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - s)],
            (false, true) => c[(i - r, j)],
            (false, false) => d[(i - r, j - s)],
        }))
    }

    pub(crate) fn from_nalgebra(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        (0..self.ncols()).map(|j| self[(i, j)]).collect()
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        (0..self.nrows()).flat_map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self { inner: self.inner.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { inner: self.inner.map(|z| z.conj()) }
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { inner: &self.inner * c }
    }

    pub fn map(&self, f: impl FnMut(C64) -> C64) -> Self {
        Self { inner: self.inner.map(f) }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.is_finite())
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// Copy of the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self { inner: self.inner.view((r0, c0), (rows, cols)).into_owned() }
    }

    /// Removes the listed rows and columns.
    pub fn remove(&self, rows: &[usize], cols: &[usize]) -> Self {
        let keep_r: Vec<usize> = (0..self.nrows()).filter(|i| !rows.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.ncols()).filter(|j| !cols.contains(j)).collect();
        Self::from_fn(keep_r.len(), keep_c.len(), |i, j| self[(keep_r[i], keep_c[j])])
    }

    /// Solves `self * X = rhs`; fails on a singular system.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || self.nrows() != rhs.nrows() {
            return Err(Error::Dimension("solve needs a square system".into()));
        }
        let lu = self.inner.clone().lu();
        lu.solve(&rhs.inner)
            .filter(|x| x.iter().all(|z| z.is_finite()))
            .map(Self::from_nalgebra)
            .ok_or_else(|| Error::Numeric("singular linear system".into()))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.nrows()))
    }

    /// `‖self − selfᵗ‖_max` (symmetric defect) or with `sign = -1` the
    /// antisymmetric defect `‖self + selfᵗ‖_max`.
    pub fn transpose_defect(&self, sign: f64) -> f64 {
        let n = self.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self[(i, j)] - self[(j, i)] * sign).norm());
            }
        }
        worst
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Matrix exponential (Padé approximant with scaling and squaring).
    pub fn exp(&self) -> Result<Self> {
        require_square(self, "exp")?;
        let e = self.inner.exp();
        if e.iter().all(|z| z.is_finite()) {
            Ok(Self::from_nalgebra(e))
        } else {
            Err(Error::Numeric("matrix exponential overflowed".into()))
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.inner[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner * &rhs.inner }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                (&self).$f(rhs)
            }
        }
        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Mul, mul);
forward_owned!(Add, add);
forward_owned!(Sub, sub);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { inner: -&self.inner }
    }
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Determinant via partially pivoted LU.
pub fn det(m: &ComplexMatrix) -> Result<C64> {
    require_square(m, "det")?;
    if m.nrows() == 0 {
        return Ok(ONE);
    }
    Ok(m.inner.clone().lu().determinant())
}

/// Pfaffian of an antisymmetric matrix.
///
/// Skew-symmetric elimination with row/column pivoting (the `A = L T Lᵗ`
/// scheme of Parlett and Reid). Odd dimensions give exactly zero.
pub fn pfaffian(a: &ComplexMatrix) -> Result<C64> {
    require_square(a, "pfaffian")?;
    let n = a.nrows();
    if a.transpose_defect(-1.0) > 1e-12 * tol_scale(a.max_abs()) {
        return Err(Error::Shape("pfaffian needs an antisymmetric matrix".into()));
    }
    if n % 2 == 1 {
        return Ok(ZERO);
    }
    let mut m = a.inner.clone();
    let mut pf = ONE;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let (mut kp, mut best) = (k + 1, m[(k + 1, k)].norm());
        for i in k + 2..n {
            let v = m[(i, k)].norm();
            if v > best {
                kp = i;
                best = v;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = m[(k, k + 1)];
        if pivot == ZERO {
            return Ok(ZERO);
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<C64> = (k + 2..n).map(|j| m[(k, j)] / pivot).collect();
            let col: Vec<C64> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
    }
    Ok(pf)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_spectrum(h: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(h)?.0)
}

/// Eigenvalues (ascending) and matching unit eigenvectors as columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    require_square(h, "hermitian_spectrum")?;
    if h.hermitian_defect() > 1e-12 * tol_scale(h.max_abs()) {
        return Err(Error::Shape("matrix is not Hermitian".into()));
    }
    let n = h.nrows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let eig = nalgebra::SymmetricEigen::try_new(h.inner.clone(), EIGEN_EPS, MAX_ITER)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Descending singular values.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::Numeric("non-finite matrix".into()));
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = nalgebra::SVD::try_new(m.inner.clone(), false, false, EIGEN_EPS, MAX_ITER)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Hermitian square root of a positive semidefinite matrix.
pub fn psd_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let floor = -1e-10 * tol_scale(h.max_abs());
    if values.first().is_some_and(|&v| v < floor) {
        return Err(Error::Domain(format!(
            "matrix is indefinite (min eigenvalue {:.3e})",
            values[0]
        )));
    }
    let roots: Vec<C64> = values.iter().map(|&v| C64::new(v.max(0.0).sqrt(), 0.0)).collect();
    Ok(&(&vectors * &ComplexMatrix::diag(&roots)) * &vectors.adjoint())
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of independent standard complex Gaussians.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let entries: Vec<C64> = (0..rows * cols).map(|_| gaussian_c64(rng)).collect();
    ComplexMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j])
}

/// Haar-distributed unitary drawn from `rng`: QR of a complex Gaussian with
/// the diagonal of R rotated onto the positive reals.
pub fn random_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.inner.qr();
    let q = qr.q();
    let r = qr.r();
    let phases: Vec<C64> = (0..n)
        .map(|k| {
            let d = r[(k, k)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                ONE
            }
        })
        .collect();
    ComplexMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
}

/// Deterministic unitary for `(n, seed)`.
pub fn random_unitary(n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Parameter("unitary dimension must be positive".into()));
    }
    let mut rng = crate::rng::seeded(seed);
    Ok(random_unitary_with(n, &mut rng))
}

/// Real orthogonal matrix (Haar on O(n)) stored with zero imaginary parts.
pub fn random_orthogonal_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    ComplexMatrix::from_fn(n, n, |i, j| {
        let s = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        C64::new(q[(i, j)] * s, 0.0)
    })
}

/// `‖U U* − I‖_max`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (&(u * &u.adjoint()) - &ComplexMatrix::identity(u.nrows())).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn det_trivial_cases() {
        assert_eq!(det(&ComplexMatrix::identity(3)).unwrap(), ONE);
        let d = ComplexMatrix::diag(&[c(2.0, 1.0), c(0.5, -3.0)]);
        let expected = c(2.0, 1.0) * c(0.5, -3.0);
        assert!((det(&d).unwrap() - expected).norm() < 1e-15);
        assert!(matches!(det(&ComplexMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn pfaffian_canonical_forms() {
        let a = c(0.3, -1.2);
        let b = c(2.0, 0.5);
        let m2 = ComplexMatrix::from_row_major(2, 2, vec![ZERO, a, -a, ZERO]).unwrap();
        assert!((pfaffian(&m2).unwrap() - a).norm() < 1e-15);

        let mut m4 = ComplexMatrix::zeros(4, 4);
        m4[(0, 1)] = a;
        m4[(1, 0)] = -a;
        m4[(2, 3)] = b;
        m4[(3, 2)] = -b;
        assert!((pfaffian(&m4).unwrap() - a * b).norm() < 1e-14);
    }

    #[test]
    fn pfaffian_odd_dimension_is_zero() {
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 1)] = ONE;
        m[(1, 0)] = -ONE;
        assert_eq!(pfaffian(&m).unwrap(), ZERO);
    }

    #[test]
    fn pfaffian_rejects_non_antisymmetric() {
        let m = ComplexMatrix::identity(2);
        assert!(matches!(pfaffian(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn spectra_of_simple_matrices() {
        assert_eq!(hermitian_spectrum(&ComplexMatrix::identity(3)).unwrap(), vec![1.0; 3]);
        let d = ComplexMatrix::diag(&[c(2.0, 0.0), c(-1.0, 0.0), ZERO]);
        let ev = hermitian_spectrum(&d).unwrap();
        for (x, y) in ev.iter().zip([-1.0, 0.0, 2.0]) {
            assert!((x - y).abs() < 1e-14);
        }
        let sv = singular_values(&ComplexMatrix::identity(3)).unwrap();
        assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-14));
        assert_eq!(singular_values(&ComplexMatrix::zeros(2, 3)).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn hermitian_spectrum_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = ONE;
        assert!(matches!(hermitian_spectrum(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn psd_sqrt_diagonal() {
        let h = ComplexMatrix::diag(&[c(4.0, 0.0), c(9.0, 0.0)]);
        let s = psd_sqrt(&h).unwrap();
        let expected = ComplexMatrix::diag(&[c(2.0, 0.0), c(3.0, 0.0)]);
        assert!((&s - &expected).max_abs() < 1e-14);
        let i = psd_sqrt(&ComplexMatrix::identity(3)).unwrap();
        assert!((&i - &ComplexMatrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let h = ComplexMatrix::diag(&[c(1.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(psd_sqrt(&h), Err(Error::Domain(_))));
    }

    #[test]
    fn random_unitary_contract() {
        let u1 = random_unitary(1, 7).unwrap();
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-12);
        for n in 1..6 {
            for seed in 0..5 {
                let u = random_unitary(n, seed).unwrap();
                assert!(unitarity_defect(&u) < 1e-12);
                let again = random_unitary(n, seed).unwrap();
                assert_eq!(u.to_row_major(), again.to_row_major());
            }
        }
    }

    #[test]
    fn from_row_major_validates() {
        assert!(ComplexMatrix::from_row_major(2, 2, vec![ONE; 3]).is_err());
        assert!(ComplexMatrix::from_row_major(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn exp_of_skew_hermitian_is_unitary() {
        let mut rng = crate::rng::seeded(3);
        let g = gaussian_matrix(4, 4, &mut rng);
        let x = (&g - &g.adjoint()).scale(c(0.5, 0.0));
        let u = x.exp().unwrap();
        assert!(unitarity_defect(&u) < 1e-13);
    }
}
