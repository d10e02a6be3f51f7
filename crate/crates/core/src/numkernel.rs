//! Small dense complex matrices (dimension 2 to 16).
//!
//! Everything the physics modules need: arithmetic, adjoints, Kronecker
//! products, partial traces over a two-qubit split, spectra and the matrix
//! exponential. Storage and the heavy decompositions are delegated to
//! `nalgebra`; this module pins dimensions, orderings and tolerances.
//!
//! Two-kaon product ordering: `index = 2 * left + right`, so the left factor
//! is the slow index.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{KaonError, Result};

pub use num_complex::Complex64 as Complex;

/// Dimensions accepted by [`CMatrix`].
pub const ALLOWED_DIMS: [usize; 5] = [2, 3, 4, 8, 16];

/// Maximum `‖m − m†‖` accepted by [`eig_hermitian`].
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Shorthand for a complex number with zero imaginary part.
#[inline]
pub fn re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// Imaginary unit.
pub const I: Complex = Complex::new(0.0, 1.0);

/// Square complex matrix with a validated dimension.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    inner: DMatrix<Complex>,
}

/// Which factor of a two-qubit product space an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if ALLOWED_DIMS.contains(&dim) {
        Ok(())
    } else {
        Err(KaonError::UnsupportedDimension(dim))
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[Complex]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(KaonError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(KaonError::NonFinite("CMatrix::from_rows"));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<Complex> = entries.iter().map(|&x| re(x)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex) -> Result<Self> {
        check_dim(dim)?;
        let inner = DMatrix::from_fn(dim, dim, f);
        Self::from_nalgebra(inner)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            inner: DMatrix::zeros(dim, dim),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            inner: DMatrix::identity(dim, dim),
        })
    }

    pub fn from_diagonal(diag: &[Complex]) -> Result<Self> {
        check_dim(diag.len())?;
        Ok(Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[Complex], v: &[Complex]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(KaonError::DimensionMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    /// Wraps an `nalgebra` matrix, validating shape and finiteness.
    pub fn from_nalgebra(inner: DMatrix<Complex>) -> Result<Self> {
        if !inner.is_square() {
            return Err(KaonError::DimensionMismatch {
                expected: inner.nrows(),
                found: inner.ncols(),
            });
        }
        check_dim(inner.nrows())?;
        if inner.iter().any(|z| !z.is_finite()) {
            return Err(KaonError::NonFinite("CMatrix::from_nalgebra"));
        }
        Ok(Self { inner })
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex> {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.inner[(i, j)]
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Complex> {
        let n = self.dim();
        (0..n * n).map(|k| self.inner[(k / n, k % n)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            inner: self.inner.map(|z| z.conj()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn trace(&self) -> Complex {
        self.inner.trace()
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self {
            inner: &self.inner * s,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(re(s))
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            inner: (&self.inner + self.inner.adjoint()) * re(0.5),
        }
    }

    pub fn apply(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(
            v.len(),
            self.dim(),
            "vector length must match matrix dimension"
        );
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.inner[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `A B − B A`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `A B + B A`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "dimension mismatch in max_abs_diff"
        );
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |m − m†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Conjugates `self` by a (not necessarily unitary) change of basis: `u · self · u⁻¹`.
    pub fn similarity(&self, u: &Self) -> Result<Self> {
        let inv = u
            .inner
            .clone()
            .try_inverse()
            .ok_or_else(|| KaonError::InvalidParameter("singular basis transform".into()))?;
        Self::from_nalgebra(&u.inner * &self.inner * inv)
    }

    pub fn try_inverse(&self) -> Result<Self> {
        let inv = self
            .inner
            .clone()
            .try_inverse()
            .ok_or_else(|| KaonError::InvalidParameter("singular matrix".into()))?;
        Self::from_nalgebra(inv)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}", self.inner)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix {
            inner: -&self.inner,
        }
    }
}

/// Eigenvalues sorted by descending real part, ties broken by descending
/// imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex>,
}

impl Spectrum {
    pub fn new(mut values: Vec<Complex>) -> Self {
        values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        Self { values }
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest imaginary part in modulus.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    if n > 16 {
        return Err(KaonError::UnsupportedDimension(n));
    }
    CMatrix::from_fn(n, |i, j| a.get(i / nb, j / nb) * b.get(i % nb, j % nb))
}

/// Kronecker product of two vectors, same ordering as [`kron`].
pub fn kron_vec(u: &[Complex], v: &[Complex]) -> Vec<Complex> {
    u.iter()
        .flat_map(|&x| v.iter().map(move |&y| x * y))
        .collect()
}

/// Traces out `traced` from a 4×4 operator on two qubits and returns the 2×2
/// operator on the remaining factor.
pub fn partial_trace(m: &CMatrix, traced: Side) -> Result<CMatrix> {
    if m.dim() != 4 {
        return Err(KaonError::DimensionMismatch {
            expected: 4,
            found: m.dim(),
        });
    }
    let idx = |l: usize, r: usize| 2 * l + r;
    CMatrix::from_fn(2, |i, j| match traced {
        Side::Right => (0..2).map(|k| m.get(idx(i, k), idx(j, k))).sum(),
        Side::Left => (0..2).map(|k| m.get(idx(k, i), idx(k, j))).sum(),
    })
}

/// Real eigenvalues and orthonormal eigenvectors (columns) of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Full Hermitian eigendecomposition, eigenvalues in descending order.
pub fn eigh(m: &CMatrix) -> Result<HermitianEigen> {
    let defect = m.hermiticity_defect();
    if defect >= HERMITICITY_TOL {
        return Err(KaonError::NotHermitian(defect));
    }
    let eig = SymmetricEigen::try_new(m.hermitian_part().inner, f64::EPSILON, 10_000)
        .ok_or(KaonError::NoConvergence)?;
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])])?;
    Ok(HermitianEigen { values, vectors })
}

/// Spectrum of a Hermitian matrix (imaginary parts are exactly zero).
pub fn eig_hermitian(m: &CMatrix) -> Result<Spectrum> {
    let eig = eigh(m)?;
    Ok(Spectrum::new(eig.values.into_iter().map(re).collect()))
}

/// Spectrum of a general complex matrix of dimension ≤ 4 via complex Schur form.
pub fn eig_general(m: &CMatrix) -> Result<Spectrum> {
    if m.dim() > 4 {
        return Err(KaonError::UnsupportedDimension(m.dim()));
    }
    let schur =
        Schur::try_new(m.inner.clone(), f64::EPSILON, 10_000).ok_or(KaonError::NoConvergence)?;
    let (_, t) = schur.unpack();
    let values: Vec<Complex> = (0..m.dim()).map(|k| t[(k, k)]).collect();
    if values.iter().any(|z| !z.is_finite()) {
        return Err(KaonError::NonFinite("eig_general"));
    }
    Ok(Spectrum::new(values))
}

/// Matrix exponential (Padé scaling and squaring).
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    CMatrix::from_nalgebra(m.inner.exp()).map_err(|_| KaonError::NonFinite("expm"))
}

/// Pauli matrices.
pub fn sigma_x() -> CMatrix {
    CMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_rows(2, &[re(0.0), -I, I, re(0.0)]).expect("2x2")
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
}

pub fn inner_product(u: &[Complex], v: &[Complex]) -> Complex {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_c(rng: &mut impl Rng) -> Complex {
        Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn rand_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, |_, _| rand_c(rng)).unwrap()
    }

    fn rand_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
        rand_matrix(rng, n).hermitian_part()
    }

    #[test]
    fn kron_identity_and_block_structure() {
        let i2 = CMatrix::identity(2).unwrap();
        assert_eq!(kron(&i2, &i2).unwrap(), CMatrix::identity(4).unwrap());
        let zi = kron(&sigma_z(), &i2).unwrap();
        let expected = CMatrix::from_diagonal(&[re(1.0), re(1.0), re(-1.0), re(-1.0)]).unwrap();
        assert_eq!(zi, expected);
    }

    #[test]
    fn kron_acts_factorwise_on_product_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = rand_matrix(&mut rng, 2);
            let b = rand_matrix(&mut rng, 2);
            let v = [rand_c(&mut rng), rand_c(&mut rng)];
            let w = [rand_c(&mut rng), rand_c(&mut rng)];
            let lhs = kron(&a, &b).unwrap().apply(&kron_vec(&v, &w));
            // elementwise oracle: (av)_i (bw)_j at index 2i + j
            let av = a.apply(&v);
            let bw = b.apply(&w);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((lhs[2 * i + j] - av[i] * bw[j]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn kron_rejects_oversized_products() {
        let a = CMatrix::identity(4).unwrap();
        let b = CMatrix::identity(8).unwrap();
        assert_eq!(kron(&a, &b), Err(KaonError::UnsupportedDimension(32)));
        let c = CMatrix::identity(3).unwrap();
        assert_eq!(
            kron(&c, &CMatrix::identity(2).unwrap()),
            Err(KaonError::UnsupportedDimension(6))
        );
    }

    #[test]
    fn unsupported_dimensions_rejected() {
        assert_eq!(CMatrix::zeros(5), Err(KaonError::UnsupportedDimension(5)));
        assert!(CMatrix::from_rows(2, &[re(1.0); 3]).is_err());
        assert!(CMatrix::from_rows(2, &[re(f64::NAN), re(0.0), re(0.0), re(0.0)]).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = rand_hermitian(&mut rng, 2);
        let b = rand_hermitian(&mut rng, 2);
        let ab = kron(&a, &b).unwrap();
        let left = partial_trace(&ab, Side::Right).unwrap();
        assert!(left.max_abs_diff(&a.scale(b.trace())) < 1e-14);
        let right = partial_trace(&ab, Side::Left).unwrap();
        assert!(right.max_abs_diff(&b.scale(a.trace())) < 1e-14);
    }

    #[test]
    fn partial_trace_of_singlet_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [re(0.0), re(s), re(-s), re(0.0)];
        let rho = CMatrix::outer(&psi, &psi).unwrap();
        let half = CMatrix::identity(2).unwrap().scale_re(0.5);
        for side in [Side::Left, Side::Right] {
            assert!(partial_trace(&rho, side).unwrap().max_abs_diff(&half) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_preserves_trace_by_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let m = rand_hermitian(&mut rng, 4);
            let total: Complex = (0..4).map(|k| m.get(k, k)).sum();
            for side in [Side::Left, Side::Right] {
                let pt = partial_trace(&m, side).unwrap();
                assert!((pt.trace() - total).norm() < 1e-12);
            }
        }
        assert!(partial_trace(&CMatrix::identity(2).unwrap(), Side::Left).is_err());
    }

    #[test]
    fn hermitian_spectra_of_simple_matrices() {
        let d = CMatrix::from_diagonal(&[re(0.25), re(0.75)]).unwrap();
        assert_eq!(eig_hermitian(&d).unwrap().real_parts(), vec![0.75, 0.25]);
        let p = CMatrix::from_real_rows(2, &[0.5, -0.5, -0.5, 0.5]).unwrap();
        let vals = eig_hermitian(&p).unwrap().real_parts();
        assert!((vals[0] - 1.0).abs() < 1e-15 && vals[1].abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let m = CMatrix::from_real_rows(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(KaonError::NotHermitian(_))));
    }

    #[test]
    fn eigh_reconstructs_the_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3, 4, 8] {
            let m = rand_hermitian(&mut rng, n);
            let e = eigh(&m).unwrap();
            let lambda =
                CMatrix::from_diagonal(&e.values.iter().map(|&x| re(x)).collect::<Vec<_>>())
                    .unwrap();
            let rec = &(&e.vectors * &lambda) * &e.vectors.adjoint();
            assert!(rec.max_abs_diff(&m) < 1e-9);
        }
    }

    /// Characteristic polynomial coefficients by Faddeev–LeVerrier, highest degree first.
    fn char_poly(m: &CMatrix) -> Vec<Complex> {
        let n = m.dim();
        let id = CMatrix::identity(n).unwrap();
        let mut coeffs = vec![re(1.0)];
        let mut mk = CMatrix::zeros(n).unwrap();
        let mut c = re(1.0);
        for k in 1..=n {
            mk = &(m * &mk) + &id.scale(c);
            c = -(m * &mk).trace() / re(k as f64);
            coeffs.push(c);
        }
        coeffs
    }

    /// Durand–Kerner root finder for a monic polynomial.
    fn poly_roots(coeffs: &[Complex]) -> Vec<Complex> {
        let n = coeffs.len() - 1;
        let eval = |z: Complex| coeffs.iter().fold(re(0.0), |acc, &c| acc * z + c);
        let seed = Complex::new(0.4, 0.9);
        let mut roots: Vec<Complex> = (0..n).map(|k| seed.powu(k as u32)).collect();
        for _ in 0..2000 {
            let prev = roots.clone();
            for i in 0..n {
                let denom: Complex = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| roots[i] - roots[j])
                    .product();
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
            }
            let delta = roots
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if delta < 1e-15 {
                break;
            }
        }
        roots
    }

    #[test]
    fn hermitian_spectrum_matches_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let m = rand_hermitian(&mut rng, 4);
            let got = eig_hermitian(&m).unwrap().real_parts();
            let oracle = Spectrum::new(poly_roots(&char_poly(&m))).real_parts();
            for (g, o) in got.iter().zip(&oracle) {
                assert!((g - o).abs() < 1e-9, "{got:?} vs {oracle:?}");
            }
        }
    }

    #[test]
    fn general_spectrum_diagonal_and_quadratic_formula() {
        let d = CMatrix::from_diagonal(&[Complex::new(1.0, -0.5), Complex::new(2.0, 0.3)]).unwrap();
        let s = eig_general(&d).unwrap();
        assert_eq!(
            s.values(),
            &[Complex::new(2.0, 0.3), Complex::new(1.0, -0.5)]
        );

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let m = rand_matrix(&mut rng, 2);
            let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr - det * re(4.0)).sqrt();
            let oracle = Spectrum::new(vec![(tr + disc) / re(2.0), (tr - disc) / re(2.0)]);
            let got = eig_general(&m).unwrap();
            for (g, o) in got.values().iter().zip(oracle.values()) {
                assert!((g - o).norm() < 1e-9);
            }
        }
        assert!(eig_general(&CMatrix::identity(8).unwrap()).is_err());
    }

    #[test]
    fn general_spectrum_of_random_4x4_matches_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let m = rand_matrix(&mut rng, 4);
            let got = eig_general(&m).unwrap();
            let oracle = poly_roots(&char_poly(&m));
            for g in got.values() {
                let nearest = oracle
                    .iter()
                    .map(|o| (g - o).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-9);
            }
        }
    }

    #[test]
    fn expm_simple_cases() {
        let z = CMatrix::zeros(4).unwrap();
        assert_eq!(
            expm(&z)
                .unwrap()
                .max_abs_diff(&CMatrix::identity(4).unwrap()),
            0.0
        );
        let d = CMatrix::from_diagonal(&[Complex::new(0.3, 1.0), Complex::new(-2.0, 0.5)]).unwrap();
        let e = expm(&d).unwrap();
        let expected =
            CMatrix::from_diagonal(&[Complex::new(0.3, 1.0).exp(), Complex::new(-2.0, 0.5).exp()])
                .unwrap();
        assert!(e.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn expm_matches_truncated_taylor_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let m = rand_matrix(&mut rng, 4);
            let mut term = CMatrix::identity(4).unwrap();
            let mut sum = term.clone();
            for k in 1..30 {
                term = (&term * &m).scale_re(1.0 / k as f64);
                sum = &sum + &term;
            }
            assert!(expm(&m).unwrap().max_abs_diff(&sum) < 1e-9);
        }
    }

    #[test]
    fn expm_semigroup_for_commuting_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let m = rand_matrix(&mut rng, 4);
        let (s, t) = (0.3, 0.9);
        let lhs = expm(&m.scale_re(s + t)).unwrap();
        let rhs = &expm(&m.scale_re(s)).unwrap() * &expm(&m.scale_re(t)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let entries: Vec<Complex> = v.into_iter().map(|(a, b)| Complex::new(a, b)).collect();
            CMatrix::from_rows(n, &entries).unwrap()
        })
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in arb_matrix(2), b in arb_matrix(2), c in arb_matrix(4)) {
            let lhs = kron(&kron(&a, &b).unwrap(), &c).unwrap();
            let rhs = kron(&a, &kron(&b, &c).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn partial_trace_is_linear(a in arb_matrix(4), b in arb_matrix(4), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let combo = &a.scale_re(x) + &b.scale_re(y);
            for side in [Side::Left, Side::Right] {
                let lhs = partial_trace(&combo, side).unwrap();
                let rhs = &partial_trace(&a, side).unwrap().scale_re(x) + &partial_trace(&b, side).unwrap().scale_re(y);
                prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }

        #[test]
        fn hermitian_spectrum_sums_to_trace(m in arb_matrix(4)) {
            let h = m.hermitian_part();
            let vals = eig_hermitian(&h).unwrap().real_parts();
            prop_assert!((vals.iter().sum::<f64>() - h.trace().re).abs() < 1e-10);
        }

        #[test]
        fn hermitian_2x2_spectrum_product_is_determinant(m in arb_matrix(2)) {
            let h = m.hermitian_part();
            let vals = eig_hermitian(&h).unwrap().real_parts();
            let det = h.get(0, 0) * h.get(1, 1) - h.get(0, 1) * h.get(1, 0);
            prop_assert!((vals[0] * vals[1] - det.re).abs() < 1e-10);
        }

        #[test]
        fn expm_of_anti_hermitian_is_unitary(m in arb_matrix(4)) {
            let a = m.hermitian_part().scale(I);
            let u = expm(&a).unwrap();
            let uu = &u * &u.adjoint();
            prop_assert!(uu.max_abs_diff(&CMatrix::identity(4).unwrap()) < 1e-9);
        }
    }
}
