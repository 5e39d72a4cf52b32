//! Dense complex matrices for states, effects, unitaries and phase-point
//! operators, plus spectral decomposition of normal matrices whose spectrum
//! sits on the `2d`-th roots of unity.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::modring::{omega_power, ModInt};

/// Entrywise max-norm tolerance for matrix equality.
pub const TOL: f64 = 1e-9;
/// Distance within which an eigenvalue is snapped to a root of unity.
pub const SNAP_TOL: f64 = 1e-6;

pub type Ket = DVector<Complex64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmatError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not normal (||UU^† - U^†U||_max = {deviation:e})")]
    NotNormal { deviation: f64 },
    #[error("spectrum is not contained in the 2d-th roots of unity (d = {d}, ||U^(2d) - I||_max = {residual:e})")]
    SpectrumOffRoots { residual: f64, d: u64 },
}

/// A square complex matrix acting on a `dim`-dimensional Hilbert space.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorMatrix{}", self.0)
    }
}

impl OperatorMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self, QmatError> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(QmatError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self, QmatError> {
        let rows = re.len();
        if im.len() != rows {
            return Err(QmatError::DimensionMismatch {
                left: rows,
                right: im.len(),
            });
        }
        for (r, i) in re.iter().zip(im) {
            if r.len() != rows || i.len() != rows {
                return Err(QmatError::NotSquare {
                    rows,
                    cols: r.len().max(i.len()),
                });
            }
        }
        Self::from_matrix(DMatrix::from_fn(rows, rows, |i, j| {
            Complex64::new(re[i][j], im[i][j])
        }))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// `|ket><ket|`.
    pub fn projector(ket: &Ket) -> Self {
        Self(ket * ket.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Kronecker product; the first factor is the slow index.
    pub fn tensor(&self, other: &OperatorMatrix) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// `U self U^†`.
    pub fn conjugate_by(&self, u: &OperatorMatrix) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn apply(&self, ket: &Ket) -> Ket {
        &self.0 * ket
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff on unequal dimensions");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &OperatorMatrix, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = Self(&self.0 * self.0.adjoint());
        prod.max_abs_diff(&Self::identity(self.dim())) <= tol
    }

    /// `||UU^† - U^†U||_max`.
    pub fn normality_defect(&self) -> f64 {
        let a = &self.0 * self.0.adjoint();
        let b = self.0.adjoint() * &self.0;
        Self(a).max_abs_diff(&Self(b))
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

fn check_dims(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<(), QmatError> {
    if a.dim() != b.dim() {
        Err(QmatError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        })
    } else {
        Ok(())
    }
}

/// Hilbert-Schmidt inner product `tr(A^† B)`.
pub fn hs_inner(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Complex64, QmatError> {
    check_dims(a, b)?;
    Ok(a.0.iter().zip(b.0.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `tr(AB)` without forming the product.
pub fn trace_product(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Complex64, QmatError> {
    check_dims(a, b)?;
    let n = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a.0[(i, j)] * b.0[(j, i)];
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct SpectralTerm {
    /// Eigenvalue exponent in `Z_{2d}`: the eigenvalue is `exp(πi·k/d)`.
    pub exponent: ModInt,
    pub projector: OperatorMatrix,
}

/// Eigenvalue-grouped projectors of a normal matrix with root-of-unity spectrum.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub d: u64,
    /// Sorted by exponent.
    pub terms: Vec<SpectralTerm>,
}

impl SpectralDecomposition {
    pub fn eigenvalue(&self, term: &SpectralTerm) -> Complex64 {
        omega_power(term.exponent, self.d)
    }

    pub fn projector(&self, exponent: ModInt) -> Option<&OperatorMatrix> {
        self.terms
            .iter()
            .find(|t| t.exponent == exponent)
            .map(|t| &t.projector)
    }

    pub fn exponents(&self) -> Vec<ModInt> {
        self.terms.iter().map(|t| t.exponent).collect()
    }

    /// `Σ_k exp(πik/d) Π_k`.
    pub fn reconstruct(&self) -> OperatorMatrix {
        let dim = self.terms[0].projector.dim();
        self.terms.iter().fold(OperatorMatrix::zeros(dim), |acc, t| {
            &acc + &t.projector.scale(self.eigenvalue(t))
        })
    }
}

/// Decomposes a normal `U` whose eigenvalues are `2d`-th roots of unity.
///
/// Such a `U` satisfies `U^{2d} = I`, and the eigenprojectors are the exact
/// filters `Π_k = (1/2d) Σ_j exp(-πijk/d) U^j`. Empty filters are dropped.
pub fn spectral_decompose(u: &OperatorMatrix, d: u64) -> Result<SpectralDecomposition, QmatError> {
    let defect = u.normality_defect();
    if defect > TOL {
        return Err(QmatError::NotNormal { deviation: defect });
    }
    let dim = u.dim();
    let order = 2 * d as usize;
    let mut powers = Vec::with_capacity(order);
    let mut acc = DMatrix::<Complex64>::identity(dim, dim);
    for _ in 0..order {
        let next = &acc * &u.0;
        powers.push(acc);
        acc = next;
    }
    let residual = (&acc - DMatrix::<Complex64>::identity(dim, dim))
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if residual > SNAP_TOL {
        return Err(QmatError::SpectrumOffRoots { residual, d });
    }

    let mut terms = Vec::new();
    for k in 0..order {
        let mut p = DMatrix::<Complex64>::zeros(dim, dim);
        for (j, uj) in powers.iter().enumerate() {
            let phase = omega_power(ModInt::new(-((j * k) as i64), 2 * d), d);
            p += uj * phase;
        }
        p /= Complex64::new(order as f64, 0.0);
        if p.trace().re > 0.5 {
            terms.push(SpectralTerm {
                exponent: ModInt::new(k as i64, 2 * d),
                projector: OperatorMatrix(p),
            });
        }
    }
    Ok(SpectralDecomposition { d, terms })
}
