//! Minimal frames over phase space and the quasiprobability representations
//! they induce for states, effects and channels.
//!
//! Frames are indexed by phase points in `PhasePoint::index` order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::qmat::{trace_product, OperatorMatrix, QmatError, TOL};
use crate::weyl::{PhasePoint, WeylMonomial};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("expected {expected} frame elements, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("frame element {index} has dimension {got}, expected {expected}")]
    ElementDimension { index: usize, got: usize, expected: usize },
    #[error("frame element {index} is not Hermitian")]
    NotHermitian { index: usize },
    #[error("frame element {index} has trace {trace}, expected 1")]
    BadTrace { index: usize, trace: f64 },
    #[error("frame is not a basis (smallest Gram singular value {smallest:e})")]
    NotABasis { smallest: f64 },
    #[error("operator of dimension {got} does not match frame dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("channel is not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

fn hilbert_dim(d: u64, n: usize) -> usize {
    (d as usize).pow(n as u32)
}

fn check_elements(d: u64, n: usize, elements: &[OperatorMatrix]) -> Result<(), FrameError> {
    let expected = hilbert_dim(d, n).pow(2);
    if elements.len() != expected {
        return Err(FrameError::WrongCount {
            expected,
            got: elements.len(),
        });
    }
    let dim = hilbert_dim(d, n);
    for (index, e) in elements.iter().enumerate() {
        if e.dim() != dim {
            return Err(FrameError::ElementDimension {
                index,
                got: e.dim(),
                expected: dim,
            });
        }
        if !e.is_hermitian(TOL) {
            return Err(FrameError::NotHermitian { index });
        }
    }
    Ok(())
}

/// A basis `{F_λ}` of unit-trace Hermitian operators.
#[derive(Debug, Clone)]
pub struct Frame {
    pub d: u64,
    pub n: usize,
    pub elements: Vec<OperatorMatrix>,
}

impl Frame {
    pub fn new(d: u64, n: usize, elements: Vec<OperatorMatrix>) -> Result<Self, FrameError> {
        check_elements(d, n, &elements)?;
        for (index, e) in elements.iter().enumerate() {
            let trace = e.trace().re;
            if (trace - 1.0).abs() > TOL {
                return Err(FrameError::BadTrace { index, trace });
            }
        }
        Ok(Self { d, n, elements })
    }

    pub fn dim(&self) -> usize {
        hilbert_dim(self.d, self.n)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, at: &PhasePoint) -> &OperatorMatrix {
        &self.elements[at.index()]
    }

    /// `G_{μλ} = tr(F_μ F_λ)`, real for Hermitian elements.
    pub fn gram(&self) -> DMatrix<f64> {
        let m = self.len();
        let mut g = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = trace_product(&self.elements[i], &self.elements[j])
                    .expect("equal dimensions")
                    .re;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

/// The dual family `{D_λ}` with `tr(D_{λ'} F_λ) = δ`.
#[derive(Debug, Clone)]
pub struct DualFrame {
    pub d: u64,
    pub n: usize,
    pub elements: Vec<OperatorMatrix>,
}

impl DualFrame {
    /// Wraps precomputed dual elements without solving for them.
    pub fn from_elements(d: u64, n: usize, elements: Vec<OperatorMatrix>) -> Result<Self, FrameError> {
        check_elements(d, n, &elements)?;
        Ok(Self { d, n, elements })
    }

    pub fn dim(&self) -> usize {
        hilbert_dim(self.d, self.n)
    }

    /// `max |Σ_λ D_λ - I|` and `max |tr(D_{λ'} F_λ) - δ|`.
    pub fn duality_defect(&self, frame: &Frame) -> f64 {
        let sum = self
            .elements
            .iter()
            .fold(OperatorMatrix::zeros(self.dim()), |acc, e| &acc + e);
        let mut worst = sum.max_abs_diff(&OperatorMatrix::identity(self.dim()));
        for (i, dl) in self.elements.iter().enumerate() {
            for (j, f) in frame.elements.iter().enumerate() {
                let t = trace_product(dl, f).expect("equal dimensions");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((t - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Solves `tr(D_{λ'} F_λ) = δ` as `D = G^{-1} F` with the real Gram matrix.
pub fn dual_basis(frame: &Frame) -> Result<DualFrame, FrameError> {
    let g = frame.gram();
    let sv = g.clone().svd(false, false).singular_values;
    let largest = sv.max();
    let smallest = sv.min();
    if smallest <= 1e-9 * largest.max(1.0) {
        return Err(FrameError::NotABasis { smallest });
    }
    let ginv = g.try_inverse().ok_or(FrameError::NotABasis { smallest })?;
    let m = frame.len();
    let dim = frame.dim();
    let elements = (0..m)
        .map(|l| {
            let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
            for mu in 0..m {
                let c = ginv[(l, mu)];
                if c != 0.0 {
                    acc += frame.elements[mu].as_matrix() * Complex64::new(c, 0.0);
                }
            }
            // symmetrize away rounding so elements stay exactly Hermitian
            let herm = (&acc + acc.adjoint()) * Complex64::new(0.5, 0.0);
            OperatorMatrix::from_matrix(herm).expect("square")
        })
        .collect();
    Ok(DualFrame {
        d: frame.d,
        n: frame.n,
        elements,
    })
}

/// A real vector over phase points.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDistribution {
    pub d: u64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl QuasiDistribution {
    pub fn uniform(d: u64, n: usize) -> Self {
        let m = hilbert_dim(d, n).pow(2);
        Self {
            d,
            n,
            values: vec![1.0 / m as f64; m],
        }
    }

    pub fn get(&self, at: &PhasePoint) -> f64 {
        self.values[at.index()]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn tensor(&self, other: &QuasiDistribution) -> QuasiDistribution {
        assert_eq!(self.d, other.d, "distributions over different d");
        let values = self
            .values
            .iter()
            .flat_map(|a| other.values.iter().map(move |b| a * b))
            .collect();
        QuasiDistribution {
            d: self.d,
            n: self.n + other.n,
            values,
        }
    }

    pub fn max_abs_diff(&self, other: &QuasiDistribution) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A real matrix `ξ(λ'|λ)`: row `λ'`, column `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiStochasticMap {
    pub d: u64,
    pub n: usize,
    pub matrix: DMatrix<f64>,
}

impl QuasiStochasticMap {
    pub fn identity(d: u64, n: usize) -> Self {
        let m = hilbert_dim(d, n).pow(2);
        Self {
            d,
            n,
            matrix: DMatrix::identity(m, m),
        }
    }

    /// `self · first`: apply `first`, then `self`.
    pub fn after(&self, first: &QuasiStochasticMap) -> QuasiStochasticMap {
        QuasiStochasticMap {
            d: self.d,
            n: self.n,
            matrix: &self.matrix * &first.matrix,
        }
    }

    pub fn tensor(&self, other: &QuasiStochasticMap) -> QuasiStochasticMap {
        QuasiStochasticMap {
            d: self.d,
            n: self.n + other.n,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    pub fn apply(&self, dist: &QuasiDistribution) -> QuasiDistribution {
        let v = &self.matrix * DVector::from_column_slice(&dist.values);
        QuasiDistribution {
            d: self.d,
            n: self.n,
            values: v.iter().copied().collect(),
        }
    }

    /// Largest `|Σ_{λ'} ξ(λ'|λ) - 1|` over columns.
    pub fn column_sum_defect(&self) -> f64 {
        self.matrix
            .column_iter()
            .map(|c| (c.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// If every column has a single entry equal to 1 (within `tol`) and the
    /// rest 0, the image index of each column.
    pub fn as_permutation(&self, tol: f64) -> Option<Vec<usize>> {
        let m = self.matrix.nrows();
        let mut image = Vec::with_capacity(m);
        let mut hit = vec![false; m];
        for col in self.matrix.column_iter() {
            let mut target = None;
            for (row, &v) in col.iter().enumerate() {
                if (v - 1.0).abs() <= tol {
                    if target.is_some() {
                        return None;
                    }
                    target = Some(row);
                } else if v.abs() > tol {
                    return None;
                }
            }
            let t = target?;
            if hit[t] {
                return None;
            }
            hit[t] = true;
            image.push(t);
        }
        Some(image)
    }

    pub fn max_abs_diff(&self, other: &QuasiStochasticMap) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }
}

/// `c_b = tr(W_b^† A) / d^n` for every label `b`, in index order.
pub fn weyl_coords(a: &OperatorMatrix, basis: &[WeylMonomial]) -> DVector<Complex64> {
    let dim = a.dim() as f64;
    DVector::from_iterator(basis.len(), basis.iter().map(|w| w.overlap(a) / dim))
}

/// `Σ_b c_b W_b`.
pub fn from_weyl_coords(c: &DVector<Complex64>, basis: &[WeylMonomial]) -> OperatorMatrix {
    let dim = basis[0].row.len();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (w, &cb) in basis.iter().zip(c.iter()) {
        if cb.norm() == 0.0 {
            continue;
        }
        for (x, (&r, &ph)) in w.row.iter().zip(&w.phase).enumerate() {
            m[(r, x)] += cb * ph;
        }
    }
    OperatorMatrix::from_matrix(m).expect("square")
}

/// All Weyl operators on `n` qudits, in label index order.
pub fn weyl_basis(d: u64, n: usize) -> Vec<WeylMonomial> {
    PhasePoint::all(d, n).iter().map(WeylMonomial::new).collect()
}

/// A linear map on operators, stored as its matrix in the Weyl basis:
/// `E(W_b) = Σ_a S[a,b] W_a`.
#[derive(Debug, Clone)]
pub struct Channel {
    pub d: u64,
    pub n: usize,
    pub superop: DMatrix<Complex64>,
}

impl Channel {
    pub fn identity(d: u64, n: usize) -> Self {
        let m = hilbert_dim(d, n).pow(2);
        Self {
            d,
            n,
            superop: DMatrix::identity(m, m),
        }
    }

    /// Builds the channel from its action on each Weyl operator.
    pub fn from_action(d: u64, n: usize, f: impl Fn(&OperatorMatrix) -> OperatorMatrix) -> Self {
        let basis = weyl_basis(d, n);
        let m = basis.len();
        let mut superop = DMatrix::<Complex64>::zeros(m, m);
        for (b, wb) in basis.iter().enumerate() {
            let image = f(&wb.to_matrix());
            superop.set_column(b, &weyl_coords(&image, &basis));
        }
        Self { d, n, superop }
    }

    /// `ρ ↦ U ρ U^†`.
    pub fn from_unitary(u: &OperatorMatrix, d: u64, n: usize) -> Result<Self, FrameError> {
        let dim = hilbert_dim(d, n);
        if u.dim() != dim {
            return Err(FrameError::DimensionMismatch {
                got: u.dim(),
                expected: dim,
            });
        }
        Ok(Self::from_action(d, n, |w| w.conjugate_by(u)))
    }

    /// `ρ ↦ Σ_k K_k ρ K_k^†`.
    pub fn from_kraus(kraus: &[OperatorMatrix], d: u64, n: usize) -> Result<Self, FrameError> {
        let dim = hilbert_dim(d, n);
        if let Some(bad) = kraus.iter().find(|k| k.dim() != dim) {
            return Err(FrameError::DimensionMismatch {
                got: bad.dim(),
                expected: dim,
            });
        }
        Ok(Self::from_action(d, n, |w| {
            kraus
                .iter()
                .fold(OperatorMatrix::zeros(dim), |acc, k| &acc + &w.conjugate_by(k))
        }))
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Channel) -> Channel {
        Channel {
            d: self.d,
            n: self.n,
            superop: &self.superop * &first.superop,
        }
    }

    pub fn tensor(&self, other: &Channel) -> Channel {
        Channel {
            d: self.d,
            n: self.n + other.n,
            superop: self.superop.kronecker(&other.superop),
        }
    }

    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix, FrameError> {
        let dim = hilbert_dim(self.d, self.n);
        if rho.dim() != dim {
            return Err(FrameError::DimensionMismatch {
                got: rho.dim(),
                expected: dim,
            });
        }
        let basis = weyl_basis(self.d, self.n);
        let c = &self.superop * weyl_coords(rho, &basis);
        Ok(from_weyl_coords(&c, &basis))
    }

    /// `max_b |tr E(W_b) - tr W_b| / d^n`, zero for trace-preserving maps.
    pub fn trace_defect(&self) -> f64 {
        // tr W_a = d^n δ_{a,0}, so tr E(W_b) / d^n = S[0,b]
        self.superop
            .row(0)
            .iter()
            .enumerate()
            .map(|(b, &s)| (s - Complex64::new(if b == 0 { 1.0 } else { 0.0 }, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

fn check_dim(got: usize, expected: usize) -> Result<(), FrameError> {
    if got != expected {
        return Err(FrameError::DimensionMismatch { got, expected });
    }
    Ok(())
}

/// `ξ_ρ(λ) = tr(D_λ ρ)`.
pub fn rep_state(rho: &OperatorMatrix, dual: &DualFrame) -> Result<QuasiDistribution, FrameError> {
    check_dim(rho.dim(), dual.dim())?;
    let values = dual
        .elements
        .iter()
        .map(|dl| trace_product(dl, rho).map(|z| z.re))
        .collect::<Result<_, _>>()?;
    Ok(QuasiDistribution {
        d: dual.d,
        n: dual.n,
        values,
    })
}

/// `ξ_E(λ) = tr(F_λ E)`.
pub fn rep_effect(effect: &OperatorMatrix, frame: &Frame) -> Result<Vec<f64>, FrameError> {
    check_dim(effect.dim(), frame.dim())?;
    frame
        .elements
        .iter()
        .map(|f| trace_product(f, effect).map(|z| z.re).map_err(FrameError::from))
        .collect()
}

/// `ξ(λ'|λ) = tr(D_{λ'} E(F_λ))`, with no trace-preservation requirement.
pub fn rep_operation(ch: &Channel, frame: &Frame, dual: &DualFrame) -> Result<QuasiStochasticMap, FrameError> {
    check_dim(hilbert_dim(ch.d, ch.n), frame.dim())?;
    check_dim(dual.dim(), frame.dim())?;
    let basis = weyl_basis(ch.d, ch.n);
    let m = basis.len();
    let dim = frame.dim() as f64;
    let mut fc = DMatrix::<Complex64>::zeros(m, m);
    let mut dc = DMatrix::<Complex64>::zeros(m, m);
    for l in 0..m {
        fc.set_column(l, &weyl_coords(&frame.elements[l], &basis));
        dc.set_column(l, &weyl_coords(&dual.elements[l], &basis));
    }
    // tr(D W_a) = d^n conj(c_a(D)) for Hermitian D
    let z = dc.adjoint() * &ch.superop * fc * Complex64::new(dim, 0.0);
    Ok(QuasiStochasticMap {
        d: ch.d,
        n: ch.n,
        matrix: z.map(|v| v.re),
    })
}

/// `rep_operation` for a trace-preserving channel.
pub fn rep_channel(ch: &Channel, frame: &Frame, dual: &DualFrame) -> Result<QuasiStochasticMap, FrameError> {
    let deviation = ch.trace_defect();
    if deviation > TOL {
        return Err(FrameError::NotTracePreserving { deviation });
    }
    rep_operation(ch, frame, dual)
}

/// `Σ_{λ',λ} ξ_E(λ') ξ(λ'|λ) ξ_ρ(λ)`.
pub fn recover_probability(effect: &[f64], channel: &QuasiStochasticMap, state: &QuasiDistribution) -> f64 {
    let evolved = channel.apply(state);
    effect.iter().zip(&evolved.values).map(|(e, r)| e * r).sum()
}

/// Verdict of a nonnegativity check with the most extreme entry.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegativityReport {
    pub nonnegative: bool,
    /// The entry furthest outside `[0,1]`, or the minimum if none is.
    pub extremal_value: f64,
    /// `[λ]` for distributions, `[λ', λ]` for maps.
    pub extremal_index: Vec<usize>,
}

/// Anything whose entries should lie in `[0,1]`.
pub trait RealEntries {
    fn shape(&self) -> Vec<usize>;
    fn flat(&self) -> Vec<f64>;
}

impl RealEntries for QuasiDistribution {
    fn shape(&self) -> Vec<usize> {
        vec![self.values.len()]
    }
    fn flat(&self) -> Vec<f64> {
        self.values.clone()
    }
}

impl RealEntries for QuasiStochasticMap {
    fn shape(&self) -> Vec<usize> {
        vec![self.matrix.nrows(), self.matrix.ncols()]
    }
    fn flat(&self) -> Vec<f64> {
        // row-major so the flat index unpacks as (λ', λ)
        self.matrix.transpose().iter().copied().collect()
    }
}

/// `true` iff every entry lies in `[-1e-9, 1 + 1e-9]`.
pub fn is_nonnegative(rep: &impl RealEntries) -> NonnegativityReport {
    let values = rep.flat();
    let shape = rep.shape();
    let badness = |v: f64| (-v).max(v - 1.0);
    let (flat_idx, &value) = values
        .iter()
        .enumerate()
        .max_by(|a, b| {
            badness(*a.1)
                .total_cmp(&badness(*b.1))
                .then_with(|| b.1.total_cmp(a.1))
        })
        .expect("nonempty representation");
    let (flat_idx, value) = if badness(value) <= 0.0 {
        // inside [0,1]: report the minimum instead
        let (i, v) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        (i, *v)
    } else {
        (flat_idx, value)
    };
    let extremal_index = if shape.len() == 2 {
        vec![flat_idx / shape[1], flat_idx % shape[1]]
    } else {
        vec![flat_idx]
    };
    NonnegativityReport {
        nonnegative: value >= -TOL && badness(value) <= TOL,
        extremal_value: value,
        extremal_index,
    }
}
