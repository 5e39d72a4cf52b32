//! Pure stabilizer states of a single prime-dimensional qudit, and products thereof.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::modring::{is_prime, ModInt};
use crate::qmat::{spectral_decompose, Ket, OperatorMatrix, QmatError};
use crate::weyl::{weyl_matrix, PhasePoint, WeylLabel};

const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilizerError {
    #[error("d = {0} is not prime; single-qudit enumeration needs a prime dimension")]
    NotPrime(u64),
    #[error("exponent {exponent} is not an eigenvalue of {basis} in d = {d}")]
    NotAnEigenvalue { basis: StabilizerBasis, exponent: u64, d: u64 },
    #[error("cannot form a product of zero states")]
    EmptyProduct,
    #[error("factors have different dimensions ({0} vs {1})")]
    MixedDimensions(u64, u64),
    #[error("unrecognised basis {0:?}; expected Z, X or XZ^k")]
    BadBasis(String),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// A pure state with a generating set of Weyl operators that fix it:
/// `W_label ψ = exp(πik/d) ψ` for each `(label, k)`.
#[derive(Debug, Clone)]
pub struct StabilizerState {
    pub d: u64,
    pub n: usize,
    pub vector: Ket,
    pub stabilizers: Vec<(WeylLabel, ModInt)>,
}

impl StabilizerState {
    pub fn density(&self) -> OperatorMatrix {
        OperatorMatrix::projector(&self.vector)
    }

    /// Largest deviation `‖W ψ - λ ψ‖_∞` over the recorded stabilizers.
    pub fn stabilizer_residual(&self) -> f64 {
        self.stabilizers
            .iter()
            .map(|(label, k)| {
                let lambda = crate::modring::omega_power(*k, self.d);
                let w = weyl_matrix(label).apply(&self.vector);
                (w - &self.vector * lambda).camax()
            })
            .fold(0.0, f64::max)
    }
}

/// Which single-qudit operator a named eigenstate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizerBasis {
    Z,
    X,
    /// `X Z^k`, `k ≠ 0`.
    XZ(u64),
}

impl fmt::Display for StabilizerBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilizerBasis::Z => write!(f, "Z"),
            StabilizerBasis::X => write!(f, "X"),
            StabilizerBasis::XZ(k) => write!(f, "XZ^{k}"),
        }
    }
}

impl FromStr for StabilizerBasis {
    type Err = StabilizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t {
            "Z" => Ok(StabilizerBasis::Z),
            "X" => Ok(StabilizerBasis::X),
            "XZ" => Ok(StabilizerBasis::XZ(1)),
            _ => t
                .strip_prefix("XZ^")
                .and_then(|k| k.parse::<u64>().ok())
                .map(StabilizerBasis::XZ)
                .ok_or_else(|| StabilizerError::BadBasis(s.to_string())),
        }
    }
}

impl StabilizerBasis {
    /// The Weyl label and the `Z_{2d}` phase `c` with `operator = exp(πic/d) W_label`.
    pub fn weyl_form(self, d: u64) -> (WeylLabel, ModInt) {
        match self {
            StabilizerBasis::Z => (PhasePoint::single(1, 0, d), ModInt::zero(2 * d)),
            StabilizerBasis::X => (PhasePoint::single(0, 1, d), ModInt::zero(2 * d)),
            // X Z^k = ω^{-k} Z^k X
            StabilizerBasis::XZ(k) => (
                PhasePoint::single(k as i64, 1, d),
                ModInt::new(-2 * (k % d) as i64, 2 * d),
            ),
        }
    }

    pub fn operator(self, d: u64) -> OperatorMatrix {
        let (label, c) = self.weyl_form(d);
        weyl_matrix(&label).scale(crate::modring::omega_power(c, d))
    }
}

/// The eigenstate of `basis` with eigenvalue `exp(πi·exponent/d)`.
pub fn eigenstate(basis: StabilizerBasis, exponent: ModInt, d: u64) -> Result<StabilizerState, StabilizerError> {
    let exponent = exponent.lift_to(2 * d);
    let dec = spectral_decompose(&basis.operator(d), d)?;
    let proj = dec.projector(exponent).ok_or(StabilizerError::NotAnEigenvalue {
        basis,
        exponent: exponent.value(),
        d,
    })?;
    let (label, c) = basis.weyl_form(d);
    Ok(StabilizerState {
        d,
        n: 1,
        vector: canonical_vector(proj),
        stabilizers: vec![(label, exponent - c)],
    })
}

/// A unit vector in the range of a rank-one projector, with its largest
/// component made real and positive.
fn canonical_vector(proj: &OperatorMatrix) -> Ket {
    let dim = proj.dim();
    let col = (0..dim)
        .max_by(|&a, &b| proj.get(a, a).re.total_cmp(&proj.get(b, b).re))
        .expect("nonempty");
    let v = Ket::from_fn(dim, |i, _| proj.get(i, col));
    canonicalize(&v)
}

/// Normalizes and fixes the global phase: the first component of maximal
/// modulus becomes real positive.
pub fn canonicalize(v: &Ket) -> Ket {
    let v = v / Complex64::new(v.norm(), 0.0);
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = v
        .iter()
        .find(|z| z.norm() > max - DEDUP_TOL)
        .copied()
        .expect("nonzero vector");
    let phase = lead.conj() / lead.norm();
    v * phase
}

/// The `d(d+1)` pure stabilizer states of one qudit of prime dimension `d`:
/// eigenbases of `Z`, `X` and `X Z^k` for `k = 1..d-1`.
pub fn enumerate_pure_states(d: u64) -> Result<Vec<StabilizerState>, StabilizerError> {
    if !is_prime(d) {
        return Err(StabilizerError::NotPrime(d));
    }
    let mut bases = vec![StabilizerBasis::Z, StabilizerBasis::X];
    bases.extend((1..d).map(StabilizerBasis::XZ));
    let mut out: Vec<StabilizerState> = Vec::new();
    for basis in bases {
        let (label, c) = basis.weyl_form(d);
        let dec = spectral_decompose(&basis.operator(d), d)?;
        for term in &dec.terms {
            let vector = canonical_vector(&term.projector);
            let stab = (label.clone(), term.exponent - c);
            match out
                .iter_mut()
                .find(|s| (&s.vector - &vector).camax() < DEDUP_TOL)
            {
                Some(existing) => existing.stabilizers.push(stab),
                None => out.push(StabilizerState {
                    d,
                    n: 1,
                    vector,
                    stabilizers: vec![stab],
                }),
            }
        }
    }
    Ok(out)
}

/// Extends a label on qudit `i` of `n` by the identity elsewhere.
fn lift_label(label: &WeylLabel, offset: usize, n: usize) -> WeylLabel {
    let mut coords = vec![(0i64, 0i64); n];
    for (j, &(p, q)) in label.coords().iter().enumerate() {
        coords[offset + j] = (p as i64, q as i64);
    }
    PhasePoint::new(label.d(), &coords)
}

/// Tensor product, with each factor's stabilizers lifted to the full system.
pub fn product_states(states: &[StabilizerState]) -> Result<StabilizerState, StabilizerError> {
    let first = states.first().ok_or(StabilizerError::EmptyProduct)?;
    let d = first.d;
    if let Some(bad) = states.iter().find(|s| s.d != d) {
        return Err(StabilizerError::MixedDimensions(d, bad.d));
    }
    let n: usize = states.iter().map(|s| s.n).sum();
    let mut vector = Ket::from_element(1, Complex64::new(1.0, 0.0));
    let mut stabilizers = Vec::new();
    let mut offset = 0;
    for s in states {
        vector = vector.kronecker(&s.vector);
        stabilizers.extend(
            s.stabilizers
                .iter()
                .map(|(l, k)| (lift_label(l, offset, n), *k)),
        );
        offset += s.n;
    }
    Ok(StabilizerState {
        d,
        n,
        vector,
        stabilizers,
    })
}

/// `I / d^n`.
pub fn maximally_mixed(d: u64, n: usize) -> OperatorMatrix {
    let dim = (d as usize).pow(n as u32);
    OperatorMatrix::identity(dim).scale_real(1.0 / dim as f64)
}
