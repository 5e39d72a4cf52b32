//! The odd-dimensional discrete Wigner representation built from phase-point
//! operators `A_a = (1/d) Σ_b ω^{-[a,b]} W^G_b^†`, `W^G_{p,q} = ω^{-2^{-1}pq} W_{p,q}`.
//!
//! Multi-qudit phase-point operators are tensor products of single-qudit ones.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use thiserror::Error;

use crate::frames::{
    is_nonnegative, rep_channel, Channel, DualFrame, Frame, FrameError, QuasiDistribution,
};
use crate::modring::{inv2, omega_power, ModInt};
use crate::qmat::{trace_product, OperatorMatrix, TOL};
use crate::weyl::{weyl_superop_apply, PhasePoint, WeylMonomial};
use num_complex::Complex64;

/// Largest Hilbert-space dimension for which a full frame is materialized.
pub const MAX_FRAME_DIM: usize = 49;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrossError {
    #[error("Gross representation undefined in even dimension (d = {0})")]
    EvenDimension(u64),
    #[error("frame for d = {d}, n = {n} exceeds the supported size (dimension {dim} > {MAX_FRAME_DIM})")]
    TooLarge { d: u64, n: usize, dim: usize },
    #[error("dimension mismatch: operator has dimension {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("phase-point invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

#[derive(Debug, Clone)]
pub struct PhasePointOperator {
    pub label: PhasePoint,
    pub matrix: OperatorMatrix,
}

fn check_odd(d: u64) -> Result<ModInt, GrossError> {
    inv2(d).map_err(|_| GrossError::EvenDimension(d))
}

/// Direct double sum for one qudit; each `W^G_b†` is a monomial matrix, so
/// every term touches `d` entries.
fn single_phase_point(p: u64, q: u64, d: u64, half: ModInt) -> OperatorMatrix {
    let a = PhasePoint::single(p as i64, q as i64, d);
    let du = d as usize;
    let mut acc = nalgebra::DMatrix::<Complex64>::zeros(du, du);
    for b in PhasePoint::all(d, 1) {
        let (bp, bq) = b.coords()[0];
        let e = half * ModInt::new((bp * bq) as i64, d);
        // conj of the W^G factor ω^{-2^{-1}pq}, times ω^{-[a,b]}
        let k = 2 * e.value() as i64 - 2 * a.symplectic(&b) as i64;
        let coeff = omega_power(ModInt::new(k, 2 * d), d);
        let w = WeylMonomial::new(&b);
        for i in 0..du {
            acc[(i, w.row[i])] += coeff * w.phase[i].conj();
        }
    }
    OperatorMatrix::from_matrix(acc / Complex64::new(d as f64, 0.0)).expect("square")
}

type Table = Arc<Vec<OperatorMatrix>>;

/// Single-qudit operators `A_{p,q}` in index order, cached per `d`.
fn single_table(d: u64) -> Result<Table, GrossError> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Table>>> = OnceLock::new();
    let half = check_odd(d)?;
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache.read().expect("cache lock").get(&d) {
        return Ok(t.clone());
    }
    let table: Vec<OperatorMatrix> = PhasePoint::all(d, 1)
        .iter()
        .map(|a| {
            let (p, q) = a.coords()[0];
            single_phase_point(p, q, d, half)
        })
        .collect();
    verify_single_table(&table, d)?;
    let table = Arc::new(table);
    Ok(cache
        .write()
        .expect("cache lock")
        .entry(d)
        .or_insert(table)
        .clone())
}

/// Hermiticity, unit trace, covariance `W_a A_0 W_a† = A_a`, and
/// `tr(A_0 A_b) = d δ`; with covariance the last gives `tr(A_a A_b) = d δ`.
fn verify_single_table(table: &[OperatorMatrix], d: u64) -> Result<(), GrossError> {
    let origin = &table[0];
    for (i, a) in table.iter().enumerate() {
        if !a.is_hermitian(TOL) {
            return Err(GrossError::InvariantViolated(format!("A_{i} not Hermitian")));
        }
        if (a.trace().re - 1.0).abs() > TOL {
            return Err(GrossError::InvariantViolated(format!("tr A_{i} != 1")));
        }
        let label = PhasePoint::from_index(i, d, 1);
        let moved = weyl_superop_apply(&label, origin).expect("equal dimensions");
        if !moved.approx_eq(a, TOL) {
            return Err(GrossError::InvariantViolated(format!("A_{i} is not a translate of A_0")));
        }
        let t = trace_product(origin, a).expect("equal dimensions");
        let target = if i == 0 { d as f64 } else { 0.0 };
        if (t.re - target).abs() > TOL || t.im.abs() > TOL {
            return Err(GrossError::InvariantViolated(format!(
                "tr(A_0 A_{i}) = {t}, expected {target}"
            )));
        }
    }
    Ok(())
}

fn kron_from_table(a: &PhasePoint, table: &[OperatorMatrix]) -> OperatorMatrix {
    let d = a.d();
    a.coords()
        .iter()
        .map(|&(p, q)| &table[(p * d + q) as usize])
        .fold(OperatorMatrix::identity(1), |acc, m| acc.tensor(m))
}

/// `A_a`, tensored over qudits. Errors on even `d`.
pub fn phase_point(a: &PhasePoint) -> Result<PhasePointOperator, GrossError> {
    let table = single_table(a.d())?;
    Ok(PhasePointOperator {
        label: a.clone(),
        matrix: kron_from_table(a, &table),
    })
}

/// The frame `F_a = A_a` and its dual `D_a = A_a / d^n`.
#[derive(Debug, Clone)]
pub struct GrossFrame {
    pub frame: Frame,
    pub dual: DualFrame,
}

/// Cached Gross frame for `(d, n)`; built once and shared read-only.
pub fn gross_frame(d: u64, n: usize) -> Result<Arc<GrossFrame>, GrossError> {
    static CACHE: OnceLock<RwLock<HashMap<(u64, usize), Arc<GrossFrame>>>> = OnceLock::new();
    check_odd(d)?;
    let dim = (d as usize).pow(n as u32);
    if dim > MAX_FRAME_DIM {
        return Err(GrossError::TooLarge { d, n, dim });
    }
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(f) = cache.read().expect("cache lock").get(&(d, n)) {
        return Ok(f.clone());
    }
    let table = single_table(d)?;
    let elements: Vec<OperatorMatrix> = PhasePoint::all(d, n)
        .iter()
        .map(|a| kron_from_table(a, &table))
        .collect();
    let scale = 1.0 / dim as f64;
    let dual_elements = elements.iter().map(|a| a.scale_real(scale)).collect();
    // the single-qudit checks above carry over to tensor products
    let built = Arc::new(GrossFrame {
        frame: Frame::new(d, n, elements)?,
        dual: DualFrame::from_elements(d, n, dual_elements)?,
    });
    Ok(cache
        .write()
        .expect("cache lock")
        .entry((d, n))
        .or_insert(built)
        .clone())
}

/// `W_ρ(a) = tr(A_a ρ) / d^n`, computed factor by factor without a full frame.
pub fn wigner(rho: &OperatorMatrix, d: u64, n: usize) -> Result<QuasiDistribution, GrossError> {
    let table = single_table(d)?;
    let dim = (d as usize).pow(n as u32);
    if rho.dim() != dim {
        return Err(GrossError::DimensionMismatch {
            got: rho.dim(),
            expected: dim,
        });
    }
    let values = PhasePoint::all(d, n)
        .iter()
        .map(|a| {
            trace_product(&kron_from_table(a, &table), rho)
                .expect("equal dimensions")
                .re
                / dim as f64
        })
        .collect();
    Ok(QuasiDistribution { d, n, values })
}

/// Sum-negativity `Σ_a max(0, -W_ρ(a))`.
pub fn negativity(rho: &OperatorMatrix, d: u64, n: usize) -> Result<f64, GrossError> {
    Ok(wigner(rho, d, n)?
        .values
        .iter()
        .map(|&v| (-v).max(0.0))
        .sum())
}

/// Outcome exponent (in `Z_{2d}`) of measuring `W_label` on the ontic state `a`:
/// `tr(A_a W_b) = ω^{2^{-1}Σ p_i q_i - [a,b]}`.
pub fn weyl_response(label: &PhasePoint, a: &PhasePoint) -> Result<ModInt, GrossError> {
    let d = label.d();
    let half = check_odd(d)?;
    let pq: u64 = label.coords().iter().map(|&(p, q)| p * q % d).sum();
    let e = half * ModInt::new(pq as i64, d) - ModInt::new(a.symplectic(label) as i64, d);
    Ok(ModInt::new(2 * e.value() as i64, 2 * d))
}

pub enum Resource<'a> {
    State(&'a OperatorMatrix),
    Unitary(&'a OperatorMatrix),
}

/// Positive or negative, with the most negative entry as witness.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub negative: bool,
    /// `[a]` for states, `[a', a]` for unitaries.
    pub witness: Vec<PhasePoint>,
    pub value: f64,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        if self.negative {
            "negative"
        } else {
            "positive"
        }
    }
}

/// Negative iff the Gross representation has an
/// entry below `-1e-9`.
pub fn classify_resource(x: Resource<'_>, d: u64, n: usize) -> Result<Classification, GrossError> {
    let report = match x {
        Resource::State(rho) => is_nonnegative(&wigner(rho, d, n)?),
        Resource::Unitary(u) => {
            let g = gross_frame(d, n)?;
            let ch = Channel::from_unitary(u, d, n)?;
            is_nonnegative(&rep_channel(&ch, &g.frame, &g.dual)?)
        }
    };
    let witness = report
        .extremal_index
        .iter()
        .map(|&i| PhasePoint::from_index(i, d, n))
        .collect();
    Ok(Classification {
        negative: report.extremal_value < -TOL,
        witness,
        value: report.extremal_value,
    })
}
