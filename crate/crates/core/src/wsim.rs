//! Sampling simulator for circuits whose Gross representation is nonnegative.
//!
//! Ontic states are phase points of `Z_d^{2n}`. Gates act locally on their
//! target qudits as permutations (Clifford) or stochastic matrices, and Weyl
//! measurements read out deterministically.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::clifford::{embed, hadamard, phase_gate, sum_gate, CliffordError};
use crate::frames::{is_nonnegative, rep_channel, Channel, FrameError, QuasiDistribution, QuasiStochasticMap};
use crate::gross::{gross_frame, weyl_response, wigner, GrossError};
use crate::modring::ModInt;
use crate::qmat::{OperatorMatrix, TOL};
use crate::stabilizer::{eigenstate, StabilizerBasis, StabilizerError};
use crate::weyl::{weyl_matrix, weyl_measurement, PhasePoint, WeylLabel};

/// Largest Hilbert-space dimension for the dense oracle.
pub const MAX_EXACT_DIM: usize = 1 << 10;

/// Shots per RNG stream.
pub const SHOT_CHUNK: u64 = 4096;

/// Environment variable capping the sampler's worker count.
pub const THREADS_ENV: &str = "WIGNERLAB_THREADS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WsimError {
    #[error("no nonnegative representation exists for even d = {0}; run `wignerlab uniqueness --dim {0}` for the infeasibility witness")]
    EvenDimension(u64),
    #[error("{element} is negatively represented: value {value:.6e} at {witness}")]
    Negativity {
        element: Element,
        witness: String,
        value: f64,
    },
    #[error("expected {expected} initial states, got {got}")]
    InitialCount { expected: usize, got: usize },
    #[error("initial state is not a density matrix of dimension {0}")]
    InvalidState(usize),
    #[error("gate {index}: {reason}")]
    BadGate { index: usize, reason: String },
    #[error("measurement {index}: label has {got} qudits, circuit has {n}")]
    BadMeasurement { index: usize, got: usize, n: usize },
    #[error("dimension {dim} exceeds the exact-oracle cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("outcome has zero probability")]
    ZeroProbability,
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Gross(#[from] GrossError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
}

/// Which part of a circuit failed to compile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    InitialState,
    Gate(usize),
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Element::InitialState => write!(f, "initial state"),
            Element::Gate(i) => write!(f, "gate {i}"),
        }
    }
}

/// Eigenstate of a named single-qudit operator; the eigenvalue is
/// `exp(πi·exponent/d)` with `exponent ∈ Z_{2d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpec {
    pub basis: StabilizerBasis,
    pub exponent: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Product(Vec<StateSpec>),
    Dense(OperatorMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Hadamard,
    PhaseGate,
    WeylGate(WeylLabel),
    CustomUnitary(OperatorMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub d: u64,
    pub n: usize,
    pub initial: Initial,
    pub gates: Vec<Gate>,
    /// Measured in order on all `n` qudits.
    pub measurements: Vec<WeylLabel>,
}

impl Gate {
    /// The gate's matrix on its own targets.
    pub fn local_matrix(&self, d: u64) -> Result<OperatorMatrix, CliffordError> {
        Ok(match &self.kind {
            GateKind::Hadamard => hadamard(d),
            GateKind::PhaseGate => phase_gate(d)?,
            GateKind::WeylGate(label) => weyl_matrix(label),
            GateKind::CustomUnitary(u) => u.clone(),
        })
    }
}

impl Circuit {
    pub fn dim(&self) -> Option<usize> {
        (self.d as usize).checked_pow(self.n as u32)
    }

    /// Checks target ranges and gate dimensions.
    pub fn validate(&self) -> Result<(), WsimError> {
        if let Initial::Product(specs) = &self.initial {
            if specs.len() != self.n {
                return Err(WsimError::InitialCount {
                    expected: self.n,
                    got: specs.len(),
                });
            }
        }
        for (index, g) in self.gates.iter().enumerate() {
            let bad = |reason: String| WsimError::BadGate { index, reason };
            if g.targets.is_empty() {
                return Err(bad("no targets".into()));
            }
            for (i, &t) in g.targets.iter().enumerate() {
                if t >= self.n || g.targets[..i].contains(&t) {
                    return Err(bad(format!("target {t} invalid for {} qudits", self.n)));
                }
            }
            let k = g.targets.len();
            match &g.kind {
                GateKind::Hadamard | GateKind::PhaseGate if k != 1 => {
                    return Err(bad(format!("single-qudit gate given {k} targets")))
                }
                GateKind::WeylGate(l) if l.n() != k || l.d() != self.d => {
                    return Err(bad("Weyl label does not match targets".into()))
                }
                GateKind::CustomUnitary(u) => {
                    if Some(u.dim()) != (self.d as usize).checked_pow(k as u32) {
                        return Err(bad(format!("matrix dimension {} for {k} targets", u.dim())));
                    }
                    if !u.is_unitary(1e-8) {
                        return Err(bad("matrix is not unitary".into()));
                    }
                }
                _ => {}
            }
        }
        for (index, m) in self.measurements.iter().enumerate() {
            if m.n() != self.n || m.d() != self.d {
                return Err(WsimError::BadMeasurement {
                    index,
                    got: m.n(),
                    n: self.n,
                });
            }
        }
        Ok(())
    }
}

/// A gate compiled to its action on the phase points of its targets.
#[derive(Debug, Clone)]
pub enum LocalMap {
    /// Image of each local phase-point index.
    Permutation(Vec<usize>),
    /// Column `λ` is the distribution of the successor of `λ`.
    Stochastic(QuasiStochasticMap),
}

#[derive(Debug, Clone)]
pub struct Step {
    pub targets: Vec<usize>,
    pub map: LocalMap,
}

impl Step {
    pub fn is_permutation(&self) -> bool {
        matches!(self.map, LocalMap::Permutation(_))
    }
}

#[derive(Debug, Clone)]
enum InitialSampler {
    /// One distribution over `Z_d^2` per qudit.
    Product(Vec<Vec<f64>>),
    Joint(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub d: u64,
    pub n: usize,
    initial: InitialSampler,
    pub steps: Vec<Step>,
    pub measurements: Vec<WeylLabel>,
}

fn density_ok(rho: &OperatorMatrix, dim: usize) -> bool {
    rho.dim() == dim && rho.is_hermitian(1e-8) && (rho.trace().re - 1.0).abs() <= 1e-8 && rho.trace().im.abs() <= 1e-8
}

fn state_density(spec: &StateSpec, d: u64) -> Result<OperatorMatrix, WsimError> {
    Ok(eigenstate(spec.basis, ModInt::new(spec.exponent as i64, 2 * d), d)?.density())
}

fn describe_points(points: &[PhasePoint]) -> String {
    points
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(" <- ")
}

fn check_distribution(dist: &QuasiDistribution) -> Result<(), WsimError> {
    let report = is_nonnegative(dist);
    if report.nonnegative {
        return Ok(());
    }
    let pts: Vec<PhasePoint> = report
        .extremal_index
        .iter()
        .map(|&i| PhasePoint::from_index(i, dist.d, dist.n))
        .collect();
    Err(WsimError::Negativity {
        element: Element::InitialState,
        witness: describe_points(&pts),
        value: report.extremal_value,
    })
}

/// The Gross representation of a unitary on `k` qudits.
pub fn local_map(u: &OperatorMatrix, d: u64, k: usize) -> Result<QuasiStochasticMap, WsimError> {
    let g = gross_frame(d, k)?;
    let ch = Channel::from_unitary(u, d, k)?;
    Ok(rep_channel(&ch, &g.frame, &g.dual)?)
}

/// Represents every part of the circuit in the product Gross frame, failing
/// on the first negatively represented element.
pub fn compile(c: &Circuit) -> Result<CompiledCircuit, WsimError> {
    if c.d.is_multiple_of(2) {
        return Err(WsimError::EvenDimension(c.d));
    }
    c.validate()?;
    let d = c.d;
    let initial = match &c.initial {
        Initial::Product(specs) => {
            let mut factors = Vec::with_capacity(specs.len());
            for s in specs {
                let w = wigner(&state_density(s, d)?, d, 1)?;
                check_distribution(&w)?;
                factors.push(w.values);
            }
            InitialSampler::Product(factors)
        }
        Initial::Dense(rho) => {
            let dim = c.dim().ok_or(WsimError::InvalidState(usize::MAX))?;
            if !density_ok(rho, dim) {
                return Err(WsimError::InvalidState(dim));
            }
            let w = wigner(rho, d, c.n)?;
            check_distribution(&w)?;
            InitialSampler::Joint(w.values)
        }
    };
    let mut steps = Vec::with_capacity(c.gates.len());
    for (i, g) in c.gates.iter().enumerate() {
        let u = g.local_matrix(d)?;
        let rep = local_map(&u, d, g.targets.len())?;
        let report = is_nonnegative(&rep);
        if !report.nonnegative {
            let k = g.targets.len();
            let pts: Vec<PhasePoint> = report
                .extremal_index
                .iter()
                .map(|&j| PhasePoint::from_index(j, d, k))
                .collect();
            return Err(WsimError::Negativity {
                element: Element::Gate(i),
                witness: describe_points(&pts),
                value: report.extremal_value,
            });
        }
        let map = match rep.as_permutation(TOL) {
            Some(p) => LocalMap::Permutation(p),
            None => LocalMap::Stochastic(rep),
        };
        steps.push(Step {
            targets: g.targets.clone(),
            map,
        });
    }
    Ok(CompiledCircuit {
        d,
        n: c.n,
        initial,
        steps,
        measurements: c.measurements.clone(),
    })
}

/// Joint outcome record: one `Z_{2d}` eigenvalue exponent per measurement.
pub type Record = Vec<u64>;

/// Per-qudit digits of a phase point, `p·d + q` each.
fn digits_of(index: usize, d: u64, n: usize) -> Vec<usize> {
    let base = (d * d) as usize;
    let mut out = vec![0usize; n];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % base;
        rest /= base;
    }
    out
}

fn point_of(digits: &[usize], d: u64) -> PhasePoint {
    let du = d as usize;
    let coords: Vec<(i64, i64)> = digits.iter().map(|&x| ((x / du) as i64, (x % du) as i64)).collect();
    PhasePoint::new(d, &coords)
}

fn sample_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    let mut r = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        let w = w.max(0.0);
        if w > 0.0 {
            last = i;
            if r < w {
                return i;
            }
            r -= w;
        }
    }
    last
}

impl CompiledCircuit {
    /// The full initial quasiprobability distribution.
    pub fn initial_distribution(&self) -> QuasiDistribution {
        match &self.initial {
            InitialSampler::Product(factors) => factors
                .iter()
                .map(|v| QuasiDistribution {
                    d: self.d,
                    n: 1,
                    values: v.clone(),
                })
                .reduce(|acc, f| acc.tensor(&f))
                .unwrap_or(QuasiDistribution {
                    d: self.d,
                    n: 0,
                    values: vec![1.0],
                }),
            InitialSampler::Joint(v) => QuasiDistribution {
                d: self.d,
                n: self.n,
                values: v.clone(),
            },
        }
    }

    /// Outcome exponent of measurement `j` on ontic state `a`.
    pub fn readout(&self, j: usize, a: &PhasePoint) -> ModInt {
        weyl_response(&self.measurements[j], a).expect("odd d checked at compile time")
    }

    /// Step `i` as a map on the full phase space.
    pub fn step_map(&self, i: usize) -> QuasiStochasticMap {
        let step = &self.steps[i];
        let total = (self.d * self.d) as usize;
        let size = total.pow(self.n as u32);
        let mut m = nalgebra::DMatrix::<f64>::zeros(size, size);
        for col in 0..size {
            let digits = digits_of(col, self.d, self.n);
            let local = step.targets.iter().fold(0, |acc, &t| acc * total + digits[t]);
            let column: Vec<(usize, f64)> = match &step.map {
                LocalMap::Permutation(p) => vec![(p[local], 1.0)],
                LocalMap::Stochastic(s) => s.matrix.column(local).iter().copied().enumerate().collect(),
            };
            for (img, w) in column {
                let mut out = digits.clone();
                let mut rest = img;
                for &t in step.targets.iter().rev() {
                    out[t] = rest % total;
                    rest /= total;
                }
                let row = out.iter().fold(0, |acc, &x| acc * total + x);
                m[(row, col)] += w;
            }
        }
        QuasiStochasticMap {
            d: self.d,
            n: self.n,
            matrix: m,
        }
    }

    fn draw_initial(&self, rng: &mut impl Rng) -> Vec<usize> {
        match &self.initial {
            InitialSampler::Product(factors) => factors.iter().map(|f| sample_index(f, rng)).collect(),
            InitialSampler::Joint(v) => digits_of(sample_index(v, rng), self.d, self.n),
        }
    }

    fn run_shot(&self, rng: &mut impl Rng) -> Record {
        let total = (self.d * self.d) as usize;
        let mut digits = self.draw_initial(rng);
        for step in &self.steps {
            let local = step.targets.iter().fold(0, |acc, &t| acc * total + digits[t]);
            let mut img = match &step.map {
                LocalMap::Permutation(p) => p[local],
                LocalMap::Stochastic(s) => {
                    let col: Vec<f64> = s.matrix.column(local).iter().copied().collect();
                    sample_index(&col, rng)
                }
            };
            for &t in step.targets.iter().rev() {
                digits[t] = img % total;
                img /= total;
            }
        }
        let mut record = Vec::with_capacity(self.measurements.len());
        for (j, label) in self.measurements.iter().enumerate() {
            let a = point_of(&digits, self.d);
            record.push(self.readout(j, &a).value());
            // the measurement dephases along its label: translate by a uniform multiple
            let shift = label.scale(rng.random_range(0..self.d) as i64);
            let moved = a.add(&shift);
            let du = self.d as usize;
            for (slot, &(p, q)) in digits.iter_mut().zip(moved.coords()) {
                *slot = p as usize * du + q as usize;
            }
        }
        record
    }

    /// Counts of joint outcome records over `shots` runs. Shots are split into
    /// chunks of [`SHOT_CHUNK`], chunk `c` drawing from stream `c` of the
    /// seeded generator, so results do not depend on the worker count.
    pub fn sample(&self, shots: u64, seed: u64) -> BTreeMap<Record, u64> {
        let chunks = shots.div_ceil(SHOT_CHUNK);
        let run = || {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(c);
                    let count = SHOT_CHUNK.min(shots - c * SHOT_CHUNK);
                    let mut local = BTreeMap::new();
                    for _ in 0..count {
                        *local.entry(self.run_shot(&mut rng)).or_insert(0u64) += 1;
                    }
                    local
                })
                .reduce(BTreeMap::new, |mut a, b| {
                    for (k, v) in b {
                        *a.entry(k).or_insert(0) += v;
                    }
                    a
                })
        };
        match worker_pool() {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }
}

/// A pool sized by `WIGNERLAB_THREADS`, if set to a positive integer.
pub fn worker_pool() -> Option<Arc<rayon::ThreadPool>> {
    let n: usize = std::env::var(THREADS_ENV).ok()?.trim().parse().ok()?;
    if n == 0 {
        return None;
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build().ok().map(Arc::new)
}

/// Conditions `dist` on measuring `label` with outcome exponent `outcome`,
/// then dephases along `label` (the phase-space image of the projector update).
pub fn post_measurement_update(
    dist: &QuasiDistribution,
    label: &WeylLabel,
    outcome: ModInt,
) -> Result<QuasiDistribution, WsimError> {
    let d = dist.d;
    let pts = PhasePoint::all(d, dist.n);
    let mut kept = vec![0.0; dist.values.len()];
    let mut p = 0.0;
    for (a, &w) in pts.iter().zip(&dist.values) {
        if weyl_response(label, a)? == outcome {
            kept[a.index()] = w;
            p += w;
        }
    }
    if p <= TOL {
        return Err(WsimError::ZeroProbability);
    }
    let mut values = vec![0.0; kept.len()];
    for a in &pts {
        for j in 0..d {
            values[a.add(&label.scale(j as i64)).index()] += kept[a.index()] / (p * d as f64);
        }
    }
    Ok(QuasiDistribution { d, n: dist.n, values })
}

/// The initial state as a density matrix.
pub fn initial_density(c: &Circuit) -> Result<OperatorMatrix, WsimError> {
    match &c.initial {
        Initial::Dense(rho) => Ok(rho.clone()),
        Initial::Product(specs) => {
            let mut rho = OperatorMatrix::identity(1);
            for s in specs {
                rho = rho.tensor(&state_density(s, c.d)?);
            }
            Ok(rho)
        }
    }
}

/// Born-rule probabilities of joint records by dense evolution and Lüders
/// projector updates.
pub fn exact_probabilities(c: &Circuit) -> Result<BTreeMap<Record, f64>, WsimError> {
    c.validate()?;
    let dim = c
        .dim()
        .filter(|&x| x <= MAX_EXACT_DIM)
        .ok_or(WsimError::TooLarge {
            dim: c.dim().unwrap_or(usize::MAX),
            cap: MAX_EXACT_DIM,
        })?;
    let mut rho = initial_density(c)?;
    if !density_ok(&rho, dim) {
        return Err(WsimError::InvalidState(dim));
    }
    for g in &c.gates {
        let u = embed(&g.local_matrix(c.d)?, c.d, c.n, &g.targets)?;
        rho = rho.conjugate_by(&u);
    }
    let mut branches: Vec<(Record, OperatorMatrix)> = vec![(Vec::new(), rho)];
    for label in &c.measurements {
        let spectral = weyl_measurement(label);
        let mut next = Vec::new();
        for (record, rho) in &branches {
            for term in &spectral.terms {
                let post = &(&term.projector * rho) * &term.projector;
                if post.trace().re > 1e-14 {
                    let mut r = record.clone();
                    r.push(term.exponent.value());
                    next.push((r, post));
                }
            }
        }
        branches = next;
    }
    Ok(branches
        .into_iter()
        .map(|(r, rho)| (r, rho.trace().re))
        .collect())
}

/// Largest `|frequency - probability|` over the union of records.
pub fn max_deviation(counts: &BTreeMap<Record, u64>, exact: &BTreeMap<Record, f64>) -> f64 {
    let shots: u64 = counts.values().sum();
    let freq = |r: &Record| counts.get(r).map_or(0.0, |&c| c as f64 / shots.max(1) as f64);
    let prob = |r: &Record| exact.get(r).copied().unwrap_or(0.0);
    counts
        .keys()
        .chain(exact.keys())
        .map(|r| (freq(r) - prob(r)).abs())
        .fold(0.0, f64::max)
}

/// Random circuit of Hadamard, phase, Weyl and SUM gates on random product
/// stabilizer inputs, followed by random nontrivial Weyl measurements.
pub fn random_stabilizer_circuit(d: u64, n: usize, depth: usize, measurements: usize, rng: &mut impl Rng) -> Circuit {
    let initial = Initial::Product(
        (0..n)
            .map(|_| StateSpec {
                basis: match rng.random_range(0..3) {
                    0 => StabilizerBasis::Z,
                    1 => StabilizerBasis::X,
                    _ => StabilizerBasis::XZ(rng.random_range(1..d)),
                },
                exponent: 2 * rng.random_range(0..d),
            })
            .collect(),
    );
    let gates = (0..depth)
        .map(|_| {
            let t = rng.random_range(0..n);
            match rng.random_range(0..if n > 1 { 4 } else { 3 }) {
                0 => Gate { kind: GateKind::Hadamard, targets: vec![t] },
                1 => Gate { kind: GateKind::PhaseGate, targets: vec![t] },
                2 => Gate {
                    kind: GateKind::WeylGate(PhasePoint::single(
                        rng.random_range(0..d) as i64,
                        rng.random_range(0..d) as i64,
                        d,
                    )),
                    targets: vec![t],
                },
                _ => {
                    let mut u = rng.random_range(0..n - 1);
                    if u >= t {
                        u += 1;
                    }
                    Gate {
                        kind: GateKind::CustomUnitary(sum_gate(d)),
                        targets: vec![t, u],
                    }
                }
            }
        })
        .collect();
    let size = (d * d) as usize;
    let measurements = (0..measurements)
        .map(|_| PhasePoint::from_index(rng.random_range(1..size.pow(n as u32)), d, n))
        .collect();
    Circuit {
        d,
        n,
        initial,
        gates,
        measurements,
    }
}
