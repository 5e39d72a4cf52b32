//! Clifford generators, membership testing, and the induced phase-space action.
//!
//! Linear parts use the column convention: column `j` of `linear` is the
//! image of the `j`-th unit generator (order `p_1, q_1, p_2, ...`).

use num_complex::Complex64;
use thiserror::Error;

use crate::modring::{inv2, is_prime, root_of_unity, snap_to_root, ModInt};
use crate::qmat::OperatorMatrix;
use crate::weyl::{PhasePoint, WeylLabel, WeylMonomial};

/// Tolerance for matching a conjugated generator to a phased Weyl operator.
pub const MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliffordError {
    #[error("the phase gate is only defined for odd d (got d = {0})")]
    EvenDimension(u64),
    #[error("d = {0} is not prime")]
    NotPrime(u64),
    #[error("matrix of dimension {got} does not act on {n} qudit(s) of dimension {d}")]
    DimensionMismatch { got: usize, d: u64, n: usize },
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("not Clifford: conjugating W{generator} does not give a phased Weyl operator")]
    NotClifford { generator: WeylLabel },
    #[error("not Clifford: induced linear map is not symplectic")]
    NotSymplectic,
    #[error("qudit target {target} out of range for {n} qudit(s)")]
    BadTarget { target: usize, n: usize },
}

/// `H|x> = d^{-1/2} Σ_k ω^{xk} |k>`.
pub fn hadamard(d: u64) -> OperatorMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    OperatorMatrix::from_fn(d as usize, |k, x| {
        root_of_unity((x as u64 * k as u64) % d, d) * norm
    })
}

/// `P|x> = ω^{2^{-1} x(x-1)} |x>`, odd `d` only.
pub fn phase_gate(d: u64) -> Result<OperatorMatrix, CliffordError> {
    let half = inv2(d).map_err(|_| CliffordError::EvenDimension(d))?;
    let entries: Vec<Complex64> = (0..d)
        .map(|x| {
            let e = ModInt::new((x * (x + d - 1)) as i64, d) * half;
            root_of_unity(e.value(), d)
        })
        .collect();
    Ok(OperatorMatrix::diagonal(&entries))
}

/// Two-qudit `|x, y> ↦ |x, x + y>`.
pub fn sum_gate(d: u64) -> OperatorMatrix {
    let du = d as usize;
    OperatorMatrix::from_fn(du * du, |row, col| {
        let (x, y) = (col / du, col % du);
        if row == x * du + (x + y) % du {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Places a gate acting on `targets` (in the given order) inside `n` qudits.
pub fn embed(
    gate: &OperatorMatrix,
    d: u64,
    n: usize,
    targets: &[usize],
) -> Result<OperatorMatrix, CliffordError> {
    let du = d as usize;
    let k = targets.len();
    if gate.dim() != du.pow(k as u32) {
        return Err(CliffordError::DimensionMismatch {
            got: gate.dim(),
            d,
            n: k,
        });
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n || targets[..i].contains(&t) {
            return Err(CliffordError::BadTarget { target: t, n });
        }
    }
    let dim = du.pow(n as u32);
    let place = |digits: &mut [usize], sub: usize| {
        let mut rest = sub;
        for &t in targets.iter().rev() {
            digits[t] = rest % du;
            rest /= du;
        }
    };
    let to_index = |digits: &[usize]| digits.iter().fold(0, |acc, &x| acc * du + x);

    let mut out = OperatorMatrix::zeros(dim).into_matrix();
    let mut digits = vec![0usize; n];
    for col in 0..dim {
        let mut rest = col;
        for slot in digits.iter_mut().rev() {
            *slot = rest % du;
            rest /= du;
        }
        let sub_col = targets.iter().fold(0, |acc, &t| acc * du + digits[t]);
        for sub_row in 0..gate.dim() {
            let v = gate.get(sub_row, sub_col);
            if v.norm() == 0.0 {
                continue;
            }
            let mut row_digits = digits.clone();
            place(&mut row_digits, sub_row);
            out[(to_index(&row_digits), col)] = v;
        }
    }
    Ok(OperatorMatrix::from_matrix(out).expect("square by construction"))
}

/// An affine map `a ↦ linear·a + shift` on `Z_d^{2n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhaseSpaceAction {
    pub d: u64,
    pub n: usize,
    /// Row-major `2n × 2n`, entries reduced mod `d`.
    pub linear: Vec<Vec<u64>>,
    pub shift: Vec<u64>,
}

impl PhaseSpaceAction {
    pub fn identity(d: u64, n: usize) -> Self {
        let m = 2 * n;
        let linear = (0..m)
            .map(|i| (0..m).map(|j| u64::from(i == j) % d).collect())
            .collect();
        Self {
            d,
            n,
            linear,
            shift: vec![0; m],
        }
    }

    pub fn translation(by: &PhasePoint) -> Self {
        let mut a = Self::identity(by.d(), by.n());
        a.shift = by.to_vector();
        a
    }

    fn mat_vec(&self, v: &[u64]) -> Vec<u64> {
        self.linear
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &b)| (acc + a * b) % self.d)
            })
            .collect()
    }

    /// `linear · a` without the shift.
    pub fn apply_linear(&self, a: &PhasePoint) -> PhasePoint {
        PhasePoint::from_vector(self.d, &self.mat_vec(&a.to_vector()))
    }

    pub fn apply(&self, a: &PhasePoint) -> PhasePoint {
        let v: Vec<u64> = self
            .mat_vec(&a.to_vector())
            .iter()
            .zip(&self.shift)
            .map(|(&x, &s)| (x + s) % self.d)
            .collect();
        PhasePoint::from_vector(self.d, &v)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &PhaseSpaceAction) -> PhaseSpaceAction {
        assert!(self.d == first.d && self.n == first.n, "actions on different spaces");
        let m = 2 * self.n;
        let linear = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| (0..m).fold(0, |acc, k| (acc + self.linear[i][k] * first.linear[k][j]) % self.d))
                    .collect()
            })
            .collect();
        let shift = self
            .mat_vec(&first.shift)
            .iter()
            .zip(&self.shift)
            .map(|(&x, &s)| (x + s) % self.d)
            .collect();
        PhaseSpaceAction {
            d: self.d,
            n: self.n,
            linear,
            shift,
        }
    }

    /// Preserves `[a, b]` on every pair of generators.
    pub fn is_symplectic(&self) -> bool {
        let gens = PhasePoint::generators(self.d, self.n);
        let images: Vec<_> = gens.iter().map(|g| self.apply_linear(g)).collect();
        gens.iter().enumerate().all(|(i, a)| {
            gens.iter()
                .enumerate()
                .all(|(j, b)| images[i].symplectic(&images[j]) == a.symplectic(b))
        })
    }

    /// Whether the map is a bijection of `Z_d^{2n}` (checked exhaustively).
    pub fn is_bijective(&self) -> bool {
        let pts = PhasePoint::all(self.d, self.n);
        let mut seen = vec![false; pts.len()];
        for a in &pts {
            let i = self.apply(a).index();
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    }
}

/// Reads off the phase-space action of a Clifford `U` on `n` qudits.
///
/// Each generator image `U W_e U^†` must equal `ω^{k/2} W_{e'}` up to
/// `MATCH_TOL`. For odd `d` the shift is the displacement `s` with
/// `U A_a U^† = A_{La+s}` for Gross phase-point operators. For even `d` the
/// shift is read from the even part of each phase only.
pub fn is_clifford(u: &OperatorMatrix, d: u64, n: usize) -> Result<PhaseSpaceAction, CliffordError> {
    let dim = (d as usize).pow(n as u32);
    if u.dim() != dim {
        return Err(CliffordError::DimensionMismatch { got: u.dim(), d, n });
    }
    if !u.is_unitary(MATCH_TOL) {
        return Err(CliffordError::NotUnitary);
    }
    let gens = PhasePoint::generators(d, n);
    let mut images = Vec::with_capacity(gens.len());
    let mut phases = Vec::with_capacity(gens.len());
    for g in &gens {
        let (label, k) = conjugate_weyl(u, g).ok_or_else(|| CliffordError::NotClifford {
            generator: g.clone(),
        })?;
        images.push(label);
        phases.push(k);
    }
    let m = 2 * n;
    let linear: Vec<Vec<u64>> = (0..m)
        .map(|i| images.iter().map(|img| img.to_vector()[i]).collect())
        .collect();
    let mut action = PhaseSpaceAction {
        d,
        n,
        linear,
        shift: vec![0; m],
    };
    if !action.is_symplectic() {
        return Err(CliffordError::NotSymplectic);
    }

    // t_i = [s, L e_i] where U W^G_{e_i} U^† = ω^{t_i} W^G_{L e_i}
    let half = inv2(d).ok();
    let t: Vec<u64> = images
        .iter()
        .zip(&phases)
        .map(|(img, k)| {
            let base = k.value() / 2;
            match half {
                Some(h) => {
                    let pq: u64 = img.coords().iter().map(|&(p, q)| p * q).sum();
                    (ModInt::new(base as i64, d) + h * ModInt::new(pq as i64, d)).value()
                }
                None => base % d,
            }
        })
        .collect();
    // s = L J t with J = [[0,1],[-1,0]] per qudit
    let jt: Vec<u64> = t
        .chunks(2)
        .flat_map(|c| [c[1], (d - c[0]) % d])
        .collect();
    action.shift = action.mat_vec(&jt);
    Ok(action)
}

/// Matches `c` to `ω^{k/2} W_label`, returning `None` unless the overlap has
/// modulus `d^n` within tolerance.
fn match_weyl(c: &OperatorMatrix, d: u64, n: usize) -> Option<(WeylLabel, ModInt)> {
    let du = d as usize;
    let dim = c.dim();
    // column 0 of W_{p,q} sits at row q
    let row0 = (0..dim).max_by(|&a, &b| c.get(a, 0).norm().total_cmp(&c.get(b, 0).norm()))?;
    let mut qs = vec![0usize; n];
    let mut rest = row0;
    for slot in qs.iter_mut().rev() {
        *slot = rest % du;
        rest /= du;
    }
    // W e_j-column: moving digit j by one multiplies the phase by ω^{p_j}
    let base = c.get(row0, 0);
    if base.norm() < 0.5 {
        return None;
    }
    let mut coords = Vec::with_capacity(n);
    for j in 0..n {
        let stride = du.pow((n - 1 - j) as u32);
        let col = stride;
        let mut row_digits = qs.clone();
        row_digits[j] = (row_digits[j] + 1) % du;
        let row = row_digits.iter().fold(0, |acc, &x| acc * du + x);
        let ratio = c.get(row, col) / base;
        let (e, _) = snap_to_root(ratio, d);
        // e is in Z_{2d}; ω^{p} = exp(2πip/d) so e = 2p
        coords.push(((e.value() / 2) as i64, qs[j] as i64));
    }
    let label = PhasePoint::new(d, &coords);
    let overlap = WeylMonomial::new(&label).overlap(c);
    if (overlap.norm() - dim as f64).abs() > MATCH_TOL * dim as f64 {
        return None;
    }
    let (k, dist) = snap_to_root(overlap / dim as f64, d);
    if dist > MATCH_TOL {
        return None;
    }
    Some((label, k))
}

/// `U W_label U^† = ω^{k/2} W_{label'}`, as `(label', k)`, if the image is a phased Weyl operator.
pub fn conjugate_weyl(u: &OperatorMatrix, label: &WeylLabel) -> Option<(WeylLabel, ModInt)> {
    let c = WeylMonomial::new(label).to_matrix().conjugate_by(u);
    match_weyl(&c, label.d(), label.n())
}

/// All single-qudit actions `SL(2, Z_d) ⋉ Z_d^2` for prime `d`.
pub fn clifford_group_elements(d: u64) -> Result<Vec<PhaseSpaceAction>, CliffordError> {
    if !is_prime(d) {
        return Err(CliffordError::NotPrime(d));
    }
    let mut out = Vec::new();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    if (a * e + d * d - b * c) % d != 1 {
                        continue;
                    }
                    for s0 in 0..d {
                        for s1 in 0..d {
                            out.push(PhaseSpaceAction {
                                d,
                                n: 1,
                                linear: vec![vec![a, b], vec![c, e]],
                                shift: vec![s0, s1],
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
