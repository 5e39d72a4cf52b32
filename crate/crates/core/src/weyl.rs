//! Weyl (generalized Pauli) operators `W_{p,q} = Z^p X^q` and their labels.
//!
//! `X|x> = |x+1>`, `Z|x> = ω^x|x>`, no extra phase. Multi-qudit operators
//! are tensor products with the first qudit as the slow index.

use std::fmt;

use num_complex::Complex64;

use crate::modring::{root_of_unity, ModInt};
use crate::qmat::{spectral_decompose, OperatorMatrix, QmatError, SpectralDecomposition};

/// A point `(p_1, q_1, ..., p_n, q_n)` of the phase space `Z_d^{2n}`.
///
/// The same type indexes Weyl operators and ontic states.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasePoint {
    d: u64,
    coords: Vec<(u64, u64)>,
}

pub type WeylLabel = PhasePoint;

/// Which half of a qudit's phase-space coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    P,
    Q,
}

impl fmt::Debug for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|(p, q)| format!("({p},{q})"))
            .collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

impl PhasePoint {
    pub fn new(d: u64, coords: &[(i64, i64)]) -> Self {
        assert!(d >= 1, "dimension must be positive");
        let coords = coords
            .iter()
            .map(|&(p, q)| (ModInt::new(p, d).value(), ModInt::new(q, d).value()))
            .collect();
        Self { d, coords }
    }

    pub fn single(p: i64, q: i64, d: u64) -> Self {
        Self::new(d, &[(p, q)])
    }

    pub fn origin(d: u64, n: usize) -> Self {
        Self {
            d,
            coords: vec![(0, 0); n],
        }
    }

    /// The generator with a single 1 in the given coordinate.
    pub fn unit(d: u64, n: usize, qudit: usize, axis: Axis) -> Self {
        let mut pt = Self::origin(d, n);
        match axis {
            Axis::P => pt.coords[qudit].0 = 1 % d,
            Axis::Q => pt.coords[qudit].1 = 1 % d,
        }
        pt
    }

    /// All `2n` unit generators in vector order `p_1, q_1, p_2, ...`.
    pub fn generators(d: u64, n: usize) -> Vec<Self> {
        (0..n)
            .flat_map(|i| [Self::unit(d, n, i, Axis::P), Self::unit(d, n, i, Axis::Q)])
            .collect()
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[(u64, u64)] {
        &self.coords
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|&(p, q)| p == 0 && q == 0)
    }

    /// Flattened `(p_1, q_1, ..., p_n, q_n)`.
    pub fn to_vector(&self) -> Vec<u64> {
        self.coords.iter().flat_map(|&(p, q)| [p, q]).collect()
    }

    pub fn from_vector(d: u64, v: &[u64]) -> Self {
        assert!(v.len().is_multiple_of(2), "phase-space vectors have even length");
        let coords: Vec<(i64, i64)> = v.chunks(2).map(|c| (c[0] as i64, c[1] as i64)).collect();
        Self::new(d, &coords)
    }

    fn check_compatible(&self, other: &Self) {
        assert!(
            self.d == other.d && self.n() == other.n(),
            "phase points {self} and {other} live in different spaces"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&(p, q), &(p2, q2))| ((p + p2) % self.d, (q + q2) % self.d))
            .collect();
        Self { d: self.d, coords }
    }

    pub fn neg(&self) -> Self {
        let coords = self
            .coords
            .iter()
            .map(|&(p, q)| ((self.d - p) % self.d, (self.d - q) % self.d))
            .collect();
        Self { d: self.d, coords }
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = ModInt::new(k, self.d).value();
        let coords = self
            .coords
            .iter()
            .map(|&(p, q)| (p * k % self.d, q * k % self.d))
            .collect();
        Self { d: self.d, coords }
    }

    /// Symplectic form `[a,b] = Σ_i p_a q_b - q_a p_b` mod `d`.
    pub fn symplectic(&self, other: &Self) -> u64 {
        self.check_compatible(other);
        let d = self.d as i64;
        let s: i64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&(p, q), &(p2, q2))| (p * q2) as i64 - (q * p2) as i64)
            .sum();
        s.rem_euclid(d) as u64
    }

    /// Mixed-radix index over `(p_1, q_1, ..., p_n, q_n)` with `p_1` most significant.
    pub fn index(&self) -> usize {
        self.coords.iter().fold(0usize, |acc, &(p, q)| {
            (acc * self.d as usize + p as usize) * self.d as usize + q as usize
        })
    }

    pub fn from_index(index: usize, d: u64, n: usize) -> Self {
        let du = d as usize;
        let mut rest = index;
        let mut coords = vec![(0u64, 0u64); n];
        for slot in coords.iter_mut().rev() {
            let q = rest % du;
            rest /= du;
            let p = rest % du;
            rest /= du;
            *slot = (p as u64, q as u64);
        }
        Self { d, coords }
    }

    /// Every point of `Z_d^{2n}` in index order.
    pub fn all(d: u64, n: usize) -> Vec<Self> {
        let count = (d as usize).pow(2 * n as u32);
        (0..count).map(|i| Self::from_index(i, d, n)).collect()
    }
}

/// A Weyl operator stored as a monomial matrix: column `x` has a single
/// nonzero entry `phase[x]` in row `row[x]`.
#[derive(Debug, Clone)]
pub struct WeylMonomial {
    pub row: Vec<usize>,
    pub phase: Vec<Complex64>,
}

impl WeylMonomial {
    pub fn new(label: &WeylLabel) -> Self {
        let d = label.d() as usize;
        let mut row = vec![0usize];
        let mut phase = vec![Complex64::new(1.0, 0.0)];
        for &(p, q) in label.coords() {
            let mut next_row = Vec::with_capacity(row.len() * d);
            let mut next_phase = Vec::with_capacity(row.len() * d);
            for (r, ph) in row.iter().zip(&phase) {
                for x in 0..d {
                    let y = (x + q as usize) % d;
                    next_row.push(r * d + y);
                    // Z^p X^q |x> = ω^{p(x+q)} |x+q>
                    next_phase.push(ph * root_of_unity(p * y as u64, d as u64));
                }
            }
            row = next_row;
            phase = next_phase;
        }
        Self { row, phase }
    }

    pub fn to_matrix(&self) -> OperatorMatrix {
        let dim = self.row.len();
        let mut m = OperatorMatrix::zeros(dim).into_matrix();
        for (x, (&r, &ph)) in self.row.iter().zip(&self.phase).enumerate() {
            m[(r, x)] = ph;
        }
        OperatorMatrix::from_matrix(m).expect("square by construction")
    }

    /// `tr(W^† A)`.
    pub fn overlap(&self, a: &OperatorMatrix) -> Complex64 {
        self.row
            .iter()
            .zip(&self.phase)
            .enumerate()
            .map(|(x, (&r, ph))| ph.conj() * a.get(r, x))
            .sum()
    }
}

/// `Z^p X^q`, tensored over qudits.
pub fn weyl_matrix(label: &WeylLabel) -> OperatorMatrix {
    WeylMonomial::new(label).to_matrix()
}

/// `W_a W_b = ω^{-Σ p'_i q_i} W_{a+b}`; returns the label `a+b` and the
/// phase as a `Z_{2d}` exponent.
pub fn compose_labels(a: &WeylLabel, b: &WeylLabel) -> (WeylLabel, ModInt) {
    let d = a.d();
    let s: i64 = a
        .coords()
        .iter()
        .zip(b.coords())
        .map(|(&(_, q), &(p2, _))| (p2 * q) as i64)
        .sum();
    (a.add(b), ModInt::new(-2 * s, 2 * d))
}

/// `W ρ W^†`.
pub fn weyl_superop_apply(label: &WeylLabel, rho: &OperatorMatrix) -> Result<OperatorMatrix, QmatError> {
    let w = WeylMonomial::new(label);
    let dim = w.row.len();
    if rho.dim() != dim {
        return Err(QmatError::DimensionMismatch {
            left: dim,
            right: rho.dim(),
        });
    }
    // (WρW^†)[r_i, r_j] = ph_i ρ[i,j] conj(ph_j)
    let mut out = OperatorMatrix::zeros(dim).into_matrix();
    for i in 0..dim {
        for j in 0..dim {
            out[(w.row[i], w.row[j])] = w.phase[i] * rho.get(i, j) * w.phase[j].conj();
        }
    }
    Ok(OperatorMatrix::from_matrix(out).expect("square by construction"))
}

/// Projective measurement in the eigenbasis of `W_label`; outcomes are
/// eigenvalue exponents in `Z_{2d}`.
pub fn weyl_measurement(label: &WeylLabel) -> SpectralDecomposition {
    spectral_decompose(&weyl_matrix(label), label.d())
        .expect("Weyl operators are unitary with 2d-th root spectrum")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::omega_power;
    use crate::qmat::{hs_inner, Ket};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_label(rng: &mut impl Rng, d: u64, n: usize) -> WeylLabel {
        let coords: Vec<(i64, i64)> = (0..n)
            .map(|_| (rng.random_range(0..d) as i64, rng.random_range(0..d) as i64))
            .collect();
        WeylLabel::new(d, &coords)
    }

    fn random_density(rng: &mut impl Rng, dim: usize) -> OperatorMatrix {
        let a = OperatorMatrix::from_fn(dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let rho = &a * &a.adjoint();
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr)
    }

    #[test]
    fn matrix_examples() {
        for d in 1..6 {
            assert!(weyl_matrix(&WeylLabel::single(0, 0, d)).approx_eq(&OperatorMatrix::identity(d as usize), 0.0));
        }
        let z = weyl_matrix(&WeylLabel::single(1, 0, 3));
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let expected = OperatorMatrix::diagonal(&[c(1.0, 0.0), w, w * w]);
        assert!(z.approx_eq(&expected, 1e-12));

        // d=2: Z = diag(1,-1), X = [[0,1],[1,0]], ZX = [[0,1],[-1,0]]
        let zx = weyl_matrix(&WeylLabel::single(1, 1, 2));
        let expected = OperatorMatrix::from_parts(&[vec![0.0, 1.0], vec![-1.0, 0.0]], &[vec![0.0; 2], vec![0.0; 2]]).unwrap();
        assert!(zx.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn compose_examples() {
        let (lab, k) = compose_labels(&WeylLabel::single(1, 0, 3), &WeylLabel::single(0, 1, 3));
        assert_eq!(lab, WeylLabel::single(1, 1, 3));
        assert_eq!(k.value(), 0);

        let (lab, k) = compose_labels(&WeylLabel::single(0, 1, 3), &WeylLabel::single(1, 0, 3));
        assert_eq!(lab, WeylLabel::single(1, 1, 3));
        // ω^{-1}: exponent -2 mod 6
        assert_eq!(k.value(), 4);

        for d in 2..7u64 {
            for p in 0..d as i64 {
                for q in 0..d as i64 {
                    let a = WeylLabel::single(p, q, d);
                    let (lab, k) = compose_labels(&a, &a.neg());
                    assert!(lab.is_origin());
                    let prod = &weyl_matrix(&a) * &weyl_matrix(&a.neg());
                    let expected = OperatorMatrix::identity(d as usize).scale(omega_power(k, d));
                    assert!(prod.approx_eq(&expected, 1e-9));
                    // ω^{pq}
                    assert_eq!(k, ModInt::new(2 * p * q, 2 * d));
                }
            }
        }
    }

    #[test]
    fn compose_matches_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..6u64 {
            for n in 1..3 {
                for _ in 0..20 {
                    let (a, b) = (random_label(&mut rng, d, n), random_label(&mut rng, d, n));
                    let (lab, k) = compose_labels(&a, &b);
                    let lhs = &weyl_matrix(&a) * &weyl_matrix(&b);
                    let rhs = weyl_matrix(&lab).scale(omega_power(k, d));
                    assert!(lhs.approx_eq(&rhs, 1e-9));
                }
            }
        }
    }

    #[test]
    fn superop_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(&mut rng, 3);
        let id = WeylLabel::single(0, 0, 3);
        assert!(weyl_superop_apply(&id, &rho).unwrap().approx_eq(&rho, 1e-12));

        let a = WeylLabel::single(2, 1, 3);
        let there = weyl_superop_apply(&a, &rho).unwrap();
        let back = weyl_superop_apply(&a.neg(), &there).unwrap();
        assert!(back.approx_eq(&rho, 1e-9));

        let mut e0 = Ket::zeros(3);
        e0[0] = c(1.0, 0.0);
        let p0 = OperatorMatrix::projector(&e0);
        let z = WeylLabel::single(1, 0, 3);
        assert!(weyl_superop_apply(&z, &p0).unwrap().approx_eq(&p0, 1e-12));

        assert!(weyl_superop_apply(&z, &OperatorMatrix::identity(4)).is_err());
    }

    #[test]
    fn superop_matches_dense_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 2..5 {
            for n in 1..3 {
                let dim = (d as usize).pow(n as u32);
                let rho = random_density(&mut rng, dim);
                let a = random_label(&mut rng, d, n);
                let fast = weyl_superop_apply(&a, &rho).unwrap();
                let slow = rho.conjugate_by(&weyl_matrix(&a));
                assert!(fast.approx_eq(&slow, 1e-12));
            }
        }
    }

    #[test]
    fn superop_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=6u64 {
            let rho = random_density(&mut rng, d as usize);
            for _ in 0..200 {
                let (a, b) = (random_label(&mut rng, d, 1), random_label(&mut rng, d, 1));
                let seq = weyl_superop_apply(&b, &weyl_superop_apply(&a, &rho).unwrap()).unwrap();
                let direct = weyl_superop_apply(&a.add(&b), &rho).unwrap();
                assert!(seq.approx_eq(&direct, 1e-9));
            }
        }
    }

    #[test]
    fn orthonormality_and_span() {
        for d in 2..=5u64 {
            let labels = WeylLabel::all(d, 1);
            let mats: Vec<_> = labels.iter().map(weyl_matrix).collect();
            for (i, a) in mats.iter().enumerate() {
                for (j, b) in mats.iter().enumerate() {
                    let g = hs_inner(a, b).unwrap() / d as f64;
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((g - c(expected, 0.0)).norm() < 1e-9, "d={d} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn power_identities() {
        for d in 2..=7u64 {
            for lab in WeylLabel::all(d, 1) {
                let w = weyl_matrix(&lab);
                let (p, q) = lab.coords()[0];
                let id = OperatorMatrix::identity(d as usize);
                if d % 2 == 1 {
                    assert!(w.pow(d).approx_eq(&id, 1e-9));
                } else {
                    assert!(w.pow(2 * d).approx_eq(&id, 1e-9));
                    let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!(w.pow(d).approx_eq(&id.scale_real(sign), 1e-9), "d={d} {lab}");
                }
            }
        }
    }

    #[test]
    fn measurement_examples() {
        let z = weyl_measurement(&WeylLabel::single(1, 0, 3));
        assert_eq!(z.terms.len(), 3);
        for t in &z.terms {
            let mut e = Ket::zeros(3);
            e[(t.exponent.value() / 2) as usize] = c(1.0, 0.0);
            assert!(t.projector.approx_eq(&OperatorMatrix::projector(&e), 1e-9));
        }

        // X eigenvectors are the columns of the generalized Hadamard
        let x = weyl_measurement(&WeylLabel::single(0, 1, 3));
        assert_eq!(x.terms.len(), 3);
        let d = 3u64;
        for t in &x.terms {
            let found = (0..d).any(|col| {
                let v = Ket::from_fn(3, |k, _| {
                    root_of_unity(col * k as u64, d) / (d as f64).sqrt()
                });
                t.projector.approx_eq(&OperatorMatrix::projector(&v), 1e-9)
            });
            assert!(found);
        }

        let id = weyl_measurement(&WeylLabel::single(0, 0, 3));
        assert_eq!(id.terms.len(), 1);
        assert!(id.terms[0].projector.approx_eq(&OperatorMatrix::identity(3), 1e-9));
    }

    #[test]
    fn measurement_matches_group_average() {
        // independent route: Π_k = (1/2d) Σ_j e^{-πijk/d} W^j
        for d in 2..=5u64 {
            for n in 1..=2 {
                for lab in WeylLabel::all(d, n).into_iter().step_by(3) {
                    let w = weyl_matrix(&lab);
                    let dim = w.dim();
                    let dec = weyl_measurement(&lab);
                    for t in &dec.terms {
                        let mut avg = OperatorMatrix::zeros(dim);
                        let mut wj = OperatorMatrix::identity(dim);
                        for j in 0..2 * d {
                            let ph = omega_power(ModInt::new(-((j * t.exponent.value()) as i64), 2 * d), d);
                            avg = &avg + &wj.scale(ph);
                            wj = &wj * &w;
                        }
                        let avg = avg.scale_real(1.0 / (2 * d) as f64);
                        assert!(t.projector.approx_eq(&avg, 1e-9), "d={d} {lab}");
                    }
                }
            }
        }
    }

    #[test]
    fn index_round_trip_and_order() {
        for d in 2..5u64 {
            for n in 1..3 {
                let all = WeylLabel::all(d, n);
                for (i, pt) in all.iter().enumerate() {
                    assert_eq!(pt.index(), i);
                }
            }
        }
        let pt = WeylLabel::new(3, &[(1, 2), (0, 1)]);
        assert_eq!(pt.index(), (3 + 2) * 9 + 1);
    }

    #[test]
    fn symplectic_form() {
        let a = WeylLabel::single(1, 0, 5);
        let b = WeylLabel::single(0, 1, 5);
        assert_eq!(a.symplectic(&b), 1);
        assert_eq!(b.symplectic(&a), 4);
        assert_eq!(a.symplectic(&a), 0);
    }
}
