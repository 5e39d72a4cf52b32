#![allow(dead_code)]

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use wignerlab::clifford::{embed, hadamard, phase_gate, sum_gate};
use wignerlab::frames::Channel;
use wignerlab::qmat::{Ket, OperatorMatrix};
use wignerlab::stabilizer::{eigenstate, StabilizerBasis};
use wignerlab::modring::ModInt;
use wignerlab::weyl::{weyl_matrix, weyl_measurement, PhasePoint};

/// Product of `len` random generators (H, P, Weyl, and SUM when `n > 1`).
pub fn random_clifford_word(d: u64, n: usize, len: usize, rng: &mut impl Rng) -> OperatorMatrix {
    let dim = (d as usize).pow(n as u32);
    let mut u = OperatorMatrix::identity(dim);
    for _ in 0..len {
        let t = rng.random_range(0..n);
        let g = match rng.random_range(0..if n > 1 { 4 } else { 3 }) {
            0 => embed(&hadamard(d), d, n, &[t]),
            1 => embed(&phase_gate(d).unwrap(), d, n, &[t]),
            2 => {
                let label = PhasePoint::single(rng.random_range(0..d) as i64, rng.random_range(0..d) as i64, d);
                embed(&weyl_matrix(&label), d, n, &[t])
            }
            _ => {
                let mut s = rng.random_range(0..n - 1);
                if s >= t {
                    s += 1;
                }
                embed(&sum_gate(d), d, n, &[t, s])
            }
        }
        .unwrap();
        u = &g * &u;
    }
    u
}

pub fn random_basis(d: u64, rng: &mut impl Rng) -> StabilizerBasis {
    match rng.random_range(0..3) {
        0 => StabilizerBasis::Z,
        1 => StabilizerBasis::X,
        _ => StabilizerBasis::XZ(rng.random_range(1..d)),
    }
}

/// A random pure stabilizer state: random product eigenstate, then a random Clifford word.
pub fn random_stabilizer_density(d: u64, n: usize, rng: &mut impl Rng) -> OperatorMatrix {
    let mut rho = OperatorMatrix::identity(1);
    for _ in 0..n {
        let e = 2 * rng.random_range(0..d) as i64;
        let s = eigenstate(random_basis(d, rng), ModInt::new(e, 2 * d), d).unwrap();
        rho = rho.tensor(&s.density());
    }
    rho.conjugate_by(&random_clifford_word(d, n, 8, rng))
}

pub fn haar_ket(dim: usize, rng: &mut impl Rng) -> Ket {
    let v = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// A random single-qudit stabilizer channel: Clifford unitary, Weyl
/// dephasing, a mixture of two Clifford unitaries, or reset to a stabilizer state.
pub fn random_stabilizer_channel(d: u64, rng: &mut impl Rng) -> Channel {
    let du = d as usize;
    match rng.random_range(0..4) {
        0 => Channel::from_unitary(&random_clifford_word(d, 1, 6, rng), d, 1).unwrap(),
        1 => {
            let label = PhasePoint::from_index(rng.random_range(1..du * du), d, 1);
            let kraus: Vec<_> = weyl_measurement(&label).terms.into_iter().map(|t| t.projector).collect();
            Channel::from_kraus(&kraus, d, 1).unwrap()
        }
        2 => {
            let p: f64 = rng.random();
            let a = random_clifford_word(d, 1, 6, rng).scale_real(p.sqrt());
            let b = random_clifford_word(d, 1, 6, rng).scale_real((1.0 - p).sqrt());
            Channel::from_kraus(&[a, b], d, 1).unwrap()
        }
        _ => {
            let e = 2 * rng.random_range(0..d) as i64;
            let psi = eigenstate(random_basis(d, rng), ModInt::new(e, 2 * d), d).unwrap().vector;
            let kraus: Vec<_> = (0..du)
                .map(|k| {
                    OperatorMatrix::from_fn(du, |r, c| if c == k { psi[r] } else { Complex64::new(0.0, 0.0) })
                })
                .collect();
            Channel::from_kraus(&kraus, d, 1).unwrap()
        }
    }
}

/// Checks the outcome-assignment rules directly from their definitions:
/// `u_00 = 0`, Hermiticity, Hadamard covariance and the commuting-pair sum rule.
pub fn rules_hold(u: &[u64], d: u64) -> bool {
    let m = 2 * d;
    let di = d as i64;
    let at = |p: i64, q: i64| u[(p.rem_euclid(di) * di + q.rem_euclid(di)) as usize];
    let md = |x: i64| x.rem_euclid(m as i64) as u64;
    if u[0] != 0 {
        return false;
    }
    for p in 0..di {
        for q in 0..di {
            if (at(p, q) + at(-p, -q)) % m != md(2 * p * q) {
                return false;
            }
            if md(at(p, q) as i64 - at(-q, p) as i64) != md(2 * p * q) {
                return false;
            }
        }
    }
    for p in 0..di {
        for q in 0..di {
            for p2 in 0..di {
                for q2 in 0..di {
                    if (p * q2 - q * p2).rem_euclid(di) != 0 {
                        continue;
                    }
                    let lhs = at(p + p2, q + q2) as i64 - at(p, q) as i64 - at(p2, q2) as i64;
                    if md(lhs) != md(2 * p2 * q) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Every assignment in `Z_{2d}^{d²}` satisfying [`rules_hold`].
pub fn brute_force_assignments(d: u64) -> Vec<Vec<u64>> {
    let m = 2 * d;
    let n = (d * d) as usize;
    let mut u = vec![0u64; n];
    let mut out = Vec::new();
    loop {
        if rules_hold(&u, d) {
            out.push(u.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            u[i] += 1;
            if u[i] < m {
                break;
            }
            u[i] = 0;
            i += 1;
        }
    }
}
