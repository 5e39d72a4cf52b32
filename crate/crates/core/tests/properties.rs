mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wignerlab::clifford::is_clifford;
use wignerlab::frames::{rep_channel, rep_state};
use wignerlab::gross::{gross_frame, phase_point, wigner};
use wignerlab::nogo::RowBasis;
use wignerlab::qmat::{hs_inner, OperatorMatrix};
use wignerlab::weyl::{compose_labels, weyl_matrix, weyl_measurement, weyl_superop_apply, PhasePoint};
use wignerlab::wsim::post_measurement_update;

fn label(d: u64, n: usize) -> impl Strategy<Value = PhasePoint> {
    let size = (d * d) as usize;
    (0..size.pow(n as u32)).prop_map(move |i| PhasePoint::from_index(i, d, n))
}

fn odd_dim() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weyl_superop_group_law((d, a, b) in (2u64..7).prop_flat_map(|d| (Just(d), label(d, 1), label(d, 1))), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = common::haar_ket(d as usize, &mut rng);
        let rho = OperatorMatrix::projector(&rho);
        let twice = weyl_superop_apply(&b, &weyl_superop_apply(&a, &rho).unwrap()).unwrap();
        let once = weyl_superop_apply(&a.add(&b), &rho).unwrap();
        prop_assert!(twice.approx_eq(&once, 1e-9));
    }

    #[test]
    fn weyl_composition_matches_matrices((d, a, b) in (2u64..7).prop_flat_map(|d| (Just(d), label(d, 2), label(d, 2)))) {
        let (c, phase) = compose_labels(&a, &b);
        let lhs = &weyl_matrix(&a) * &weyl_matrix(&b);
        let rhs = weyl_matrix(&c).scale(wignerlab::modring::omega_power(phase, d));
        prop_assert!(lhs.approx_eq(&rhs, 1e-9));
    }

    #[test]
    fn weyl_orthonormality((d, a, b) in (2u64..7).prop_flat_map(|d| (Just(d), label(d, 1), label(d, 1)))) {
        let ip = hs_inner(&weyl_matrix(&a), &weyl_matrix(&b)).unwrap() / d as f64;
        let expected = if a == b { 1.0 } else { 0.0 };
        prop_assert!((ip.re - expected).abs() < 1e-9 && ip.im.abs() < 1e-9);
    }

    #[test]
    fn clifford_actions_compose(d in prop::sample::select(vec![3u64, 5]), n in 1usize..3, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u1 = common::random_clifford_word(d, n, 6, &mut rng);
        let u2 = common::random_clifford_word(d, n, 6, &mut rng);
        let a1 = is_clifford(&u1, d, n).unwrap();
        let a2 = is_clifford(&u2, d, n).unwrap();
        let both = is_clifford(&(&u2 * &u1), d, n).unwrap();
        prop_assert_eq!(both, a2.after(&a1));
        prop_assert!(a1.is_symplectic());
    }

    #[test]
    fn covariance_of_phase_points((_d, a, b) in odd_dim().prop_flat_map(|d| (Just(d), label(d, 1), label(d, 1)))) {
        let moved = weyl_superop_apply(&b, &phase_point(&a).unwrap().matrix).unwrap();
        prop_assert!(moved.approx_eq(&phase_point(&a.add(&b)).unwrap().matrix, 1e-9));
    }

    #[test]
    fn wigner_equals_frame_representation(d in odd_dim(), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = OperatorMatrix::projector(&common::haar_ket(d as usize, &mut rng));
        let g = gross_frame(d, 1).unwrap();
        let direct = wigner(&rho, d, 1).unwrap();
        prop_assert!(direct.max_abs_diff(&rep_state(&rho, &g.dual).unwrap()) < 1e-9);
        prop_assert!((direct.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sequential_and_parallel_diagram_preservation(seed: u64) {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let one = gross_frame(d, 1).unwrap();
        let two = gross_frame(d, 2).unwrap();
        let e1 = common::random_stabilizer_channel(d, &mut rng);
        let e2 = common::random_stabilizer_channel(d, &mut rng);
        let r1 = rep_channel(&e1, &one.frame, &one.dual).unwrap();
        let r2 = rep_channel(&e2, &one.frame, &one.dual).unwrap();
        let seq = rep_channel(&e2.after(&e1), &one.frame, &one.dual).unwrap();
        prop_assert!(seq.max_abs_diff(&r2.after(&r1)) < 1e-8);
        let par = rep_channel(&e1.tensor(&e2), &two.frame, &two.dual).unwrap();
        prop_assert!(par.max_abs_diff(&r1.tensor(&r2)) < 1e-8);
    }

    #[test]
    fn phase_space_update_matches_projector_update(seed: u64, n in 1usize..3) {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = common::random_stabilizer_density(d, n, &mut rng);
        let size = 9usize.pow(n as u32);
        let b = PhasePoint::from_index(1 + (seed as usize % (size - 1)), d, n);
        let w = wigner(&rho, d, n).unwrap();
        for term in weyl_measurement(&b).terms {
            let post = &(&term.projector * &rho) * &term.projector;
            let p = post.trace().re;
            if p < 1e-9 {
                prop_assert!(post_measurement_update(&w, &b, term.exponent).is_err());
                continue;
            }
            let expected = wigner(&post.scale_real(1.0 / p), d, n).unwrap();
            let got = post_measurement_update(&w, &b, term.exponent).unwrap();
            prop_assert!(got.max_abs_diff(&expected) < 1e-9);
        }
    }

    #[test]
    fn row_basis_counts_solutions(m in prop::sample::select(vec![4u64, 6, 8, 9, 10, 12]),
                                  rows in prop::collection::vec(prop::collection::vec(0u64..12, 3), 1..5)) {
        let n = 2;
        let rows: Vec<Vec<u64>> = rows.into_iter().map(|r| r.into_iter().map(|x| x % m).collect()).collect();
        let mut basis = RowBasis::new(m, n + 1);
        for r in &rows {
            basis.insert(r.clone());
        }
        let mut count = 0u64;
        for x0 in 0..m {
            for x1 in 0..m {
                if rows.iter().all(|r| (r[0] * x0 + r[1] * x1) % m == r[2]) {
                    count += 1;
                }
            }
        }
        if basis.is_consistent() {
            prop_assert_eq!(count, basis.kernel_orders().iter().product::<u64>());
        } else {
            prop_assert_eq!(count, 0);
        }
        for r in &rows {
            prop_assert!(basis.contains(r));
        }
    }

    #[test]
    fn measurement_projectors_are_complete(d in 2u64..6, b in 1usize..25) {
        let size = (d * d) as usize;
        let label = PhasePoint::from_index(b % size.max(2), d, 1);
        let s = weyl_measurement(&label);
        let total = s.terms.iter().fold(OperatorMatrix::zeros(d as usize), |acc, t| &acc + &t.projector);
        prop_assert!(total.approx_eq(&OperatorMatrix::identity(d as usize), 1e-9));
        prop_assert!(s.reconstruct().approx_eq(&weyl_matrix(&label), 1e-9));
        for t in &s.terms {
            prop_assert_eq!(t.exponent.modulus(), 2 * d);
        }
    }
}
