use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use nonpsd_sketch::linalg::{lift_matrix, mixed_norm, phi, unphi, CMat, CVec};
use nonpsd_sketch::lpreg::{build_sketch_inf, sign_enumeration};
use nonpsd_sketch::sampling::{build_sampling_sketch, exact_leverage_scores};
use nonpsd_sketch::vmv::{exact_vmv, TensorSketchState};

fn complex() -> impl Strategy<Value = Complex64> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(complex(), rows * cols).prop_map(move |v| CMat::from_row_major(rows, cols, v).unwrap())
}

fn cvec(len: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec(complex(), len).prop_map(CVec::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_round_trips(x in (1usize..8).prop_flat_map(cvec)) {
        let back = unphi(&phi(&x)).unwrap();
        prop_assert_eq!(back.as_slice(), x.as_slice());
    }

    #[test]
    fn lifted_residual_norm_matches_complex(
        (a, x, b) in (1usize..7, 1usize..4).prop_flat_map(|(n, d)| (cmat(n, d), cvec(d), cvec(n))),
        p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY]),
    ) {
        let r = a.matvec(&x).unwrap().sub(&b);
        let lifted = &lift_matrix(&a) * DVector::from_vec(phi(&x)) - DVector::from_vec(phi(&b));
        let got = mixed_norm(lifted.as_slice(), p).unwrap();
        let want = r.norm_p(p);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn leverage_scores_lie_in_unit_interval_and_sum_to_rank(b in (3usize..12, 1usize..4).prop_flat_map(|(n, d)| cmat(n, d.min(n)))) {
        let lev = exact_leverage_scores(&b).unwrap();
        prop_assert!(lev.iter().all(|&l| (-1e-10..=1.0 + 1e-10).contains(&l)));
        // random dense complex matrices have full column rank almost surely
        prop_assert!((lev.iter().sum::<f64>() - b.cols() as f64).abs() < 1e-8);
    }

    #[test]
    fn sampling_weights_follow_probabilities(
        raw in prop::collection::vec(0.0..1.0f64, 2..20),
        t in 1usize..50,
        seed in any::<u64>(),
    ) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-3);
        let probs: Vec<f64> = raw.iter().map(|r| r / total).collect();
        let s = build_sampling_sketch(&probs, t, seed).unwrap();
        prop_assert_eq!(s.len(), t);
        for &(i, w) in &s.picks {
            prop_assert!(probs[i] > 0.0);
            prop_assert!((w - 1.0 / (t as f64 * probs[i]).sqrt()).abs() < 1e-12 * w);
        }
        prop_assert_eq!(build_sampling_sketch(&probs, t, seed).unwrap(), s);
    }

    #[test]
    fn sign_enumeration_is_an_l1_to_linf_isometry(z in prop::collection::vec(-5.0..5.0f64, 1..8)) {
        let r = sign_enumeration(z.len()).unwrap();
        let rz = &r * DVector::from_vec(z.clone());
        let l1: f64 = z.iter().map(|v| v.abs()).sum();
        prop_assert!((rz.amax() - l1).abs() < 1e-12 * l1.max(1.0));
    }

    #[test]
    fn inf_sketch_has_two_to_the_s_rows_per_pair(pairs in 1usize..5, s in 1usize..6, seed in any::<u64>()) {
        let sk = build_sketch_inf(pairs, s, seed).unwrap();
        prop_assert_eq!(sk.output_rows(), pairs << s);
        prop_assert!(sk.blocks.iter().all(|b| b.nrows() == 1 << s && b.ncols() == 2));
    }

    #[test]
    fn single_coordinate_tensor_sketch_is_exact(
        (a, b, u, v) in (1usize..4).prop_flat_map(|n| (cmat(n, 1), cmat(n, 1), cvec(1), cvec(1))),
        seed in any::<u64>(),
    ) {
        // with d = 1 both signs appear twice and cancel
        let mut st = TensorSketchState::new(1, seed).unwrap();
        st.ingest_rows(&a, &b).unwrap();
        let got = st.estimate(&u, &v).unwrap();
        let want = exact_vmv(&a, &b, &u, &v).unwrap();
        prop_assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0));
    }
}
