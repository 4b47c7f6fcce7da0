use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use witnesskit::closest::closest_ppt;
use witnesskit::states;
use witnesskit::tomo::{state_to_tensor, tensor_to_state, Convention};
use witnesskit::witness::{build_linear_with, build_quadratic_with, max_product_overlap, see_saw, SeeSawConfig};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![Just(vec![2, 2]), Just(vec![2, 3]), Just(vec![3, 3]), Just(vec![2, 2, 2])]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_transpose_is_an_involution(dims in dims_strategy(), seed in any::<u64>(), party in 0usize..3) {
        let rho = states::random_state(&dims, seed).unwrap();
        let party = party % dims.len();
        let once = rho.partial_transpose(party).unwrap();
        let twice = witnesskit::densop::partial_transpose_matrix(&once, &dims, party).unwrap();
        prop_assert!(twice.max_abs_diff(rho.matrix()) < 1e-14);
        prop_assert!((once.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_round_trip(dims in dims_strategy(), seed in any::<u64>()) {
        let rho = states::random_state(&dims, seed).unwrap();
        let t = state_to_tensor(&rho, Convention::RawMoment).unwrap();
        let back = tensor_to_state(&t).unwrap();
        prop_assert!(back.is_psd());
        prop_assert!(back.matrix.max_abs_diff(rho.matrix()) < 1e-12);
        // the scaled convention only rescales entries, so switching back is lossless
        let symmetric = dims.len() == 2 && dims[0] == dims[1];
        match t.clone().with_convention(Convention::QuditScaled) {
            Ok(scaled) => {
                prop_assert!(symmetric);
                for (idx, v) in t.iter() {
                    let s = scaled.get(&idx).unwrap();
                    prop_assert!((s - v * scaled.scale_factor(&idx)).abs() < 1e-14);
                }
                let back = scaled.with_convention(Convention::RawMoment).unwrap();
                prop_assert_eq!(back.raw_values(), t.raw_values());
            }
            Err(_) => prop_assert!(!symmetric),
        }
    }

    #[test]
    fn two_qubit_correlations_obey_singlet_ceiling(seed in any::<u64>()) {
        // T_xx + T_yy + T_zz = 1 - 4 <psi-|rho|psi->
        let rho = states::random_state(&[2, 2], seed).unwrap();
        let t = state_to_tensor(&rho, Convention::RawMoment).unwrap();
        let s: f64 = (1..4).map(|k| t.raw(&[k, k]).unwrap()).sum();
        prop_assert!((-3.0 - 1e-12..=1.0 + 1e-12).contains(&s), "{}", s);
    }

    #[test]
    fn see_saw_never_decreases(dims in dims_strategy(), seed in any::<u64>()) {
        let k = states::random_state(&dims, seed).unwrap().into_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let start: Vec<_> = dims.iter().map(|&d| states::random_pure_vector(d, &mut rng)).collect();
        let run = see_saw(&k, &dims, start, &SeeSawConfig::default()).unwrap();
        for pair in run.trace.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-12, "{:?}", run.trace);
        }
    }

    #[test]
    fn overlap_interval_brackets_product_values(seed in any::<u64>()) {
        let dims = [2, 2];
        let k = states::random_state(&dims, seed).unwrap().into_matrix();
        let b = max_product_overlap(&k, &dims).unwrap();
        prop_assert!(b.lower <= b.upper + 1e-12);
        for s in 0..8 {
            let sigma = states::random_product_state(&dims, seed.wrapping_add(s)).unwrap();
            let v = witnesskit::densop::hs_inner(&k, sigma.matrix()).unwrap();
            prop_assert!(v <= b.upper + 1e-9);
        }
    }

    #[test]
    fn witnesses_never_flag_separable_states(seed in any::<u64>(), terms in 1usize..5) {
        let cfg = SeeSawConfig { starts: 16, ..SeeSawConfig::default() };
        let target = states::random_state(&[2, 2], seed).unwrap();
        let rho0 = closest_ppt(&target, 1).unwrap().rho0;
        let sigma = states::random_separable_state(&[2, 2], terms, seed ^ 0x5151).unwrap();
        let w = build_linear_with(&target, &rho0, &cfg).unwrap();
        prop_assert!(!w.evaluate(&sigma).unwrap().verdict.is_entangled());
        let q = build_quadratic_with(&target, &rho0, &cfg).unwrap();
        prop_assert!(!q.evaluate(&sigma).unwrap().verdict.is_entangled());
    }
}
