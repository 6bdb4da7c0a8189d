//! Randomized invariants.

use cvdistill::cli::{random_mixed_case, random_pure_case, trial_rng};
use cvdistill::photon::{relative_purity, within_entanglement_bound};
use cvdistill::{bogoliubov_row, entanglement_increase, random_symplectic, relative_purity_closed_form, PhotonOp};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn williamson_round_trip(seed in any::<u64>()) {
        let (state, _) = random_mixed_case(&mut trial_rng(seed, 0));
        let d = state.williamson().unwrap();
        prop_assert!(d.reconstruction_error(state.cov()) <= 1e-8);
        prop_assert!(d.symplectic.symplecticity_error() <= 1e-9);
        prop_assert!(d.nu.iter().all(|&n| n >= 1.0 - 1e-9));
        prop_assert!(d.nu.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn bogoliubov_rows_are_canonical(seed in any::<u64>()) {
        let (state, g) = random_mixed_case(&mut trial_rng(seed, 1));
        let d = state.williamson().unwrap();
        let row = bogoliubov_row(&d, g).unwrap();
        prop_assert!((row.commutator() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn relative_purity_at_least_half(seed in any::<u64>(), add in any::<bool>()) {
        let kind = if add { PhotonOp::Add } else { PhotonOp::Subtract };
        let (state, g) = random_mixed_case(&mut trial_rng(seed, 2));
        let d = state.williamson().unwrap();
        let ratio = relative_purity_closed_form(&d, &bogoliubov_row(&d, g).unwrap(), kind).unwrap();
        prop_assert!(ratio >= 0.5 - 1e-12);
    }

    #[test]
    fn entanglement_change_is_symmetric_and_bounded(seed in any::<u64>(), add in any::<bool>()) {
        let kind = if add { PhotonOp::Add } else { PhotonOp::Subtract };
        let (state, sub, g) = random_pure_case(&mut trial_rng(seed, 3));
        let here = entanglement_increase(&state, &sub, g, kind).unwrap();
        let there = entanglement_increase(&state, &sub.complement().unwrap(), g, kind).unwrap();
        prop_assert!((here.before - there.before).abs() < 1e-8);
        prop_assert!((here.delta - there.delta).abs() < 1e-7 * here.delta.abs().max(1.0));
        prop_assert!(within_entanglement_bound(here.delta));
    }

    #[test]
    fn pure_marginals_are_fixpoints(seed in any::<u64>(), bound in 0.0f64..2.0) {
        // a one-mode state in a product with nothing else
        let s = random_symplectic(1, seed, bound).unwrap();
        let st = cvdistill::GaussianState::vacuum(1)
            .transform(&s, &nalgebra::DVector::from_vec(vec![0.4, -0.3]))
            .unwrap();
        let full = cvdistill::Subsystem::full(1);
        let ratio = relative_purity(&st, &full, 0, PhotonOp::Subtract).unwrap();
        prop_assert!((ratio - 1.0).abs() < 1e-10);
    }
}
