mod common;

use common::{random_ci, random_orbitals};
use mcdf_core::ci::{expand_alpha, gamma_matrix, group_action, min_occupation, retract_to_s_gamma};
use mcdf_core::linalg::{hermitian_defect, hermitian_eigen, random_unitary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6).prop_flat_map(|k| (Just(k), 1usize..=k.min(3)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn occupation_matrix_laws((k, n) in shape(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_ci(k, n, &mut rng);
        let g = gamma_matrix(&a);
        prop_assert!(hermitian_defect(&g) < 1e-12);
        prop_assert!((g.trace().re - n as f64).abs() < 1e-10);
        let occ = hermitian_eigen(&g).0;
        prop_assert!(occ[0] >= -1e-10);
        prop_assert!(occ[k - 1] <= 1.0 + 1e-10);
    }

    #[test]
    fn alpha_expansion_round_trips((k, n) in shape(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_ci(k, n, &mut rng);
        let back = expand_alpha(&a).contract().unwrap();
        prop_assert!((back.coeffs() - a.coeffs()).norm() < 1e-12);
    }

    #[test]
    fn group_action_composes((k, n) in shape(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_ci(k, n, &mut rng);
        let psi = random_orbitals(3 * k, k, &mut rng);
        let (u, v) = (random_unitary(k, &mut rng), random_unitary(k, &mut rng));
        // orbitals transform as Ψ ↦ ΨU, so acting with V and then U is acting with VU
        let (a1, p1) = group_action(&v, &a, &psi).unwrap();
        let (a2, p2) = group_action(&u, &a1, &p1).unwrap();
        let (b, q) = group_action(&(&v * &u), &a, &psi).unwrap();
        prop_assert!((a2.coeffs() - b.coeffs()).norm() < 1e-10);
        prop_assert!((p2 - q).norm() < 1e-10);
        prop_assert!((a2.coeffs().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn retraction_is_idempotent_on_its_image(seed in any::<u64>(), frac in 0.05f64..0.95, shape in prop_oneof![Just((4usize, 2usize)), Just((6, 3)), Just((6, 2))]) {
        let (k, n) = shape;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_ci(k, n, &mut rng);
        let balanced = min_occupation(&mcdf_core::ci::balanced_vector(k, n).unwrap());
        let gamma = frac * balanced;
        let once = retract_to_s_gamma(&a, gamma).unwrap();
        prop_assert!(min_occupation(&once) >= gamma - 1e-9);
        let twice = retract_to_s_gamma(&once, gamma).unwrap();
        prop_assert!((twice.coeffs() - once.coeffs()).norm() < 1e-9);
    }
}
