mod common;

use common::*;
use mcdf_core::basis::BasisDescriptor;
use mcdf_core::coulomb::{ci_hamiltonian, Model};
use mcdf_core::energy::energy;
use mcdf_core::oracle::brute_force_ci_matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn slater_condon_matches_brute_force_on_tiny_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let basis = BasisDescriptor::with_modes_per_axis(3.0, 2, 2.5).unwrap();
    for model in [Model::Dirac, Model::Schrodinger] {
        let ham = hamiltonian(&basis, model);
        for (k, n) in [(2, 2), (3, 2), (4, 2), (3, 3)] {
            let psi = random_orbitals(ham.dim(), k, &mut rng);
            let sc = ci_hamiltonian(&ham, &psi, n, 0.0).unwrap();
            let bf = brute_force_ci_matrix(&basis, ham.nuclei(), model, &psi, n).unwrap();
            let err = (&sc - &bf).iter().fold(0.0_f64, |m, x| m.max(x.norm()));
            assert!(err < 1e-10, "{model:?} K={k} N={n}: {err:e}");
        }
    }
}

#[test]
fn energy_equals_ci_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let basis = BasisDescriptor::new(4.0, 2, 3.0).unwrap();
    let ham = hamiltonian(&basis, Model::Dirac);
    for (k, n) in [(3, 2), (4, 2), (4, 3), (2, 1)] {
        let psi = random_orbitals(ham.dim(), k, &mut rng);
        let a = random_ci(k, n, &mut rng);
        let h = ci_hamiltonian(&ham, &psi, n, 0.0).unwrap();
        let quad = a.coeffs().dotc(&(&h * a.coeffs())).re;
        let e = energy(&ham, &a, &psi).unwrap().total;
        assert!(rel(quad, e) < 1e-9, "K={k} N={n}: {quad} vs {e}");
    }
}
