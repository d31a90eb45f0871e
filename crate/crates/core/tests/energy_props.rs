mod common;

use common::*;
use mcdf_core::basis::BasisDescriptor;
use mcdf_core::ci::{group_action, CIVector};
use mcdf_core::coulomb::{Hamiltonian, Model};
use mcdf_core::energy::{energy, energy_shifted, evaluate, gradient_a, gradient_psi, normalize_g, rest_shift};
use mcdf_core::linalg::{random_normal_c64, random_unitary, re_inner};
use mcdf_core::solver::pullback_gradient;
use mcdf_core::{CMat, CVec, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn central(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

/// Errors of central differences at `h` and `h/2`.
fn fd_errors(f: &dyn Fn(f64) -> f64, exact: f64, h: f64) -> (f64, f64) {
    ((central(f, h) - exact).abs(), (central(f, 0.5 * h) - exact).abs())
}

fn assert_second_order(label: &str, f: &dyn Fn(f64) -> f64, exact: f64) {
    let (e1, e2) = fd_errors(f, exact, 2e-2);
    let ratio = e1 / e2;
    assert!((3.0..=5.0).contains(&ratio), "{label}: errors {e1:e} / {e2:e}, ratio {ratio}");
    assert!(e2 < 1e-3 * exact.abs().max(1.0), "{label}: error {e2:e} against {exact:e}");
}

fn setup(model: Model, k: usize, n: usize, seed: u64) -> (Hamiltonian, CIVector, CMat, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = BasisDescriptor::new(5.0, 1, 4.0).unwrap();
    let ham = hamiltonian(&basis, model);
    let psi = smooth_orbitals(&basis, model, k, &mut rng);
    let a = random_ci(k, n, &mut rng);
    (ham, a, psi, rng)
}

#[test]
fn energy_is_invariant_under_the_group_action() {
    for model in [Model::Dirac, Model::Schrodinger] {
        let (ham, a, psi, mut rng) = setup(model, 4, 2, 1);
        let e0 = energy(&ham, &a, &psi).unwrap().total;
        for _ in 0..20 {
            let u = random_unitary(4, &mut rng);
            let (a2, psi2) = group_action(&u, &a, &psi).unwrap();
            let e = energy(&ham, &a2, &psi2).unwrap().total;
            assert!(rel(e, e0) < 1e-10, "{model:?}: {e} vs {e0}");
        }
    }
}

#[test]
fn ci_gradient_matches_finite_differences() {
    for (model, k, n) in [(Model::Dirac, 3, 2), (Model::Dirac, 4, 3), (Model::Schrodinger, 4, 2)] {
        let (ham, a, psi, mut rng) = setup(model, k, n, 2);
        let g = gradient_a(&ham, &a, &psi).unwrap();
        for dir in 0..20 {
            let z = CVec::from_fn(a.len(), |_, _| random_normal_c64(&mut rng));
            let t = (&z - a.coeffs() * a.coeffs().dotc(&z)).normalize();
            let f = |s: f64| {
                let b = CIVector::normalized(k, n, a.coeffs() + &t * C64::new(s, 0.0)).unwrap();
                energy_shifted(&ham, &b, &psi).unwrap().total
            };
            let exact: f64 = g.iter().zip(t.iter()).map(|(x, y)| (x.conj() * y).re).sum();
            assert_second_order(&format!("{model:?} K={k} N={n} direction {dir}"), &f, exact);
        }
    }
}

#[test]
fn orbital_gradient_matches_finite_differences_along_horizontal_directions() {
    for (model, k, n) in [(Model::Dirac, 3, 2), (Model::Schrodinger, 3, 2), (Model::Dirac, 2, 1)] {
        let (ham, a, psi, mut rng) = setup(model, k, n, 3);
        let g = gradient_psi(&ham, &a, &psi).unwrap();
        for dir in 0..20 {
            let w = smooth_orbitals(ham.basis(), model, k, &mut rng);
            let xi = (&w - &psi * (psi.adjoint() * &w)).normalize();
            let f = |s: f64| energy_shifted(&ham, &a, &normalize_g(&(&psi + &xi * C64::new(s, 0.0))).unwrap()).unwrap().total;
            assert_second_order(&format!("{model:?} K={k} N={n} direction {dir}"), &f, re_inner(&g, &xi));
        }
    }
}

#[test]
fn pullback_gradient_matches_finite_differences() {
    let (ham, a, psi, mut rng) = setup(Model::Dirac, 3, 2, 4);
    let shift = rest_shift(&ham);
    // a deliberately non-orthonormal point
    let c = &psi + smooth_orbitals(ham.basis(), Model::Dirac, 3, &mut rng) * C64::new(0.3, 0.1);
    let fock = evaluate(&ham, &a, &normalize_g(&c).unwrap(), shift).unwrap().fock;
    let g = pullback_gradient(&c, &fock).unwrap();
    for dir in 0..20 {
        let z = smooth_orbitals(ham.basis(), Model::Dirac, 3, &mut rng).normalize();
        let f = |s: f64| evaluate(&ham, &a, &normalize_g(&(&c + &z * C64::new(s, 0.0))).unwrap(), shift).unwrap().breakdown.total;
        assert_second_order(&format!("direction {dir}"), &f, re_inner(&g, &z));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_idempotent(rows in 4usize..40, k in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = k.min(rows);
        let c = CMat::from_fn(rows, k, |_, _| random_normal_c64(&mut rng));
        let once = normalize_g(&c).unwrap();
        let twice = normalize_g(&once).unwrap();
        prop_assert!((&twice - &once).norm() < 1e-12);
        prop_assert!((once.adjoint() * &once - CMat::identity(k, k)).norm() < 1e-12);
    }
}
