mod common;

use mcdf_core::basis::{project_columns, InnerProduct, Spectral};
use mcdf_core::basis::{orbital_norm_sqr, BasisDescriptor, Components};
use mcdf_core::ci::{min_occupation, CIVector};
use mcdf_core::coulomb::{Hamiltonian, Model, NuclearConfiguration};
use mcdf_core::energy::{energy, normalize_g};
use mcdf_core::limit::{seed_from_mchf, Problem};
use mcdf_core::linalg::{gram, random_normal_c64};
use mcdf_core::mchf::{default_gamma, MchfConfig, MchfResult};
use mcdf_core::solver::{certify_solution, inner_maximize, outer_minimize, reduced_value, SolverConfig, SolverReport, Tolerances};
use mcdf_core::{CMat, Error, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn helium(orbitals: usize) -> Problem {
    Problem { box_length: 6.0, modes_per_axis: 3, nuclei: NuclearConfiguration::centered(2.0, 6.0), electrons: 2, orbitals }
}

fn solved(c: f64) -> (Hamiltonian, MchfResult, SolverConfig, SolverReport) {
    let problem = helium(4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let reference = problem.reference(&MchfConfig::default(), &mut rng).unwrap();
    let cfg = SolverConfig { gamma_floor: default_gamma(&reference), ..SolverConfig::default() };
    let ham = problem.hamiltonian(c, Model::Dirac).unwrap();
    let start = seed_from_mchf(&ham, &reference).unwrap();
    let report = outer_minimize(&ham, &start, &cfg).unwrap();
    (ham, reference, cfg, report)
}

#[test]
fn converged_state_is_certified_and_consistent() {
    let (ham, _, cfg, report) = solved(30.0);
    let cert = certify_solution(&ham, &report, &Tolerances::from_config(&cfg), cfg.window_constant);
    assert!(cert.passed, "{:#?}", cert.checks);
    // solver-independent recomputation agrees with the cached residuals
    assert!((cert.residual_df1 - report.residual_df1).abs() < 1e-10);
    assert!((cert.residual_df2 - report.residual_df2).abs() < 1e-10);
    let k = report.state.a.orbitals();
    assert!((gram(&report.state.psi_plus) - CMat::identity(k, k)).norm() < 1e-9);
    assert!(min_occupation(&report.state.a) >= cfg.gamma_floor - 1e-9);
    let e = energy(&ham, &report.state.a, &report.psi_full).unwrap().total;
    assert!((e - report.energy.total).abs() < 1e-9 * e.abs());
}

#[test]
fn outer_iteration_never_increases_the_reduced_value() {
    let (_, _, _, report) = solved(30.0);
    assert!(report.history.len() >= 2);
    for w in report.history.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} → {}", w[0], w[1]);
    }
}

#[test]
fn restart_from_the_fixed_point_stops_immediately() {
    let (ham, _, cfg, report) = solved(30.0);
    let again = outer_minimize(&ham, &report.state, &cfg).unwrap();
    assert!(again.iterations <= 2, "{} iterations", again.iterations);
    assert!((again.energy.total - report.energy.total).abs() < 1e-10 * report.energy.total.abs());
}

#[test]
fn inner_objective_is_concave_at_the_solution() {
    let (ham, _, _, report) = solved(30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let plus = &report.state.psi_plus;
    let minus = &report.state.psi_minus;
    let a = &report.state.a;
    let f = |m: &CMat| energy(&ham, a, &normalize_g(&(plus + m)).unwrap()).unwrap().total;
    let f0 = f(minus);
    for _ in 0..50 {
        let raw = CMat::from_fn(plus.nrows(), plus.ncols(), |_, _| random_normal_c64(&mut rng));
        let d = project_columns(ham.basis(), &raw, Spectral::Negative).normalize() * C64::new(1e-3, 0.0);
        let second = f(&(minus + &d)) + f(&(minus - &d)) - 2.0 * f0;
        assert!(second < 0.0, "second difference {second:e}");
    }
}

#[test]
fn single_free_electron_has_trivial_maximizer() {
    let c = 7.0;
    let basis = BasisDescriptor::new(5.0, 1, c).unwrap();
    let ham = Hamiltonian::new(&basis, &NuclearConfiguration::empty(), Model::Dirac);
    let a = CIVector::single(1, 1).unwrap();
    let cfg = SolverConfig { energy_cap_enforced: false, ..SolverConfig::default() };
    for mode in [0, 5, 13] {
        let mut raw = CMat::zeros(basis.dim(Components::Dirac), 1);
        raw[(mode * 4, 0)] = C64::new(0.6, 0.2);
        raw[(mode * 4 + 1, 0)] = C64::new(-0.3, 0.5);
        let plus = normalize_g(&project_columns(&basis, &raw, Spectral::Positive)).unwrap();
        let (minus, diag) = inner_maximize(&ham, &a, &plus, &cfg).unwrap();
        assert!(orbital_norm_sqr(&basis, &minus, Components::Dirac, InnerProduct::C).sqrt() < 1e-12);
        assert!(diag.iterations == 0);
        let value = reduced_value(&ham, &a, &plus, &cfg).unwrap();
        let exact = (c.powi(4) + c * c * basis.k2(mode)).sqrt();
        assert!((value - exact).abs() < 1e-12 * exact, "mode {mode}: {value} vs {exact}");
    }
    // a moving free electron has E > Nc², so the capped solver refuses it
    let mut raw = CMat::zeros(basis.dim(Components::Dirac), 1);
    raw[(20, 0)] = C64::new(1.0, 0.0);
    let plus = normalize_g(&project_columns(&basis, &raw, Spectral::Positive)).unwrap();
    let err = inner_maximize(&ham, &a, &plus, &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Config { .. }), "{err}");
}

#[test]
fn infeasible_floor_is_rejected_up_front() {
    let problem = helium(3);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let reference = problem.reference(&MchfConfig::default(), &mut rng).unwrap();
    let ham = problem.hamiltonian(40.0, Model::Dirac).unwrap();
    let start = seed_from_mchf(&ham, &reference).unwrap();
    // K = 3, N = 2 always has a zero occupation, so no positive floor is reachable
    let cfg = SolverConfig { gamma_floor: 0.05, ..SolverConfig::default() };
    let err = outer_minimize(&ham, &start, &cfg).unwrap_err();
    assert!(matches!(err, Error::InfeasibleFloor { .. }), "{err}");
    let cfg = SolverConfig { gamma_floor: 0.9, ..SolverConfig::default() };
    assert!(matches!(outer_minimize(&ham, &start, &cfg).unwrap_err(), Error::InfeasibleFloor { .. }));
}

#[test]
fn solves_are_deterministic() {
    let (_, _, _, first) = solved(25.0);
    let (_, _, _, second) = solved(25.0);
    assert_eq!(first.energy.total.to_bits(), second.energy.total.to_bits());
    assert_eq!(first.state, second.state);
    assert_eq!(first.history, second.history);
}
