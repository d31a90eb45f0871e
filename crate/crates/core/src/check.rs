//! Invariant suite behind the `check` command.
//!
//! Each family compares two routes to the same quantity on random data drawn
//! from a seeded generator. With a corrupted Coulomb kernel (fault injection)
//! the energy-path family must fail.

use crate::basis::{dirac_columns, project_columns, BasisDescriptor, Spectral};
use crate::ci::{gamma_matrix, group_action, CIVector, CiSpace};
use crate::coulomb::{ci_hamiltonian, Hamiltonian, Model, NuclearConfiguration, Nucleus};
use crate::energy::{energy, energy_shifted, gradient_a, gradient_psi, normalize_g};
use crate::linalg::{hermitian_defect, hermitian_eigen, random_normal_c64, random_unitary, re_inner};
use crate::oracle::brute_force_ci_matrix;
use crate::solver::CheckOutcome;
use crate::{Error, Result, CMat, CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

pub const CHECK_SCHEMA: &str = "mcdf-check/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Tiny,
    Small,
    Default,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tiny" => Ok(Scale::Tiny),
            "small" => Ok(Scale::Small),
            "default" => Ok(Scale::Default),
            _ => Err(Error::config("--scale", format!("unknown scale {s:?} (tiny, small, default)"))),
        }
    }
}

/// Basis and CI sizes exercised at one scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckProblem {
    pub box_length: f64,
    pub modes_per_axis: usize,
    pub light_speed: f64,
    pub orbitals: usize,
    pub electrons: usize,
}

impl Scale {
    pub fn problem(self) -> CheckProblem {
        match self {
            Scale::Tiny => CheckProblem { box_length: 3.0, modes_per_axis: 2, light_speed: 2.5, orbitals: 4, electrons: 3 },
            Scale::Small => CheckProblem { box_length: 4.0, modes_per_axis: 3, light_speed: 5.0, orbitals: 4, electrons: 2 },
            Scale::Default => CheckProblem { box_length: 6.0, modes_per_axis: 5, light_speed: 10.0, orbitals: 4, electrons: 2 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema: String,
    pub scale: Scale,
    pub seed: u64,
    pub problem: CheckProblem,
    /// relative kernel corruption, when injected
    pub fault: Option<f64>,
    pub results: Vec<CheckOutcome>,
    pub passed: bool,
}

impl CheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("check reports serialize")
    }
}

/// Two unequal nuclei away from the box centre, so no accidental symmetry.
pub fn test_molecule(box_length: f64) -> NuclearConfiguration {
    NuclearConfiguration::new(
        vec![
            Nucleus { position: [0.4 * box_length, 0.5 * box_length, 0.45 * box_length], charge: 2.0 },
            Nucleus { position: [0.6 * box_length, 0.55 * box_length, 0.5 * box_length], charge: 1.0 },
        ],
        0.0,
    )
    .expect("valid test molecule")
}

/// Random `g`-normalized orbitals whose coefficients decay with `|k|²`.
pub fn smooth_orbitals<R: Rng>(basis: &BasisDescriptor, model: Model, k: usize, rng: &mut R) -> Result<CMat> {
    let nc = model.components().count();
    let c = CMat::from_fn(basis.dim(model.components()), k, |row, _| random_normal_c64(rng) * (-0.3 * basis.k2(row / nc)).exp());
    normalize_g(&c)
}

pub fn random_ci<R: Rng>(k: usize, n: usize, rng: &mut R) -> Result<CIVector> {
    let len = CiSpace::new(k, n)?.len();
    CIVector::normalized(k, n, CVec::from_fn(len, |_, _| random_normal_c64(rng)))
}

struct Collector {
    results: Vec<CheckOutcome>,
}

impl Collector {
    fn push(&mut self, family: &str, name: &str, value: f64, threshold: f64) {
        self.results.push(CheckOutcome {
            name: format!("{family}/{name}"),
            value,
            threshold: Some(threshold),
            passed: value.is_finite() && value <= threshold,
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn projectors(out: &mut Collector, basis: &BasisDescriptor, c: &CMat) {
    let plus = project_columns(basis, c, Spectral::Positive);
    let minus = project_columns(basis, c, Spectral::Negative);
    let f = "projectors";
    out.push(f, "resolution_of_identity", (&plus + &minus - c).norm(), 1e-12);
    out.push(f, "idempotent", (project_columns(basis, &plus, Spectral::Positive) - &plus).norm(), 1e-12);
    out.push(f, "orthogonal", project_columns(basis, &plus, Spectral::Negative).norm(), 1e-12);
    let dc = dirac_columns(basis, c, 0.0);
    let scale = dc.norm().max(1.0);
    out.push(f, "commutes_with_dirac", (dirac_columns(basis, &plus, 0.0) - project_columns(basis, &dc, Spectral::Positive)).norm() / scale, 1e-13);
}

fn gamma_family(out: &mut Collector, a: &CIVector) {
    let g = gamma_matrix(a);
    let occ = hermitian_eigen(&g).0;
    let f = "gamma";
    out.push(f, "hermitian", hermitian_defect(&g), 1e-13);
    out.push(f, "trace_equals_n", (g.trace().re - a.electrons() as f64).abs(), 1e-12);
    out.push(f, "occupations_at_least_zero", (-occ[0]).max(0.0), 1e-12);
    out.push(f, "occupations_at_most_one", (occ[occ.len() - 1] - 1.0).max(0.0), 1e-12);
}

fn energy_paths(out: &mut Collector, label: &str, ham: &Hamiltonian, a: &CIVector, psi: &CMat) -> Result<()> {
    // mean-field route against the CI quadratic form built from two-electron integrals
    let e = energy(ham, a, psi)?.total;
    let h = ci_hamiltonian(ham, psi, a.electrons(), 0.0)?;
    let q = a.coeffs().dotc(&(&h * a.coeffs())).re;
    out.push("energy_paths", label, rel(e, q), 1e-10);
    Ok(())
}

fn oracle_family(out: &mut Collector, label: &str, ham: &Hamiltonian, psi: &CMat, electrons: usize) -> Result<()> {
    let h = ci_hamiltonian(ham, psi, electrons, 0.0)?;
    let brute = brute_force_ci_matrix(ham.basis(), ham.nuclei(), ham.model(), psi, electrons)?;
    out.push("slater_condon", label, (&h - &brute).norm() / brute.norm(), 1e-10);
    Ok(())
}

/// Richardson-extrapolated central difference, `O(h⁴)`.
fn derivative(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let central = |h: f64| -> Result<f64> { Ok((f(h)? - f(-h)?) / (2.0 * h)) };
    Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0)
}

fn gradient_family<R: Rng>(out: &mut Collector, ham: &Hamiltonian, a: &CIVector, psi: &CMat, rng: &mut R) -> Result<()> {
    let step = 1e-3;
    let f = "gradient_fd";
    let e = |a: &CIVector, psi: &CMat| -> Result<f64> { Ok(energy_shifted(ham, a, psi)?.total) };

    // CI direction tangent to the sphere
    let z = CVec::from_fn(a.len(), |_, _| random_normal_c64(rng));
    let t = &z - a.coeffs() * a.coeffs().dotc(&z);
    let along = |s: f64| -> Result<f64> {
        let b = CIVector::normalized(a.orbitals(), a.electrons(), a.coeffs() + &t * C64::new(s, 0.0))?;
        e(&b, psi)
    };
    let fd = derivative(along, step)?;
    let g = gradient_a(ham, a, psi)?;
    let exact = g.iter().zip(t.iter()).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
    out.push(f, "ci", rel(fd, exact), 1e-7);

    // horizontal orbital direction
    let w = smooth_orbitals(ham.basis(), ham.model(), psi.ncols(), rng)?;
    let xi = &w - psi * (psi.adjoint() * &w);
    let along = |s: f64| -> Result<f64> { e(a, &normalize_g(&(psi + &xi * C64::new(s, 0.0)))?) };
    let fd = derivative(along, step)?;
    let exact = re_inner(&gradient_psi(ham, a, psi)?, &xi);
    out.push(f, "orbitals", rel(fd, exact), 1e-7);
    Ok(())
}

fn group_family<R: Rng>(out: &mut Collector, label: &str, ham: &Hamiltonian, a: &CIVector, psi: &CMat, rng: &mut R) -> Result<()> {
    let u = random_unitary(a.orbitals(), rng);
    let (a2, psi2) = group_action(&u, a, psi)?;
    let f = "group_action";
    out.push(f, &format!("{label}_energy"), rel(energy(ham, a, psi)?.total, energy(ham, &a2, &psi2)?.total), 1e-12);
    let o1 = hermitian_eigen(&gamma_matrix(a)).0;
    let o2 = hermitian_eigen(&gamma_matrix(&a2)).0;
    let spread = o1.iter().zip(&o2).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    out.push(f, &format!("{label}_occupations"), spread, 1e-12);
    Ok(())
}

/// Runs every family at `scale`; `fault` scales the mean-field Coulomb kernel by `1 + fault`.
pub fn run_checks(scale: Scale, seed: u64, fault: Option<f64>) -> Result<CheckReport> {
    let p = scale.problem();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = BasisDescriptor::with_modes_per_axis(p.box_length, p.modes_per_axis, p.light_speed)?;
    let nuclei = test_molecule(p.box_length);
    let build = |model| {
        let h = Hamiltonian::new(&basis, &nuclei, model);
        match fault {
            Some(eps) => h.with_corrupted_kernel(1.0 + eps),
            None => h,
        }
    };
    let mut out = Collector { results: Vec::new() };
    for model in [Model::Dirac, Model::Schrodinger] {
        let label = match model {
            Model::Dirac => "dirac",
            Model::Schrodinger => "schrodinger",
        };
        let ham = build(model);
        let psi = smooth_orbitals(&basis, model, p.orbitals, &mut rng)?;
        let a = random_ci(p.orbitals, p.electrons, &mut rng)?;
        if model == Model::Dirac {
            projectors(&mut out, &basis, &psi);
            gamma_family(&mut out, &a);
            gradient_family(&mut out, &ham, &a, &psi, &mut rng)?;
        }
        energy_paths(&mut out, label, &ham, &a, &psi)?;
        oracle_family(&mut out, label, &ham, &psi, p.electrons)?;
        group_family(&mut out, label, &ham, &a, &psi, &mut rng)?;
    }
    let passed = out.results.iter().all(|r| r.passed);
    Ok(CheckReport { schema: CHECK_SCHEMA.into(), scale, seed, problem: p, fault, results: out.results, passed })
}
