#![allow(dead_code)]

use mcdf_core::basis::{project_columns, BasisDescriptor, Spectral};
use mcdf_core::ci::CIVector;
use mcdf_core::coulomb::{Hamiltonian, Model, NuclearConfiguration, Nucleus};
use mcdf_core::energy::normalize_g;
use mcdf_core::linalg::random_normal_c64;
use mcdf_core::{CMat, CVec};
use rand::Rng;

pub fn random_orbitals<R: Rng>(dim: usize, k: usize, rng: &mut R) -> CMat {
    normalize_g(&CMat::from_fn(dim, k, |_, _| random_normal_c64(rng))).unwrap()
}

/// Random orbitals with a decaying spectrum so that high modes stay small.
pub fn smooth_orbitals<R: Rng>(basis: &BasisDescriptor, model: Model, k: usize, rng: &mut R) -> CMat {
    let nc = model.components().count();
    let c = CMat::from_fn(basis.dim(model.components()), k, |row, _| {
        random_normal_c64(rng) * (-0.3 * basis.k2(row / nc)).exp()
    });
    normalize_g(&c).unwrap()
}

pub fn positive_orbitals<R: Rng>(basis: &BasisDescriptor, k: usize, rng: &mut R) -> CMat {
    let c = smooth_orbitals(basis, Model::Dirac, k, rng);
    normalize_g(&project_columns(basis, &c, Spectral::Positive)).unwrap()
}

pub fn random_ci<R: Rng>(k: usize, n: usize, rng: &mut R) -> CIVector {
    let len = mcdf_core::ci::CiSpace::new(k, n).unwrap().len();
    CIVector::normalized(k, n, CVec::from_fn(len, |_, _| random_normal_c64(rng))).unwrap()
}

/// Two unequal nuclei off the box centre, so no accidental symmetry.
pub fn molecule(box_length: f64) -> NuclearConfiguration {
    NuclearConfiguration::new(
        vec![
            Nucleus { position: [0.4 * box_length, 0.5 * box_length, 0.45 * box_length], charge: 2.0 },
            Nucleus { position: [0.6 * box_length, 0.55 * box_length, 0.5 * box_length], charge: 1.0 },
        ],
        0.0,
    )
    .unwrap()
}

pub fn hamiltonian(basis: &BasisDescriptor, model: Model) -> Hamiltonian {
    Hamiltonian::new(basis, &molecule(basis.box_length()), model)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
