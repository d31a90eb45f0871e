//! MCDF and MCHF energies, the normalization `g`, gradients and multipliers.
//!
//! Derivatives use the Wirtinger convention: the orbital gradient is
//! `∂E/∂C̄`, and the real gradient in the metric `Re tr(XᴴY)` is twice that.

use crate::ci::{expand_alpha, gamma_from_alpha, two_body_density, CIVector};
use crate::coulomb::{ci_hamiltonian, Hamiltonian, Model};
use crate::error::check_dim;
use crate::linalg::{gram, hermitian_defect, hermitian_eigen, hermitian_part, inverse_sqrt};
use crate::{CMat, CVec, Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Smallest Gram eigenvalue accepted by [`normalize_g`].
pub const GRAM_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `⟨Ψ, (D_c − s)ΓΨ⟩` (or `⟨Φ, (−½Δ)ΓΦ⟩` for MCHF), `s` the rest shift
    pub kinetic_rest: f64,
    pub nuclear: f64,
    pub two_body: f64,
    pub total: f64,
}

/// Energy, occupation data and the Fock matrix `F = ∂E/∂C̄` at one point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub breakdown: EnergyBreakdown,
    pub gamma: CMat,
    /// column `i` is `(H_{a,Ψ}Ψ)_i` for the shifted one-body operator
    pub fock: CMat,
    pub shift: f64,
}

/// Full evaluation with one-body operator `h − shift`. `c` need not be orthonormal.
pub fn evaluate(ham: &Hamiltonian, a: &CIVector, c: &CMat, shift: f64) -> Result<Evaluation> {
    ham.check_orbitals(c)?;
    check_dim(a.orbitals(), c.ncols())?;
    let alpha = expand_alpha(a);
    let gamma = gamma_from_alpha(&alpha);
    let kin = ham.kinetic(c, shift);
    let pot = ham.potential(c);
    let weighted = |m: &CMat| -> f64 {
        let overlap = c.adjoint() * m;
        overlap.iter().zip(gamma.iter()).map(|(o, g)| (o * g).re).sum()
    };
    let kinetic_rest = weighted(&kin);
    let nuclear = weighted(&pot);
    let mf = ham.mean_field(c);
    let w = ham.w_fields(&mf, &two_body_density(&alpha));
    let two_body = ham.two_body_energy(&mf, &w).re;
    let fock = (kin + pot) * gamma.transpose() + ham.apply_w(&w, c) * C64::new(2.0, 0.0);
    Ok(Evaluation {
        breakdown: EnergyBreakdown { kinetic_rest, nuclear, two_body, total: kinetic_rest + nuclear + two_body },
        gamma,
        fock,
        shift,
    })
}

/// Rest shift used by the solvers: `c²` for Dirac, `0` for Schrödinger.
pub fn rest_shift(ham: &Hamiltonian) -> f64 {
    match ham.model() {
        Model::Dirac => ham.basis().light_speed().powi(2),
        Model::Schrodinger => 0.0,
    }
}

/// `E(a, Ψ) = ⟨Ψ, (D_cΓ + VΓ + W)Ψ⟩`.
pub fn energy(ham: &Hamiltonian, a: &CIVector, psi: &CMat) -> Result<EnergyBreakdown> {
    Ok(evaluate(ham, a, psi, 0.0)?.breakdown)
}

/// Energy with the rest shift removed from the one-body operator; on Σ this is `E − Nc²`.
pub fn energy_shifted(ham: &Hamiltonian, a: &CIVector, psi: &CMat) -> Result<EnergyBreakdown> {
    Ok(evaluate(ham, a, psi, rest_shift(ham))?.breakdown)
}

fn require_orthonormal(c: &CMat, tol: f64) -> Result<()> {
    let k = c.ncols();
    let deviation = (gram(c) - CMat::identity(k, k)).norm();
    if deviation > tol {
        return Err(Error::NonOrthonormal { deviation });
    }
    Ok(())
}

/// Nonrelativistic energy `E_HF(a, Φ)` of 2-spinor orbitals.
pub fn energy_mchf(ham: &Hamiltonian, a: &CIVector, phi: &CMat) -> Result<f64> {
    if ham.model() != Model::Schrodinger {
        return Err(Error::InvalidBasis("MCHF energy needs a Schrödinger Hamiltonian".into()));
    }
    require_orthonormal(phi, 1e-8)?;
    Ok(evaluate(ham, a, phi, 0.0)?.breakdown.total)
}

/// `g(Ψ) = Ψ (ΨᴴΨ)^{-1/2}`.
pub fn normalize_g(c: &CMat) -> Result<CMat> {
    Ok(c * inverse_sqrt(&gram(c), GRAM_FLOOR)?)
}

/// `2(H_Ψ a − (a*H_Ψ a) a)`, the Riemannian gradient on the unit sphere.
pub fn gradient_a(ham: &Hamiltonian, a: &CIVector, psi: &CMat) -> Result<CVec> {
    check_dim(a.orbitals(), psi.ncols())?;
    let h = ci_hamiltonian(ham, psi, a.electrons(), rest_shift(ham))?;
    let ha = &h * a.coeffs();
    let e = a.coeffs().dotc(&ha);
    Ok((ha - a.coeffs() * e) * C64::new(2.0, 0.0))
}

/// `2(H_{a,Ψ}Ψ − Ψ M)` with `M = Ψᴴ H_{a,Ψ}Ψ`.
///
/// Orthogonal to the orbital span; it is the gradient of `E(a, g(·))` along
/// directions `Ξ` with `ΨᴴΞ = 0`.
pub fn gradient_psi(ham: &Hamiltonian, a: &CIVector, psi: &CMat) -> Result<CMat> {
    require_orthonormal(psi, 1e-8)?;
    let ev = evaluate(ham, a, psi, rest_shift(ham))?;
    let m = psi.adjoint() * &ev.fock;
    Ok((&ev.fock - psi * m) * C64::new(2.0, 0.0))
}

/// Lagrange-multiplier matrix and the diagnostics of its Γ-window.
#[derive(Clone, Debug)]
pub struct MultiplierMatrix {
    /// Hermitian part of `Λ`, `(H_{a,Ψ}Ψ)_i = Σ_j Λ_ij ψ_j`
    pub lambda: CMat,
    /// `Λ − c²Γ` (Hermitian part), computed without cancellation
    pub lambda_shifted: CMat,
    /// `‖Λ − Λᴴ‖_F` before symmetrization
    pub asymmetry: f64,
    /// eigenvalues of `c²Γ − Λ`
    pub upper_window: Vec<f64>,
    /// eigenvalues of `Λ − (c² − K̂)Γ`
    pub lower_window: Vec<f64>,
}

/// `Λ_ij = ⟨ψ_j, (H_{a,Ψ}Ψ)_i⟩` with window diagnostics for the constant `k_hat`.
pub fn lambda_matrix(ham: &Hamiltonian, a: &CIVector, psi: &CMat, k_hat: f64) -> Result<MultiplierMatrix> {
    require_orthonormal(psi, 1e-8)?;
    let shift = rest_shift(ham);
    let ev = evaluate(ham, a, psi, shift)?;
    let raw = (psi.adjoint() * &ev.fock).transpose();
    let asymmetry = hermitian_defect(&raw);
    let lambda_shifted = hermitian_part(&raw);
    let gamma = &ev.gamma;
    let lambda = &lambda_shifted + gamma * C64::new(shift, 0.0);
    let upper_window = hermitian_eigen(&(-&lambda_shifted)).0;
    let lower_window = hermitian_eigen(&(&lambda_shifted + gamma * C64::new(k_hat, 0.0))).0;
    Ok(MultiplierMatrix { lambda, lambda_shifted, asymmetry, upper_window, lower_window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{project_columns, BasisDescriptor, Components, Spectral};
    use crate::coulomb::NuclearConfiguration;
    use crate::linalg::random_normal_c64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn free(c: f64) -> Hamiltonian {
        let b = BasisDescriptor::new(5.0, 1, c).unwrap();
        Hamiltonian::new(&b, &NuclearConfiguration::empty(), Model::Dirac)
    }

    fn unit_mode(ham: &Hamiltonian, freq: [i64; 3], sign: Spectral) -> CMat {
        let b = ham.basis();
        let mut c = CMat::zeros(ham.dim(), 1);
        let mode = b.mode_index(freq).unwrap();
        c[(mode * 4, 0)] = C64::new(0.7, 0.1);
        c[(mode * 4 + 3, 0)] = C64::new(0.2, -0.4);
        normalize_g(&project_columns(b, &c, sign)).unwrap()
    }

    #[test]
    fn free_dirac_eigenvalues() {
        let ham = free(3.0);
        let a = CIVector::single(1, 1).unwrap();
        let mode = ham.basis().mode_index([1, 0, -1]).unwrap();
        let e_k = ham.basis().dirac_energy(mode);
        let plus = energy(&ham, &a, &unit_mode(&ham, [1, 0, -1], Spectral::Positive)).unwrap();
        let minus = energy(&ham, &a, &unit_mode(&ham, [1, 0, -1], Spectral::Negative)).unwrap();
        assert!((plus.total - e_k).abs() < 1e-12 * e_k);
        assert!((minus.total + e_k).abs() < 1e-12 * e_k);
        let lam = lambda_matrix(&ham, &a, &unit_mode(&ham, [1, 0, -1], Spectral::Positive), 1.0).unwrap();
        assert!((lam.lambda[(0, 0)].re - e_k).abs() < 1e-12 * e_k);
    }

    #[test]
    fn mchf_free_mode() {
        let b = BasisDescriptor::new(5.0, 1, 1.0).unwrap();
        let ham = Hamiltonian::new(&b, &NuclearConfiguration::empty(), Model::Schrodinger);
        let mode = b.mode_index([0, 1, 0]).unwrap();
        let mut phi = CMat::zeros(b.dim(Components::Pauli), 1);
        phi[(mode * 2 + 1, 0)] = C64::new(0.0, 1.0);
        let e = energy_mchf(&ham, &CIVector::single(1, 1).unwrap(), &phi).unwrap();
        assert!((e - 0.5 * b.k2(mode)).abs() < 1e-13);
    }

    #[test]
    fn normalization_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = CMat::from_fn(20, 3, |_, _| random_normal_c64(&mut rng));
        let g = normalize_g(&c).unwrap();
        assert!((gram(&g) - CMat::identity(3, 3)).norm() < 1e-12);
        assert!((normalize_g(&g).unwrap() - &g).norm() < 1e-12);
        assert!((normalize_g(&(&c * C64::new(2.0, 0.0))).unwrap() - &g).norm() < 1e-12);
        let mut dep = c.clone();
        dep.set_column(2, &(c.column(0) * C64::new(0.0, 3.0)));
        assert!(matches!(normalize_g(&dep), Err(Error::DegenerateGram { .. })));
    }
}
