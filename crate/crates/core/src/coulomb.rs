//! Nuclear attraction, pair densities, the mean-field matrix `W_{a,Ψ}`, the
//! Fock operator and the CI Hamiltonian matrix.
//!
//! All Coulomb interactions use the periodic kernel `4π/|q|²` with the `q = 0`
//! coefficient removed (uniform neutralizing background).

use crate::basis::{dirac_columns, mode_multiplier, BasisDescriptor, Components, SpinorField};
use crate::ci::{expand_alpha, gamma_from_alpha, two_body_density, CIVector, CiSpace};
use crate::error::check_dim;
use crate::grid::{ProductGrid, ScalarField};
use crate::linalg::gram;
use crate::{CMat, Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    pub position: [f64; 3],
    pub charge: f64,
}

/// Point (or Gaussian-smeared) nuclei in the periodic box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearConfiguration {
    pub nuclei: Vec<Nucleus>,
    /// Gaussian width σ of each nuclear charge; 0 is a point charge.
    #[serde(default)]
    pub smearing: f64,
}

impl NuclearConfiguration {
    pub fn new(nuclei: Vec<Nucleus>, smearing: f64) -> Result<Self> {
        if nuclei.iter().any(|n| !(n.charge > 0.0)) {
            return Err(Error::config("nuclei.charge", "nuclear charges must be positive"));
        }
        if !(smearing >= 0.0) {
            return Err(Error::config("smearing", "smearing width must be nonnegative"));
        }
        Ok(Self { nuclei, smearing })
    }

    /// Single nucleus of charge `z` at the centre of a box of side `box_length`.
    pub fn centered(z: f64, box_length: f64) -> Self {
        let h = box_length / 2.0;
        Self { nuclei: vec![Nucleus { position: [h, h, h], charge: z }], smearing: 0.0 }
    }

    pub fn empty() -> Self {
        Self { nuclei: Vec::new(), smearing: 0.0 }
    }

    pub fn total_charge(&self) -> f64 {
        self.nuclei.iter().map(|n| n.charge).sum()
    }

    /// Checks that every nucleus lies inside `[0, L)³`.
    pub fn validate(&self, box_length: f64) -> Result<()> {
        for (i, n) in self.nuclei.iter().enumerate() {
            if n.position.iter().any(|&x| !(0.0..box_length).contains(&x)) {
                return Err(Error::config(format!("nuclei[{i}].position"), format!("{:?} lies outside the box [0, {box_length})", n.position)));
            }
        }
        Ok(())
    }

    /// Fourier coefficient `V̂(q) = −Σ Z 4π/|q|² e^{−iq·z} e^{−σ²|q|²/2}` (zero at q = 0).
    pub fn fourier(&self, q: [f64; 3]) -> C64 {
        let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        if q2 == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let damp = (-0.5 * self.smearing * self.smearing * q2).exp();
        self.nuclei
            .iter()
            .map(|n| {
                let phase = -(q[0] * n.position[0] + q[1] * n.position[1] + q[2] * n.position[2]);
                C64::from_polar(-n.charge * 4.0 * PI / q2 * damp, phase)
            })
            .sum()
    }
}

/// Nuclear potential sampled on the product grid.
#[derive(Clone, Debug)]
pub struct NuclearPotential {
    grid: ProductGrid,
    values: Vec<C64>,
}

impl NuclearPotential {
    pub fn new(basis: &BasisDescriptor, nuclei: &NuclearConfiguration) -> Self {
        let grid = ProductGrid::new(basis);
        let unit = 2.0 * PI / basis.box_length();
        let values = grid.synthesize(|f| nuclei.fourier([unit * f[0] as f64, unit * f[1] as f64, unit * f[2] as f64]));
        Self { grid, values }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `V ψ` for every column (Galerkin projection of the pointwise product).
    pub fn apply(&self, c: &CMat, components: Components) -> CMat {
        let nc = components.count();
        let mut out = CMat::zeros(c.nrows(), c.ncols());
        for j in 0..c.ncols() {
            let col = c.column(j);
            let mut o = out.column_mut(j);
            for s in 0..nc {
                let mut r = self.grid.to_real(col.as_slice(), nc, s);
                r.iter_mut().zip(&self.values).for_each(|(x, v)| *x *= v);
                self.grid.add_from_real(&r, nc, s, o.as_mut_slice());
            }
        }
        out
    }
}

/// `V ψ` for a single 4-spinor.
pub fn nuclear_potential_apply(field: &SpinorField, nuclei: &NuclearConfiguration, basis: &BasisDescriptor) -> Result<SpinorField> {
    check_dim(basis.dim(Components::Dirac), field.coeffs.len())?;
    let m = CMat::from_column_slice(field.coeffs.len(), 1, field.coeffs.as_slice());
    let out = NuclearPotential::new(basis, nuclei).apply(&m, Components::Dirac);
    Ok(SpinorField { coeffs: out.column(0).into_owned() })
}

fn grid_density(grid: &ProductGrid, a: &[C64], b: &[C64], nc: usize) -> Vec<C64> {
    let mut rho = vec![C64::new(0.0, 0.0); grid.len()];
    for s in 0..nc {
        let ra = grid.to_real(a, nc, s);
        let rb = grid.to_real(b, nc, s);
        for ((r, x), y) in rho.iter_mut().zip(&ra).zip(&rb) {
            *r += x.conj() * y;
        }
    }
    rho
}

/// Pointwise `ψ_k*(x)·ψ_l(x)` summed over the four components.
pub fn pair_density(psi_k: &SpinorField, psi_l: &SpinorField, grid: &ProductGrid) -> Result<ScalarField> {
    check_dim(psi_k.coeffs.len(), psi_l.coeffs.len())?;
    Ok(ScalarField { values: grid_density(grid, psi_k.coeffs.as_slice(), psi_l.coeffs.as_slice(), 4) })
}

/// `ρ ⋆ 1/|x|` with the periodic kernel.
pub fn coulomb_convolve(rho: &ScalarField, grid: &ProductGrid) -> Result<ScalarField> {
    check_dim(grid.len(), rho.values.len())?;
    Ok(ScalarField { values: grid.coulomb(&rho.values) })
}

/// One-body operator of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// `D_c + V` on 4-spinors.
    Dirac,
    /// `−½Δ + V` on 2-spinors.
    Schrodinger,
}

impl Model {
    pub fn components(self) -> Components {
        match self {
            Model::Dirac => Components::Dirac,
            Model::Schrodinger => Components::Pauli,
        }
    }
}

/// Discretized N-body Hamiltonian data shared by all evaluations.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    basis: BasisDescriptor,
    nuclei: NuclearConfiguration,
    model: Model,
    grid: ProductGrid,
    potential: NuclearPotential,
    kernel_scale: f64,
}

/// Orbitals on the grid together with all pair densities and their potentials.
#[derive(Clone, Debug)]
pub struct MeanField {
    k: usize,
    /// `[orbital][component]` grid values
    orbitals: Vec<Vec<Vec<C64>>>,
    /// `ρ_ij`, index `i*K + j`
    densities: Vec<Vec<C64>>,
    /// `ρ_ij ⋆ 1/|x|`, index `i*K + j`
    potentials: Vec<Vec<C64>>,
}

/// `W_{a,Ψ}` as a K×K array of multiplication operators on the grid.
#[derive(Clone, Debug)]
pub struct MeanFieldMatrix {
    k: usize,
    fields: Vec<Vec<C64>>,
}

impl MeanFieldMatrix {
    pub fn orbitals(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> ScalarField {
        ScalarField { values: self.fields[i * self.k + j].clone() }
    }
}

impl Hamiltonian {
    pub fn new(basis: &BasisDescriptor, nuclei: &NuclearConfiguration, model: Model) -> Self {
        Self {
            basis: basis.clone(),
            nuclei: nuclei.clone(),
            model,
            grid: ProductGrid::new(basis),
            potential: NuclearPotential::new(basis, nuclei),
            kernel_scale: 1.0,
        }
    }

    /// Multiplies the electron-electron kernel used by the mean-field path.
    ///
    /// Only meant for fault-injection checks: the CI-matrix path is unaffected,
    /// so any value other than 1 breaks energy-path consistency.
    pub fn with_corrupted_kernel(mut self, scale: f64) -> Self {
        self.kernel_scale = scale;
        self
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn nuclei(&self) -> &NuclearConfiguration {
        &self.nuclei
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn components(&self) -> Components {
        self.model.components()
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.basis.dim(self.components())
    }

    pub(crate) fn check_orbitals(&self, c: &CMat) -> Result<()> {
        check_dim(self.dim(), c.nrows())
    }

    /// Kinetic part minus `shift`: `(D_c − shift)ψ` or `(−½Δ − shift)ψ`.
    pub fn kinetic(&self, c: &CMat, shift: f64) -> CMat {
        match self.model {
            Model::Dirac => dirac_columns(&self.basis, c, shift),
            Model::Schrodinger => mode_multiplier(&self.basis, c, Components::Pauli, |m| 0.5 * self.basis.k2(m) - shift),
        }
    }

    pub fn potential(&self, c: &CMat) -> CMat {
        self.potential.apply(c, self.components())
    }

    /// One-body operator minus `shift`, applied column-wise.
    pub fn one_body(&self, c: &CMat, shift: f64) -> CMat {
        self.kinetic(c, shift) + self.potential(c)
    }

    /// One-body integrals `h_ij = ⟨ψ_i, (h − shift) ψ_j⟩`.
    pub fn one_body_integrals(&self, c: &CMat, shift: f64) -> CMat {
        c.adjoint() * self.one_body(c, shift)
    }

    fn on_grid(&self, c: &CMat) -> Vec<Vec<Vec<C64>>> {
        let nc = self.components().count();
        (0..c.ncols())
            .map(|j| {
                let col = c.column(j);
                (0..nc).map(|s| self.grid.to_real(col.as_slice(), nc, s)).collect()
            })
            .collect()
    }

    /// Pair densities and Coulomb potentials of the orbitals.
    pub fn mean_field(&self, c: &CMat) -> MeanField {
        let k = c.ncols();
        let orbitals = self.on_grid(c);
        let mut densities = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let mut rho = vec![C64::new(0.0, 0.0); self.grid.len()];
                for (a, b) in orbitals[i].iter().zip(&orbitals[j]) {
                    for ((r, x), y) in rho.iter_mut().zip(a).zip(b) {
                        *r += x.conj() * y;
                    }
                }
                densities.push(rho);
            }
        }
        let potentials = densities.iter().map(|rho| self.grid.coulomb_scaled(rho, self.kernel_scale)).collect();
        MeanField { k, orbitals, densities, potentials }
    }

    /// Two-electron integrals `(ij|kl) = ∫∫ ψ̄_iψ_j(x) ψ̄_kψ_l(y)/|x−y|`,
    /// flat index `((i*K + j)*K + k)*K + l`. Always uses the unscaled kernel.
    pub fn two_electron_integrals(&self, c: &CMat) -> Vec<C64> {
        let k = c.ncols();
        let orbitals = self.on_grid(c);
        let density = |i: usize, j: usize| {
            let mut rho = vec![C64::new(0.0, 0.0); self.grid.len()];
            for (a, b) in orbitals[i].iter().zip(&orbitals[j]) {
                for ((r, x), y) in rho.iter_mut().zip(a).zip(b) {
                    *r += x.conj() * y;
                }
            }
            rho
        };
        let densities: Vec<Vec<C64>> = (0..k * k).map(|p| density(p / k, p % k)).collect();
        let potentials: Vec<Vec<C64>> = densities.iter().map(|r| self.grid.coulomb(r)).collect();
        let mut eri = vec![C64::new(0.0, 0.0); k.pow(4)];
        for p in 0..k * k {
            for q in 0..k * k {
                eri[p * k * k + q] = self.grid.integrate_product(&densities[p], &potentials[q]);
            }
        }
        eri
    }

    /// `W_ij(x) = Σ_kl G[(i,k),(j,l)] (ρ_kl ⋆ 1/|x|)(x)`.
    pub fn w_fields(&self, mf: &MeanField, rdm2: &CMat) -> MeanFieldMatrix {
        let k = mf.k;
        let len = self.grid.len();
        let mut fields = vec![vec![C64::new(0.0, 0.0); len]; k * k];
        for i in 0..k {
            for j in 0..k {
                let out = &mut fields[i * k + j];
                for kk in 0..k {
                    for l in 0..k {
                        let g = rdm2[(i * k + kk, j * k + l)];
                        if g.norm() == 0.0 {
                            continue;
                        }
                        for (o, v) in out.iter_mut().zip(&mf.potentials[kk * k + l]) {
                            *o += g * v;
                        }
                    }
                }
            }
        }
        MeanFieldMatrix { k, fields }
    }

    /// `(W Φ)_i = Σ_j W_ij φ_j` projected onto the basis.
    pub fn apply_w(&self, w: &MeanFieldMatrix, phi: &CMat) -> CMat {
        let k = w.k;
        let nc = self.components().count();
        let phi_grid = self.on_grid(phi);
        let mut out = CMat::zeros(phi.nrows(), k);
        for i in 0..k {
            let mut o = out.column_mut(i);
            for s in 0..nc {
                let mut acc = vec![C64::new(0.0, 0.0); self.grid.len()];
                for j in 0..k {
                    for ((a, wv), p) in acc.iter_mut().zip(&w.fields[i * k + j]).zip(&phi_grid[j][s]) {
                        *a += wv * p;
                    }
                }
                self.grid.add_from_real(&acc, nc, s, o.as_mut_slice());
            }
        }
        out
    }

    /// `Σ_ij ⟨ψ_i, W_ij ψ_j⟩`.
    pub fn two_body_energy(&self, mf: &MeanField, w: &MeanFieldMatrix) -> C64 {
        let k = mf.k;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..k {
            for j in 0..k {
                acc += self.grid.integrate_product(&mf.densities[i * k + j], &w.fields[i * k + j]);
            }
        }
        acc
    }

    /// Raw grid data of a mean field (orbital values), mainly for diagnostics.
    pub fn orbital_values<'a>(&self, mf: &'a MeanField, i: usize, s: usize) -> &'a [C64] {
        &mf.orbitals[i][s]
    }
}

/// `W_{a,Ψ}` for a CI vector and orbital set.
pub fn w_matrix(ham: &Hamiltonian, a: &CIVector, psi: &CMat) -> Result<MeanFieldMatrix> {
    ham.check_orbitals(psi)?;
    check_dim(a.orbitals(), psi.ncols())?;
    let mf = ham.mean_field(psi);
    Ok(ham.w_fields(&mf, &two_body_density(&expand_alpha(a))))
}

/// `H_{a,Ψ} Φ = (h − shift)ΦΓᵀ + 2 W_{a,Ψ} Φ`, i.e. column `i` is
/// `Σ_j Γ_ij (h − shift) φ_j + 2 Σ_j W_ij φ_j`.
///
/// With `shift = 0` this is the Fock operator `D_cΓ + VΓ + 2W`.
pub fn fock_apply(ham: &Hamiltonian, a: &CIVector, psi: &CMat, phi: &CMat, shift: f64) -> Result<CMat> {
    ham.check_orbitals(psi)?;
    ham.check_orbitals(phi)?;
    check_dim(a.orbitals(), psi.ncols())?;
    check_dim(a.orbitals(), phi.ncols())?;
    let alpha = expand_alpha(a);
    let gamma = gamma_from_alpha(&alpha);
    let w = ham.w_fields(&ham.mean_field(psi), &two_body_density(&alpha));
    Ok(ham.one_body(phi, shift) * gamma.transpose() + ham.apply_w(&w, phi) * C64::new(2.0, 0.0))
}

fn annihilate(mask: u64, q: usize) -> Option<(u64, f64)> {
    if mask & (1 << q) == 0 {
        return None;
    }
    let below = (mask & ((1u64 << q) - 1)).count_ones();
    Some((mask & !(1 << q), if below.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

fn create(mask: u64, p: usize) -> Option<(u64, f64)> {
    if mask & (1 << p) != 0 {
        return None;
    }
    let below = (mask & ((1u64 << p) - 1)).count_ones();
    Some((mask | (1 << p), if below.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// Slater-Condon assembly of `⟨det_I | H | det_J⟩` from orthonormal-orbital
/// integrals `h` (K×K) and `(ij|kl)` (flat, see [`Hamiltonian::two_electron_integrals`]).
pub fn slater_condon(space: &CiSpace, h: &CMat, eri: &[C64]) -> CMat {
    let k = space.orbitals();
    let v = |i: usize, j: usize, kk: usize, l: usize| eri[((i * k + j) * k + kk) * k + l];
    let dets = space.determinants();
    let dim = dets.len();
    let mut out = CMat::zeros(dim, dim);
    for (row, di) in dets.iter().enumerate() {
        let mi = di.mask();
        for (col, dj) in dets.iter().enumerate() {
            let mj = dj.mask();
            let diff = (mi ^ mj).count_ones() / 2;
            let value = match diff {
                0 => {
                    let occ = &di.0;
                    let mut e = C64::new(0.0, 0.0);
                    for &i in occ {
                        e += h[(i, i)];
                        for &j in occ {
                            e += (v(i, i, j, j) - v(i, j, j, i)) * 0.5;
                        }
                    }
                    e
                }
                1 => {
                    let p = (mi & !mj).trailing_zeros() as usize;
                    let q = (mj & !mi).trailing_zeros() as usize;
                    let (m1, s1) = annihilate(mj, q).unwrap();
                    let (_, s2) = create(m1, p).unwrap();
                    let mut e = h[(p, q)];
                    for &j in &dj.0 {
                        if j != q {
                            e += v(p, q, j, j) - v(p, j, j, q);
                        }
                    }
                    e * (s1 * s2)
                }
                2 => {
                    let added = mi & !mj;
                    let removed = mj & !mi;
                    let p1 = added.trailing_zeros() as usize;
                    let p2 = 63 - added.leading_zeros() as usize;
                    let q1 = removed.trailing_zeros() as usize;
                    let q2 = 63 - removed.leading_zeros() as usize;
                    // op = a†_{p1} a†_{p2} a_{q2} a_{q1}
                    let (m, s1) = annihilate(mj, q1).unwrap();
                    let (m, s2) = annihilate(m, q2).unwrap();
                    let (m, s3) = create(m, p2).unwrap();
                    let (_, s4) = create(m, p1).unwrap();
                    (v(p1, q1, p2, q2) - v(p1, q2, p2, q1)) * (s1 * s2 * s3 * s4)
                }
                _ => C64::new(0.0, 0.0),
            };
            out[(row, col)] = value;
        }
    }
    out
}

/// CI Hamiltonian `(H_Ψ)_{IJ} = ⟨det_I | H^N − N·shift | det_J⟩` for orthonormal orbitals.
pub fn ci_hamiltonian(ham: &Hamiltonian, psi: &CMat, electrons: usize, shift: f64) -> Result<CMat> {
    ham.check_orbitals(psi)?;
    let k = psi.ncols();
    let deviation = (gram(psi) - CMat::identity(k, k)).norm();
    if deviation > 1e-8 {
        return Err(Error::NonOrthonormal { deviation });
    }
    let space = CiSpace::new(k, electrons)?;
    let h = ham.one_body_integrals(psi, shift);
    let eri = ham.two_electron_integrals(psi);
    Ok(slater_condon(&space, &h, &eri))
}
