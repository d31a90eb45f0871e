//! Nonrelativistic multiconfiguration Hartree-Fock reference.
//!
//! `minimize_mchf` runs the outer machinery of the min-max solver with
//! 2-spinor orbitals, `−½Δ + V` and no negative-energy block. `full_ci_oracle`
//! diagonalizes the second-quantized Hamiltonian over every determinant of the
//! spin-orbital basis, using analytic plane-wave integrals.

use crate::basis::{mode_multiplier, BasisDescriptor};
use crate::ci::{binomial, min_occupation, CIVector, CiSpace};
use crate::coulomb::{ci_hamiltonian, Hamiltonian, Model, NuclearConfiguration};
use crate::energy::{evaluate, normalize_g, Evaluation};
use crate::linalg::{gram, hermitian_eigen, lowest_eigenpair, random_normal_c64};
use crate::optim::{self, LbfgsOptions, Objective};
use crate::oracle::{one_body_matrix, PlaneWaveCoulomb};
use crate::{CMat, Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Determinant-space limit of [`full_ci_oracle`].
pub const FULL_CI_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MchfConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub lbfgs_memory: usize,
    /// Number of starts; starts after the first perturb the initial orbitals.
    pub starts: usize,
    pub perturbation: f64,
    /// Worker threads for the starts (runtime only, never serialized).
    #[serde(skip)]
    pub threads: usize,
}

impl Default for MchfConfig {
    fn default() -> Self {
        Self { tolerance: 1e-9, max_iterations: 2000, lbfgs_memory: 10, starts: 1, perturbation: 0.1, threads: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct MchfResult {
    pub a: CIVector,
    pub phi: CMat,
    pub energy: f64,
    pub min_occ: f64,
    /// `‖H_{a,Φ}Φ − ΦM‖`
    pub residual: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone)]
struct McState {
    a: CIVector,
    evaluation: Evaluation,
}

struct McObjective<'a> {
    ham: &'a Hamiltonian,
    electrons: usize,
}

impl Objective for McObjective<'_> {
    type State = McState;

    fn evaluate(&mut self, x: &CMat, _warm: Option<&McState>) -> Result<(f64, CMat, McState)> {
        let h = ci_hamiltonian(self.ham, x, self.electrons, 0.0)?;
        let (_, v) = lowest_eigenpair(&h);
        let a = CIVector::normalized(x.ncols(), self.electrons, v)?;
        let evaluation = evaluate(self.ham, &a, x, 0.0)?;
        let grad = self.project(x, &(&evaluation.fock * C64::new(2.0, 0.0)));
        Ok((evaluation.breakdown.total, grad, McState { a, evaluation }))
    }

    fn project(&self, x: &CMat, v: &CMat) -> CMat {
        v - x * (x.adjoint() * v)
    }

    fn precondition(&self, _x: &CMat, v: &CMat, state: &McState) -> CMat {
        let basis = self.ham.basis();
        let (vals, u) = hermitian_eigen(&state.evaluation.gamma.transpose());
        let k = vals.len();
        let binv = CMat::from_fn(k, k, |i, j| u[(i, j)] / vals[j].max(1e-4)) * u.adjoint();
        mode_multiplier(basis, v, self.ham.components(), |m| 0.5 / (0.5 * basis.k2(m) + 1.0)) * binv
    }

    fn retract(&self, x: &CMat, v: &CMat) -> Result<CMat> {
        normalize_g(&(x + v))
    }

    fn residual(&self, x: &CMat, _gradient: &CMat, state: &McState) -> f64 {
        let f = &state.evaluation.fock;
        (f - x * (x.adjoint() * f)).norm()
    }
}

fn require_schrodinger(ham: &Hamiltonian) -> Result<()> {
    if ham.model() != Model::Schrodinger {
        return Err(Error::InvalidBasis("MCHF needs a Schrödinger Hamiltonian".into()));
    }
    Ok(())
}

/// Lowest `k` eigenvectors of the one-body operator.
pub fn initial_orbitals(ham: &Hamiltonian, k: usize) -> Result<CMat> {
    let dim = ham.dim();
    if k > dim {
        return Err(Error::InvalidCi(format!("{k} orbitals requested from a {dim}-dimensional basis")));
    }
    let h = ham.one_body_integrals(&CMat::identity(dim, dim), 0.0);
    let (_, v) = hermitian_eigen(&h);
    Ok(v.columns(0, k).into_owned())
}

/// Appends `extra` virtual orbitals to `phi`: one-body eigenvectors orthogonalized against the current span.
pub fn extend_orbitals(ham: &Hamiltonian, phi: &CMat, extra: usize) -> Result<CMat> {
    let dim = ham.dim();
    let h = ham.one_body_integrals(&CMat::identity(dim, dim), 0.0);
    let (_, v) = hermitian_eigen(&h);
    let mut out = phi.clone();
    for j in 0..dim {
        if out.ncols() == phi.ncols() + extra {
            break;
        }
        let cand = v.column(j).into_owned();
        let rest = &cand - &out * (out.adjoint() * &cand);
        if rest.norm() > 1e-3 {
            let k = out.ncols();
            out = out.insert_column(k, C64::new(0.0, 0.0));
            out.set_column(k, &(&rest / C64::new(rest.norm(), 0.0)));
        }
    }
    if out.ncols() != phi.ncols() + extra {
        return Err(Error::InvalidCi("basis too small for the requested number of orbitals".into()));
    }
    normalize_g(&out)
}

/// Local MCHF minimization from the orthonormal orbitals `phi0`.
pub fn minimize_mchf_from(ham: &Hamiltonian, phi0: &CMat, electrons: usize, cfg: &MchfConfig) -> Result<MchfResult> {
    require_schrodinger(ham)?;
    ham.check_orbitals(phi0)?;
    let k = phi0.ncols();
    CiSpace::new(k, electrons)?;
    let mut warnings = Vec::new();
    let z = ham.nuclei().total_charge();
    if electrons as f64 >= z + 1.0 {
        warnings.push(format!("N = {electrons} is not below Z + 1 = {}: binding is not guaranteed", z + 1.0));
    }
    let mut obj = McObjective { ham, electrons };
    let opts = LbfgsOptions { tolerance: cfg.tolerance, max_iterations: cfg.max_iterations, memory: cfg.lbfgs_memory, ..LbfgsOptions::default() };
    let min = optim::minimize(&mut obj, &normalize_g(phi0)?, &opts)?;
    Ok(MchfResult {
        min_occ: min_occupation(&min.state.a),
        a: min.state.a,
        energy: min.value,
        residual: min.residual,
        iterations: min.trace.iterations,
        phi: min.x,
        warnings,
    })
}

/// MCHF minimum over `starts` seeded starting points (lowest energy wins).
pub fn minimize_mchf<R: rand::Rng>(ham: &Hamiltonian, orbitals: usize, electrons: usize, cfg: &MchfConfig, rng: &mut R) -> Result<MchfResult> {
    require_schrodinger(ham)?;
    let base = initial_orbitals(ham, orbitals)?;
    minimize_mchf_around(ham, &base, electrons, cfg, rng)
}

/// Multi-start around `base`: the first start is `base` itself, later ones perturb it.
///
/// Perturbations are drawn up front, so the result does not depend on `cfg.threads`.
pub fn minimize_mchf_around<R: rand::Rng>(ham: &Hamiltonian, base: &CMat, electrons: usize, cfg: &MchfConfig, rng: &mut R) -> Result<MchfResult> {
    let mut seeds = vec![base.clone()];
    for _ in 1..cfg.starts.max(1) {
        let noise = CMat::from_fn(base.nrows(), base.ncols(), |_, _| random_normal_c64(rng) * cfg.perturbation);
        seeds.push(normalize_g(&(base + noise))?);
    }
    let threads = cfg.threads.clamp(1, seeds.len());
    let results: Vec<Result<MchfResult>> = if threads == 1 {
        seeds.iter().map(|phi0| minimize_mchf_from(ham, phi0, electrons, cfg)).collect()
    } else {
        let chunk = seeds.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = seeds
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(|phi0| minimize_mchf_from(ham, phi0, electrons, cfg)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("MCHF worker panicked")).collect()
        })
    };
    let mut best: Option<MchfResult> = None;
    for res in results {
        let res = res?;
        if best.as_ref().is_none_or(|b| res.energy < b.energy) {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one start"))
}

/// MCHF minima for increasing `K`, each seeded from the previous minimizer plus virtual orbitals.
///
/// Seeding makes the previous energy reachable, so the chain is nonincreasing.
pub fn nested_minima<R: rand::Rng>(ham: &Hamiltonian, electrons: usize, ks: &[usize], cfg: &MchfConfig, rng: &mut R) -> Result<Vec<MchfResult>> {
    let mut out: Vec<MchfResult> = Vec::new();
    for &k in ks {
        let res = match out.last() {
            None => minimize_mchf(ham, k, electrons, cfg, rng)?,
            Some(prev) if k > prev.phi.ncols() => {
                let phi0 = extend_orbitals(ham, &prev.phi, k - prev.phi.ncols())?;
                minimize_mchf_around(ham, &phi0, electrons, cfg, rng)?
            }
            Some(_) => return Err(Error::InvalidCi("orbital counts must increase".into())),
        };
        out.push(res);
    }
    Ok(out)
}

/// Smallest occupation number at the minimizer (empirical `γ₀`).
pub fn occupation_floor(result: &MchfResult) -> f64 {
    result.min_occ
}

/// Default MCDF occupation floor `γ = ½ γ₀`.
pub fn default_gamma(result: &MchfResult) -> f64 {
    0.5 * occupation_floor(result)
}

fn annihilate(mask: u64, q: usize) -> Option<(u64, f64)> {
    if mask & (1 << q) == 0 {
        return None;
    }
    let sign = if (mask & ((1u64 << q) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((mask & !(1 << q), sign))
}

fn create(mask: u64, p: usize) -> Option<(u64, f64)> {
    if mask & (1 << p) != 0 {
        return None;
    }
    let sign = if (mask & ((1u64 << p) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((mask | (1 << p), sign))
}

/// Lowest eigenvalue of the nonrelativistic `H^N` over all `C(D, N)` determinants
/// of the 2-spinor plane-wave basis.
pub fn full_ci_oracle(electrons: usize, basis: &BasisDescriptor, nuclei: &NuclearConfiguration) -> Result<f64> {
    let model = Model::Schrodinger;
    let dim = basis.dim(model.components());
    if dim > 64 {
        return Err(Error::DimensionGuard { dimension: dim, limit: 64 });
    }
    if electrons == 0 || electrons > dim {
        return Err(Error::InvalidCi(format!("need 1 ≤ N ≤ {dim}, got {electrons}")));
    }
    let size = binomial(dim, electrons);
    if size > FULL_CI_LIMIT {
        return Err(Error::DimensionGuard { dimension: size, limit: FULL_CI_LIMIT });
    }
    let space = CiSpace::new(dim, electrons)?;
    let h = one_body_matrix(basis, nuclei, model);
    let coulomb = PlaneWaveCoulomb::new(basis, model);
    let mut mat = CMat::zeros(size, size);
    for (col, det) in space.determinants().iter().enumerate() {
        let mask = det.mask();
        let occ = det.orbitals();
        // Σ h_pq a†_p a_q
        for &q in occ {
            let (m1, s1) = annihilate(mask, q).unwrap();
            for p in 0..dim {
                let hv = h[(p, q)];
                if hv.norm() == 0.0 {
                    continue;
                }
                if let Some((m2, s2)) = create(m1, p) {
                    let row = space.index_of(m2).unwrap();
                    mat[(row, col)] += hv * (s1 * s2);
                }
            }
        }
        // ½ Σ ⟨pr|v|qs⟩ a†_p a†_r a_s a_q
        for &q in occ {
            for &s in occ {
                if q == s {
                    continue;
                }
                let (m1, s1) = annihilate(mask, q).unwrap();
                let (m2, s2) = annihilate(m1, s).unwrap();
                // ⟨pr|v|qs⟩ = ⟨qs|v|pr⟩ (real elements), so the partners of (q, s) are the (p, r)
                for (p, r, v) in coulomb.partners(q, s) {
                    let Some((m3, s3)) = create(m2, r) else { continue };
                    let Some((m4, s4)) = create(m3, p) else { continue };
                    let row = space.index_of(m4).unwrap();
                    mat[(row, col)] += C64::new(0.5 * v * s1 * s2 * s3 * s4, 0.0);
                }
            }
        }
    }
    Ok(hermitian_eigen(&mat).0[0])
}

/// `‖ΦᴴΦ − I‖_F`.
pub fn orthonormality_defect(phi: &CMat) -> f64 {
    let k = phi.ncols();
    (gram(phi) - CMat::identity(k, k)).norm()
}

/// Lowest eigenvalue of the one-body matrix (the `N = 1` full-CI value).
pub fn one_body_ground(ham: &Hamiltonian) -> f64 {
    let dim = ham.dim();
    let h = ham.one_body_integrals(&CMat::identity(dim, dim), 0.0);
    hermitian_eigen(&h).0[0]
}

