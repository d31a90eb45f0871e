//! Brute-force reference path built from analytic plane-wave matrix elements.
//!
//! Nothing here touches the real-space grid: one-body elements come from the
//! per-mode Dirac (or Laplacian) matrices and the Fourier coefficients of the
//! nuclear potential, two-body elements from momentum conservation. The CI
//! matrix is then formed by applying the discretized `H^N` to explicitly
//! antisymmetrized N-particle tensors.

use crate::basis::BasisDescriptor;
use crate::ci::CiSpace;
use crate::coulomb::{Model, NuclearConfiguration};
use crate::error::check_dim;
use crate::{CMat, Error, Result, C64};
use std::f64::consts::PI;

/// Largest `D^N` tensor the brute-force path will allocate.
pub const TENSOR_LIMIT: usize = 1 << 22;

fn dirac_block(k: [f64; 3], c: f64) -> [[C64; 4]; 4] {
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    let i = C64::new(0.0, 1.0);
    let sx = [[z, r(1.0)], [r(1.0), z]];
    let sy = [[z, -i], [i, z]];
    let sz = [[r(1.0), z], [z, r(-1.0)]];
    let mut out = [[z; 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            let sk = sx[a][b] * k[0] + sy[a][b] * k[1] + sz[a][b] * k[2];
            // α = [[0, σ], [σ, 0]]
            out[a][b + 2] = sk * c;
            out[a + 2][b] = sk * c;
        }
        out[a][a] = r(c * c);
        out[a + 2][a + 2] = r(-c * c);
    }
    out
}

/// Matrix of the one-body operator (`D_c + V` or `−½Δ + V`) in the plane-wave basis.
pub fn one_body_matrix(basis: &BasisDescriptor, nuclei: &NuclearConfiguration, model: Model) -> CMat {
    let nc = model.components().count();
    let dim = basis.dim(model.components());
    let modes = basis.mode_count();
    let unit = 2.0 * PI / basis.box_length();
    let mut h = CMat::zeros(dim, dim);
    for m in 0..modes {
        match model {
            Model::Dirac => {
                let block = dirac_block(basis.wavevector(m), basis.light_speed());
                for s in 0..4 {
                    for t in 0..4 {
                        h[(m * 4 + s, m * 4 + t)] += block[s][t];
                    }
                }
            }
            Model::Schrodinger => {
                for s in 0..nc {
                    h[(m * nc + s, m * nc + s)] += C64::new(0.5 * basis.k2(m), 0.0);
                }
            }
        }
        let fm = basis.frequency(m);
        for mp in 0..modes {
            let fp = basis.frequency(mp);
            let q = [0, 1, 2].map(|d| unit * (fm[d] - fp[d]) as f64);
            let v = nuclei.fourier(q) / basis.volume();
            for s in 0..nc {
                h[(m * nc + s, mp * nc + s)] += v;
            }
        }
    }
    h
}

/// Two-body plane-wave Coulomb elements `⟨p r | 1/|x−y| | q s⟩`.
///
/// Nonzero only when spins match slot-wise and `k_p + k_r = k_q + k_s` with
/// transfer `k_p − k_q ≠ 0`; the value is `(1/V)·4π/|k_p − k_q|²`.
#[derive(Clone, Debug)]
pub struct PlaneWaveCoulomb {
    basis: BasisDescriptor,
    components: usize,
}

impl PlaneWaveCoulomb {
    pub fn new(basis: &BasisDescriptor, model: Model) -> Self {
        Self { basis: basis.clone(), components: model.components().count() }
    }

    /// All `(q, s, value)` with `⟨p r|v|q s⟩ ≠ 0`, for basis indices `p`, `r`.
    pub fn partners(&self, p: usize, r: usize) -> Vec<(usize, usize, f64)> {
        let nc = self.components;
        let (mp, sp) = (p / nc, p % nc);
        let (mr, sr) = (r / nc, r % nc);
        let fp = self.basis.frequency(mp);
        let fr = self.basis.frequency(mr);
        let unit = 2.0 * PI / self.basis.box_length();
        let mut out = Vec::new();
        for mq in 0..self.basis.mode_count() {
            let fq = self.basis.frequency(mq);
            let transfer = [fp[0] - fq[0], fp[1] - fq[1], fp[2] - fq[2]];
            if transfer == [0, 0, 0] {
                continue;
            }
            let fs = [fr[0] + transfer[0], fr[1] + transfer[1], fr[2] + transfer[2]];
            if let Some(ms) = self.basis.mode_index(fs) {
                let q2 = unit * unit * transfer.iter().map(|&t| (t * t) as f64).sum::<f64>();
                out.push((mq * nc + sp, ms * nc + sr, 4.0 * PI / q2 / self.basis.volume()));
            }
        }
        out
    }
}

/// Dense N-particle tensor over the basis, flat index `Σ p_slot · D^{N−1−slot}`.
struct Tensor {
    dim: usize,
    n: usize,
    data: Vec<C64>,
}

impl Tensor {
    fn digits(&self, mut flat: usize, out: &mut [usize]) {
        for slot in (0..self.n).rev() {
            out[slot] = flat % self.dim;
            flat /= self.dim;
        }
    }

    fn stride(&self, slot: usize) -> usize {
        self.dim.pow((self.n - 1 - slot) as u32)
    }
}

fn slater_tensor(psi: &CMat, occupied: &[usize]) -> Tensor {
    let dim = psi.nrows();
    let n = occupied.len();
    let total = dim.pow(n as u32);
    let mut data = vec![C64::new(0.0, 0.0); total];
    let perms = permutations(n);
    let norm = 1.0 / (1..=n).map(|x| x as f64).product::<f64>().sqrt();
    let t = Tensor { dim, n, data: Vec::new() };
    let mut idx = vec![0; n];
    for (flat, out) in data.iter_mut().enumerate() {
        t.digits(flat, &mut idx);
        let mut acc = C64::new(0.0, 0.0);
        for (perm, sign) in &perms {
            let mut prod = C64::new(*sign, 0.0);
            for slot in 0..n {
                prod *= psi[(idx[slot], occupied[perm[slot]])];
            }
            acc += prod;
        }
        *out = acc * norm;
    }
    Tensor { dim, n, data }
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..n {
            if !used[i] {
                // number of unused indices below i = inversions introduced
                let below = (0..i).filter(|&j| !used[j]).count();
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, if below % 2 == 0 { sign } else { -sign }, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], 1.0, &mut out);
    out
}

fn apply_hamiltonian(t: &Tensor, h: &CMat, coulomb: &PlaneWaveCoulomb) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); t.data.len()];
    let mut idx = vec![0; t.n];
    for (flat, o) in out.iter_mut().enumerate() {
        t.digits(flat, &mut idx);
        let mut acc = C64::new(0.0, 0.0);
        for slot in 0..t.n {
            let stride = t.stride(slot);
            let base = flat - idx[slot] * stride;
            for q in 0..t.dim {
                let hv = h[(idx[slot], q)];
                if hv.norm() != 0.0 {
                    acc += hv * t.data[base + q * stride];
                }
            }
        }
        for a in 0..t.n {
            for b in a + 1..t.n {
                let (sa, sb) = (t.stride(a), t.stride(b));
                let base = flat - idx[a] * sa - idx[b] * sb;
                for (q, s, v) in coulomb.partners(idx[a], idx[b]) {
                    acc += t.data[base + q * sa + s * sb] * v;
                }
            }
        }
        *o = acc;
    }
    out
}

/// CI matrix `⟨det_I | H^N | det_J⟩` by direct contraction of antisymmetrized tensors.
pub fn brute_force_ci_matrix(
    basis: &BasisDescriptor,
    nuclei: &NuclearConfiguration,
    model: Model,
    psi: &CMat,
    electrons: usize,
) -> Result<CMat> {
    let dim = basis.dim(model.components());
    check_dim(dim, psi.nrows())?;
    let size = (dim as f64).powi(electrons as i32);
    if size > TENSOR_LIMIT as f64 {
        return Err(Error::DimensionGuard { dimension: size as usize, limit: TENSOR_LIMIT });
    }
    let space = CiSpace::new(psi.ncols(), electrons)?;
    let h = one_body_matrix(basis, nuclei, model);
    let coulomb = PlaneWaveCoulomb::new(basis, model);
    let tensors: Vec<Tensor> = space.determinants().iter().map(|d| slater_tensor(psi, d.orbitals())).collect();
    let applied: Vec<Vec<C64>> = tensors.iter().map(|t| apply_hamiltonian(t, &h, &coulomb)).collect();
    let n = tensors.len();
    Ok(CMat::from_fn(n, n, |i, j| {
        tensors[i].data.iter().zip(&applied[j]).map(|(x, y)| x.conj() * y).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        let total: f64 = p.iter().map(|(_, s)| s).sum();
        assert_eq!(total, 0.0);
        assert!(p.iter().any(|(q, s)| q == &vec![1, 0, 2] && *s == -1.0));
        assert!(p.iter().any(|(q, s)| q == &vec![1, 2, 0] && *s == 1.0));
    }

    #[test]
    fn one_body_matrix_is_hermitian() {
        let b = BasisDescriptor::with_modes_per_axis(3.0, 2, 2.0).unwrap();
        let nuc = NuclearConfiguration::centered(2.0, 3.0);
        for model in [Model::Dirac, Model::Schrodinger] {
            let h = one_body_matrix(&b, &nuc, model);
            assert!((&h - h.adjoint()).norm() < 1e-13);
        }
    }

    #[test]
    fn coulomb_partners_are_symmetric() {
        let b = BasisDescriptor::with_modes_per_axis(3.0, 2, 2.0).unwrap();
        let pw = PlaneWaveCoulomb::new(&b, Model::Schrodinger);
        for p in 0..16 {
            for r in 0..16 {
                for (q, s, v) in pw.partners(p, r) {
                    // ⟨pr|v|qs⟩ = conj ⟨qs|v|pr⟩
                    assert!(pw.partners(q, s).iter().any(|&(pp, rr, vv)| pp == p && rr == r && (vv - v).abs() < 1e-14));
                }
            }
        }
    }
}
