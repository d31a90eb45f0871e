//! Determinant combinatorics and CI-coefficient algebra.
//!
//! A CI vector `a` lives on the `C(K,N)` strictly increasing orbital tuples.
//! The antisymmetric tensor `α` spreads `a` over all of `{0..K}^N` with the
//! sign of the sorting permutation and a `1/√N!` factor; the occupation
//! matrix `Γ` and the two-body density are contractions of `α`.

use crate::linalg::{hermitian_eigen, unitarity_defect};
use crate::{CMat, CVec, Error, Result, C64};
use std::collections::HashMap;

/// Strictly increasing tuple of 0-based orbital indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterminantIndex(pub Vec<usize>);

impl DeterminantIndex {
    pub fn new(orbitals: Vec<usize>, k: usize) -> Result<Self> {
        if orbitals.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCi(format!("determinant {orbitals:?} is not strictly increasing")));
        }
        if orbitals.iter().any(|&i| i >= k) {
            return Err(Error::InvalidCi(format!("determinant {orbitals:?} has an orbital outside 0..{k}")));
        }
        Ok(Self(orbitals))
    }

    pub fn orbitals(&self) -> &[usize] {
        &self.0
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &i| m | (1u64 << i))
    }
}

/// All `C(K,N)` determinants in lexicographic order.
pub fn enumerate_determinants(k: usize, n: usize) -> Result<Vec<DeterminantIndex>> {
    if n == 0 || n > k {
        return Err(Error::InvalidCi(format!("need 1 ≤ N ≤ K, got N={n}, K={k}")));
    }
    if k > 64 {
        return Err(Error::InvalidCi(format!("at most 64 orbitals are supported, got {k}")));
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(DeterminantIndex(current.clone()));
        // advance to the next combination
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            if current[pos] < k - n + pos {
                current[pos] += 1;
                for q in pos + 1..n {
                    current[q] = current[q - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return Ok(out);
            }
        }
    }
}

/// Ordered determinant set with a bitmask lookup.
#[derive(Clone, Debug)]
pub struct CiSpace {
    k: usize,
    n: usize,
    dets: Vec<DeterminantIndex>,
    lookup: HashMap<u64, usize>,
}

impl CiSpace {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        let dets = enumerate_determinants(k, n)?;
        let lookup = dets.iter().enumerate().map(|(i, d)| (d.mask(), i)).collect();
        Ok(Self { k, n, dets, lookup })
    }

    pub fn orbitals(&self) -> usize {
        self.k
    }

    pub fn electrons(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn determinants(&self) -> &[DeterminantIndex] {
        &self.dets
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.lookup.get(&mask).copied()
    }
}

/// Unit-norm coefficient vector over the determinant set.
#[derive(Clone, Debug, PartialEq)]
pub struct CIVector {
    k: usize,
    n: usize,
    coeffs: CVec,
}

impl CIVector {
    /// Accepts coefficients whose norm is 1 to within `1e-10`.
    pub fn new(k: usize, n: usize, coeffs: CVec) -> Result<Self> {
        let expected = binomial(k, n);
        if n == 0 || n > k {
            return Err(Error::InvalidCi(format!("need 1 ≤ N ≤ K, got N={n}, K={k}")));
        }
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: coeffs.len() });
        }
        let norm = coeffs.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidCi(format!("CI vector has norm {norm}, expected 1")));
        }
        Ok(Self { k, n, coeffs })
    }

    /// Normalizes the given coefficients.
    pub fn normalized(k: usize, n: usize, coeffs: CVec) -> Result<Self> {
        let norm = coeffs.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidCi("cannot normalize a zero CI vector".into()));
        }
        Self::new(k, n, coeffs / C64::new(norm, 0.0))
    }

    /// The first determinant with unit weight.
    pub fn single(k: usize, n: usize) -> Result<Self> {
        let mut coeffs = CVec::zeros(binomial(k, n));
        if coeffs.is_empty() {
            return Err(Error::InvalidCi(format!("need 1 ≤ N ≤ K, got N={n}, K={k}")));
        }
        coeffs[0] = C64::new(1.0, 0.0);
        Self::new(k, n, coeffs)
    }

    pub fn orbitals(&self) -> usize {
        self.k
    }

    pub fn electrons(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &CVec {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Dense antisymmetric tensor over `{0..K}^N`, last index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaTensor {
    k: usize,
    n: usize,
    data: Vec<C64>,
}

impl AlphaTensor {
    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.flat(idx)]
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.k + i)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn orbitals(&self) -> usize {
        self.k
    }

    pub fn electrons(&self) -> usize {
        self.n
    }

    /// Inverse of [`expand_alpha`]: `a_I = √N! · α_I` on sorted tuples.
    pub fn contract(&self) -> Result<CIVector> {
        let space = enumerate_determinants(self.k, self.n)?;
        let scale = factorial(self.n).sqrt();
        let coeffs = CVec::from_iterator(space.len(), space.iter().map(|d| self.get(&d.0) * scale));
        CIVector::new(self.k, self.n, coeffs)
    }
}

pub(crate) fn binomial(k: usize, n: usize) -> usize {
    if n > k {
        return 0;
    }
    (0..n).fold(1usize, |acc, i| acc * (k - i) / (i + 1))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// All permutations of `0..n` with their signs, in lexicographic order.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut perms = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

/// Spread `a` into the antisymmetric tensor `α`.
pub fn expand_alpha(a: &CIVector) -> AlphaTensor {
    let (k, n) = (a.k, a.n);
    let mut out = AlphaTensor { k, n, data: vec![C64::new(0.0, 0.0); k.pow(n as u32)] };
    let dets = enumerate_determinants(k, n).expect("CIVector invariants guarantee a valid space");
    let scale = 1.0 / factorial(n).sqrt();
    let perms = permutations(n);
    let mut tuple = vec![0; n];
    for (det, &coef) in dets.iter().zip(a.coeffs.iter()) {
        for (p, sign) in &perms {
            for l in 0..n {
                tuple[l] = det.0[p[l]];
            }
            let idx = out.flat(&tuple);
            out.data[idx] = coef * (sign * scale);
        }
    }
    out
}

/// Occupation matrix `Γ_ij = N Σ α*_{i,…} α_{j,…}` (K×K, Hermitian, trace N).
pub fn gamma_matrix(a: &CIVector) -> CMat {
    gamma_from_alpha(&expand_alpha(a))
}

pub fn gamma_from_alpha(alpha: &AlphaTensor) -> CMat {
    let (k, n) = (alpha.k, alpha.n);
    let rest = k.pow(n as u32 - 1);
    let mut g = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..rest {
                acc += alpha.data[i * rest + r].conj() * alpha.data[j * rest + r];
            }
            g[(i, j)] = acc * n as f64;
        }
    }
    g
}

/// Two-body density `G[(i,k),(j,l)] = N(N−1)/2 Σ α*_{i,k,…} α_{j,l,…}`.
///
/// Row index `i*K + k`, column index `j*K + l`. With this tensor the two-body
/// energy is `Σ G[(i,k),(j,l)] (ij|kl)`.
pub fn two_body_density(alpha: &AlphaTensor) -> CMat {
    let (k, n) = (alpha.k, alpha.n);
    let mut g = CMat::zeros(k * k, k * k);
    if n < 2 {
        return g;
    }
    let rest = k.pow(n as u32 - 2);
    let pref = (n * (n - 1)) as f64 / 2.0;
    for row in 0..k * k {
        for col in 0..k * k {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..rest {
                acc += alpha.data[row * rest + r].conj() * alpha.data[col * rest + r];
            }
            g[(row, col)] = acc * pref;
        }
    }
    g
}

/// Apply `M` to every index of `α`: `α'_{i…} = Σ_j M_{i₁j₁}…M_{i_N j_N} α_{j…}`.
fn transform_alpha(alpha: &AlphaTensor, m: &CMat) -> AlphaTensor {
    let (k, n) = (alpha.k, alpha.n);
    let mut data = alpha.data.clone();
    let mut next = vec![C64::new(0.0, 0.0); data.len()];
    for axis in 0..n {
        let stride = k.pow((n - 1 - axis) as u32);
        for (flat, out) in next.iter_mut().enumerate() {
            let i = (flat / stride) % k;
            let base = flat - i * stride;
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..k {
                acc += m[(i, j)] * data[base + j * stride];
            }
            *out = acc;
        }
        std::mem::swap(&mut data, &mut next);
    }
    AlphaTensor { k, n, data }
}

/// Unitary group action `U·(a, Ψ) = (a′, ΨU)`.
///
/// Orbitals are the columns of `orbitals`, and the new orbital `i` is
/// `Σ_j U_ji ψ_j`; the coefficients transform with `U*` on every index of `α`,
/// which leaves the N-body wavefunction (and hence every energy) unchanged.
pub fn group_action(u: &CMat, a: &CIVector, orbitals: &CMat) -> Result<(CIVector, CMat)> {
    if u.nrows() != a.k || u.ncols() != a.k {
        return Err(Error::DimensionMismatch { expected: a.k, found: u.nrows() });
    }
    if orbitals.ncols() != a.k {
        return Err(Error::DimensionMismatch { expected: a.k, found: orbitals.ncols() });
    }
    let deviation = unitarity_defect(u);
    if deviation > 1e-10 {
        return Err(Error::NonUnitary { deviation });
    }
    let alpha = transform_alpha(&expand_alpha(a), &u.adjoint());
    Ok((alpha.contract()?, orbitals * u))
}

/// Smallest eigenvalue of `Γ_a`.
pub fn min_occupation(a: &CIVector) -> f64 {
    hermitian_eigen(&gamma_matrix(a)).0[0]
}

/// Occupation numbers (ascending).
pub fn occupation_numbers(a: &CIVector) -> Vec<f64> {
    hermitian_eigen(&gamma_matrix(a)).0
}

/// CI vector with the largest smallest occupation that we can construct.
///
/// Built from a set of determinants that pairwise differ in at least two
/// orbitals (so `Γ` is diagonal) with equal weights; the set maximizing the
/// smallest orbital coverage is found by a bounded depth-first search. When
/// every orbital is covered equally the occupations are all `N/K`.
pub fn balanced_vector(k: usize, n: usize) -> Result<CIVector> {
    let space = CiSpace::new(k, n)?;
    let dets = space.determinants();
    let compatible = |a: &DeterminantIndex, b: &DeterminantIndex| (a.mask() & b.mask()).count_ones() as usize + 2 <= n;
    let mut best: (f64, Vec<usize>) = (-1.0, vec![0]);
    let mut chosen: Vec<usize> = Vec::new();
    let mut budget = 200_000usize;

    fn score(chosen: &[usize], dets: &[DeterminantIndex], k: usize) -> f64 {
        let mut cover = vec![0usize; k];
        for &d in chosen {
            for &i in &dets[d].0 {
                cover[i] += 1;
            }
        }
        *cover.iter().min().unwrap() as f64 / chosen.len() as f64
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        start: usize,
        dets: &[DeterminantIndex],
        k: usize,
        chosen: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
        budget: &mut usize,
        compatible: &dyn Fn(&DeterminantIndex, &DeterminantIndex) -> bool,
    ) {
        if *budget == 0 {
            return;
        }
        *budget -= 1;
        if !chosen.is_empty() {
            let s = score(chosen, dets, k);
            if s > best.0 + 1e-12 {
                *best = (s, chosen.clone());
            }
        }
        for d in start..dets.len() {
            if chosen.iter().all(|&c| compatible(&dets[c], &dets[d])) {
                chosen.push(d);
                dfs(d + 1, dets, k, chosen, best, budget, compatible);
                chosen.pop();
            }
        }
    }

    dfs(0, dets, k, &mut chosen, &mut best, &mut budget, &compatible);
    let mut coeffs = CVec::zeros(space.len());
    for &d in &best.1 {
        coeffs[d] = C64::new(1.0, 0.0);
    }
    CIVector::normalized(k, n, coeffs)
}

/// Move `a` into `S_γ = {Γ_a ≥ γ}`.
///
/// Mixes `a` toward [`balanced_vector`] and bisects on the mixing weight for
/// the smallest weight whose occupations clear the floor. Feasible inputs are
/// returned unchanged.
pub fn retract_to_s_gamma(a: &CIVector, gamma_floor: f64) -> Result<CIVector> {
    let (k, n) = (a.k, a.n);
    let mean = n as f64 / k as f64;
    if !(gamma_floor > 0.0) || gamma_floor > mean {
        return Err(Error::InfeasibleFloor {
            requested: gamma_floor,
            reason: format!(
                "the floor must lie in (0, N/K] = (0, {mean}]: K occupations in [0,1] summing to N have mean N/K"
            ),
        });
    }
    if min_occupation(a) >= gamma_floor {
        return Ok(a.clone());
    }
    let target = balanced_vector(k, n)?;
    let attainable = min_occupation(&target);
    if attainable < gamma_floor {
        return Err(Error::InfeasibleFloor {
            requested: gamma_floor,
            reason: format!("no CI vector for (K={k}, N={n}) reaches it; the best constructible smallest occupation is {attainable:.6}"),
        });
    }
    // align the target's phase with `a` so the mixture never cancels
    let overlap = target.coeffs.dotc(&a.coeffs);
    let phase = if overlap.norm() > 1e-14 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let target = &target.coeffs * phase;
    let mix = |t: f64| -> Result<CIVector> {
        CIVector::normalized(k, n, &a.coeffs * C64::new(1.0 - t, 0.0) + &target * C64::new(t, 0.0))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if min_occupation(&mix(mid)?) >= gamma_floor {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    mix(hi)
}
