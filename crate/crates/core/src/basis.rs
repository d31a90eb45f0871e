//! Periodic plane-wave spinor basis.
//!
//! A basis function is `e^{ik·x}/√V ⊗ e_s` with `k ∈ (2π/L)·{…}³` and `s` a
//! spinor component. Coefficients are stored mode-major: the flat index of
//! `(mode, s)` is `mode * ncomp + s`, modes ordered lexicographically in
//! `(k₁, k₂, k₃)`. In this basis the free Dirac operator, the projectors `P±`
//! and the multipliers `√(1+|k|²)`, `√(1+|k|²/c²)` all act mode by mode.

use crate::coulomb::{NuclearConfiguration, NuclearPotential};
use crate::error::check_dim;
use crate::{CMat, CVec, Error, Result, C64};
use std::f64::consts::PI;

/// Number of spinor components of an orbital.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Components {
    /// Four-component Dirac spinors.
    Dirac,
    /// Two-component Pauli spinors (nonrelativistic reference).
    Pauli,
}

impl Components {
    pub fn count(self) -> usize {
        match self {
            Components::Dirac => 4,
            Components::Pauli => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BasisDescriptor {
    box_length: f64,
    modes_per_axis: usize,
    light_speed: f64,
    frequencies: Vec<[i64; 3]>,
    wavevectors: Vec<[f64; 3]>,
}

impl BasisDescriptor {
    /// Basis with integer frequencies `{−m..m}³`, i.e. `(2m+1)³` modes.
    pub fn new(box_length: f64, mode_bound: usize, light_speed: f64) -> Result<Self> {
        Self::with_modes_per_axis(box_length, 2 * mode_bound + 1, light_speed)
    }

    /// Basis with `n` modes per axis; frequencies are `j − ⌊n/2⌋` for `j < n`.
    ///
    /// Odd `n = 2m+1` is the symmetric set `{−m..m}`; even `n` adds one extra
    /// negative frequency, which allows very small test bases such as 2³.
    pub fn with_modes_per_axis(box_length: f64, n: usize, light_speed: f64) -> Result<Self> {
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::InvalidBasis(format!("box length must be positive, got {box_length}")));
        }
        if !(light_speed > 0.0 && light_speed.is_finite()) {
            return Err(Error::InvalidBasis(format!("light speed must be positive, got {light_speed}")));
        }
        if n == 0 {
            return Err(Error::InvalidBasis("at least one mode per axis is required".into()));
        }
        let offset = (n / 2) as i64;
        let unit = 2.0 * PI / box_length;
        let mut frequencies = Vec::with_capacity(n * n * n);
        for a in 0..n as i64 {
            for b in 0..n as i64 {
                for c in 0..n as i64 {
                    frequencies.push([a - offset, b - offset, c - offset]);
                }
            }
        }
        let wavevectors = frequencies
            .iter()
            .map(|f| [unit * f[0] as f64, unit * f[1] as f64, unit * f[2] as f64])
            .collect();
        Ok(Self {
            box_length,
            modes_per_axis: n,
            light_speed,
            frequencies,
            wavevectors,
        })
    }

    /// Same modes, different speed of light.
    pub fn with_light_speed(&self, light_speed: f64) -> Result<Self> {
        Self::with_modes_per_axis(self.box_length, self.modes_per_axis, light_speed)
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn modes_per_axis(&self) -> usize {
        self.modes_per_axis
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    pub fn mode_count(&self) -> usize {
        self.frequencies.len()
    }

    /// Length of a coefficient vector with the given component count.
    pub fn dim(&self, components: Components) -> usize {
        self.mode_count() * components.count()
    }

    pub fn frequency(&self, mode: usize) -> [i64; 3] {
        self.frequencies[mode]
    }

    pub fn wavevector(&self, mode: usize) -> [f64; 3] {
        self.wavevectors[mode]
    }

    pub fn k2(&self, mode: usize) -> f64 {
        let k = self.wavevectors[mode];
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Index of the mode with the given integer frequency, if present.
    pub fn mode_index(&self, freq: [i64; 3]) -> Option<usize> {
        let n = self.modes_per_axis as i64;
        let offset = n / 2;
        let idx: Vec<i64> = freq.iter().map(|f| f + offset).collect();
        if idx.iter().all(|&i| (0..n).contains(&i)) {
            Some(((idx[0] * n + idx[1]) * n + idx[2]) as usize)
        } else {
            None
        }
    }

    /// Positive Dirac eigenvalue `√(c⁴ + c²|k|²)` of a mode.
    pub fn dirac_energy(&self, mode: usize) -> f64 {
        let c2 = self.light_speed * self.light_speed;
        (c2 * c2 + c2 * self.k2(mode)).sqrt()
    }

    /// Relativistic kinetic energy `√(c⁴ + c²|k|²) − c²`, computed without cancellation.
    pub fn dirac_kinetic(&self, mode: usize) -> f64 {
        let c2 = self.light_speed * self.light_speed;
        let k2 = self.k2(mode);
        c2 * k2 / (self.dirac_energy(mode) + c2)
    }
}

/// Four-component orbital coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub coeffs: CVec,
}

/// Two-component orbital coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliField {
    pub coeffs: CVec,
}

impl SpinorField {
    pub fn zeros(basis: &BasisDescriptor) -> Self {
        Self { coeffs: CVec::zeros(basis.dim(Components::Dirac)) }
    }

    /// Single plane wave `mode` with the given 4-spinor.
    pub fn plane_wave(basis: &BasisDescriptor, mode: usize, spinor: [C64; 4]) -> Self {
        let mut f = Self::zeros(basis);
        for (s, v) in spinor.iter().enumerate() {
            f.coeffs[mode * 4 + s] = *v;
        }
        f
    }
}

impl PauliField {
    pub fn zeros(basis: &BasisDescriptor) -> Self {
        Self { coeffs: CVec::zeros(basis.dim(Components::Pauli)) }
    }

    pub fn plane_wave(basis: &BasisDescriptor, mode: usize, spinor: [C64; 2]) -> Self {
        let mut f = Self::zeros(basis);
        f.coeffs[mode * 2] = spinor[0];
        f.coeffs[mode * 2 + 1] = spinor[1];
        f
    }
}

/// Sign selecting the positive or negative spectral subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spectral {
    Positive,
    Negative,
}

/// Which of the three scalar products to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerProduct {
    /// Plain `L²` product.
    L2,
    /// `⟨ψ, √(1−Δ) φ⟩`.
    E,
    /// `⟨ψ, √(1−Δ/c²) φ⟩`.
    C,
}

fn sigma_dot(k: [f64; 3], x: C64, y: C64) -> (C64, C64) {
    // σ·k = [[k₃, k₁ − ik₂], [k₁ + ik₂, −k₃]]
    let kp = C64::new(k[0], k[1]);
    let km = C64::new(k[0], -k[1]);
    (x * k[2] + km * y, kp * x - y * k[2])
}

/// `(D_c − shift)` applied to one coefficient vector in place of `out`.
fn dirac_into(basis: &BasisDescriptor, input: &[C64], out: &mut [C64], shift: f64) {
    let c = basis.light_speed();
    let c2 = c * c;
    for mode in 0..basis.mode_count() {
        let k = basis.wavevector(mode);
        let b = mode * 4;
        let (u0, u1, l0, l1) = (input[b], input[b + 1], input[b + 2], input[b + 3]);
        let (sl0, sl1) = sigma_dot(k, l0, l1);
        let (su0, su1) = sigma_dot(k, u0, u1);
        out[b] = u0 * (c2 - shift) + sl0 * c;
        out[b + 1] = u1 * (c2 - shift) + sl1 * c;
        out[b + 2] = su0 * c - l0 * (c2 + shift);
        out[b + 3] = su1 * c - l1 * (c2 + shift);
    }
}

/// Apply `D_c − shift` to every column of an orbital matrix.
pub fn dirac_columns(basis: &BasisDescriptor, c: &CMat, shift: f64) -> CMat {
    let mut out = CMat::zeros(c.nrows(), c.ncols());
    for j in 0..c.ncols() {
        let col = c.column(j);
        let mut o = out.column_mut(j);
        dirac_into(basis, col.as_slice(), o.as_mut_slice(), shift);
    }
    out
}

/// Apply `P±` to every column of an orbital matrix.
pub fn project_columns(basis: &BasisDescriptor, c: &CMat, sign: Spectral) -> CMat {
    let d = dirac_columns(basis, c, 0.0);
    let s = match sign {
        Spectral::Positive => 1.0,
        Spectral::Negative => -1.0,
    };
    let mut out = CMat::zeros(c.nrows(), c.ncols());
    for j in 0..c.ncols() {
        for mode in 0..basis.mode_count() {
            let e = basis.dirac_energy(mode);
            for comp in 0..4 {
                let i = mode * 4 + comp;
                out[(i, j)] = (c[(i, j)] + d[(i, j)] * (s / e)) * 0.5;
            }
        }
    }
    out
}

/// Multiply each mode of every column by `f(mode)`.
pub fn mode_multiplier(basis: &BasisDescriptor, c: &CMat, components: Components, f: impl Fn(usize) -> f64) -> CMat {
    let nc = components.count();
    let mut out = c.clone();
    for mode in 0..basis.mode_count() {
        let w = f(mode);
        for s in 0..nc {
            out.row_mut(mode * nc + s).scale_mut(w);
        }
    }
    out
}

/// `D_c ψ`.
pub fn apply_dirac(field: &SpinorField, basis: &BasisDescriptor) -> Result<SpinorField> {
    check_dim(basis.dim(Components::Dirac), field.coeffs.len())?;
    let mut out = CVec::zeros(field.coeffs.len());
    dirac_into(basis, field.coeffs.as_slice(), out.as_mut_slice(), 0.0);
    Ok(SpinorField { coeffs: out })
}

/// `P± ψ` with `P±(k) = ½(1 ± (cα·k + c²β)/√(c⁴ + c²|k|²))`.
pub fn project_spectral(field: &SpinorField, sign: Spectral, basis: &BasisDescriptor) -> Result<SpinorField> {
    check_dim(basis.dim(Components::Dirac), field.coeffs.len())?;
    let m = CMat::from_column_slice(field.coeffs.len(), 1, field.coeffs.as_slice());
    let p = project_columns(basis, &m, sign);
    Ok(SpinorField { coeffs: p.column(0).into_owned() })
}

/// Per-mode weight of a scalar product.
pub fn inner_product_weight(basis: &BasisDescriptor, kind: InnerProduct, mode: usize) -> f64 {
    match kind {
        InnerProduct::L2 => 1.0,
        InnerProduct::E => (1.0 + basis.k2(mode)).sqrt(),
        InnerProduct::C => {
            let c = basis.light_speed();
            (1.0 + basis.k2(mode) / (c * c)).sqrt()
        }
    }
}

fn weighted_inner(basis: &BasisDescriptor, x: &[C64], y: &[C64], nc: usize, kind: InnerProduct) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for mode in 0..basis.mode_count() {
        let w = inner_product_weight(basis, kind, mode);
        let mut part = C64::new(0.0, 0.0);
        for s in 0..nc {
            let i = mode * nc + s;
            part += x[i].conj() * y[i];
        }
        acc += part * w;
    }
    acc
}

/// `⟨x, y⟩` for one of the three scalar products; conjugate-linear in `x`.
pub fn inner_product(x: &SpinorField, y: &SpinorField, kind: InnerProduct, basis: &BasisDescriptor) -> Result<C64> {
    check_dim(basis.dim(Components::Dirac), x.coeffs.len())?;
    check_dim(basis.dim(Components::Dirac), y.coeffs.len())?;
    Ok(weighted_inner(basis, x.coeffs.as_slice(), y.coeffs.as_slice(), 4, kind))
}

/// Squared norm of a whole orbital matrix in the chosen scalar product.
pub fn orbital_norm_sqr(basis: &BasisDescriptor, c: &CMat, components: Components, kind: InnerProduct) -> f64 {
    (0..c.ncols())
        .map(|j| {
            let col = c.column(j);
            weighted_inner(basis, col.as_slice(), col.as_slice(), components.count(), kind).re
        })
        .sum()
}

/// `L φ` with `L = −i∇·σ`, i.e. `σ·k` mode by mode.
pub fn apply_pauli_gradient(field: &PauliField, basis: &BasisDescriptor) -> Result<PauliField> {
    check_dim(basis.dim(Components::Pauli), field.coeffs.len())?;
    let mut out = CVec::zeros(field.coeffs.len());
    pauli_gradient_into(basis, field.coeffs.as_slice(), out.as_mut_slice());
    Ok(PauliField { coeffs: out })
}

fn pauli_gradient_into(basis: &BasisDescriptor, input: &[C64], out: &mut [C64]) {
    for mode in 0..basis.mode_count() {
        let (a, b) = sigma_dot(basis.wavevector(mode), input[mode * 2], input[mode * 2 + 1]);
        out[mode * 2] = a;
        out[mode * 2 + 1] = b;
    }
}

/// `L` applied to every column of a 2-component orbital matrix.
pub fn pauli_gradient_columns(basis: &BasisDescriptor, c: &CMat) -> CMat {
    let mut out = CMat::zeros(c.nrows(), c.ncols());
    for j in 0..c.ncols() {
        let col = c.column(j);
        let mut o = out.column_mut(j);
        pauli_gradient_into(basis, col.as_slice(), o.as_mut_slice());
    }
    out
}

/// Upper (large) and lower (small) 2-component blocks of 4-spinor orbitals.
pub fn split_components(c: &CMat) -> (CMat, CMat) {
    let modes = c.nrows() / 4;
    let mut upper = CMat::zeros(modes * 2, c.ncols());
    let mut lower = CMat::zeros(modes * 2, c.ncols());
    for j in 0..c.ncols() {
        for m in 0..modes {
            for s in 0..2 {
                upper[(m * 2 + s, j)] = c[(m * 4 + s, j)];
                lower[(m * 2 + s, j)] = c[(m * 4 + 2 + s, j)];
            }
        }
    }
    (upper, lower)
}

/// Embed 2-spinors into the upper components of 4-spinors.
pub fn embed_upper(c: &CMat) -> CMat {
    let modes = c.nrows() / 2;
    let mut out = CMat::zeros(modes * 4, c.ncols());
    for j in 0..c.ncols() {
        for m in 0..modes {
            out[(m * 4, j)] = c[(m * 2, j)];
            out[(m * 4 + 1, j)] = c[(m * 2 + 1, j)];
        }
    }
    out
}

/// Outcome of a Kato-inequality evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct KatoReport {
    /// `|⟨ψ, Vψ⟩|`
    pub lhs: f64,
    /// `(Zπ/2)⟨ψ, √(−Δ)ψ⟩`
    pub rhs: f64,
    pub satisfied: bool,
}

/// Evaluate both sides of `|⟨ψ, Vψ⟩| ≤ (Zπ/2)⟨ψ, √(−Δ)ψ⟩`.
///
/// Diagnostic only: the periodic kernel with zeroed `k = 0` coefficient is not
/// the free-space Coulomb potential, so violations are reported, not raised.
pub fn kato_check(field: &SpinorField, nuclei: &NuclearConfiguration, basis: &BasisDescriptor) -> Result<KatoReport> {
    check_dim(basis.dim(Components::Dirac), field.coeffs.len())?;
    if field.coeffs.iter().all(|x| x.norm() == 0.0) {
        return Err(Error::ZeroField);
    }
    let potential = NuclearPotential::new(basis, nuclei);
    let m = CMat::from_column_slice(field.coeffs.len(), 1, field.coeffs.as_slice());
    let vpsi = potential.apply(&m, Components::Dirac);
    let lhs = m.column(0).dotc(&vpsi.column(0)).norm();
    let mut kinetic = 0.0;
    for mode in 0..basis.mode_count() {
        let w = basis.k2(mode).sqrt();
        for s in 0..4 {
            kinetic += w * field.coeffs[mode * 4 + s].norm_sqr();
        }
    }
    let rhs = nuclei.total_charge() * PI / 2.0 * kinetic;
    Ok(KatoReport { lhs, rhs, satisfied: lhs <= rhs })
}

/// Outcome of a Hardy-inequality evaluation `‖Vφ‖ ≤ 2Z‖∇φ‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct HardyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Evaluate both sides of the Hardy inequality for a 2-component field.
pub fn hardy_check(field: &PauliField, nuclei: &NuclearConfiguration, basis: &BasisDescriptor) -> Result<HardyReport> {
    check_dim(basis.dim(Components::Pauli), field.coeffs.len())?;
    if field.coeffs.iter().all(|x| x.norm() == 0.0) {
        return Err(Error::ZeroField);
    }
    let potential = NuclearPotential::new(basis, nuclei);
    let m = CMat::from_column_slice(field.coeffs.len(), 1, field.coeffs.as_slice());
    let lhs = potential.apply(&m, Components::Pauli).norm();
    let grad = mode_multiplier(basis, &m, Components::Pauli, |mode| basis.k2(mode).sqrt()).norm();
    let rhs = 2.0 * nuclei.total_charge() * grad;
    Ok(HardyReport { lhs, rhs, satisfied: lhs <= rhs })
}
