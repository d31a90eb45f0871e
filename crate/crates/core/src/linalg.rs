//! Small dense Hermitian helpers shared by all modules.

use crate::{CMat, CVec, Error, Result, C64};

/// Hermitian part `(m + mᴴ)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Frobenius norm of `m - mᴴ`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// Real part of the Frobenius inner product, `Re tr(aᴴ b)`.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending. Each eigenvector is rotated so that its
/// largest-magnitude entry (first one on ties) is real and positive, which
/// makes the output reproducible across runs.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Smallest eigenpair of a Hermitian matrix.
pub fn lowest_eigenpair(m: &CMat) -> (f64, CVec) {
    let (values, vectors) = hermitian_eigen(m);
    (values[0], vectors.column(0).into_owned())
}

/// Rotate `v` so that its largest-magnitude entry is real positive.
pub fn fix_phase(v: &mut CVec) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        // small slack so that near-ties resolve to the first index
        if x.norm() > best_abs * (1.0 + 1e-10) {
            best_abs = x.norm();
            best = i;
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = hermitian_eigen(m);
    let scaled = CMat::from_fn(m.nrows(), m.ncols(), |i, j| vectors[(i, j)] * f(values[j]));
    &scaled * vectors.adjoint()
}

/// `m^{-1/2}` for a Hermitian positive-definite matrix.
///
/// Fails with [`Error::DegenerateGram`] when the smallest eigenvalue is below `floor`.
pub fn inverse_sqrt(m: &CMat, floor: f64) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(m);
    if let Some(&low) = values.first() {
        if low <= floor {
            return Err(Error::DegenerateGram { eigenvalue: low });
        }
    }
    let scaled = CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
        vectors[(i, j)] * values[j].powf(-0.5)
    });
    Ok(&scaled * vectors.adjoint())
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn spectral_radius(m: &CMat) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `‖mᴴm − I‖_F`.
pub fn unitarity_defect(m: &CMat) -> f64 {
    let n = m.ncols();
    (m.adjoint() * m - CMat::identity(n, n)).norm()
}

/// Gram matrix `S_ij = ⟨ψ_i, ψ_j⟩` of column vectors.
pub fn gram(c: &CMat) -> CMat {
    c.adjoint() * c
}

/// Random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: rand::Rng>(n: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| random_normal_c64(rng));
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    // fix the phases of the diagonal of R so the distribution is Haar
    let mut d = CMat::zeros(n, n);
    for i in 0..n {
        let x = r[(i, i)];
        d[(i, i)] = if x.norm() > 0.0 { x / x.norm() } else { C64::new(1.0, 0.0) };
    }
    q * d
}

/// Complex standard normal sample (Box-Muller).
pub fn random_normal_c64<R: rand::Rng>(rng: &mut R) -> C64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    C64::new(r * t.cos(), r * t.sin()) * std::f64::consts::FRAC_1_SQRT_2
}
