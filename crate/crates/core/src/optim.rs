//! Preconditioned L-BFGS on sets of orthonormal orbitals.
//!
//! The objective is assumed invariant under `X ↦ XU`, so the search runs on the
//! Grassmannian with horizontal tangent vectors (`XᴴΞ = 0`), the metric
//! `Re tr(XᴴY)`, retraction `g(X + Ξ)` and transport by re-projection.

use crate::linalg::re_inner;
use crate::{CMat, Error, Result};

/// Smooth objective on orthonormal orbital sets inside a fixed linear subspace.
pub trait Objective {
    /// Data produced by an evaluation (inner solutions, CI vector, ...).
    type State: Clone;

    /// Value and horizontal gradient at an orthonormal `x`.
    fn evaluate(&mut self, x: &CMat, warm: Option<&Self::State>) -> Result<(f64, CMat, Self::State)>;

    /// Projection onto the horizontal tangent space at `x`.
    fn project(&self, x: &CMat, v: &CMat) -> CMat;

    /// Approximate inverse Hessian applied to a tangent vector.
    fn precondition(&self, x: &CMat, v: &CMat, state: &Self::State) -> CMat;

    /// Map `x + v` back onto the constraint set.
    fn retract(&self, x: &CMat, v: &CMat) -> Result<CMat>;

    /// Whether an evaluated point is admissible (step rejection hook).
    fn admissible(&mut self, _x: &CMat, _state: &Self::State) -> Result<bool> {
        Ok(true)
    }

    /// Convergence measure at an evaluated point; defaults to the gradient norm.
    fn residual(&self, _x: &CMat, gradient: &CMat, _state: &Self::State) -> f64 {
        gradient.norm()
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub memory: usize,
    pub armijo: f64,
    pub min_step: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 500, memory: 8, armijo: 1e-4, min_step: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct Minimum<S> {
    pub x: CMat,
    pub value: f64,
    pub gradient: CMat,
    pub state: S,
    pub residual: f64,
    pub trace: Trace,
}

/// Slack allowed in the sufficient-decrease test, relative to `max(1, |f|)`.
pub const DECREASE_SLACK: f64 = 1e-12;

pub fn minimize<O: Objective>(obj: &mut O, x0: &CMat, opts: &LbfgsOptions) -> Result<Minimum<O::State>> {
    let mut x = x0.clone();
    let (mut f, mut g, mut state) = obj.evaluate(&x, None)?;
    let mut residual = obj.residual(&x, &g, &state);
    let mut trace = Trace { values: vec![f], residuals: vec![residual], iterations: 0 };
    let mut history: Vec<(CMat, CMat, f64)> = Vec::new();

    for iter in 0..opts.max_iterations {
        if residual < opts.tolerance {
            trace.iterations = iter;
            return Ok(Minimum { x, value: f, gradient: g, state, residual, trace });
        }

        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let alpha = rho * re_inner(s, &q);
            q -= y * crate::C64::new(alpha, 0.0);
            alphas.push(alpha);
        }
        let mut r = obj.project(&x, &obj.precondition(&x, &q, &state));
        if let Some((s, y, _)) = history.last() {
            // scale the preconditioner by the latest curvature estimate
            let hy = obj.project(&x, &obj.precondition(&x, y, &state));
            let scale = re_inner(s, y) / re_inner(y, &hy);
            if scale.is_finite() && scale > 0.0 {
                r *= crate::C64::new(scale, 0.0);
            }
        }
        for ((s, y, rho), alpha) in history.iter().zip(alphas.iter().rev()) {
            let beta = rho * re_inner(y, &r);
            r += s * crate::C64::new(alpha - beta, 0.0);
        }
        let mut d = -obj.project(&x, &r);
        let mut slope = re_inner(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = -obj.project(&x, &obj.precondition(&x, &g, &state));
            slope = re_inner(&g, &d);
        }

        // backtracking Armijo search
        let mut t = 1.0;
        let slack = DECREASE_SLACK * f.abs().max(1.0);
        let accepted = loop {
            if t < opts.min_step {
                break None;
            }
            let trial = obj.retract(&x, &(&d * crate::C64::new(t, 0.0)))?;
            match obj.evaluate(&trial, Some(&state)) {
                Ok((ft, gt, st)) => {
                    if ft <= f + opts.armijo * t * slope + slack && obj.admissible(&trial, &st)? {
                        break Some((trial, ft, gt, st));
                    }
                }
                Err(Error::NoConvergence { .. }) | Err(Error::DegenerateGram { .. }) => {}
                Err(e) => return Err(e),
            }
            t *= 0.5;
        };
        let Some((xn, fn_, gn, sn)) = accepted else {
            if history.is_empty() {
                return Err(Error::LineSearchStall { step: t });
            }
            history.clear();
            continue;
        };

        let s = obj.project(&xn, &(&d * crate::C64::new(t, 0.0)));
        let y = &gn - obj.project(&xn, &g);
        let sy = re_inner(&s, &y);
        let mut transported: Vec<(CMat, CMat, f64)> = history
            .iter()
            .map(|(s, y, _)| {
                let (s, y) = (obj.project(&xn, s), obj.project(&xn, y));
                let sy = re_inner(&s, &y);
                (s, y, 1.0 / sy)
            })
            .filter(|(_, _, rho)| rho.is_finite() && *rho > 0.0)
            .collect();
        if sy > 1e-14 * s.norm() * y.norm() {
            transported.push((s, y, 1.0 / sy));
        }
        if transported.len() > opts.memory {
            transported.remove(0);
        }
        history = transported;

        x = xn;
        f = fn_;
        g = gn;
        state = sn;
        residual = obj.residual(&x, &g, &state);
        trace.values.push(f);
        trace.residuals.push(residual);
    }
    if residual < opts.tolerance {
        trace.iterations = opts.max_iterations;
        return Ok(Minimum { x, value: f, gradient: g, state, residual, trace });
    }
    Err(Error::NoConvergence { what: "outer minimization", iterations: opts.max_iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::normalize_g;
    use crate::linalg::{hermitian_eigen, hermitian_part, random_normal_c64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brockett-type trace minimization `tr(XᴴAX)`; minimum is the sum of the lowest eigenvalues.
    struct Trace(CMat);

    impl Objective for Trace {
        type State = ();
        fn evaluate(&mut self, x: &CMat, _: Option<&()>) -> Result<(f64, CMat, ())> {
            let ax = &self.0 * x;
            let f = re_inner(x, &ax);
            let g = (&ax - x * (x.adjoint() * &ax)) * crate::C64::new(2.0, 0.0);
            Ok((f, g, ()))
        }
        fn project(&self, x: &CMat, v: &CMat) -> CMat {
            v - x * (x.adjoint() * v)
        }
        fn precondition(&self, _: &CMat, v: &CMat, _: &()) -> CMat {
            v * crate::C64::new(0.1, 0.0)
        }
        fn retract(&self, x: &CMat, v: &CMat) -> Result<CMat> {
            normalize_g(&(x + v))
        }
    }

    #[test]
    fn finds_lowest_invariant_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = CMat::from_fn(12, 12, |_, _| random_normal_c64(&mut rng));
        let a = hermitian_part(&b);
        let x0 = normalize_g(&CMat::from_fn(12, 3, |_, _| random_normal_c64(&mut rng))).unwrap();
        let (vals, _) = hermitian_eigen(&a);
        let mut obj = Trace(a);
        let min = minimize(&mut obj, &x0, &LbfgsOptions { tolerance: 1e-10, ..Default::default() }).unwrap();
        let expected: f64 = vals[..3].iter().sum();
        assert!((min.value - expected).abs() < 1e-10);
        assert!(min.trace.values.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}
