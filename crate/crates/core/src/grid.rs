//! Real-space product grid.
//!
//! Orbitals with `n` modes per axis have pairwise products whose frequencies
//! lie in `{−(n−1)..(n−1)}`. A grid of `M = 2n − 1` points per axis represents
//! these exactly, so pair densities, their Coulomb potentials and the
//! projection of `v·ψ` back onto the orbital modes are all alias-free: the
//! resulting matrices are the exact Galerkin matrices of the basis.

use crate::basis::BasisDescriptor;
use crate::C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Complex scalar field sampled on the product grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub values: Vec<C64>,
}

#[derive(Clone)]
pub struct ProductGrid {
    points: usize,
    volume: f64,
    /// flat grid index of each basis mode's frequency
    mode_slots: Vec<usize>,
    /// `4π/|q|² / M³` per grid slot, zero at `q = 0`
    kernel: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ProductGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProductGrid").field("points", &self.points).finish()
    }
}

impl ProductGrid {
    pub fn new(basis: &BasisDescriptor) -> Self {
        let n = basis.modes_per_axis();
        let points = 2 * n - 1;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let slot = |f: i64| f.rem_euclid(points as i64) as usize;
        let mode_slots = (0..basis.mode_count())
            .map(|mode| {
                let f = basis.frequency(mode);
                (slot(f[0]) * points + slot(f[1])) * points + slot(f[2])
            })
            .collect();
        let unit = 2.0 * PI / basis.box_length();
        let total = points * points * points;
        let mut kernel = vec![0.0; total];
        for (idx, k) in kernel.iter_mut().enumerate() {
            let q = Self::slot_frequency(points, idx);
            let q2 = unit * unit * ((q[0] * q[0] + q[1] * q[1] + q[2] * q[2]) as f64);
            if q2 > 0.0 {
                *k = 4.0 * PI / q2 / total as f64;
            }
        }
        Self {
            points,
            volume: basis.volume(),
            mode_slots,
            kernel,
            forward,
            inverse,
        }
    }

    /// Integer frequency represented by a flat grid slot.
    pub fn slot_frequency(points: usize, idx: usize) -> [i64; 3] {
        let half = (points as i64 - 1) / 2;
        let wrap = |j: usize| {
            let j = j as i64;
            if j <= half {
                j
            } else {
                j - points as i64
            }
        };
        [wrap(idx / (points * points)), wrap((idx / points) % points), wrap(idx % points)]
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points * self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `V / M³`.
    pub fn weight(&self) -> f64 {
        self.volume / self.len() as f64
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    fn fft3(&self, data: &mut [C64], inverse: bool) {
        let m = self.points;
        let plan = if inverse { &self.inverse } else { &self.forward };
        // fastest axis: contiguous rows
        plan.process(data);
        let mut line = vec![C64::new(0.0, 0.0); m];
        // middle axis
        for a in 0..m {
            for c in 0..m {
                for b in 0..m {
                    line[b] = data[(a * m + b) * m + c];
                }
                plan.process(&mut line);
                for b in 0..m {
                    data[(a * m + b) * m + c] = line[b];
                }
            }
        }
        // slowest axis
        for b in 0..m {
            for c in 0..m {
                for a in 0..m {
                    line[a] = data[(a * m + b) * m + c];
                }
                plan.process(&mut line);
                for a in 0..m {
                    data[(a * m + b) * m + c] = line[a];
                }
            }
        }
    }

    /// Values on the grid of component `s` of a coefficient vector with `ncomp` components.
    pub fn to_real(&self, coeffs: &[C64], ncomp: usize, s: usize) -> Vec<C64> {
        let mut data = vec![C64::new(0.0, 0.0); self.len()];
        let scale = 1.0 / self.volume.sqrt();
        for (mode, &slot) in self.mode_slots.iter().enumerate() {
            data[slot] = coeffs[mode * ncomp + s] * scale;
        }
        self.fft3(&mut data, true);
        data
    }

    /// Project grid values onto the basis modes and accumulate into component `s`.
    pub fn add_from_real(&self, values: &[C64], ncomp: usize, s: usize, out: &mut [C64]) {
        let mut data = values.to_vec();
        self.fft3(&mut data, false);
        let scale = self.volume.sqrt() / self.len() as f64;
        for (mode, &slot) in self.mode_slots.iter().enumerate() {
            out[mode * ncomp + s] += data[slot] * scale;
        }
    }

    /// Periodic Coulomb potential `ρ ⋆ 1/|x|` with the `k = 0` coefficient removed.
    pub fn coulomb(&self, rho: &[C64]) -> Vec<C64> {
        self.coulomb_scaled(rho, 1.0)
    }

    pub(crate) fn coulomb_scaled(&self, rho: &[C64], scale: f64) -> Vec<C64> {
        let mut data = rho.to_vec();
        self.fft3(&mut data, false);
        for (x, k) in data.iter_mut().zip(&self.kernel) {
            *x *= k * scale;
        }
        self.fft3(&mut data, true);
        data
    }

    /// Grid field with the given Fourier coefficients per frequency, i.e.
    /// `(1/V) Σ_q f(q) e^{iq·x}` over all grid frequencies.
    pub fn synthesize(&self, coefficient: impl Fn([i64; 3]) -> C64) -> Vec<C64> {
        let mut data: Vec<C64> = (0..self.len())
            .map(|idx| coefficient(Self::slot_frequency(self.points, idx)) / self.volume)
            .collect();
        self.fft3(&mut data, true);
        data
    }

    /// `∫ f` by grid quadrature.
    pub fn integrate(&self, values: &[C64]) -> C64 {
        values.iter().sum::<C64>() * self.weight()
    }

    /// `∫ f·g` by grid quadrature (no conjugation).
    pub fn integrate_product(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).map(|(a, b)| a * b).sum::<C64>() * self.weight()
    }
}

impl ScalarField {
    pub fn integral(&self, grid: &ProductGrid) -> C64 {
        grid.integrate(&self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let b = BasisDescriptor::new(3.0, 1, 1.0).unwrap();
        let g = ProductGrid::new(&b);
        assert_eq!(g.points_per_axis(), 5);
        let coeffs: Vec<C64> = (0..b.mode_count() * 2).map(|i| C64::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut back = vec![C64::new(0.0, 0.0); coeffs.len()];
        for s in 0..2 {
            let r = g.to_real(&coeffs, 2, s);
            g.add_from_real(&r, 2, s, &mut back);
        }
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn slot_frequencies_are_symmetric() {
        assert_eq!(ProductGrid::slot_frequency(5, 0), [0, 0, 0]);
        assert_eq!(ProductGrid::slot_frequency(5, 4), [0, 0, -1]);
        assert_eq!(ProductGrid::slot_frequency(5, 2 * 25), [2, 0, 0]);
    }
}
