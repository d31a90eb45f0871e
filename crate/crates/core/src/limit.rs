//! Light-speed sweeps and nonrelativistic-limit diagnostics.

use crate::basis::{embed_upper, pauli_gradient_columns, project_columns, split_components, BasisDescriptor, Spectral};
use crate::coulomb::{Hamiltonian, Model, NuclearConfiguration};
use crate::energy::normalize_g;
use crate::linalg::spectral_radius;
use crate::mchf::{nested_minima, MchfConfig, MchfResult};
use crate::solver::{certify_solution, outer_minimize, Certificate, SolverConfig, SolverReport, SplitState, Tolerances};
use crate::{CMat, Error, Result, C64};
use serde::{Deserialize, Serialize};

/// Everything that defines a run except the light speed.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub box_length: f64,
    pub modes_per_axis: usize,
    pub nuclei: NuclearConfiguration,
    pub electrons: usize,
    pub orbitals: usize,
}

impl Problem {
    pub fn basis(&self, light_speed: f64) -> Result<BasisDescriptor> {
        BasisDescriptor::with_modes_per_axis(self.box_length, self.modes_per_axis, light_speed)
    }

    pub fn hamiltonian(&self, light_speed: f64, model: Model) -> Result<Hamiltonian> {
        Ok(Hamiltonian::new(&self.basis(light_speed)?, &self.nuclei, model))
    }

    /// MCHF minimizer for `K = orbitals`, reached through the nested chain `K = N, …, orbitals`.
    pub fn reference<R: rand::Rng>(&self, cfg: &MchfConfig, rng: &mut R) -> Result<MchfResult> {
        // the light speed plays no role in the nonrelativistic operator
        let ham = self.hamiltonian(1.0, Model::Schrodinger)?;
        let ks: Vec<usize> = (self.electrons..=self.orbitals).collect();
        let mut chain = nested_minima(&ham, self.electrons, &ks, cfg, rng)?;
        Ok(chain.pop().expect("nonempty chain"))
    }
}

/// MCDF starting point built from MCHF orbitals: `Ψ⁺ = g(P⁺(Φ, 0))`.
pub fn seed_from_mchf(ham: &Hamiltonian, reference: &MchfResult) -> Result<SplitState> {
    SplitState::from_orbitals(ham, reference.a.clone(), &embed_upper(&reference.phi))
}

/// Re-projects a state converged at another light speed onto the spectral split of `ham`.
pub fn transfer_state(ham: &Hamiltonian, state: &SplitState) -> Result<SplitState> {
    let full = normalize_g(&(&state.psi_plus + &state.psi_minus))?;
    let plus = normalize_g(&project_columns(ham.basis(), &full, Spectral::Positive))?;
    let minus = CMat::zeros(plus.nrows(), plus.ncols());
    SplitState::new(ham, state.a.clone(), plus, minus)
}

/// `‖X‖_{L²}` over all orbitals (Frobenius norm of the lower components).
pub fn small_component_norm(psi: &CMat) -> f64 {
    split_components(psi).1.norm()
}

/// `‖X − (1/2c) LΦ‖_{L²}` over all orbitals.
pub fn kinetic_balance_residual(basis: &BasisDescriptor, psi: &CMat) -> f64 {
    let (upper, lower) = split_components(psi);
    let predicted = pauli_gradient_columns(basis, &upper) * C64::new(0.5 / basis.light_speed(), 0.0);
    (lower - predicted).norm()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub c: f64,
    /// `E − Nc²`
    pub energy_shifted: f64,
    /// `E − Nc² − I^K`
    pub gap_to_ik: f64,
    pub small_component_norm: f64,
    pub kinetic_balance_residual: f64,
    /// spectral radius of `Λ − c²Γ`
    pub lambda_band: f64,
    pub min_occ: f64,
    pub certified: bool,
}

impl SweepRecord {
    pub fn from_report(report: &SolverReport, basis: &BasisDescriptor, reference_energy: f64, certified: bool) -> Self {
        Self {
            c: basis.light_speed(),
            energy_shifted: report.energy_shifted,
            gap_to_ik: report.energy_shifted - reference_energy,
            small_component_norm: small_component_norm(&report.psi_full),
            kinetic_balance_residual: kinetic_balance_residual(basis, &report.psi_full),
            lambda_band: spectral_radius(&report.lambda.lambda_shifted),
            min_occ: report.min_occ,
            certified,
        }
    }

    /// Record for a light speed whose solve failed; every measurement is NaN.
    pub fn failed(c: f64) -> Self {
        let nan = f64::NAN;
        Self { c, energy_shifted: nan, gap_to_ik: nan, small_component_norm: nan, kinetic_balance_residual: nan, lambda_band: nan, min_occ: nan, certified: false }
    }
}

/// One sweep point: the record plus whatever the solver produced.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub record: SweepRecord,
    pub report: Option<SolverReport>,
    pub certificate: Option<Certificate>,
    pub error: Option<String>,
}

/// MCDF solves for increasing `c`, each warm-started from the previous solution.
///
/// The first point starts from the MCHF reference. Failures produce a flagged
/// record and the next point restarts from the reference.
pub fn sweep_c(problem: &Problem, c_values: &[f64], cfg: &SolverConfig, reference: &MchfResult) -> Result<Vec<SweepPoint>> {
    if c_values.is_empty() || c_values.windows(2).any(|w| !(w[1] > w[0])) || c_values[0] <= 0.0 {
        return Err(Error::config("problem.light_speeds", "light speeds must be positive and strictly increasing"));
    }
    let mut out = Vec::with_capacity(c_values.len());
    let mut previous: Option<SplitState> = None;
    for &c in c_values {
        let ham = problem.hamiltonian(c, Model::Dirac)?;
        let start = match &previous {
            Some(state) => transfer_state(&ham, state),
            None => seed_from_mchf(&ham, reference),
        };
        let attempt = start.and_then(|s| outer_minimize(&ham, &s, cfg));
        match attempt {
            Ok(report) => {
                let cert = certify_solution(&ham, &report, &Tolerances::from_config(cfg), cfg.window_constant);
                let record = SweepRecord::from_report(&report, ham.basis(), reference.energy, cert.passed);
                previous = Some(report.state.clone());
                out.push(SweepPoint { record, report: Some(report), certificate: Some(cert), error: None });
            }
            Err(e) => {
                previous = None;
                out.push(SweepPoint { record: SweepRecord::failed(c), report: None, certificate: None, error: Some(e.to_string()) });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub gamma: f64,
    /// `min_occ − γ` per record
    pub margins: Vec<f64>,
    /// whether `min_occ > γ` at the largest light speeds (upper half of the sweep)
    pub persistent: bool,
}

pub fn occupation_persistence(records: &[SweepRecord], gamma: f64) -> Result<PersistenceReport> {
    if records.is_empty() {
        return Err(Error::config("sweep", "empty sweep"));
    }
    let margins: Vec<f64> = records.iter().map(|r| r.min_occ - gamma).collect();
    let tail = &margins[margins.len() / 2..];
    Ok(PersistenceReport { gamma, persistent: tail.iter().all(|m| *m > crate::solver::OCCUPATION_MARGIN), margins })
}

/// Least-squares slope of `log y` against `log x`; NaN with fewer than two usable points.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0 && b.is_finite()).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `max/min` of a list of positive values (∞ if any is nonpositive or missing).
pub fn band_ratio(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) {
        return f64::INFINITY;
    }
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// Fitted decay diagnostics of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: usize,
    pub certified: usize,
    /// slope of `|E − Nc² − I^K|` against `c`
    pub gap_slope: f64,
    /// slope of `‖X‖` (expected −1)
    pub small_component_slope: f64,
    /// slope of the kinetic-balance residual (expected −3)
    pub kinetic_balance_slope: f64,
    pub small_component_slope_ok: bool,
    pub kinetic_balance_slope_ok: bool,
    /// `max/min` of `c‖X‖`
    pub scaled_small_component_band: f64,
    /// `max/min` of `c³‖X − LΦ/2c‖`
    pub scaled_kinetic_balance_band: f64,
    /// largest `lambda_band` divided by its value at the first light speed
    pub lambda_band_growth: f64,
    pub gap_strictly_decreasing: bool,
    /// `E − Nc² − I^K` monotone after the first two points
    pub gap_monotone_tail: bool,
}

/// Tolerance on fitted log-log slopes.
pub const SLOPE_TOLERANCE: f64 = 0.5;

pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let cs: Vec<f64> = records.iter().map(|r| r.c).collect();
    let gaps: Vec<f64> = records.iter().map(|r| r.gap_to_ik.abs()).collect();
    let xs: Vec<f64> = records.iter().map(|r| r.small_component_norm).collect();
    let kb: Vec<f64> = records.iter().map(|r| r.kinetic_balance_residual).collect();
    let small_component_slope = log_log_slope(&cs, &xs);
    let kinetic_balance_slope = log_log_slope(&cs, &kb);
    let scaled_x: Vec<f64> = records.iter().map(|r| r.c * r.small_component_norm).collect();
    let scaled_kb: Vec<f64> = records.iter().map(|r| r.c.powi(3) * r.kinetic_balance_residual).collect();
    let lambda_band_growth = match records.first() {
        Some(first) if first.lambda_band > 0.0 => records.iter().map(|r| r.lambda_band).fold(f64::MIN, f64::max) / first.lambda_band,
        _ => f64::INFINITY,
    };
    let signed: Vec<f64> = records.iter().map(|r| r.gap_to_ik).collect();
    let tail = if signed.len() > 2 { &signed[1..] } else { &signed[..] };
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]) || v.windows(2).all(|w| w[1] <= w[0]);
    SweepSummary {
        points: records.len(),
        certified: records.iter().filter(|r| r.certified).count(),
        gap_slope: log_log_slope(&cs, &gaps),
        small_component_slope,
        kinetic_balance_slope,
        small_component_slope_ok: (small_component_slope + 1.0).abs() <= SLOPE_TOLERANCE,
        kinetic_balance_slope_ok: (kinetic_balance_slope + 3.0).abs() <= SLOPE_TOLERANCE,
        scaled_small_component_band: band_ratio(&scaled_x),
        scaled_kinetic_balance_band: band_ratio(&scaled_kb),
        lambda_band_growth,
        gap_strictly_decreasing: gaps.iter().all(|g| g.is_finite()) && gaps.windows(2).all(|w| w[1] < w[0]),
        gap_monotone_tail: signed.iter().all(|g| g.is_finite()) && monotone(tail),
    }
}
